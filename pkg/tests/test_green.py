import math

import numpy as np
import pytest

from henonroots.green import (
    BOUNDED,
    ESCAPED,
    GreenParams,
    GridSlice,
    InsufficientSamples,
    check_bounds_lemma,
    classify_orbits,
    emit_grid,
    eval_map,
    fit_multiplier,
    green_batch,
    green_minus,
    green_plus,
    in_kminus,
    in_kplus,
    write_csv,
    write_pgm,
)
from henonroots.henon import HenonComposition
from henonroots.poly import BiPoly, PolyMap2, UniPoly, compose, iterate
from henonroots.scalars import primitive_root

z, w = BiPoly.z(), BiPoly.w()
SQ = UniPoly([0, 0, 1])
HEN = HenonComposition.single(SQ, 1)  # (w, w^2 - z)
F = PolyMap2(w, z + w**2)
FH = HenonComposition.single(SQ, -1)  # the same map as a Hénon factor
H2 = FH.power(2)


def integer_orbit_green(z0: int, w0: int, steps: int) -> float:
    """d^-n log max(|z_n|, |w_n|) along an exact integer orbit of (w, w^2 - z)."""
    for _ in range(steps):
        z0, w0 = w0, w0 * w0 - z0
    return math.log(max(abs(z0), abs(w0))) / 2**steps


def test_fixed_point_is_bounded():
    for pt in [(0, 0), (2, 2)]:
        est = green_plus(pt, HEN)
        assert est.value == 0.0 and est.classification == BOUNDED
        assert in_kplus(pt, HEN) == BOUNDED


def test_green_at_large_w():
    est = green_plus((0, 1e6), HEN)
    assert est.classification == ESCAPED and est.converged
    assert abs(est.value - math.log(1e6)) < 0.01
    assert est.value == pytest.approx(integer_orbit_green(0, 10**6, 12), abs=1e-9)


def test_green_matches_integer_orbits():
    for z0, w0 in [(3, 5), (-7, 11), (100, -40), (2, 3)]:
        est = green_plus((z0, w0), HEN)
        assert est.value == pytest.approx(integer_orbit_green(z0, w0, 14), abs=1e-9)


def test_escape_classification():
    assert in_kplus((0, 10), HEN) == ESCAPED
    R = GreenParams().radius(HEN)
    for pt in [(2 * R, R), (5 * R, 1j), (-3 * R, 0)]:
        assert in_kminus(pt, HEN) == ESCAPED


def test_functional_equation_forward_and_backward():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(300, 2)) * 3 + 1j * rng.normal(size=(300, 2)) * 3
    hz, hw = eval_map(HEN.as_map(), pts[:, 0], pts[:, 1])
    g0 = green_batch(pts, HEN)
    g1 = green_batch(np.stack([hz, hw], 1), HEN)
    esc = g0.escaped & g1.escaped
    assert esc.sum() > 100
    assert np.all(np.abs(g1.values[esc] - 2 * g0.values[esc]) < 1e-6 * (1 + g0.values[esc]))
    b0 = green_batch(pts, HEN, backward=True)
    b1 = green_batch(np.stack([hz, hw], 1), HEN, backward=True)
    esc = b0.escaped & b1.escaped
    assert esc.sum() > 100
    assert np.all(np.abs(b1.values[esc] - b0.values[esc] / 2) < 1e-6 * (1 + b0.values[esc]))


def test_zero_exactly_on_bounded_and_positive_on_escaped():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2, 2, size=(500, 2)) + 1j * rng.uniform(-2, 2, size=(500, 2))
    for back in (False, True):
        b = green_batch(pts, HEN, backward=back)
        assert np.all(b.values[~b.escaped] == 0.0)
        assert np.all(b.values[b.escaped] > 0.0)
        assert np.all(b.values >= 0.0)


def test_monotone_filtration():
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1.5, 1.5, size=(400, 2)) + 1j * rng.uniform(-1.5, 1.5, size=(400, 2))
    h = HenonComposition.single(UniPoly([-0.3, 0, 1]), 0.6)
    prev = None
    for it in (2, 5, 20, 100):
        esc = green_batch(pts, h, GreenParams(max_iter=it)).escaped
        if prev is not None:
            assert np.all(esc[prev])
        prev = esc


def test_overflow_guard_switches_to_log_mode():
    # a small guard forces the log update early; the value must not change
    a = green_plus((0.5, 50.0), HEN)
    b = green_plus((0.5, 50.0), HEN, GreenParams(overflow_guard=1e20))
    assert a.value == pytest.approx(b.value, abs=1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        GreenParams(R=1.0)
    with pytest.raises(ValueError):
        GreenParams(max_iter=0)


def test_check_bounds_lemma():
    rep = check_bounds_lemma(HEN, samples=100)
    assert math.isfinite(rep.c_plus) and math.isfinite(rep.c_minus)
    i4, i8 = rep.scales.index(1e4), rep.scales.index(1e8)
    assert rep.c_plus_by_scale[i8] <= 1.1 * rep.c_plus_by_scale[i4]
    assert rep.max_defect_plus < rep.c_plus + 1e-9
    assert rep.bounded_nonzero == 0


def test_fit_multiplier_examples():
    H = iterate(F, 2)
    fit = fit_multiplier(F, H2, 2)
    assert abs(fit.b - 2.0) < 1e-4 and abs(fit.b**2 - 4) < 1e-3
    fit1 = fit_multiplier(H, H2, 1)
    assert abs(fit1.b - 4.0) < 1e-6
    om = primitive_root(3)
    Fs = compose(F, PolyMap2(z * om**2, w * om))
    fit_s = fit_multiplier(Fs, H2, 2)
    assert abs(fit_s.b - 2.0) < 1e-4
    # the map form of the target works too
    assert abs(fit_multiplier(F, H, 2).b - 2.0) < 1e-4


def test_fit_multiplier_reports_insufficient_samples():
    with pytest.raises(InsufficientSamples):
        fit_multiplier(F, H2, 2, samples=3, min_escaping=5)


def test_classify_orbits_without_certificate():
    pts = np.array([[0, 0], [0, 10], [0.1, -0.1]], dtype=complex)
    out = classify_orbits(HEN.as_map(), pts)
    assert list(out[:2]) == [False, True]


def test_grid_single_cell_at_fixed_point():
    g = emit_grid(HEN, GridSlice(), (1, 1), what="green+")
    assert g.values.shape == (1, 1) and g.values[0, 0] == 0.0


def test_grid_masks_for_dissipative_map():
    # |det| = 1.1 > 1: K+ has measure zero while K- has interior
    h = HenonComposition.single(SQ, 1.1)
    slc = GridSlice.conjugate_diagonal()
    kplus = emit_grid(h, slc, (256, 256), what="kplus-mask")
    assert kplus.values.sum() == 0 and (kplus.values == 0).any()
    odd = emit_grid(h, slc, (255, 255), what="kplus-mask")
    assert odd.values.sum() >= 1  # the centre cell is the fixed point 0
    assert odd.values[127, 127] == 1
    kminus = emit_grid(h, slc, (256, 256), what="kminus-mask")
    assert kminus.values.sum() > 1000 and (kminus.values == 0).sum() > 1000


def test_grid_green_nonnegative_and_rows_top_down():
    g = emit_grid(HEN, GridSlice(yrange=(-3.0, 1.0)), (9, 7), what="green+")
    assert np.all(g.values >= 0)
    assert g.ys[0] == 1.0 and g.ys[-1] == -3.0


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        emit_grid(HEN, GridSlice(), (0, 3))
    with pytest.raises(ValueError):
        emit_grid(HEN, GridSlice(), (3, 3), what="julia")


def test_write_pgm_and_csv(tmp_path):
    g = emit_grid(HEN, GridSlice(), (4, 3), what="green+")
    p = tmp_path / "g.pgm"
    write_pgm(g, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "P2" and lines[1].startswith("# green+")
    assert lines[2] == "4 3" and lines[3] == "65535"
    assert len(lines) == 4 + 3
    pb = tmp_path / "g5.pgm"
    write_pgm(g, pb, binary=True)
    data = pb.read_bytes()
    magic, comment, dims, maxval, body = data.split(b"\n", 4)
    assert magic == b"P5" and dims == b"4 3" and maxval == b"65535"
    assert len(body) == 2 * 12
    c = tmp_path / "g.csv"
    write_csv(g, c)
    rows = c.read_text().splitlines()
    assert rows[0] == "x,y,value" and len(rows) == 13
    x, y, v = map(float, rows[1].split(","))
    assert (x, y) == (-2.0, 2.0) and v == g.values[0, 0]


def test_green_rejects_elementary_maps():
    with pytest.raises(ValueError):
        green_plus((1, 1), PolyMap2(z + w**2, w))


def test_high_degree_composition_converges():
    # G+ of h o h is G+ of h; a degree-81 step must not overflow before log mode starts
    h = HenonComposition.single(UniPoly([-0.25, 1, 0, 1]), -2)
    rng = np.random.default_rng(6)
    pts = np.exp(rng.uniform(0, 7, (200, 2))) * np.exp(2j * np.pi * rng.uniform(0, 1, (200, 2)))
    one = green_batch(pts, h)
    two = green_batch(pts, h.power(2).power(2))
    assert two.converged.all() and two.escaped.all()
    assert np.allclose(two.values, one.values, rtol=1e-9, atol=1e-9)
