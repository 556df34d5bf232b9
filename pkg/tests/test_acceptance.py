"""One test per acceptance criterion, at the stated tolerances and time budgets."""

import json
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from henonroots.cli import main
from henonroots.elementary import (
    ResonanceError,
    TriangularMap,
    conjugate_to_polynomial,
    construct_root,
    construct_root_triangular,
    nonpolynomial_root_example,
    perturb_by_coboundary,
)
from henonroots.green import GreenParams, check_bounds_lemma, classify_orbits, eval_map, fit_multiplier, green_batch
from henonroots.henon import HenonComposition
from henonroots.poly import BiPoly, PolyMap2, UniPoly, compose, compose_all, map_from_record
from henonroots.roots import VERIFIED_EXACT, RootSearchConfig, find_roots, possible_root_orders, verify_root
from henonroots.scalars import primitive_root
from henonroots.words import decompose

from conftest import random_henon, random_nonflow, random_reduced_word

z, w = BiPoly.z(), BiPoly.w()
F = PolyMap2(w, z + w**2)
H = compose(F, F)
H_COMP = HenonComposition.single(UniPoly([0, 0, 1]), -1).power(2)  # the same H as Hénon factors
F5_MAP = PolyMap2(-(z + w * (w**4 + 1)), -w)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s, budget {self.seconds} s"


def fold(m, n):
    """n-fold composition by repeated left composition, independent of poly.iterate."""
    acc = PolyMap2.identity()
    for _ in range(n):
        acc = compose(m, acc)
    return acc


def inverse_of(m):
    word = decompose(m)
    return compose_all([g.inverse().to_map() for g in reversed(word.letters)])


def test_criterion_1_exactly_three_square_roots(capsys):
    with Budget(60):
        code = main(["find-roots", "(w, z + w^2)^2", "--order", "2", "--format", "json"])
        rep = json.loads(capsys.readouterr().out)
    assert code == 0
    roots = [map_from_record(r["map"]) for r in rep["roots"]]
    assert len(roots) == 3
    assert all(r["status"] == "verified-exact" for r in rep["roots"])
    for m in roots:
        assert compose(m, m) == H  # independent symbolic squaring
    om = primitive_root(3)
    family = [compose(F, PolyMap2(z * om ** (2 * j), w * om**j)) for j in range(3)]
    assert all(sum(m == f for m in roots) == 1 for f in family)


def test_criterion_2_root_orders_match_brute_arithmetic():
    limit = 10**6
    with Budget(1.0):
        brute = {}
        for n in range(2, limit.bit_length()):
            e = 2
            while e**n <= limit:
                brute.setdefault(e**n, set()).add(n)
                e += 1
        empty = set()
        bad = [d for d in range(1, limit + 1) if possible_root_orders(d) != brute.get(d, empty)]
    assert bad == []
    assert possible_root_orders(HenonComposition.single(UniPoly([0, 0, 1]), 1)) == set()
    six = HenonComposition.single(UniPoly([0, 0, 1]), 1) @ HenonComposition.single(UniPoly([0, 0, 0, 1]), 2)
    assert six.degree == 6 and possible_root_orders(six) == set()


def test_criterion_3_elementary_roots_of_order_lr_plus_1():
    rng = random.Random(31)
    failures = []
    with Budget(120):
        for _ in range(50):
            Fe = random_nonflow(rng, max_r=4, max_mu=3, max_k=3)
            l = rng.randint(1, 3)
            G = construct_root(Fe, l)
            if fold(G, l * Fe.r + 1) != Fe.as_map():
                failures.append((str(Fe), l))
    assert failures == []


def test_criterion_4_nonpolynomial_square_root():
    rng = random.Random(41)
    with Budget(30):
        for _ in range(50):
            deg = rng.randint(0, 10)
            k = UniPoly([Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(deg + 1)], "t")
            phi, target = nonpolynomial_root_example(k)
            assert target == F5_MAP
            assert compose(phi, phi) == F5_MAP


def test_criterion_5_conjugation_pipeline():
    rng = random.Random(51)
    with Budget(60):
        done = 0
        while done < 20:
            Fe = random_nonflow(rng, max_r=4, max_mu=3, max_k=3, min_r=2)
            l = rng.randint(1, 3)
            n = l * Fe.r + 1
            phi = construct_root_triangular(Fe, l)
            # exponents above the threshold that are not congruent to mu mod r are non-resonant for a = beta
            top = Fe.threshold
            exps = [j for j in range(top + 1, top + 2 * Fe.r + 2) if (j - Fe.mu) % Fe.r]
            f0 = UniPoly([0] * (top + 1) + [0] * (2 * Fe.r + 1))
            for j in rng.sample(exps, rng.randint(1, len(exps))):
                f0 = f0 + UniPoly.monomial(j, Fraction(rng.randint(1, 5), rng.randint(1, 3)))
            pert = perturb_by_coboundary(phi, f0)
            assert pert.h != phi.h
            psi, _ = conjugate_to_polynomial(pert, Fe, n)
            f = psi.first - z
            psi_inv = PolyMap2(z - f, w)
            assert compose_all([psi_inv, fold(pert.as_map(), n), psi]) == Fe.as_map()
            assert f == f0.to_bipoly()
            done += 1

            j = Fe.mu + (Fe.k + 1) * Fe.r  # a^j = a^mu
            bad = TriangularMap(phi.c, phi.h + UniPoly.monomial(j), phi.a)
            with pytest.raises(ResonanceError) as exc:
                conjugate_to_polynomial(bad, Fe, n)
            assert exc.value.exponent == j and str(j) in str(exc.value)


def test_criterion_6_word_round_trip():
    rng = random.Random(61)
    with Budget(120):
        assert len(decompose(PolyMap2.identity())) == 0
        lengths = []
        for _ in range(100):
            word = random_reduced_word(rng, max_len=6, max_deg=3)
            m = word.recompose()
            back = decompose(m)
            assert back.recompose() == m
            assert len(back) == len(word)
            lengths.append(len(word))
    assert max(lengths) == 6


def escaping_samples(h, rng, count, box=3.0):
    """Points whose forward orbits escape with a converged G+, together with their images under h."""
    hm = h.as_map()
    got_p, got_q = [], []
    while sum(len(p) for p in got_p) < count:
        pts = rng.uniform(-box, box, (2 * count, 2)) + 1j * rng.uniform(-box, box, (2 * count, 2))
        qz, qw = eval_map(hm, pts[:, 0], pts[:, 1])
        img = np.stack([qz, qw], 1)
        a, b = green_batch(pts, h), green_batch(img, h)
        ok = a.escaped & b.escaped & a.converged & b.converged
        got_p.append(pts[ok])
        got_q.append(img[ok])
    return np.concatenate(got_p)[:count], np.concatenate(got_q)[:count]


def test_criterion_7_functional_equations():
    rng = np.random.default_rng(71)
    prng = random.Random(71)
    with Budget(60):
        for _ in range(5):
            h = random_henon(prng, max_deg=3)
            d = h.degree
            p, q = escaping_samples(h, rng, 1000)
            g0 = green_batch(p, h).values
            g1 = green_batch(q, h).values
            assert np.all(np.abs(g1 - d * g0) < 1e-6 * (1 + g0))
            # h is an exactly verified square root of h o h
            assert verify_root(h.as_map(), 2, h.power(2)) == VERIFIED_EXACT
            fit = fit_multiplier(h.as_map(), h.power(2), 2)
            assert abs(fit.b**2 - d**2) < 1e-3

        roots = find_roots(H, 2, RootSearchConfig(newton_starts=40))
        assert len(roots) == 3
        for r in roots:
            assert r.status == VERIFIED_EXACT
            fit = fit_multiplier(r.map, H_COMP, 2)
            assert abs(fit.b**2 - 4) < 1e-3


def test_criterion_8_lemma_constants_stabilise():
    prng = random.Random(81)
    with Budget(60):
        maps = [HenonComposition.single(UniPoly([0, 0, 1]), 1), H_COMP] + [random_henon(prng) for _ in range(3)]
        for h in maps:
            rep = check_bounds_lemma(h, samples=200, seed=8)
            for by_scale in (rep.c_plus_by_scale, rep.c_minus_by_scale):
                window = [c for s, c in zip(rep.scales, by_scale) if 1e4 <= s <= 1e8]
                assert len(window) == 5
                assert (max(window) - min(window)) <= 0.1 * max(window)
            assert rep.bounded_nonzero == 0

            rng = np.random.default_rng(82)
            pts = rng.uniform(-1, 1, (2000, 2)) + 1j * rng.uniform(-1, 1, (2000, 2))
            for back in (False, True):
                b = green_batch(pts, h, backward=back)
                assert np.all(b.values[~b.escaped] == 0.0)


def test_criterion_9_k_sets_shared_with_roots():
    rng = np.random.default_rng(91)
    prm = GreenParams()
    with Budget(60):
        roots = [r.map for r in find_roots(H, 2, RootSearchConfig(newton_starts=40))]
        assert len(roots) == 3
        # the box straddles K: roughly a third of these points stay bounded
        pts = rng.uniform(-1.5, 1.5, (1000, 2)) + 1j * rng.uniform(-1.5, 1.5, (1000, 2))
        for backward in (False, True):
            ref = green_batch(pts, H_COMP, prm, backward=backward)
            for f in roots:
                g = inverse_of(f) if backward else f
                if backward:
                    assert compose(f, g) == PolyMap2.identity()
                root_esc = classify_orbits(g, pts.copy())
                agree = root_esc == ref.escaped
                assert agree.mean() >= 0.99
                shell = ref.values < 10 * prm.tol
                assert np.all(shell[~agree])
        assert 0 < (~ref.escaped).sum() < 1000
