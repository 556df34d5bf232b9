import random
from fractions import Fraction

import numpy as np
import pytest

from henonroots.henon import (
    HenonComposition,
    HenonFactor,
    NotMonicError,
    escape_radius,
    factor_radius,
)
from henonroots.poly import BiPoly, PolyMap2, UniPoly, compose, iterate

from conftest import random_henon

z, w = BiPoly.z(), BiPoly.w()
SQ = UniPoly([0, 0, 1])


def test_single_factor_map_and_inverse():
    f = HenonFactor(SQ, 1)
    assert f.as_map() == PolyMap2(w, w**2 - z)
    assert f.inverse_map() == PolyMap2(z**2 - w, z)


def test_two_factor_composition():
    h = HenonComposition([HenonFactor(SQ, 1)] * 2)
    g = w**2 - z
    assert h.as_map() == PolyMap2(g, g**2 - w)
    assert h.degree == 4


def test_degree():
    h = HenonComposition([HenonFactor(SQ, 1), HenonFactor(UniPoly([1, 0, 0, 1]), 2)])
    assert h.degree == 6
    F = PolyMap2(w, z + w**2)
    H = iterate(F, 2)
    assert H.degree == 4
    assert HenonComposition.single(SQ, -1).power(2).degree == 4


def test_factor_validation():
    with pytest.raises(NotMonicError):
        HenonFactor(UniPoly([0, 0, 2]), 1)
    with pytest.raises(ValueError):
        HenonFactor(UniPoly([0, 1]), 1)
    with pytest.raises(ValueError):
        HenonFactor(SQ, 0)


def test_inverse_round_trip_random():
    rng = random.Random(3)
    for _ in range(10):
        h = random_henon(rng)
        ident = PolyMap2.identity()
        assert compose(h.as_map(), h.inverse_map()) == ident
        assert compose(h.inverse_map(), h.as_map()) == ident
        m = h.as_map()
        assert m.degree == h.degree
        if len(h) >= 1:
            assert m.second.degree > m.first.degree


def test_escape_radius_formula():
    assert factor_radius([0, 0, 1], 1) == 3.0
    h = HenonComposition.single(SQ, 1)
    assert escape_radius(h) <= 3
    assert factor_radius([Fraction(1, 2), 0, 1], -2) == pytest.approx(5.5)


def test_monotone_escape_beyond_radius():
    rng = np.random.default_rng(5)
    prng = random.Random(5)
    for _ in range(5):
        h = random_henon(prng, n_factors=1)
        R = escape_radius(h)
        pc, a, _ = h.approx_factors()[0]
        p = np.polynomial.Polynomial(pc)
        n = 2000
        ang = rng.uniform(0, 2 * np.pi, (2, n))
        rad_w = R * (1 + rng.uniform(0, 3, n))
        rad_z = rad_w * rng.uniform(0, 1, n)
        zz, ww = rad_z * np.exp(1j * ang[0]), rad_w * np.exp(1j * ang[1])
        prev = np.maximum(abs(zz), abs(ww))
        for _ in range(4):
            zz, ww = ww, p(ww) - a * zz
            cur = np.maximum(abs(zz), abs(ww))
            assert np.all(cur > prev)
            prev = cur
