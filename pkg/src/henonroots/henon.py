"""Generalized Hénon maps (z, w) -> (w, p(w) - a z) and their compositions."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

from .poly import DEGREE_CAP, BiPoly, PolyMap2, UniPoly, compose_all
from .scalars import approximate, format_scalar, is_zero

MONIC_TOL = 1e-12


class NotMonicError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HenonFactor:
    p: UniPoly
    a: object

    def __post_init__(self):
        if self.p.var != "w":
            object.__setattr__(self, "p", UniPoly(self.p.coeffs, "w"))
        if self.p.degree < 2:
            raise ValueError(f"p must have degree >= 2, got {self.p.degree}")
        if not self.p.is_monic(MONIC_TOL):
            raise NotMonicError(
                f"p = {self.p} is not monic; Hénon factors require a monic polynomial"
            )
        if is_zero(self.a):
            raise ValueError("a must be nonzero")

    @property
    def degree(self) -> int:
        return self.p.degree

    def as_map(self) -> PolyMap2:
        return PolyMap2(BiPoly.w(), self.p.to_bipoly() - BiPoly.z() * self.a)

    def inverse_map(self) -> PolyMap2:
        # (z, w) -> ((p(z) - w) / a, z)
        pz = UniPoly(self.p.coeffs, "z").to_bipoly()
        return PolyMap2((pz - BiPoly.w()) / self.a, BiPoly.z())

    def is_exact(self) -> bool:
        return self.as_map().is_exact()

    def __eq__(self, other):
        return isinstance(other, HenonFactor) and self.p == other.p and self.a == other.a

    __hash__ = None

    def __str__(self):
        return f"henon(p={self.p}, a={format_scalar(self.a)})"


class HenonComposition:
    """factors[0] o factors[1] o ... ; the last factor is applied first."""

    def __init__(self, factors: Sequence[HenonFactor]):
        factors = tuple(factors)
        if not factors:
            raise ValueError("a Hénon composition needs at least one factor")
        self.factors = factors
        self.degree = prod(f.degree for f in factors)

    @classmethod
    def single(cls, p, a) -> "HenonComposition":
        if not isinstance(p, UniPoly):
            p = UniPoly(p)
        return cls([HenonFactor(p, a)])

    def __matmul__(self, other: "HenonComposition") -> "HenonComposition":
        return HenonComposition(self.factors + other.factors)

    def power(self, n: int) -> "HenonComposition":
        if n < 1:
            raise ValueError("power must be >= 1")
        return HenonComposition(self.factors * n)

    def as_map(self, cap: int = DEGREE_CAP) -> PolyMap2:
        return as_map(self, cap)

    def inverse_map(self, cap: int = DEGREE_CAP) -> PolyMap2:
        return inverse_map(self, cap)

    def is_exact(self) -> bool:
        return all(f.is_exact() for f in self.factors)

    def approx_factors(self) -> list[tuple[list[complex], complex, int]]:
        """(p coefficients low->high, a, deg p) per factor, as complex numbers."""
        return [([approximate(c) for c in f.p.coeffs], approximate(f.a), f.degree) for f in self.factors]

    def __eq__(self, other):
        return isinstance(other, HenonComposition) and self.factors == other.factors

    __hash__ = None

    def __len__(self):
        return len(self.factors)

    def __str__(self):
        return " o ".join(str(f) for f in self.factors)

    __repr__ = __str__


def as_map(h: HenonComposition, cap: int = DEGREE_CAP) -> PolyMap2:
    return compose_all([f.as_map() for f in h.factors], cap)


def inverse_map(h: HenonComposition, cap: int = DEGREE_CAP) -> PolyMap2:
    return compose_all([f.inverse_map() for f in reversed(h.factors)], cap)


def degree(h: HenonComposition) -> int:
    return h.degree


def factor_radius(p_coeffs: Sequence[complex], a: complex) -> float:
    """Per-factor escape radius.

    With S the sum of |p_j| over all coefficients, |w| >= R >= |z| forces
    |p(w) - a z| >= 2|w| once R >= 1 + |a| + S, and |z| >= R >= |w| forces
    |(p(z) - w)/a| >= 2|z| once R >= 2|a| + S.
    """
    s = sum(abs(c) for c in p_coeffs)
    return max(2.0, 1.0 + abs(a) + s, 2.0 * abs(a) + s)


def escape_radius(h: HenonComposition) -> float:
    return max(factor_radius(pc, a) for pc, a, _ in h.approx_factors())


def make_factor(p, a) -> HenonFactor:
    return HenonFactor(p if isinstance(p, UniPoly) else UniPoly(p), a)

