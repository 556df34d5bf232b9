"""Roots of elementary maps that are not time-1 maps of flows.

F(z, w) = (beta^mu (z + w^mu q(w^r)), beta w) with beta of exact order r.
Polynomial roots of every order lr+1 exist by rescaling the inner term,
nonpolynomial roots exist too, and any triangular root
(a^mu z + h(w), a w) is conjugated to a polynomial one by (z + f(w), w)
where f solves f(aw) - a^mu f(w) = h2(w).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .poly import BiPoly, PolyMap2, UniPoly, compose_all, iterate
from .scalars import ExactScalar, as_exact, div, is_zero, multiplicative_order, simplify


class ResonanceError(ValueError):
    def __init__(self, exponent: int):
        super().__init__(f"resonant exponent j = {exponent}: a^{exponent} = a^mu, no coefficient solves it")
        self.exponent = exponent


class ConstraintViolation(ValueError):
    pass


class VerificationError(RuntimeError):
    pass


def _w_poly(p: UniPoly) -> UniPoly:
    return p if p.var == "w" else UniPoly(p.coeffs, "w")


@dataclass(frozen=True, eq=False)
class ElementaryNonFlow:
    r: int
    mu: int
    q: UniPoly
    beta: object

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.q.degree < 1:
            raise ValueError("q must have degree k >= 1")
        if not self.q.is_monic():
            raise ValueError("q must be monic")
        order = multiplicative_order(as_exact(self.beta))
        if order != self.r:
            raise ValueError(f"beta must have exact multiplicative order r = {self.r}, got {order}")

    @property
    def k(self) -> int:
        return self.q.degree

    @property
    def threshold(self) -> int:
        return self.mu + self.k * self.r

    def core(self) -> UniPoly:
        """w^mu q(w^r)."""
        coeffs = [0] * (self.mu + self.k * self.r + 1)
        for j, c in self.q.items():
            coeffs[self.mu + j * self.r] = c
        return UniPoly(coeffs, "w")

    def as_map(self) -> PolyMap2:
        bm = self.beta**self.mu
        return PolyMap2((BiPoly.z() + self.core().to_bipoly()) * bm, BiPoly.w() * self.beta)

    def __str__(self):
        return f"elem_nonflow(r={self.r}, mu={self.mu}, q={UniPoly(self.q.coeffs, 't')}, beta={self.beta})"


@dataclass(frozen=True, eq=False)
class TriangularMap:
    """(c z + h(w), a w + b); b is kept only so that b != 0 can be rejected."""

    c: object
    h: UniPoly
    a: object
    b: object = 0

    def __post_init__(self):
        if is_zero(self.c) or is_zero(self.a):
            raise ValueError("c and a must be nonzero")
        object.__setattr__(self, "h", _w_poly(self.h))

    def as_map(self) -> PolyMap2:
        return PolyMap2(BiPoly.z() * self.c + self.h.to_bipoly(), BiPoly.w() * self.a + self.b)

    @classmethod
    def from_map(cls, m: PolyMap2) -> "TriangularMap":
        f, g = m.first, m.second
        if any(i > 1 or (i == 1 and j > 0) for i, j in f.terms) or g.degree_in("z") or g.degree > 1:
            raise ValueError(f"{m} is not of the form (c z + h(w), a w + b)")
        h = UniPoly([f.coeff(0, j) for j in range(f.degree_in("w") + 1)], "w")
        return cls(f.coeff(1, 0), h, g.coeff(0, 1), g.coeff(0, 0))


def construct_root(F: ElementaryNonFlow, l: int) -> PolyMap2:
    """An (lr+1)-st root: the inner term w^mu q(w^r) divided by lr+1."""
    if l < 1:
        raise ValueError("l must be >= 1")
    m = l * F.r + 1
    bm = F.beta**F.mu
    g = PolyMap2((BiPoly.z() + F.core().to_bipoly() / m) * bm, BiPoly.w() * F.beta)
    if iterate(g, m) != F.as_map():
        raise VerificationError(f"constructed map is not a {m}-th root; this is a bug")
    return g


def construct_root_triangular(F: ElementaryNonFlow, l: int) -> TriangularMap:
    return TriangularMap.from_map(construct_root(F, l))


def nonpolynomial_root_example(k_trunc: UniPoly) -> tuple[PolyMap2, PolyMap2]:
    """(phi, F) with phi = (i(z + w(w^4+1)/2 + w^3 k(w^4)), i w), F = (-(z + w(w^4+1)), -w).

    k_trunc stands in for an entire k; the k-terms cancel in phi o phi
    monomial by monomial, so phi^2 = F for every truncation.
    """
    i = ExactScalar._raw((Fraction(0), Fraction(1)), 4)
    z, w = BiPoly.z(), BiPoly.w()
    w4 = w**4
    kk = BiPoly()
    for j, c in _w_poly(k_trunc).items():
        kk = kk + w ** (3 + 4 * j) * c
    inner = w * (w4 + 1) / 2
    phi = PolyMap2((z + inner + kk) * i, w * i)
    target = PolyMap2(-(z + w * (w4 + 1)), -w)
    return phi, target


def twisted_sum(h: UniPoly, a, mu: int, terms: int) -> UniPoly:
    """sum_{j < terms} (a^mu)^(-j) h(a^j w)."""
    h = _w_poly(h)
    am = a**mu
    acc = UniPoly([0], "w")
    aj, amj = 1, 1  # a^j and (a^mu)^j
    for _ in range(terms):
        acc = acc + h.scale_var(aj) / amj
        aj, amj = aj * a, amj * am
    return acc


def twisted_sum_check(phi: TriangularMap, F: ElementaryNonFlow, n: int) -> bool:
    """The identity phi^{rn} = F^r forces on the first coordinate.

    Sum_{j < rn} (a^mu)^(-j) h(a^j w) must equal a^mu r w^mu q(w^r); the
    factor a^mu comes from peeling the outermost a^mu z term.
    """
    lhs = twisted_sum(phi.h, phi.a, F.mu, F.r * n)
    rhs = F.core() * (F.r * phi.a**F.mu)
    return lhs == rhs


def split_h(phi: TriangularMap, F: ElementaryNonFlow) -> tuple[UniPoly, UniPoly]:
    """h = h1 + h2 with h2 holding exponents strictly above mu + k r."""
    t = F.threshold
    h = phi.h
    h1 = UniPoly([c if j <= t else 0 for j, c in enumerate(h.coeffs)], "w")
    h2 = UniPoly([c if j > t else 0 for j, c in enumerate(h.coeffs)], "w")
    return h1, h2


def solve_cohomological(h2: UniPoly, a, mu: int) -> UniPoly:
    """f with f(a w) - a^mu f(w) = h2(w), free of kernel monomials."""
    h2 = _w_poly(h2)
    am = a**mu
    coeffs = [0] * (h2.degree + 1 if not h2.is_zero() else 1)
    for j, c in h2.items():
        d = a**j - am
        if is_zero(d):
            raise ResonanceError(j)
        coeffs[j] = simplify(div(c, d))
    return UniPoly(coeffs, "w")


def conjugate_to_polynomial(phi: TriangularMap, F: ElementaryNonFlow, n: int) -> tuple[PolyMap2, PolyMap2]:
    """(psi, psi^-1 o phi o psi) with psi = (z + f(w), w).

    Checks psi^-1 o phi^n o psi == F exactly before returning.
    """
    if not is_zero(phi.b):
        raise ConstraintViolation("b must vanish: b(a^n - 1)/(a - 1) = 0 forces b = 0")
    if not phi.c == phi.a**F.mu:
        raise ConstraintViolation(f"c = {phi.c} differs from a^mu = {phi.a ** F.mu}")
    if not phi.a**n == F.beta:
        raise ConstraintViolation(f"a^n = {phi.a ** n} differs from beta = {F.beta}")
    _, h2 = split_h(phi, F)
    f = solve_cohomological(h2, phi.a, F.mu).to_bipoly()
    z, w = BiPoly.z(), BiPoly.w()
    psi = PolyMap2(z + f, w)
    psi_inv = PolyMap2(z - f, w)
    m = phi.as_map()
    conj = compose_all([psi_inv, m, psi])
    if compose_all([psi_inv, iterate(m, n), psi]) != F.as_map():
        raise VerificationError("psi^-1 o phi^n o psi differs from F")
    return psi, conj


def perturb_by_coboundary(phi: TriangularMap, f0: UniPoly) -> TriangularMap:
    """psi o phi o psi^-1 for psi = (z + f0(w), w): h gains f0(a w) - c f0(w)."""
    f0 = _w_poly(f0)
    cob = f0.scale_var(phi.a) - f0 * phi.c
    return TriangularMap(phi.c, phi.h + cob, phi.a, phi.b)

