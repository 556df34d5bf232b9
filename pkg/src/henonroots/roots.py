"""Compositional roots F with F^n = H for H a composition of Hénon maps.

Any root of H is again a composition of Hénon maps, so a root of order n
has integer degree e with e^n = deg H.  That arithmetic fact bounds the
admissible orders; the search itself matches coefficients of the ansatz
D o H_1 o ... o H_k (D diagonal linear, H_i monic Hénon factors) against H
by damped Gauss-Newton, then recognises the solution exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .henon import HenonComposition, HenonFactor
from .poly import (
    DEGREE_CAP,
    BiPoly,
    PolyMap2,
    UniPoly,
    compose,
    compose_all,
    iterate,
    map_to_record,
    maps_equal,
    max_coeff_diff,
)
from .scalars import (
    SnapError,
    approximate,
    conductor_of,
    div,
    exact_root,
    int_root,
    is_exact,
    primitive_root,
    snap_to_exact,
    to_record,
)

log = logging.getLogger(__name__)

MAX_HALVINGS = 30

VERIFIED_EXACT = "verified-exact"
VERIFIED_NUMERIC = "verified-numeric"
REFUTED = "refuted"


class OrderNotAdmissible(ValueError):
    pass


@dataclass
class RootSearchConfig:
    newton_starts: int = 200
    newton_tol: float = 1e-12
    max_newton_iters: int = 100
    snap_conductor: int = 24
    snap_tol: float = 1e-8
    dedup_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name in ("newton_starts", "newton_tol", "max_newton_iters", "snap_conductor", "snap_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class RootCandidate:
    map: PolyMap2
    order: int
    shape: tuple[int, ...]
    status: str
    residual: float = 0.0
    twist: tuple | None = None  # diagonal (sigma, rho) applied on the right or left
    factors: HenonComposition | None = None

    def to_record(self) -> dict:
        rec = {
            "order": self.order,
            "shape": list(self.shape),
            "status": self.status,
            "residual": self.residual,
            "map": map_to_record(self.map),
            "display": str(self.map),
        }
        if self.twist is not None:
            rec["twist"] = [to_record(t) for t in self.twist]
        return rec


class RootList(list):
    """Root candidates plus the search bookkeeping that produced them."""

    def __init__(self, items=(), **info):
        super().__init__(items)
        self.info = info


# ---------------------------------------------------------------------------
# admissible orders


def integer_root(d: int, n: int) -> int | None:
    """The integer e >= 0 with e**n == d, if any."""
    if d < 0 or n < 1:
        return None
    return int_root(d, n)


POWER_TABLE_LIMIT = 1 << 32


_POWERS: dict[int, frozenset[int]] = {}
_NO_ORDERS: frozenset[int] = frozenset()


def _power_table() -> dict[int, frozenset[int]]:
    """d -> orders n >= 2 with d an n-th power of an integer >= 2, for d <= POWER_TABLE_LIMIT."""
    if _POWERS:
        return _POWERS
    table: dict[int, list[int]] = {}
    e = 2
    while e * e <= POWER_TABLE_LIMIT:
        p, n = e * e, 2
        while p <= POWER_TABLE_LIMIT:
            table.setdefault(p, []).append(n)
            p, n = p * e, n + 1
        e += 1
    _POWERS.update((d, frozenset(ns)) for d, ns in table.items())
    return _POWERS


def possible_root_orders(h) -> frozenset[int]:
    """{n >= 2 : deg(h)^(1/n) is an integer >= 2}, as a read-only set."""
    d = h if type(h) is int else h.degree
    if d <= POWER_TABLE_LIMIT:
        return (_POWERS or _power_table()).get(d, _NO_ORDERS)
    out = set()
    n = 2
    while 2**n <= d:
        e = integer_root(d, n)
        if e is not None and e >= 2:
            out.add(n)
        n += 1
    return frozenset(out)


# ---------------------------------------------------------------------------
# verification


def _target_map(h) -> PolyMap2:
    return h.as_map() if isinstance(h, HenonComposition) else h


def verify_root(f: PolyMap2, n: int, h, tol: float | None = None, cap: int = DEGREE_CAP) -> str:
    if n < 1:
        raise ValueError("n must be >= 1")
    target = _target_map(h)
    # deg(f^n) <= deg(f)^n, with equality for Hénon-type f
    if max(f.degree, 1) ** n < target.degree:
        return REFUTED
    fn = iterate(f, n, cap)
    if tol is None and f.is_exact() and target.is_exact():
        return VERIFIED_EXACT if fn == target else REFUTED
    return VERIFIED_NUMERIC if maps_equal(fn, target, tol) else REFUTED


# ---------------------------------------------------------------------------
# diagonal symmetry roots


class _Mono:
    """Polynomial in the twist parameters (sigma, rho): {(a, b): coeff}."""

    __slots__ = ("t",)

    def __init__(self, t=None):
        self.t = {k: c for k, c in (t or {}).items() if not (c == 0)}

    @staticmethod
    def _lift(x):
        return x if isinstance(x, _Mono) else _Mono({(0, 0): x})

    def __add__(self, other):
        other = _Mono._lift(other)
        out = dict(self.t)
        for k, c in other.t.items():
            out[k] = out[k] + c if k in out else c
        return _Mono(out)

    __radd__ = __add__

    def __neg__(self):
        return _Mono({k: -c for k, c in self.t.items()})

    def __sub__(self, other):
        return self + (-_Mono._lift(other))

    def __rsub__(self, other):
        return _Mono._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, _Mono):
            out: dict = {}
            for (a1, b1), c1 in self.t.items():
                for (a2, b2), c2 in other.t.items():
                    k = (a1 + a2, b1 + b2)
                    p = c1 * c2
                    out[k] = out[k] + p if k in out else p
            return _Mono(out)
        if isinstance(other, (BiPoly, UniPoly)):
            return NotImplemented
        return _Mono({k: c * other for k, c in self.t.items()})

    def __rmul__(self, other):
        if isinstance(other, (BiPoly, UniPoly)):
            return NotImplemented
        return _Mono({k: other * c for k, c in self.t.items()})

    def __eq__(self, other):
        if isinstance(other, _Mono):
            return (self - other).t == {}
        return (self - other).t == {}

    __hash__ = None

    def __call__(self, s, r):
        acc = 0
        for (a, b), c in self.t.items():
            acc = acc + c * s**a * r**b
        return acc


def _twisted(f0: PolyMap2) -> PolyMap2:
    # f0(sigma z, rho w) with symbolic sigma, rho
    def tw(p: BiPoly):
        return BiPoly({(i, j): _Mono({(i, j): c}) for (i, j), c in p.terms.items()})

    return PolyMap2(tw(f0.first), tw(f0.second))


def _roots_of(value, k: int):
    """All k-th roots of ``value``: exact when recognisable, else complex."""
    base = exact_root(value, k) if is_exact(value) else None
    if base is not None:
        zeta = primitive_root(k)
        return [base * zeta**j for j in range(k)], True
    v = complex(approximate(value))
    r0 = v ** (1.0 / k) if v != 0 else 0j
    return [r0 * complex(math.cos(2 * math.pi * j / k), math.sin(2 * math.pi * j / k)) for j in range(k)], False


def symmetry_roots(f0: PolyMap2, n: int, h, cap: int = DEGREE_CAP) -> list[RootCandidate]:
    """All f0 o s, s = (sigma z, rho w), whose n-th iterate equals h.

    The n-th iterate of f0 o s has coefficients that are polynomials in
    (sigma, rho).  Coefficients that are single monomials give conditions
    sigma^a rho^b = t; two independent ones pin (sigma, rho) to finitely
    many candidates, which are then checked against every coefficient and
    finally by composing.
    """
    target = _target_map(h)
    if verify_root(f0, n, target, cap=cap) == REFUTED:
        raise ValueError("f0 is not a root of h of the given order")
    symbolic = iterate(_twisted(f0), n, cap)
    eqs = []
    for sym, tgt in ((symbolic.first, target.first), (symbolic.second, target.second)):
        for key in set(sym.terms) | set(tgt.terms):
            coeff = sym.terms.get(key)
            eqs.append((coeff if isinstance(coeff, _Mono) else _Mono._lift(coeff or 0), tgt.coeff(*key)))

    monomial_eqs = []
    for poly, t in eqs:
        if not poly.t:
            if not (t == 0):
                return []
            continue
        if len(poly.t) == 1:
            (a, b), c = next(iter(poly.t.items()))
            if t == 0:
                return []
            if (a, b) == (0, 0):
                if not (c == t):
                    return []
                continue
            monomial_eqs.append((a, b, div(t, c)))

    best = None
    for (a1, b1, t1), (a2, b2, t2) in ((e1, e2) for i, e1 in enumerate(monomial_eqs) for e2 in monomial_eqs[i + 1:]):
        det = a1 * b2 - a2 * b1
        if det and (best is None or abs(det) < abs(best[0])):
            best = (det, (a1, b1, t1), (a2, b2, t2))
    if best is None:
        raise ValueError("diagonal symmetry conditions are underdetermined for this map")
    det, (a1, b1, t1), (a2, b2, t2) = best
    ts = _pow(t1, b2) * _pow(t2, -b1)
    tr = _pow(t2, a1) * _pow(t1, -a2)
    if det < 0:
        det, ts, tr = -det, div(1, ts), div(1, tr)
    sigmas, ex_s = _roots_of(ts, det)
    rhos, ex_r = _roots_of(tr, det)
    exact = ex_s and ex_r and f0.is_exact() and target.is_exact()

    out = []
    for s, r in product(sigmas, rhos):
        if exact:
            if not all(p(s, r) == t for p, t in eqs):
                continue
        else:
            if not all(abs(approximate(p(s, r)) - approximate(t)) < 1e-8 for p, t in eqs):
                continue
        f = compose(f0, PolyMap2(BiPoly.z() * s, BiPoly.w() * r))
        status = verify_root(f, n, target, cap=cap)
        if status != REFUTED:
            out.append(RootCandidate(f, n, (f.degree,), status, twist=(s, r)))
    return out


def _pow(x, k: int):
    if k >= 0:
        return x**k
    return div(1, x ** (-k))


# ---------------------------------------------------------------------------
# numeric coefficient matching


def ordered_factorizations(e: int, least: int = 2) -> list[tuple[int, ...]]:
    """Ordered tuples of integers >= least whose product is e."""
    if e == 1:
        return [()]
    out = []
    for f in range(least, e + 1):
        if e % f == 0:
            out.extend((f,) + rest for rest in ordered_factorizations(e // f, least))
    return out


class _Ansatz:
    """D o H_1 o ... o H_k with D = (sigma z + u, rho w) and monic H_i.

    Parameter vector layout: [sigma, rho, (u), then (p_0 .. p_{d-1}, a) per
    factor].  The shift u is a free parameter only for a single factor; with
    two or more factors it can be pushed into the constant terms of the p_i,
    and a translation of w is always absorbed by the constant of the last p.
    """

    def __init__(self, shape: tuple[int, ...], n: int, target: PolyMap2):
        self.shape = shape
        self.n = n
        self.deg = target.degree
        self.offset = 3 if len(shape) == 1 else 2
        self.size = self.offset + sum(d + 1 for d in shape)
        m = self.deg + 1
        self.mask = np.add.outer(np.arange(m), np.arange(m)) <= self.deg
        self.target = np.concatenate([self._dense(target.first)[self.mask], self._dense(target.second)[self.mask]])
        self.scale = 1.0 + float(np.max(np.abs(self.target)))
        roots = np.exp(2j * np.pi * np.arange(m) / m)
        self.grid = np.meshgrid(roots, roots, indexing="ij")

    def _dense(self, p: BiPoly) -> np.ndarray:
        m = self.deg + 1
        arr = np.zeros((m, m), dtype=complex)
        for (i, j), c in p.terms.items():
            arr[i, j] = approximate(c)
        return arr

    def split(self, x):
        out, k = [], self.offset
        for d in self.shape:
            out.append((x[k : k + d], x[k + d]))
            k += d + 1
        return x[0], x[1], (x[2] if self.offset == 3 else 0), out

    def values(self, x) -> np.ndarray:
        """Coefficients of iterate(ansatz(x), n), read off by FFT.

        The iterate is evaluated pointwise on the torus grid of (deg+1)-th
        roots of unity, where a 2-D DFT recovers every coefficient exactly
        because no exponent exceeds deg.
        """
        sigma, rho, u, facs = self.split(x)
        m = self.deg + 1
        za, wa = self.grid
        for _ in range(self.n):
            for pcs, a in reversed(facs):
                acc = wa + pcs[-1]
                for c in pcs[-2::-1]:
                    acc = acc * wa + c
                za, wa = wa, acc - a * za
            za, wa = sigma * za + u, rho * wa
        fz = np.fft.fft2(za) / (m * m)
        fw = np.fft.fft2(wa) / (m * m)
        return np.concatenate([fz[self.mask], fw[self.mask]])

    def residual(self, x) -> np.ndarray:
        return self.values(x) - self.target

    def jacobian(self, x, r0=None) -> np.ndarray:
        # holomorphic in x, so a complex central difference suffices
        jac = np.empty((self.target.size, self.size), dtype=complex)
        for k in range(self.size):
            h = 1e-7 * max(1.0, abs(x[k]))
            e = np.zeros(self.size, dtype=complex)
            e[k] = h
            jac[:, k] = (self.values(x + e) - self.values(x - e)) / (2 * h)
        return jac

    def exact_map(self, params) -> tuple[PolyMap2, HenonComposition]:
        sigma, rho, u, pieces = self.split(params)
        facs = [HenonFactor(UniPoly(list(pcs) + [1]), a) for pcs, a in pieces]
        comp = HenonComposition(facs)
        diag = PolyMap2(BiPoly.z() * sigma + u, BiPoly.w() * rho)
        return compose(diag, comp.as_map()), comp


def _newton(ans: _Ansatz, x, cfg: RootSearchConfig):
    """Damped Gauss-Newton with step halving.

    Steps are accepted on decrease of the Euclidean residual (the direction
    is a descent direction for it); convergence is judged on the scaled
    sup-norm.  Returns (x, scaled residual) or None on failure.
    """
    r = ans.residual(x)
    for _ in range(cfg.max_newton_iters):
        err = float(np.max(np.abs(r))) / ans.scale
        if not np.isfinite(err):
            return None
        if err < cfg.newton_tol:
            return x, err
        jac = ans.jacobian(x)
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        norm = np.linalg.norm(r)
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            x_new = x + t * step
            with np.errstate(all="ignore"):
                r_new = ans.residual(x_new)
            if np.linalg.norm(r_new) < norm:
                break
            t *= 0.5
        else:
            return None
        x, r = x_new, r_new
    err = float(np.max(np.abs(r))) / ans.scale
    return (x, err) if err < cfg.newton_tol else None


def _snap_params(x, ans: _Ansatz, cfg: RootSearchConfig):
    try:
        params = [snap_to_exact(v, conductor=cfg.snap_conductor, tol=cfg.snap_tol) for v in x]
    except SnapError:
        return None
    _, _, _, facs = ans.split(params)
    if params[0] == 0 or params[1] == 0 or any(a == 0 for _, a in facs):
        return None
    return params


def _is_duplicate(cand: RootCandidate, found: list[RootCandidate], tol: float) -> bool:
    for other in found:
        if cand.map.is_exact() and other.map.is_exact():
            if cand.map == other.map:
                return True
        elif max_coeff_diff(cand.map, other.map) < tol:
            return True
    return False


def find_roots(h, n: int, cfg: RootSearchConfig | None = None, cap: int = DEGREE_CAP) -> RootList:
    """Search for n-th compositional roots of h by coefficient matching.

    Finding nothing is a legitimate outcome and only means the configured
    starts were exhausted; it is not a proof that no root exists.
    """
    cfg = cfg or RootSearchConfig()
    target = _target_map(h)
    d = target.degree
    if n not in possible_root_orders(d):
        raise OrderNotAdmissible(f"order not admissible: {n} (degree {d} admits {sorted(possible_root_orders(d))})")
    if not isinstance(h, HenonComposition):
        conj = _conjugated_search(target, n, cfg, cap)
        if conj is not None:
            return conj
    e = integer_root(d, n)
    rng = np.random.default_rng(cfg.seed)
    found: list[RootCandidate] = []
    converged = 0
    seen: list[np.ndarray] = []
    for shape in ordered_factorizations(e):
        ans = _Ansatz(shape, n, target)
        for _ in range(cfg.newton_starts):
            x0 = rng.normal(size=ans.size) + 1j * rng.normal(size=ans.size)
            res = _newton(ans, x0, cfg)
            if res is None:
                continue
            converged += 1
            x, err = res
            # the parametrisation is rigid, so repeated solutions show up as nearby vectors
            if any(len(y) == len(x) and np.max(np.abs(y - x)) < 1e-6 for y in seen):
                continue
            seen.append(x)
            cand = None
            params = _snap_params(x, ans, cfg) if target.is_exact() else None
            if params is not None:
                fmap, comp = ans.exact_map(params)
                if verify_root(fmap, n, target, cap=cap) == VERIFIED_EXACT:
                    cand = RootCandidate(fmap, n, shape, VERIFIED_EXACT, 0.0, (params[0], params[1]), comp)
            if cand is None:
                fmap, comp = ans.exact_map([complex(v) for v in x])
                if verify_root(fmap, n, target, tol=max(1e-9, 10 * err * ans.scale), cap=cap) == REFUTED:
                    continue
                cand = RootCandidate(fmap, n, shape, VERIFIED_NUMERIC, err, (complex(x[0]), complex(x[1])), comp)
            if not _is_duplicate(cand, found, cfg.dedup_tol):
                found.append(cand)
    starts = cfg.newton_starts * len(ordered_factorizations(e))
    log.info("search exhausted %d starts, %d converged, %d distinct roots", starts, converged, len(found))
    return RootList(found, starts=starts, converged=converged,
                    shapes=[list(s) for s in ordered_factorizations(e)])


def _conjugated_search(target: PolyMap2, n: int, cfg: RootSearchConfig, cap: int) -> RootList | None:
    """Search on the normal-form core g of target = L^-1 o g o L, then conjugate back.

    Returns None when L is the identity (the direct search applies).
    """
    from .words import henon_normal_form

    nf = henon_normal_form(target, None if target.is_exact() else cfg.snap_tol)
    if nf.kind != "henon":
        raise ValueError("target is conjugate to an elementary map, not to a Hénon composition")
    if nf.conjugator == PolyMap2.identity():
        return None
    core = find_roots(nf.composition, n, cfg, cap)
    out = []
    for c in core:
        fmap = compose_all([nf.conjugator_inverse, c.map, nf.conjugator], cap)
        status = verify_root(fmap, n, target, None if c.status == VERIFIED_EXACT else cfg.snap_tol * 100, cap)
        if status != REFUTED:
            out.append(RootCandidate(fmap, n, c.shape, status, c.residual, c.twist, c.factors))
    return RootList(out, conjugator=str(nf.conjugator), **core.info)
