"""Univariate and bivariate polynomials and polynomial maps of the plane.

Coefficients may be any ring elements supporting ``+``, ``-``, ``*`` and
comparison with ``0``: ints, Fractions, :class:`ExactScalar`, or ``complex``.
Exact inputs give exact results.
"""

from __future__ import annotations

from typing import Iterable

from .scalars import approximate, div, format_scalar, from_record, is_exact, simplify, to_record

DEGREE_CAP = 4096
EQUAL_TOL = 1e-9


class DegreeCapError(ValueError):
    """A composition or iteration would exceed the configured total-degree cap."""


def _nz(c) -> bool:
    return not (c == 0)


def _clean(c):
    return simplify(c) if is_exact(c) else c


class UniPoly:
    """Dense univariate polynomial; ``coeffs[k]`` multiplies ``var**k``."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "w"):
        cs = [_clean(c) for c in coeffs]
        while cs and not _nz(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)
        self.var = var

    @classmethod
    def monomial(cls, k: int, c=1, var: str = "w") -> "UniPoly":
        return cls([0] * k + [c], var)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def lc(self):
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self, tol: float = 0.0) -> bool:
        if not self.coeffs:
            return False
        lc = self.coeffs[-1]
        if isinstance(lc, (complex, float)):
            return abs(lc - 1) <= tol
        return lc == 1

    def __getitem__(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def items(self):
        return ((k, c) for k, c in enumerate(self.coeffs) if _nz(c))

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other], self.var)
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([self[k] + other[k] for k in range(n)], self.var)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        return self + (-other if isinstance(other, UniPoly) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            if not self.coeffs or not other.coeffs:
                return UniPoly([], self.var)
            out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if _nz(a):
                    for j, b in enumerate(other.coeffs):
                        out[i + j] = out[i + j] + a * b
            return UniPoly(out, self.var)
        return UniPoly([c * other for c in self.coeffs], self.var)

    def __rmul__(self, other):
        return UniPoly([other * c for c in self.coeffs], self.var)

    def __pow__(self, k: int):
        out = UniPoly([1], self.var)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, c):
        return UniPoly([div(v, c) for v in self.coeffs], self.var)

    def scale_var(self, s) -> "UniPoly":
        """p(s*x)."""
        out, sk = [], 1
        for c in self.coeffs:
            out.append(c * sk)
            sk = sk * s
        return UniPoly(out, self.var)

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            n = max(len(self.coeffs), len(other.coeffs))
            return all(self[k] == other[k] for k in range(n))
        if not self.coeffs:
            return other == 0
        return len(self.coeffs) == 1 and self.coeffs[0] == other

    __hash__ = None

    def to_bipoly(self) -> "BiPoly":
        key = (lambda k: (k, 0)) if self.var == "z" else (lambda k: (0, k))
        return BiPoly({key(k): c for k, c in self.items()})

    def __repr__(self):
        return f"UniPoly({list(map(str, self.coeffs))}, var={self.var!r})"

    def __str__(self):
        return _format_terms(((c, {self.var: k}) for k, c in self.items()), descending=True)


class BiPoly:
    """Sparse polynomial in z and w: ``terms[(i, j)]`` multiplies ``z**i * w**j``."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {k: _clean(c) for k, c in (terms or {}).items() if _nz(c)}

    @classmethod
    def const(cls, c) -> "BiPoly":
        return cls({(0, 0): c})

    @classmethod
    def z(cls) -> "BiPoly":
        return cls({(1, 0): 1})

    @classmethod
    def w(cls) -> "BiPoly":
        return cls({(0, 1): 1})

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((i + j for i, j in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        idx = 0 if var == "z" else 1
        return max((k[idx] for k in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self.terms.values())

    def coeff(self, i: int, j: int):
        return self.terms.get((i, j), 0)

    def constant(self):
        return self.terms.get((0, 0), 0)

    def top(self) -> "BiPoly":
        d = self.degree
        return BiPoly({k: c for k, c in self.terms.items() if k[0] + k[1] == d})

    def __add__(self, other):
        if not isinstance(other, BiPoly):
            other = BiPoly.const(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, BiPoly):
            other = BiPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            out: dict = {}
            for (i1, j1), a in self.terms.items():
                for (i2, j2), b in other.terms.items():
                    k = (i1 + i2, j1 + j2)
                    p = a * b
                    out[k] = out[k] + p if k in out else p
            return BiPoly(out)
        if isinstance(other, UniPoly):
            return self * other.to_bipoly()
        return BiPoly({k: c * other for k, c in self.terms.items()})

    def __rmul__(self, other):
        return BiPoly({k: other * c for k, c in self.terms.items()})

    def __pow__(self, k: int):
        result = BiPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, c):
        return BiPoly({k: div(v, c) for k, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            other = BiPoly.const(other)
        keys = set(self.terms) | set(other.terms)
        return all(self.coeff(*k) == other.coeff(*k) for k in keys)

    __hash__ = None

    def diff(self, var: str) -> "BiPoly":
        if var == "z":
            return BiPoly({(i - 1, j): c * i for (i, j), c in self.terms.items() if i})
        return BiPoly({(i, j - 1): c * j for (i, j), c in self.terms.items() if j})

    def __call__(self, z, w):
        """Evaluate at a point (scalars) or substitute polynomials."""
        if isinstance(z, BiPoly) or isinstance(w, BiPoly):
            return substitute([self], _as_bipoly(z), _as_bipoly(w))[0]
        zp = _powers(z, self.degree_in("z"))
        wp = _powers(w, self.degree_in("w"))
        acc = 0
        for (i, j), c in self.terms.items():
            acc = acc + c * zp[i] * wp[j]
        return acc

    def approx(self) -> "BiPoly":
        return BiPoly({k: approximate(c) for k, c in self.terms.items()})

    def chop(self, tol: float) -> "BiPoly":
        return BiPoly({k: c for k, c in self.terms.items() if not (isinstance(c, complex) and abs(c) <= tol)})

    def as_unipoly(self, var: str = "w") -> UniPoly:
        idx = 0 if var == "z" else 1
        if any(k[1 - idx] for k in self.terms):
            raise ValueError(f"polynomial depends on more than {var}")
        n = self.degree_in(var)
        cs = [0] * (n + 1)
        for k, c in self.terms.items():
            cs[k[idx]] = c
        return UniPoly(cs, var)

    def __repr__(self):
        return f"BiPoly({ {k: str(c) for k, c in sorted(self.terms.items())} })"

    def __str__(self):
        items = sorted(self.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][1]))
        return _format_terms((c, {"z": i, "w": j}) for (i, j), c in items)


def _as_bipoly(x) -> BiPoly:
    if isinstance(x, BiPoly):
        return x
    if isinstance(x, UniPoly):
        return x.to_bipoly()
    return BiPoly.const(x)


def _powers(x, n: int) -> list:
    out = [1]
    for _ in range(max(n, 0)):
        out.append(out[-1] * x)
    return out


def substitute(polys: list[BiPoly], a: BiPoly, b: BiPoly) -> list[BiPoly]:
    """Each poly P(z, w) becomes P(a, b); powers of a and b are shared."""
    zcache = [BiPoly.const(1)]
    wcache = [BiPoly.const(1)]

    def zpow(i):
        while len(zcache) <= i:
            zcache.append(zcache[-1] * a)
        return zcache[i]

    def wpow(j):
        while len(wcache) <= j:
            wcache.append(wcache[-1] * b)
        return wcache[j]

    out = []
    for p in polys:
        rows: dict[int, dict[int, object]] = {}
        for (i, j), c in p.terms.items():
            rows.setdefault(i, {})[j] = c
        acc = BiPoly()
        for i, row in rows.items():
            inner = BiPoly()
            for j, c in row.items():
                inner = inner + wpow(j) * c
            acc = acc + (zpow(i) * inner if i else inner)
        out.append(acc)
    return out


def _format_terms(items, descending: bool = False) -> str:
    parts = []
    for c, exps in items:
        mono = "*".join(
            v if e == 1 else f"{v}^{e}" for v, e in exps.items() if e
        )
        s = format_scalar(c)
        neg = False
        if s.startswith("-") and " " not in s:
            neg, s = True, s[1:]
        if mono:
            s = mono if s == "1" else f"{s}*{mono}"
        parts.append(("- " if neg else "+ ") + s)
    if not parts:
        return "0"
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else "-" + out[2:]


class PolyMap2:
    """A polynomial map (z, w) -> (first(z, w), second(z, w))."""

    __slots__ = ("first", "second")

    def __init__(self, first, second):
        self.first = _as_bipoly(first)
        self.second = _as_bipoly(second)

    @classmethod
    def identity(cls) -> "PolyMap2":
        return cls(BiPoly.z(), BiPoly.w())

    @classmethod
    def swap(cls) -> "PolyMap2":
        return cls(BiPoly.w(), BiPoly.z())

    @property
    def degree(self) -> int:
        return max(self.first.degree, self.second.degree)

    def is_exact(self) -> bool:
        return self.first.is_exact() and self.second.is_exact()

    def __call__(self, z, w):
        return self.first(z, w), self.second(z, w)

    def approx(self) -> "PolyMap2":
        return PolyMap2(self.first.approx(), self.second.approx())

    def jacobian_det(self) -> BiPoly:
        f, g = self.first, self.second
        return f.diff("z") * g.diff("w") - f.diff("w") * g.diff("z")

    def __eq__(self, other):
        return isinstance(other, PolyMap2) and self.first == other.first and self.second == other.second

    __hash__ = None

    def __repr__(self):
        return f"PolyMap2({self.first}, {self.second})"

    def __str__(self):
        return f"({self.first}, {self.second})"


def compose(outer: PolyMap2, inner: PolyMap2, cap: int = DEGREE_CAP) -> PolyMap2:
    """outer o inner."""
    df, dg = max(inner.first.degree, 0), max(inner.second.degree, 0)
    est = max((i * df + j * dg for p in (outer.first, outer.second) for i, j in p.terms), default=0)
    if est > cap:
        raise DegreeCapError(f"composition degree {est} exceeds cap {cap}")
    f, g = substitute([outer.first, outer.second], inner.first, inner.second)
    return PolyMap2(f, g)


def compose_all(maps: Iterable[PolyMap2], cap: int = DEGREE_CAP) -> PolyMap2:
    """maps[0] o maps[1] o ... ; the last map is applied first."""
    maps = list(maps)
    out = PolyMap2.identity()
    for m in reversed(maps):
        out = compose(m, out, cap)
    return out


def iterate(m: PolyMap2, n: int, cap: int = DEGREE_CAP) -> PolyMap2:
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    out = PolyMap2.identity()
    for _ in range(n):
        out = compose(m, out, cap)
    return out


def maps_equal(a: PolyMap2, b: PolyMap2, tol: float | None = None) -> bool:
    """Exact coefficientwise equality, or all differences below ``tol``.

    With ``tol=None`` exact maps are compared exactly and maps with any
    approximate coefficient use the absolute tolerance EQUAL_TOL.
    """
    if tol is None:
        if a.is_exact() and b.is_exact():
            return a == b
        tol = EQUAL_TOL
    for p, q in ((a.first, b.first), (a.second, b.second)):
        for k in set(p.terms) | set(q.terms):
            if abs(approximate(p.coeff(*k)) - approximate(q.coeff(*k))) > tol:
                return False
    return True


def max_coeff_diff(a: PolyMap2, b: PolyMap2) -> float:
    worst = 0.0
    for p, q in ((a.first, b.first), (a.second, b.second)):
        for k in set(p.terms) | set(q.terms):
            worst = max(worst, abs(approximate(p.coeff(*k)) - approximate(q.coeff(*k))))
    return worst


def monomial(i: int, j: int, c=1) -> BiPoly:
    return BiPoly({(i, j): c})


def map_to_record(m: PolyMap2) -> dict:
    return {
        name: [[i, j, to_record(c)] for (i, j), c in sorted(p.terms.items())]
        for name, p in (("first", m.first), ("second", m.second))
    }


def map_from_record(r: dict) -> PolyMap2:
    return PolyMap2(
        BiPoly({(i, j): from_record(c) for i, j, c in r["first"]}),
        BiPoly({(i, j): from_record(c) for i, j, c in r["second"]}),
    )
