"""Scalars in two regimes: exact cyclotomic numbers and double-precision complex.

An exact scalar is an element of the cyclotomic field Q(zeta_N), stored as
rational coordinates in the power basis 1, zeta, ..., zeta^(phi(N)-1) reduced
modulo the N-th cyclotomic polynomial.  Plain ``int`` and ``Fraction`` values
are accepted everywhere an exact scalar is, and rational arithmetic is kept on
those cheap types; :class:`ExactScalar` is only needed once a root of unity
enters.  The approximate regime is Python's builtin ``complex``.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Union

DEFAULT_CONDUCTOR = 12
DEFAULT_HEIGHT = 10**6


class SnapError(ValueError):
    """No exact value, or more than one, was found near an approximate value."""


# ---------------------------------------------------------------------------
# cyclotomic bookkeeping


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1] // den[-1]
        out[k] = c
        for i, d in enumerate(den):
            num[k + i] -= c * d
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients (low to high) of the n-th cyclotomic polynomial."""
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _poly_divexact(num, list(cyclotomic_poly(d)))
    return tuple(num)


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    # row e holds the coordinates of zeta_n^e, 0 <= e < n
    phi = totient(n)
    cyc = cyclotomic_poly(n)
    rows = []
    cur = [0] * phi
    cur[0] = 1
    for _ in range(n):
        rows.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for i in range(phi):
                cur[i] -= top * cyc[i]
    return tuple(rows)


def _reduce(exps: dict[int, Fraction], n: int) -> tuple[Fraction, ...]:
    table = _power_table(n)
    out = [Fraction(0)] * totient(n)
    for e, c in exps.items():
        if not c:
            continue
        row = table[e % n]
        for i, t in enumerate(row):
            if t:
                out[i] += c * t
    return tuple(out)


# ---------------------------------------------------------------------------


class ExactScalar:
    """An element of Q(zeta_N) with exact rational coordinates.

    Values are immutable.  Binary operations lift both operands to the lcm
    of their conductors; a result that happens to be rational is still an
    ``ExactScalar`` (call :meth:`to_rational` to drop to ``Fraction``).
    """

    __slots__ = ("coords", "conductor")

    def __init__(self, coords, conductor: int = 1):
        if conductor < 1:
            raise ValueError("conductor must be positive")
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != totient(conductor):
            raise ValueError(
                f"expected {totient(conductor)} coordinates for conductor {conductor}, got {len(coords)}"
            )
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "conductor", conductor)

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    @classmethod
    def _raw(cls, coords: tuple[Fraction, ...], conductor: int) -> "ExactScalar":
        obj = object.__new__(cls)
        object.__setattr__(obj, "coords", coords)
        object.__setattr__(obj, "conductor", conductor)
        return obj

    @classmethod
    def rational(cls, x) -> "ExactScalar":
        return cls._raw((Fraction(x),), 1)

    # -- structure ---------------------------------------------------------

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coords[0]

    def lift(self, n: int) -> "ExactScalar":
        """Re-express this element in Q(zeta_n); requires conductor | n."""
        if n % self.conductor:
            raise ValueError(f"cannot lift conductor {self.conductor} to {n}")
        if n == self.conductor:
            return self
        if self.conductor == 1:
            return ExactScalar._raw((self.coords[0],) + (Fraction(0),) * (totient(n) - 1), n)
        step = n // self.conductor
        return ExactScalar._raw(_reduce({k * step: c for k, c in enumerate(self.coords)}, n), n)

    def is_zero(self) -> bool:
        return not any(self.coords)

    # -- arithmetic --------------------------------------------------------

    def _common(self, other):
        if isinstance(other, ExactScalar):
            if other.conductor == self.conductor:
                return self, other
            n = math.lcm(self.conductor, other.conductor)
            return self.lift(n), other.lift(n)
        if isinstance(other, (int, Rational)):
            return self, ExactScalar.rational(other).lift(self.conductor)
        return None, None

    def __add__(self, other):
        if isinstance(other, (complex, float)):
            return approximate(self) + other
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        return ExactScalar._raw(tuple(x + y for x, y in zip(a.coords, b.coords)), a.conductor)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar._raw(tuple(-x for x in self.coords), self.conductor)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (complex, float)):
            return approximate(self) - other
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        return ExactScalar._raw(tuple(x - y for x, y in zip(a.coords, b.coords)), a.conductor)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (complex, float)):
            return approximate(self) * other
        if isinstance(other, (int, Rational)):
            f = Fraction(other)
            return ExactScalar._raw(tuple(x * f for x in self.coords), self.conductor)
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        n = a.conductor
        if n == 1:
            return ExactScalar._raw((a.coords[0] * b.coords[0],), 1)
        prod: dict[int, Fraction] = {}
        for i, x in enumerate(a.coords):
            if not x:
                continue
            for j, y in enumerate(b.coords):
                if y:
                    prod[i + j] = prod.get(i + j, 0) + x * y
        return ExactScalar._raw(_reduce(prod, n), n)

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        n = self.conductor
        if n == 1 or self.is_rational():
            return ExactScalar.rational(1 / self.coords[0]).lift(n)
        phi = totient(n)
        # columns: coordinates of self * zeta^k; solve M y = e_0
        cols = [(self * _zeta_power(n, k)).coords for k in range(phi)]
        rows = [[cols[k][i] for k in range(phi)] + [Fraction(int(i == 0))] for i in range(phi)]
        for c in range(phi):
            piv = next(r for r in range(c, phi) if rows[r][c] != 0)
            rows[c], rows[piv] = rows[piv], rows[c]
            pv = rows[c][c]
            rows[c] = [v / pv for v in rows[c]]
            for r in range(phi):
                if r != c and rows[r][c] != 0:
                    f = rows[r][c]
                    rows[r] = [v - f * u for v, u in zip(rows[r], rows[c])]
        return ExactScalar._raw(tuple(rows[i][phi] for i in range(phi)), n)

    def __truediv__(self, other):
        if isinstance(other, (complex, float)):
            return approximate(self) / other
        if isinstance(other, (int, Rational)):
            return self * (1 / Fraction(other))
        if isinstance(other, ExactScalar):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (complex, float)):
            return other / approximate(self)
        if isinstance(other, (int, Rational)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = ExactScalar.rational(1).lift(self.conductor)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (complex, float)):
            return False
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        return a.coords == b.coords

    __hash__ = None  # equality crosses conductors, so there is no cheap canonical hash

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return approximate(self)

    def conjugate(self) -> "ExactScalar":
        n = self.conductor
        return ExactScalar._raw(_reduce({(-k) % n: c for k, c in enumerate(self.coords)}, n), n)

    # -- display -----------------------------------------------------------

    def __repr__(self):
        return f"ExactScalar({[str(c) for c in self.coords]}, conductor={self.conductor})"

    def __str__(self):
        return format_scalar(self)


ScalarLike = Union[int, Fraction, ExactScalar, complex, float]


def _zeta_power(n: int, k: int) -> ExactScalar:
    return ExactScalar._raw(tuple(Fraction(t) for t in _power_table(n)[k % n]), n)


def primitive_root(n: int) -> ExactScalar:
    """zeta_n = exp(2 pi i / n) as an exact scalar of multiplicative order n."""
    if n < 1:
        raise ValueError("N must be >= 1")
    return _zeta_power(n, 1)


def multiplicative_order(x: ExactScalar, limit: int | None = None) -> int | None:
    """Order of ``x`` as a root of unity, or None if it is not one."""
    x = as_exact(x)
    m = math.lcm(2, x.conductor) if limit is None else limit
    one = ExactScalar.rational(1)
    if x ** m != one:
        return None
    best = m
    for d in sorted(d for d in range(1, m + 1) if m % d == 0):
        if x ** d == one:
            best = d
            break
    return best


def int_root(n: int, k: int) -> int | None:
    """The integer r >= 0 with r**k == n, if any (integer Newton iteration)."""
    if n < 0:
        return None
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x if x**k == n else None


def exact_root(c, k: int):
    """An exact y with y**k == c, or None when none is found cheaply.

    Handles c = (rational k-th power) * (root of unity), which covers the
    leading-coefficient normalisations met in practice.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return c
    c = as_exact(c)
    if c.is_zero():
        return 0
    # |c|^2 = c conj(c) is exact; it is rational whenever c is a rational times a unit
    n2 = simplify(c * c.conjugate())
    if not isinstance(n2, (int, Fraction)):
        return None
    n2 = Fraction(n2)
    rn, rd = int_root(n2.numerator, 2), int_root(n2.denominator, 2)
    if rn is None or rd is None:
        return None
    r = Fraction(rn, rd)
    num, den = int_root(r.numerator, k), int_root(r.denominator, k)
    if num is None or den is None:
        return None
    u = c * (1 / r)
    m = math.lcm(2, u.conductor)
    if u ** m != 1:
        return None
    s = next(t for t in range(m) if _zeta_power(m, t) == u)
    y = _zeta_power(m * k, s) * Fraction(num, den)
    return simplify(y)


# ---------------------------------------------------------------------------
# regime helpers


def is_exact(x) -> bool:
    return isinstance(x, (int, Rational, ExactScalar)) and not isinstance(x, bool)


def as_exact(x) -> ExactScalar:
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, (int, Rational)):
        return ExactScalar.rational(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def _solve_in_span(rows: list[tuple[Fraction, ...]], target: tuple[Fraction, ...]):
    """Rational c with sum c_j rows[j] == target, or None."""
    k, n = len(rows), len(target)
    # augmented matrix with one equation per coordinate
    mat = [[Fraction(rows[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    piv_cols, r = [], 0
    for c in range(k):
        p = next((i for i in range(r, n) if mat[i][c]), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(n):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
    if any(mat[i][k] for i in range(r, n)):
        return None
    sol = [Fraction(0)] * k
    for i, c in enumerate(piv_cols):
        sol[c] = mat[i][k]
    return sol


def reduce_conductor(x: ExactScalar) -> ExactScalar:
    """Re-express ``x`` over the smallest Q(zeta_m), m | conductor, containing it."""
    n = x.conductor
    if n <= 2:
        return x
    table = _power_table(n)
    for m in sorted(d for d in range(1, n) if n % d == 0):
        step = n // m
        rows = [tuple(Fraction(t) for t in table[j * step]) for j in range(totient(m))]
        sol = _solve_in_span(rows, x.coords)
        if sol is not None:
            return ExactScalar._raw(tuple(sol), m) if m > 1 else ExactScalar.rational(sol[0])
    return x


def simplify(x):
    """Smallest conductor for exact scalars; ``Fraction``/``int`` when rational."""
    if isinstance(x, ExactScalar):
        x = reduce_conductor(x)
        if x.is_rational():
            x = x.coords[0]
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


def div(a, b):
    """a / b, staying exact when both operands are exact."""
    if isinstance(a, int) and not isinstance(a, bool):
        a = Fraction(a)
    if isinstance(b, int) and isinstance(a, Fraction):
        b = Fraction(b)
    return a / b


def is_zero(x, tol: float = 0.0) -> bool:
    if isinstance(x, (complex, float)):
        return abs(x) <= tol
    return x == 0


def approximate(x) -> complex:
    """Embed a scalar in the complex numbers via zeta_N -> exp(2 pi i / N)."""
    if isinstance(x, complex):
        return x
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, Rational):
        try:
            return complex(float(x))
        except OverflowError as exc:
            raise OverflowError(f"rational {x} is outside double range") from exc
    if isinstance(x, ExactScalar):
        n = x.conductor
        re_terms, im_terms = [], []
        for k, c in enumerate(x.coords):
            if not c:
                continue
            try:
                cf = float(c)
            except OverflowError as exc:
                raise OverflowError(f"coordinate {c} is outside double range") from exc
            if k == 0:
                re_terms.append(cf)
                continue
            z = _unit(n, k)
            re_terms.append(cf * z.real)
            im_terms.append(cf * z.imag)
        val = complex(math.fsum(re_terms), math.fsum(im_terms))
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise OverflowError(f"{x!r} overflows double precision")
        return val
    raise TypeError(f"not a scalar: {x!r}")


@lru_cache(maxsize=4096)
def _unit(n: int, k: int) -> complex:
    k %= n
    # exact values at the quarter turns keep 1, i, -1, -i free of rounding noise
    if (4 * k) % n == 0:
        return (1, 1j, -1, -1j)[(4 * k) // n]
    return cmath.exp(2j * math.pi * k / n)


def check_finite(x: complex) -> complex:
    if not (math.isfinite(x.real) and math.isfinite(x.imag)):
        raise OverflowError("approximate scalar overflowed")
    return x


def conductor_of(x) -> int:
    return x.conductor if isinstance(x, ExactScalar) else 1


# ---------------------------------------------------------------------------
# recognition


def height(q: Fraction) -> int:
    q = Fraction(q)
    return max(abs(q.numerator), q.denominator)


def simplest_rational(lo: Fraction, hi: Fraction, bound: int | None = None) -> Fraction | None:
    """The rational of least denominator (then numerator) in [lo, hi].

    With ``bound`` set, gives up (returns None) as soon as the answer is
    known to have height above it.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        lo, hi = hi, lo
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        q = simplest_rational(-hi, -lo, bound)
        return None if q is None else -q
    # continued fraction walk on integer pairs lo = ln/ld, hi = hn/hd
    ln, ld, hn, hd = lo.numerator, lo.denominator, hi.numerator, hi.denominator
    p0, q0, p1, q1 = 0, 1, 1, 0  # convergent recurrence
    while True:
        fl = ln // ld
        if ln % ld == 0 or (fl + 1) * hd <= hn:
            t = fl if ln % ld == 0 else fl + 1
            p, q = t * p1 + p0, t * q1 + q0
            if bound is not None and max(p, q) > bound:
                return None
            return Fraction(p, q)
        p0, q0, p1, q1 = p1, q1, fl * p1 + p0, fl * q1 + q0
        if bound is not None and max(p1, q1) > bound:
            return None
        # next interval: [1/(hi - fl), 1/(lo - fl)]
        ln, ld, hn, hd = hd, hn - fl * hd, ld, ln - fl * ld


def _rationalize(x: float, tol: float, bound: int) -> Fraction | None:
    return simplest_rational(Fraction(x) - Fraction(tol), Fraction(x) + Fraction(tol), bound)


def snap_to_exact(x, conductor: int = DEFAULT_CONDUCTOR, tol: float = 1e-8,
                  bound: int = DEFAULT_HEIGHT):
    """Recognise ``x`` as a small-height element of Q(zeta_conductor).

    Candidates are rational multiples c*zeta^k and two-term combinations
    c1*zeta^j + c2*zeta^k with rational coefficients of height <= ``bound``
    that land within ``tol`` of ``x``.  The candidate of least height wins;
    two distinct candidates tied at that height raise :class:`SnapError`.
    Returns ``int``/``Fraction`` when the answer is rational.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = complex(x)
    if abs(x) <= tol:
        return 0
    n = conductor
    found: list[tuple[int, int, object]] = []

    def consider(terms):
        val = 0
        h = 0
        for c, k in terms:
            val = val + c * _zeta_power(n, k) if k else val + c
            h = max(h, height(c))
        if abs(approximate(val) - x) <= tol:
            found.append((h, len(terms), val))

    for k in range(n):
        u = _unit(n, k)
        y = x * u.conjugate()
        if abs(y.imag) > tol:
            continue
        c = _rationalize(y.real, tol, bound)
        if c is not None and c != 0:
            consider([(c, k)])
    for j in range(n):
        uj = _unit(n, j)
        for k in range(j + 1, n):
            uk = _unit(n, k)
            det = uj.real * uk.imag - uk.real * uj.imag
            if abs(det) < 1e-9:
                continue
            c1 = (x.real * uk.imag - uk.real * x.imag) / det
            c2 = (uj.real * x.imag - x.real * uj.imag) / det
            q1 = _rationalize(c1, tol, bound)
            q2 = _rationalize(c2, tol, bound)
            if q1 is None or q2 is None or q1 == 0 or q2 == 0:
                continue
            consider([(q1, j), (q2, k)])
    if not found:
        raise SnapError(f"no element of Q(zeta_{n}) of height <= {bound} within {tol} of {x}")
    found.sort(key=lambda t: (t[0], t[1]))
    best_h = found[0][0]
    best = found[0][2]
    for h, _, val in found[1:]:
        if h != best_h:
            break
        if val != best:
            raise SnapError(f"ambiguous recognition of {x}: {format_scalar(best)} vs {format_scalar(val)}")
    return simplify(best)


# ---------------------------------------------------------------------------
# formatting


def _format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(x) -> str:
    """Render a scalar in the map-expression syntax (round-trips through the parser)."""
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Rational):
        return _format_fraction(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, complex):
        if x.imag == 0:
            return repr(x.real)
        return f"({x.real!r} + {x.imag!r}*i)"
    if isinstance(x, ExactScalar):
        if x.is_rational():
            return _format_fraction(x.coords[0])
        parts = []
        for k, c in enumerate(x.coords):
            if not c:
                continue
            mono = "" if k == 0 else (f"zeta({x.conductor})" if k == 1 else f"zeta({x.conductor})^{k}")
            if not mono:
                parts.append(_format_fraction(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{_format_fraction(c)}*{mono}")
        s = " + ".join(parts).replace("+ -", "- ")
        return f"({s})" if len(parts) > 1 else s
    return str(x)


def to_record(x):
    """JSON-friendly encoding: exact -> {conductor, coords}, approximate -> [re, im]."""
    if isinstance(x, (complex, float)):
        x = complex(x)
        return [x.real, x.imag]
    e = as_exact(x)
    return {"conductor": e.conductor, "coords": [_format_fraction(c) for c in e.coords]}


def from_record(r):
    if isinstance(r, list):
        return complex(r[0], r[1])
    return simplify(ExactScalar([Fraction(c) for c in r["coords"]], r["conductor"]))
