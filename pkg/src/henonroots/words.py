"""Affine and elementary automorphisms, reduced words, and Hénon normal forms.

The polynomial automorphism group of C^2 is the amalgamated product of the
affine group A and the elementary group E (maps preserving the lines
w = const).  :func:`decompose` writes an automorphism as a reduced word by
degree peeling; :func:`henon_normal_form` conjugates a cyclically reduced
word into a composition of monic Hénon factors.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field
from typing import Union

from .henon import HenonComposition, HenonFactor
from .poly import DEGREE_CAP, BiPoly, PolyMap2, UniPoly, compose, compose_all, maps_equal
from .scalars import approximate, div, exact_root, from_record, is_exact, to_record


class NotAutomorphismError(ValueError):
    pass


class DecompositionStuck(RuntimeError):
    pass


def _iz(c, tol):
    if tol is not None and isinstance(c, complex):
        return abs(c) <= tol
    return c == 0


@dataclass(frozen=True, eq=False)
class AffineMap:
    """(z, w) -> (m00 z + m01 w + t0, m10 z + m11 w + t1)."""

    matrix: tuple
    translation: tuple = (0, 0)

    def __post_init__(self):
        (a, b), (c, d) = self.matrix
        if a * d - b * c == 0:
            raise ValueError("affine map must have nonzero determinant")

    @classmethod
    def swap(cls) -> "AffineMap":
        return cls(((0, 1), (1, 0)))

    def to_map(self) -> PolyMap2:
        (a, b), (c, d) = self.matrix
        e, f = self.translation
        z, w = BiPoly.z(), BiPoly.w()
        return PolyMap2(z * a + w * b + e, z * c + w * d + f)

    def inverse(self) -> "AffineMap":
        (a, b), (c, d) = self.matrix
        e, f = self.translation
        det = a * d - b * c
        ia, ib, ic, id_ = div(d, det), div(-b, det), div(-c, det), div(a, det)
        return AffineMap(((ia, ib), (ic, id_)), (-(ia * e + ib * f), -(ic * e + id_ * f)))

    def is_elementary(self, tol=None) -> bool:
        return _iz(self.matrix[1][0], tol)

    @property
    def degree(self) -> int:
        return 1

    def to_record(self) -> dict:
        return {
            "type": "AFFINE",
            "matrix": [[to_record(x) for x in row] for row in self.matrix],
            "translation": [to_record(x) for x in self.translation],
        }


@dataclass(frozen=True, eq=False)
class ElementaryMap:
    """(z, w) -> (alpha z + q(w), beta w + gamma)."""

    alpha: object
    q: UniPoly = field(default_factory=UniPoly)
    beta: object = 1
    gamma: object = 0

    def __post_init__(self):
        if self.alpha == 0 or self.beta == 0:
            raise ValueError("elementary map needs nonzero alpha and beta")

    def to_map(self) -> PolyMap2:
        z, w = BiPoly.z(), BiPoly.w()
        return PolyMap2(z * self.alpha + self.q.to_bipoly(), w * self.beta + self.gamma)

    def inverse(self) -> "ElementaryMap":
        # w = (W - gamma)/beta, z = (Z - q(w))/alpha
        ib = div(1, self.beta)
        shift = UniPoly([div(-self.gamma, self.beta), ib])
        qi = _compose_uni(self.q, shift)
        ia = div(1, self.alpha)
        return ElementaryMap(ia, -(qi * ia), ib, div(-self.gamma, self.beta))

    def is_affine(self) -> bool:
        return self.q.degree <= 1

    @property
    def degree(self) -> int:
        return max(1, self.q.degree)

    def to_record(self) -> dict:
        return {
            "type": "ELEM",
            "alpha": to_record(self.alpha),
            "q": [to_record(c) for c in self.q.coeffs],
            "beta": to_record(self.beta),
            "gamma": to_record(self.gamma),
        }


Letter = Union[AffineMap, ElementaryMap]


def _compose_uni(p: UniPoly, inner: UniPoly) -> UniPoly:
    acc = UniPoly([], inner.var)
    for c in reversed(p.coeffs):
        acc = acc * inner + c
    return acc


def letter_group(g: Letter, tol=None) -> str:
    """'A' (affine, not elementary), 'E' (elementary, not affine) or 'I' (both)."""
    if isinstance(g, AffineMap):
        return "I" if g.is_elementary(tol) else "A"
    return "I" if g.is_affine() else "E"


def letter_from_map(m: PolyMap2, tol=None) -> Letter:
    """Classify a map known to lie in A or E and return it as a letter."""
    f, g = m.first.chop(tol) if tol else m.first, m.second.chop(tol) if tol else m.second
    second_elem = g.degree_in("z") <= 0 and g.degree <= 1
    first_elem = all(i == 0 or (i == 1 and j == 0) for i, j in f.terms)
    if second_elem and first_elem and f.coeff(1, 0) != 0 and g.coeff(0, 1) != 0:
        q = BiPoly({k: c for k, c in f.terms.items() if k[0] == 0}).as_unipoly("w")
        return ElementaryMap(f.coeff(1, 0), q, g.coeff(0, 1), g.constant())
    if m.degree <= 1:
        return AffineMap(
            ((f.coeff(1, 0), f.coeff(0, 1)), (g.coeff(1, 0), g.coeff(0, 1))),
            (f.constant(), g.constant()),
        )
    raise ValueError(f"{m} is neither affine nor elementary")


def letter_from_record(r: dict) -> Letter:
    if r["type"] == "AFFINE":
        return AffineMap(
            tuple(tuple(from_record(x) for x in row) for row in r["matrix"]),
            tuple(from_record(x) for x in r["translation"]),
        )
    if r["type"] == "ELEM":
        return ElementaryMap(
            from_record(r["alpha"]),
            UniPoly([from_record(c) for c in r["q"]]),
            from_record(r["beta"]),
            from_record(r["gamma"]),
        )
    raise ValueError(f"unknown letter type {r['type']!r}")


def _is_identity(m: PolyMap2, tol=None) -> bool:
    return maps_equal(m, PolyMap2.identity(), tol) if tol else m == PolyMap2.identity()


class ReducedWord:
    """g_1 g_2 ... g_k with letters alternating between A and E.

    A word of length one may consist of a single letter of A ∩ E, which is
    how a non-identity element of the intersection is written.
    """

    def __init__(self, letters=(), tol=None):
        self.letters = tuple(letters)
        groups = [letter_group(g, tol) for g in self.letters]
        if len(groups) > 1:
            if "I" in groups:
                raise ValueError("reduced word contains a letter of A ∩ E")
            for a, b in zip(groups, groups[1:]):
                if a == b:
                    raise ValueError("reduced word has two adjacent letters from the same group")

    def __len__(self):
        return len(self.letters)

    def groups(self, tol=None) -> list[str]:
        return [letter_group(g, tol) for g in self.letters]

    def recompose(self, cap: int = DEGREE_CAP) -> PolyMap2:
        return recompose(self, cap)

    def to_record(self) -> list[dict]:
        return [g.to_record() for g in self.letters]

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, rec) -> "ReducedWord":
        if isinstance(rec, str):
            rec = json.loads(rec)
        return cls([letter_from_record(r) for r in rec])

    def __repr__(self):
        return f"ReducedWord({''.join(self.groups())})"


def recompose(word, cap: int = DEGREE_CAP) -> PolyMap2:
    letters = word.letters if isinstance(word, ReducedWord) else list(word)
    return compose_all([g.to_map() for g in letters], cap)


def _merge(a: Letter, b: Letter, tol=None) -> Letter | None:
    m = compose(a.to_map(), b.to_map())
    if tol:
        m = PolyMap2(m.first.chop(tol), m.second.chop(tol))
    if _is_identity(m, tol):
        return None
    return letter_from_map(m, tol)


def reduce_letters(letters, tol=None) -> list[Letter]:
    """Merge adjacent letters of the same group and absorb A ∩ E letters."""
    stack: list[Letter] = []
    for g in letters:
        if letter_group(g, tol) == "I" and _is_identity(g.to_map(), tol):
            continue
        stack.append(g)
        while len(stack) >= 2:
            ga, gb = letter_group(stack[-2], tol), letter_group(stack[-1], tol)
            if {ga, gb} == {"A", "E"}:
                break
            b = stack.pop()
            a = stack.pop()
            merged = _merge(a, b, tol)
            if merged is not None:
                stack.append(merged)
    return stack


# ---------------------------------------------------------------------------
# decomposition


def check_automorphism(m: PolyMap2, tol=None):
    jac = m.jacobian_det()
    if tol:
        jac = jac.chop(tol)
    if jac.degree != 0:
        raise NotAutomorphismError(f"Jacobian determinant {jac} is not a nonzero constant")
    return jac.constant()


def _peel(f: BiPoly, g: BiPoly, tol) -> tuple[BiPoly, UniPoly]:
    """Subtract c * g^k from f until deg f < deg g or the pair is affine."""
    q = UniPoly([])
    guard = 0
    while f.degree >= g.degree and max(f.degree, g.degree) > 1:
        guard += 1
        if guard > 10_000:
            raise DecompositionStuck("peeling did not terminate")
        df, dg = f.degree, g.degree
        if dg < 1 or df % dg:
            raise DecompositionStuck(f"degree {df} is not a multiple of {dg}")
        k = df // dg
        gk = g.top() ** k
        mono = max(gk.terms, key=lambda t: (t[1], t[0]))
        c = div(f.coeff(*mono), gk.terms[mono])
        if _iz(c, tol):
            raise DecompositionStuck("leading forms are not proportional")
        f = f - (g ** k) * c
        if tol:
            f = f.chop(tol)
        if f.degree >= df:
            raise DecompositionStuck("leading form did not cancel")
        q = q + UniPoly.monomial(k, c)
    return f, q


def decompose(m: PolyMap2, tol: float | None = None) -> ReducedWord:
    """Write an automorphism as a reduced word; the identity gives the empty word.

    ``tol`` enables approximate coefficients: values with modulus below it
    are treated as zero.  Leave it ``None`` for exact maps.
    """
    if not m.is_exact() and tol is None:
        tol = 1e-9
    check_automorphism(m, tol)
    raw: list[Letter] = []
    f, g = m.first, m.second
    tau = AffineMap.swap()
    while True:
        f, q = _peel(f, g, tol)
        if not q.is_zero():
            raw.append(ElementaryMap(1, q))
        if max(f.degree, g.degree) <= 1:
            raw.append(letter_from_map(PolyMap2(f, g), tol))
            break
        raw.append(tau)
        f, g = g, f
    return ReducedWord(reduce_letters(raw, tol), tol)


# ---------------------------------------------------------------------------
# Hénon normal form


@dataclass
class NormalForm:
    """m = conjugator_inverse o core o conjugator.

    ``kind`` is "henon" (core is ``composition``) or "elementary" (core is
    the single ``letter``; an empty word is the identity).
    """

    kind: str
    conjugator: PolyMap2
    conjugator_inverse: PolyMap2
    composition: HenonComposition | None = None
    letter: Letter | None = None
    exact: bool = True
    conjugator_is_affine: bool = True

    def core_map(self) -> PolyMap2:
        if self.kind == "henon":
            return self.composition.as_map()
        return self.letter.to_map() if self.letter is not None else PolyMap2.identity()

    def reconstruct(self) -> PolyMap2:
        return compose_all([self.conjugator_inverse, self.core_map(), self.conjugator])


def _inv(g: Letter) -> Letter:
    return g.inverse()


def _split_affine(a: AffineMap) -> tuple[ElementaryMap, ElementaryMap]:
    """a = left o tau o right with left, right affine elementary."""
    (m00, m01), (m10, m11) = a.matrix
    t0, t1 = a.translation
    right = ElementaryMap(m10, UniPoly([t1, m11]), 1, 0)
    y = div(m00, m10)
    x = m01 - y * m11
    left = ElementaryMap(x, UniPoly([t0 - y * t1, y]), 1, 0)
    return left, right


def _elem_compose(a: ElementaryMap, b: ElementaryMap) -> ElementaryMap:
    return letter_from_map(compose(a.to_map(), b.to_map()))


def _solve_scaling(cs, ds, exact: bool):
    """Find y with C * y^D = y, where y_{j-1} = c_j y_j^{d_j} around the cycle."""
    coef, expo = 1, 1
    for c, d in zip(reversed(cs), reversed(ds)):
        coef = c * coef ** d
        expo *= d
    k = expo - 1
    if exact:
        y = exact_root(div(1, coef), k)
        if y is not None:
            return y, True
    target = 1 / approximate(coef)
    return cmath.exp(cmath.log(target) / k), False


def henon_normal_form(m: PolyMap2, tol: float | None = None) -> NormalForm:
    word = decompose(m, tol)
    if not m.is_exact() and tol is None:
        tol = 1e-9
    letters = list(word.letters)
    conj: list[Letter] = []  # m' = P^-1 m P with P = conj[0] o conj[1] o ...

    while len(letters) >= 2 and letter_group(letters[0], tol) == letter_group(letters[-1], tol):
        g = letters[0]
        letters = reduce_letters(letters[1:] + [g], tol)
        conj.append(g)
    if len(letters) >= 2 and letter_group(letters[0], tol) == "E":
        g = letters[0]
        letters = letters[1:] + [g]
        conj.append(g)

    def conj_maps():
        p = compose_all([g.to_map() for g in conj])
        pinv = compose_all([g.inverse().to_map() for g in reversed(conj)])
        return p, pinv

    if len(letters) <= 1:
        p, pinv = conj_maps()
        return NormalForm(
            "elementary",
            conjugator=pinv,
            conjugator_inverse=p,
            letter=letters[0] if letters else None,
            exact=m.is_exact(),
            conjugator_is_affine=all(g.degree == 1 for g in conj),
        )

    # letters = A_1 E_1 ... A_l E_l ; split A_j = left_j tau right_j
    pairs = [(letters[i], letters[i + 1]) for i in range(0, len(letters), 2)]
    splits = [_split_affine(a) for a, _ in pairs]
    l = len(pairs)
    elems = []
    for j in range(l):
        right = splits[j][1]
        nxt_left = splits[(j + 1) % l][0]
        elems.append(_elem_compose(_elem_compose(right, pairs[j][1]), nxt_left))
    conj.append(splits[0][0])
    # now m' = tau E_1 tau E_2 ... tau E_l with E_j = (alpha z + q(w), beta w + gamma)

    exact = m.is_exact()
    cs = [e.q.lc() for e in elems]
    ds = [e.q.degree for e in elems]
    y_l, exact_y = _solve_scaling(cs, ds, exact)
    exact = exact and exact_y
    ys = [None] * (l + 1)
    ys[l] = y_l
    for j in range(l, 0, -1):
        ys[j - 1] = cs[j - 1] * ys[j] ** ds[j - 1]
    if not exact:
        ys = [approximate(y) for y in ys]
    ys[0] = ys[l]
    xs = [None] * (l + 1)
    us = [None] * (l + 1)
    for j in range(1, l + 1):
        e = elems[j - 1]
        xs[j - 1] = e.beta * ys[j]
        us[j - 1] = e.gamma
    xs[l], us[l] = xs[0], us[0]

    factors = []
    for j in range(1, l + 1):
        e = elems[j - 1]
        a_j = div(-(e.alpha * xs[j]), ys[j - 1])
        qs = _compose_uni(e.q, UniPoly([0, ys[j]]))
        p_j = (qs + e.alpha * us[j]) / ys[j - 1]
        if not exact:
            p_j = UniPoly([approximate(c) for c in p_j.coeffs[:-1]] + [1.0])
            a_j = approximate(a_j)
        factors.append(HenonFactor(p_j, a_j))
    comp = HenonComposition(factors)

    lin0 = ElementaryMap(xs[0], UniPoly([us[0]]), ys[0], 0)  # L_0 = (x z + u, y w)
    p, pinv = conj_maps()
    l_inv = compose(p, lin0.to_map())  # P o L_0
    l_fwd = compose(lin0.inverse().to_map(), pinv)
    nf = NormalForm(
        "henon",
        conjugator=l_fwd,
        conjugator_inverse=l_inv,
        composition=comp,
        exact=exact,
        conjugator_is_affine=l_fwd.degree <= 1,
    )
    return nf
