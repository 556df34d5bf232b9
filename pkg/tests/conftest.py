from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from henonroots.scalars import ExactScalar, primitive_root

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def exact_scalars(draw, conductors=(1, 3, 4, 12)):
    n = draw(st.sampled_from(conductors))
    z = primitive_root(n)
    acc = ExactScalar.rational(0)
    for k in range(draw(st.integers(1, 3))):
        acc = acc + draw(small_fracs) * z ** draw(st.integers(0, n - 1))
    return acc


@st.composite
def nonzero_exact(draw, conductors=(1, 3, 4, 12)):
    x = draw(exact_scalars(conductors))
    if x.is_zero():
        x = x + Fraction(1)
    return x


def _nonzero(rng, lo=-3, hi=3):
    while True:
        c = Fraction(rng.randint(lo, hi), rng.randint(1, 2))
        if c:
            return c


def random_affine(rng):
    from henonroots.words import AffineMap

    while True:
        a, b, d = (rng.randint(-2, 2) for _ in range(3))
        c = _nonzero(rng)
        if a * d - b * c:
            return AffineMap(((a, b), (c, d)), (rng.randint(-2, 2), rng.randint(-2, 2)))


def random_elementary(rng, max_deg=3):
    from henonroots.poly import UniPoly
    from henonroots.words import ElementaryMap

    k = rng.randint(2, max_deg)
    q = UniPoly([Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(k)] + [_nonzero(rng)])
    return ElementaryMap(_nonzero(rng), q, _nonzero(rng), rng.randint(-2, 2))


def random_reduced_word(rng, max_len=6, max_deg=3):
    from henonroots.words import ReducedWord

    n = rng.randint(1, max_len)
    affine_first = rng.random() < 0.5
    letters = []
    for k in range(n):
        if (k % 2 == 0) == affine_first:
            letters.append(random_affine(rng))
        else:
            letters.append(random_elementary(rng, max_deg))
    return ReducedWord(letters)


def random_henon(rng, n_factors=None, max_deg=3):
    from henonroots.henon import HenonComposition, HenonFactor
    from henonroots.poly import UniPoly

    n_factors = n_factors or rng.randint(1, 2)
    fs = []
    for _ in range(n_factors):
        d = rng.randint(2, max_deg)
        p = UniPoly([Fraction(rng.randint(-4, 4), 4) for _ in range(d)] + [1])
        fs.append(HenonFactor(p, _nonzero(rng, -2, 2)))
    return HenonComposition(fs)


def random_nonflow(rng, max_r=4, max_mu=3, max_k=3, min_r=1):
    from math import gcd

    from henonroots.elementary import ElementaryNonFlow
    from henonroots.poly import UniPoly

    r = rng.randint(min_r, max_r)
    j = rng.choice([j for j in range(1, r + 1) if gcd(j, r) == 1])
    beta = primitive_root(r) ** j
    k = rng.randint(1, max_k)
    q = UniPoly([Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(k)] + [1], "t")
    return ElementaryNonFlow(r, rng.randint(0, max_mu), q, beta)
