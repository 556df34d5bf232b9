"""Escape-time dynamics: Green's functions G+/G-, K+/K- membership, grids.

Everything here works on numpy arrays of points so that sample sets and
grids are evaluated in one sweep.  The norm is the sup-norm.  Forward
escape is certified once |w| > R and |w| >= |z| (the region V-), backward
escape once |z| > R and |z| >= |w| (V+), with R from ``escape_radius``;
inside those regions each factor at least doubles the dominant coordinate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .henon import HenonComposition, escape_radius
from .poly import PolyMap2

log = logging.getLogger(__name__)

ESCAPED = "escaped"
BOUNDED = "bounded-up-to-max-iter"

GREEN_PLUS = "green+"
GREEN_MINUS = "green-"
KPLUS_MASK = "kplus-mask"
KMINUS_MASK = "kminus-mask"
GRID_KINDS = (GREEN_PLUS, GREEN_MINUS, KPLUS_MASK, KMINUS_MASK)


class InsufficientSamples(ValueError):
    pass


@dataclass
class GreenParams:
    R: float | None = None  # None: take escape_radius(h)
    max_iter: int = 200
    tol: float = 1e-10
    overflow_guard: float = 1e300

    def __post_init__(self):
        if self.R is not None and self.R < 2:
            raise ValueError("R must be >= 2")
        if self.max_iter <= 0 or self.tol <= 0 or self.overflow_guard <= 0:
            raise ValueError("max_iter, tol and overflow_guard must be positive")

    def radius(self, h: HenonComposition) -> float:
        return self.R if self.R is not None else escape_radius(h)

    def log_switch(self, degree: int = 2) -> float:
        # past this a degree-`degree` step could overflow, so the dominant
        # coordinate is tracked through its logarithm instead
        return self.overflow_guard ** (1.0 / degree)


@dataclass
class GreenEstimate:
    value: float
    iterations: int
    converged: bool
    classification: str

    def to_record(self) -> dict:
        return {
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "classification": self.classification,
        }


@dataclass
class MultiplierFit:
    b: float
    residual: float
    samples: int

    def to_record(self) -> dict:
        return {"b": self.b, "residual": self.residual, "samples": self.samples}


@dataclass
class GreenBatch:
    """Per-point arrays from one vectorised run."""

    values: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    escaped: np.ndarray

    def estimate(self, k: int) -> GreenEstimate:
        return GreenEstimate(
            float(self.values[k]),
            int(self.iterations[k]),
            bool(self.converged[k]),
            ESCAPED if self.escaped[k] else BOUNDED,
        )


# ---------------------------------------------------------------------------
# the core iteration


def _as_arrays(points):
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 1:
        pts = pts.reshape(1, 2)
    return pts[:, 0].copy(), pts[:, 1].copy()


def _horner(coeffs, x):
    acc = np.full_like(x, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def _green(h: HenonComposition, z, w, prm: GreenParams, backward: bool) -> GreenBatch:
    facs = h.approx_factors()
    # forward applies the last factor first; backward inverts the first factor first
    steps = facs if backward else facs[::-1]
    d = h.degree
    R = prm.radius(h)
    npts = z.size

    value = np.zeros(npts)
    iters = np.zeros(npts, dtype=int)
    converged = np.zeros(npts, dtype=bool)
    escaped = np.zeros(npts, dtype=bool)
    logmode = np.zeros(npts, dtype=bool)
    L = np.zeros(npts)  # log of the dominant coordinate in log mode
    prev = np.full(npts, np.nan)
    active = np.ones(npts, dtype=bool)

    def dominant(zz, ww):
        return np.abs(zz) if backward else np.abs(ww)

    def other(zz, ww):
        return np.abs(ww) if backward else np.abs(zz)

    scale = 1.0  # d^-n
    for n in range(prm.max_iter + 1):
        with np.errstate(all="ignore"):
            nrm = np.maximum(np.abs(z), np.abs(w))
            g = np.where(logmode, L, np.log(np.maximum(nrm, 1.0))) * scale
        dom, oth = dominant(z, w), other(z, w)
        cert = active & ~logmode & (dom > R) & (dom >= oth)
        escaped |= cert
        check = active & escaped
        with np.errstate(invalid="ignore"):
            done = check & np.isfinite(prev) & (np.abs(g - prev) < prm.tol)
        value[check] = g[check]
        converged |= done
        iters[active] = n
        active &= ~done
        prev = np.where(escaped, g, np.nan)
        if not active.any() or n == prm.max_iter:
            break
        for pcs, a, deg in steps:
            # enter log mode where the escaped dominant coordinate is too big for one more factor
            dom = dominant(z, w)
            enter = active & escaped & ~logmode & (dom > prm.log_switch(deg))
            L[enter] = np.log(dom[enter])
            logmode |= enter
            fast = active & ~logmode
            zf, wf = z[fast], w[fast]
            with np.errstate(all="ignore"):
                if backward:
                    zf, wf = (_horner(pcs, zf) - wf) / a, zf
                else:
                    zf, wf = wf, _horner(pcs, wf) - a * zf
            z[fast], w[fast] = zf, wf
            lm = active & logmode
            # the dominant coordinate is raised to the deg-th power (divided by a backward)
            L[lm] = deg * L[lm] - (math.log(abs(a)) if backward else 0.0)
        blown = active & ~logmode & ~np.isfinite(np.abs(z) + np.abs(w))
        if blown.any():
            # left double range without passing the certificate: keep last finite value
            escaped |= blown
            value[blown] = prev[blown] if np.isfinite(prev[blown]).all() else 0.0
            active &= ~blown
        scale /= d
    value[~escaped] = 0.0
    return GreenBatch(value, iters, converged, escaped)


def _dyn(h):
    """(composition, affine pre-map or None) for compositions or Hénon-type maps."""
    if isinstance(h, HenonComposition):
        return h, None
    from .words import henon_normal_form

    nf = henon_normal_form(h)
    if nf.kind != "henon":
        raise ValueError("map is conjugate to an elementary map; it has no Green's function of this kind")
    if not nf.conjugator_is_affine:
        raise ValueError("Green's functions need an affine conjugator to the Hénon normal form")
    return nf.composition, nf.conjugator.approx()


def eval_map(m: PolyMap2, z, w):
    """Evaluate a polynomial map on arrays of points."""
    m = m.approx()
    out = []
    for p in (m.first, m.second):
        acc = np.zeros_like(z, dtype=complex)
        for (i, j), c in p.terms.items():
            acc = acc + complex(c) * z**i * w**j
        out.append(acc)
    return out[0], out[1]


def green_batch(points, h, prm: GreenParams | None = None, backward: bool = False) -> GreenBatch:
    prm = prm or GreenParams()
    comp, pre = _dyn(h)
    z, w = _as_arrays(points)
    if pre is not None:
        z, w = eval_map(pre, z, w)
    return _green(comp, z, w, prm, backward)


def green_plus(pt, h, prm: GreenParams | None = None) -> GreenEstimate:
    return green_batch([pt], h, prm).estimate(0)


def green_minus(pt, h, prm: GreenParams | None = None) -> GreenEstimate:
    return green_batch([pt], h, prm, backward=True).estimate(0)


def in_kplus(pt, h, prm: GreenParams | None = None) -> str:
    return green_plus(pt, h, prm).classification


def in_kminus(pt, h, prm: GreenParams | None = None) -> str:
    return green_minus(pt, h, prm).classification


def classify_orbits(f: PolyMap2, points, radius: float = 1e10, max_iter: int = 400) -> np.ndarray:
    """True where the f-orbit leaves the radius-``radius`` bidisk within max_iter steps.

    No certificate is used, only the orbit itself; this is how K+ of a
    root is probed without borrowing anything from the map it is a root of.
    """
    z, w = _as_arrays(points)
    fa = f.approx()
    out = np.zeros(z.size, dtype=bool)
    active = np.ones(z.size, dtype=bool)
    for _ in range(max_iter):
        with np.errstate(all="ignore"):
            zn, wn = eval_map(fa, z[active], w[active])
        z[active], w[active] = zn, wn
        with np.errstate(invalid="ignore"):
            big = ~(np.maximum(np.abs(z), np.abs(w)) <= radius)
        out |= active & big
        active &= ~big
        if not active.any():
            break
    return out


# ---------------------------------------------------------------------------
# sampling checks


def _log_uniform_points(rng, count: int, lo: float, hi: float) -> np.ndarray:
    mags = np.exp(rng.uniform(math.log(lo), math.log(hi), count))
    return mags * np.exp(2j * math.pi * rng.uniform(0, 1, count))


@dataclass
class BoundsReport:
    c_plus: float
    c_minus: float
    max_defect_plus: float
    max_defect_minus: float
    scales: list = field(default_factory=list)
    c_plus_by_scale: list = field(default_factory=list)
    c_minus_by_scale: list = field(default_factory=list)
    bounded_points: int = 0
    bounded_nonzero: int = 0
    samples: int = 0

    def to_record(self) -> dict:
        return {
            "empirical_C_plus": self.c_plus,
            "empirical_C_minus": self.c_minus,
            "max_defect_plus": self.max_defect_plus,
            "max_defect_minus": self.max_defect_minus,
            "scales": self.scales,
            "C_plus_by_scale": self.c_plus_by_scale,
            "C_minus_by_scale": self.c_minus_by_scale,
            "bounded_points": self.bounded_points,
            "bounded_with_nonzero_G": self.bounded_nonzero,
            "samples_per_scale": self.samples,
        }


def check_bounds_lemma(h, prm: GreenParams | None = None, samples: int = 200, seed: int = 0,
                       max_scale_exp: int = 8) -> BoundsReport:
    """Empirical constants for the log+ comparison bounds on G+ and G-.

    C+ is the largest |G+ - log+|w|| over V- and the bidisk, C- the mirror
    quantity for G-; the defects are the largest G - max(log+|z|, log+|w|).
    Points are drawn per decade 10^0 .. 10^max_scale_exp (log-uniform
    magnitude, uniform phase), and C(scale) is the running maximum over
    decades up to ``scale``.  These are measurements, not bounds.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    prm = prm or GreenParams()
    comp, _ = _dyn(h)
    R = prm.radius(comp)
    rng = np.random.default_rng(seed)
    rep = BoundsReport(0.0, 0.0, -math.inf, -math.inf, samples=samples)
    cp = cm = 0.0
    for e in range(max_scale_exp + 1):
        lo, hi = 10.0**e, 10.0 ** (e + 1) if e < max_scale_exp else 10.0**e * 1.000001
        big = _log_uniform_points(rng, samples, lo, hi)
        # V- or bidisk: |z| <= max(|w|, R); mirrored for V+
        small = np.sqrt(rng.uniform(0, 1, samples)) * np.maximum(np.abs(big), R) * np.exp(
            2j * math.pi * rng.uniform(0, 1, samples))
        gp = green_batch(np.stack([small, big], 1), h, prm)
        gm = green_batch(np.stack([big, small], 1), h, prm, backward=True)
        lp = np.log(np.maximum(np.abs(big), 1.0))
        lmax = np.log(np.maximum(np.maximum(np.abs(big), np.abs(small)), 1.0))
        for batch in (gp, gm):
            b = ~batch.escaped
            rep.bounded_points += int(b.sum())
            rep.bounded_nonzero += int((batch.values[b] != 0).sum())
        cp = max(cp, float(np.max(np.abs(gp.values - lp))))
        cm = max(cm, float(np.max(np.abs(gm.values - lp))))
        rep.max_defect_plus = max(rep.max_defect_plus, float(np.max(gp.values - lmax)))
        rep.max_defect_minus = max(rep.max_defect_minus, float(np.max(gm.values - lmax)))
        rep.scales.append(10.0**e)
        rep.c_plus_by_scale.append(cp)
        rep.c_minus_by_scale.append(cm)
    rep.c_plus, rep.c_minus = cp, cm
    return rep


def fit_multiplier(f: PolyMap2, h, n: int, prm: GreenParams | None = None, samples: int = 200,
                   seed: int = 0, min_escaping: int = 5) -> MultiplierFit:
    """b with G+ o f = b G+, fitted as the median ratio over escaping samples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    prm = prm or GreenParams()
    rng = np.random.default_rng(seed)
    z = _log_uniform_points(rng, samples, 1.0, 1e3)
    w = _log_uniform_points(rng, samples, 1.0, 1e3)
    g0 = green_batch(np.stack([z, w], 1), h, prm)
    fz, fw = eval_map(f, z, w)
    g1 = green_batch(np.stack([fz, fw], 1), h, prm)
    ok = g0.escaped & g1.escaped & g0.converged & g1.converged & (g0.values > 1e-6)
    if ok.sum() < min_escaping:
        raise InsufficientSamples(f"only {int(ok.sum())} escaping samples, need {min_escaping}")
    ratios = g1.values[ok] / g0.values[ok]
    b = float(np.median(ratios))
    return MultiplierFit(b, float(np.max(np.abs(ratios - b))), int(ok.sum()))


# ---------------------------------------------------------------------------
# grids


@dataclass
class GridSlice:
    """Real 2-plane origin + x*u + y*v in C^2 over a box of (x, y)."""

    origin: tuple = (0j, 0j)
    u: tuple = (1 + 0j, 0j)
    v: tuple = (1j, 0j)
    xrange: tuple = (-2.0, 2.0)
    yrange: tuple = (-2.0, 2.0)

    @classmethod
    def complex_line(cls, origin, direction, xrange=(-2.0, 2.0), yrange=(-2.0, 2.0)) -> "GridSlice":
        d = tuple(complex(c) for c in direction)
        return cls(tuple(complex(c) for c in origin), d, tuple(1j * c for c in d), xrange, yrange)

    @classmethod
    def conjugate_diagonal(cls, xrange=(-2.0, 2.0), yrange=(-2.0, 2.0)) -> "GridSlice":
        """The real plane z = conj(w): (x - iy, x + iy)."""
        return cls((0j, 0j), (1 + 0j, 1 + 0j), (-1j, 1j), xrange, yrange)

    def points(self, nx: int, ny: int):
        xs = np.linspace(*self.xrange, nx) if nx > 1 else np.array([sum(self.xrange) / 2])
        ys = np.linspace(*self.yrange, ny)[::-1] if ny > 1 else np.array([sum(self.yrange) / 2])
        X, Y = np.meshgrid(xs, ys)
        pts = [self.origin[k] + X * self.u[k] + Y * self.v[k] for k in range(2)]
        return xs, ys, np.stack([pts[0].ravel(), pts[1].ravel()], 1)


@dataclass
class Grid:
    """Row-major values; row 0 is the largest y so the array reads as an image."""

    values: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    what: str


def emit_grid(h, slc: GridSlice, resolution: tuple[int, int], prm: GreenParams | None = None,
              what: str = KPLUS_MASK) -> Grid:
    nx, ny = resolution
    if nx < 1 or ny < 1:
        raise ValueError("resolution must be at least 1x1")
    if what not in GRID_KINDS:
        raise ValueError(f"unknown grid kind {what!r}; expected one of {', '.join(GRID_KINDS)}")
    xs, ys, pts = slc.points(nx, ny)
    batch = green_batch(pts, h, prm, backward=what in (GREEN_MINUS, KMINUS_MASK))
    if what in (GREEN_PLUS, GREEN_MINUS):
        vals = batch.values
    else:
        vals = (~batch.escaped).astype(float)  # 1 marks a bounded orbit
    return Grid(vals.reshape(ny, nx), xs, ys, what)


def write_pgm(grid: Grid, path, binary: bool = False) -> None:
    """16-bit PGM; the affine scale back to values sits in a header comment."""
    v = grid.values
    lo, hi = float(np.min(v)), float(np.max(v))
    span = hi - lo
    pix = np.zeros(v.shape, dtype=np.uint16) if span == 0 else np.rint((v - lo) / span * 65535).astype(np.uint16)
    ny, nx = v.shape
    header = f"{'P5' if binary else 'P2'}\n# {grid.what} value = {lo!r} + pixel * {span!r} / 65535\n{nx} {ny}\n65535\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            fh.write(pix.astype(">u2").tobytes())
        else:
            for row in pix:
                fh.write((" ".join(str(int(p)) for p in row) + "\n").encode("ascii"))


def write_csv(grid: Grid, path) -> None:
    with open(path, "w") as fh:
        fh.write("x,y,value\n")
        for j, y in enumerate(grid.ys):
            for i, x in enumerate(grid.xs):
                fh.write(f"{float(x)!r},{float(y)!r},{float(grid.values[j, i])!r}\n")
