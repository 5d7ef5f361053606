"""Uniform points on the unit sphere and the inner-product threshold t(p, d).

The edge rule of the spherical random geometric graph is <X_i, X_j> >= t,
with t chosen so that the marginal edge probability is exactly p.  For two
independent uniform points on S^{d-1} the inner product s has density
proportional to (1 - s^2)^((d-3)/2).  Writing s = sin(u) turns that into
cos(u)^(d-2) on [-pi/2, pi/2], which is bounded for every d >= 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InvalidArgument, ParseError

CDF_TOL = 1e-10

# cos(u)^m < exp(-m u^2 / 2) is below 1e-40 past this many standard widths
_TAIL_CUTOFF = math.sqrt(2 * 40 * math.log(10))


@dataclass(frozen=True, eq=False)
class PointCloud:
    coords: np.ndarray

    def __post_init__(self):
        c = self.coords
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 2:
            raise InvalidArgument(f"point cloud must be n x d with n >= 1, d >= 2, got {c.shape}")
        c.setflags(write=False)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def gram(self) -> np.ndarray:
        return self.coords @ self.coords.T


@dataclass(frozen=True)
class Threshold:
    p: float
    d: int
    t: float


def sample_sphere_points(n: int, d: int, rng: np.random.Generator) -> PointCloud:
    """Draw n i.i.d. uniform points on S^{d-1} by normalizing Gaussian vectors."""
    if n < 1 or d < 2:
        raise InvalidArgument(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    x = rng.standard_normal((n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return PointCloud(x)


def _cos_power_integral(a: float, b: float, m: int) -> float:
    """Integral of cos(u)^m over [a, b], 0 <= a <= b <= pi/2."""
    if m == 0:
        return b - a
    width = 1.0 / math.sqrt(m)
    b = min(b, _TAIL_CUTOFF * width, math.pi / 2)
    if b <= a:
        return 0.0
    # breakpoints at multiples of the peak width keep quad from missing mass
    pts = [x for x in (width * k for k in (0.5, 1, 2, 4, 8)) if a < x < b]
    val, _ = quad(
        lambda u: math.exp(m * math.log(math.cos(u))) if u < math.pi / 2 else 0.0,
        a, b, points=pts or None, epsabs=0.0, epsrel=1e-12, limit=200,
    )
    return val


def inner_product_cdf(t: float, d: int) -> float:
    """P(<X, Y> >= t) for X, Y independent uniform on S^{d-1}."""
    if not -1.0 <= t <= 1.0 or math.isnan(t):
        raise InvalidArgument(f"t must lie in [-1, 1], got {t}")
    if d < 2:
        raise InvalidArgument(f"d must be >= 2, got {d}")
    if t == 0.0:
        return 0.5
    if t < 0:
        return 1.0 - inner_product_cdf(-t, d)
    m = d - 2
    half = _cos_power_integral(0.0, math.pi / 2, m)
    upper = _cos_power_integral(math.asin(t), math.pi / 2, m)
    return min(0.5, 0.5 * upper / half)


def threshold(p: float, d: int, tol: float = CDF_TOL) -> Threshold:
    """Invert inner_product_cdf by bisection: returns t with |cdf(t) - p| <= tol."""
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"p must lie in (0, 1), got {p}")
    if d < 2:
        raise InvalidArgument(f"d must be >= 2, got {d}")
    lo, hi = -1.0, 1.0  # cdf(lo) = 1 >= p >= 0 = cdf(hi)
    t = 0.0
    for _ in range(200):
        t = 0.5 * (lo + hi)
        c = inner_product_cdf(t, d)
        if abs(c - p) <= tol:
            break
        if c > p:
            lo = t
        else:
            hi = t
        if hi - lo < 1e-16:
            break
    return Threshold(p=p, d=d, t=t)


def save_points(cloud: PointCloud, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{cloud.n} {cloud.d}\n")
        for row in cloud.coords:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_points(path) -> PointCloud:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    try:
        n, d = (int(x) for x in lines[0].split())
    except ValueError:
        raise ParseError(f"bad header {lines[0]!r}, expected 'n d'", 1) from None
    if len(lines) - 1 != n:
        raise ParseError(f"header declares {n} points, found {len(lines) - 1}", 1)
    coords = np.empty((n, d))
    for k, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != d:
            raise ParseError(f"expected {d} coordinates, got {len(parts)}", k + 2)
        try:
            coords[k] = [float(x) for x in parts]
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {line!r}", k + 2) from None
    return PointCloud(coords)
