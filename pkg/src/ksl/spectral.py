"""Matrix-free centered operators and the three-condition synchronization certificate.

For a reference density p0 the certificate looks at

    Delta_A = A - p0 J,        Delta_L = L + p0 J - n p0 I,

and declares the graph certified when

    1. ||Delta_A|| / (n p0) < 1/12
    2. ||Delta_L|| / (n p0) < 1/4
    3. (pi/4) / asin(12 ||Delta_A|| / (n p0))
           > log(n/6) / log(n p0 / (2 ||Delta_L||) - 1) + 1

An inconclusive verdict only means the sufficient condition failed.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConvergenceFailure, InvalidArgument
from .graphs import Graph

log = logging.getLogger(__name__)

DENOM_NONPOSITIVE = "denominator-nonpositive"
COND1_BOUND = 1.0 / 12.0
COND2_BOUND = 0.25
_ROUNDING_FLOOR = 1e-12


def _as_block(g: Graph, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != g.n or v.ndim > 2:
        raise InvalidArgument(f"vector of shape {v.shape} does not match n={g.n}")
    return v


def _check_p0(p0):
    if not 0.0 < p0 <= 1.0:
        raise InvalidArgument(f"p0 must lie in (0, 1], got {p0}")


def delta_a_matvec(g: Graph, p0: float, v) -> np.ndarray:
    """(A - p0 J) v.  ``v`` may be a vector or an (n, k) block."""
    _check_p0(p0)
    v = _as_block(g, v)
    return g.matvec(v) - p0 * v.sum(axis=0)


def delta_l_matvec(g: Graph, p0: float, v) -> np.ndarray:
    """(L + p0 J - n p0 I) v with L v = deg * v - A v."""
    _check_p0(p0)
    v = _as_block(g, v)
    deg = g.degrees if v.ndim == 1 else g.degrees[:, None]
    return deg * v - g.matvec(v) + p0 * v.sum(axis=0) - g.n * p0 * v


def spectral_norm(matvec: Callable[[np.ndarray], np.ndarray], n: int, tol: float = 1e-6,
                  max_iter: Optional[int] = None, rng: Optional[np.random.Generator] = None,
                  block: int = 4) -> float:
    """Largest |eigenvalue| of a symmetric operator given only its action.

    Simultaneous power iteration on the squared operator with a small block
    of random start vectors; the estimate is the top Rayleigh-Ritz value of
    the block, which never exceeds the true norm.  ``matvec`` must accept
    an (n, k) array.  Stops once an Aitken-style extrapolation of the
    remaining increase drops below ``tol / 10`` relative.

    Raises ConvergenceFailure (carrying the lower bound) after ``max_iter``
    iterations, default min(10 n, 5000).
    """
    if tol <= 0:
        raise InvalidArgument(f"tol must be positive, got {tol}")
    if max_iter is None:
        max_iter = min(10 * n, 5000)
    rng = rng if rng is not None else np.random.default_rng(0)
    b = max(1, min(block, n))
    q, _ = np.linalg.qr(rng.standard_normal((n, b)))
    hist = []
    est = 0.0
    for k in range(1, max_iter + 1):
        w = matvec(q)
        mu = np.linalg.eigvalsh(w.T @ w)[-1]
        est = math.sqrt(max(mu, 0.0))
        if est == 0.0:
            return 0.0
        hist.append(est)
        if len(hist) >= 3:
            d1 = hist[-1] - hist[-2]
            d0 = hist[-2] - hist[-3]
            if d0 > 0 and 0 <= d1 < d0:
                rho = d1 / d0
                if d1 / (1 - rho) <= 0.1 * tol * est:
                    return est
            elif abs(d1) <= 1e-15 * est and abs(d0) <= 1e-15 * est:
                return est
        q, _ = np.linalg.qr(matvec(w))
    raise ConvergenceFailure(f"no convergence in {max_iter} iterations", est, max_iter)


def _norm_or_bound(mv, n, tol, rng):
    try:
        return spectral_norm(mv, n, tol=tol, rng=rng), True
    except ConvergenceFailure as exc:
        log.warning("spectral norm did not converge; using lower bound %.6g", exc.lower_bound)
        return exc.lower_bound, False


@dataclass
class CertificateReport:
    n: int
    p0: float
    norm_delta_a: float
    norm_delta_l: float
    ratio_a: float
    ratio_l: float
    cond1: bool
    cond2: bool
    cond3: bool
    cond3_lhs: Optional[float]
    cond3_rhs: Union[float, str]
    verdict: str
    selfloop_convention: bool
    norm_tolerance: float
    # False when a norm is only a lower bound; never serialized
    converged: bool = field(default=True, repr=False)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in REPORT_KEYS}
        if d["cond3_lhs"] is not None and math.isinf(d["cond3_lhs"]):
            d["cond3_lhs"] = "inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


REPORT_KEYS = (
    "n", "p0", "norm_delta_a", "norm_delta_l", "ratio_a", "ratio_l", "cond1", "cond2",
    "cond3", "cond3_lhs", "cond3_rhs", "verdict", "selfloop_convention", "norm_tolerance",
)


def evaluate_conditions(n: int, p0: float, norm_a: float, norm_l: float, tol: float = 1e-6,
                        self_loops: bool = False, converged: bool = True) -> CertificateReport:
    """Build a report from precomputed norms."""
    if n <= 6:
        raise InvalidArgument(f"certificate needs n >= 7 so that log(n/6) > 0, got n={n}")
    _check_p0(p0)
    scale = n * p0
    ratio_a = norm_a / scale
    ratio_l = norm_l / scale
    cond1 = ratio_a < COND1_BOUND
    cond2 = ratio_l < COND2_BOUND
    if not converged:
        # a lower bound on the norm can refute a condition but never confirm one
        cond1 = cond2 = False

    if 12 * ratio_a >= 1:
        lhs = None
    elif ratio_a == 0:
        lhs = math.inf
    else:
        lhs = (math.pi / 4) / math.asin(12 * ratio_a)

    if norm_l == 0:
        rhs: Union[float, str] = 1.0
    else:
        inner = scale / (2 * norm_l) - 1
        rhs = DENOM_NONPOSITIVE if inner <= 1 else math.log(n / 6) / math.log(inner) + 1

    cond3 = lhs is not None and rhs != DENOM_NONPOSITIVE and lhs > rhs and converged
    verdict = "certified" if cond1 and cond2 and cond3 else "inconclusive"
    return CertificateReport(
        n=n, p0=p0, norm_delta_a=norm_a, norm_delta_l=norm_l, ratio_a=ratio_a,
        ratio_l=ratio_l, cond1=cond1, cond2=cond2, cond3=cond3, cond3_lhs=lhs,
        cond3_rhs=rhs, verdict=verdict, selfloop_convention=self_loops,
        norm_tolerance=tol, converged=converged,
    )


def check_certificate(g: Graph, p0: Optional[float] = None, tol: float = 1e-6,
                      rng: Optional[np.random.Generator] = None) -> CertificateReport:
    """Evaluate the three certificate conditions on ``g``.

    ``p0`` defaults to the sampling density recorded in the graph's provenance.
    """
    if p0 is None:
        if g.provenance is None or g.provenance.p is None:
            raise InvalidArgument("p0 not given and graph has no sampling density")
        p0 = g.provenance.p
    if g.n <= 6:
        raise InvalidArgument(f"certificate needs n >= 7 so that log(n/6) > 0, got n={g.n}")
    _check_p0(p0)
    rng = rng if rng is not None else np.random.default_rng(0)
    norm_a, ok_a = _norm_or_bound(lambda v: delta_a_matvec(g, p0, v), g.n, tol, rng)
    norm_l, ok_l = _norm_or_bound(lambda v: delta_l_matvec(g, p0, v), g.n, tol, rng)
    # matvec rounding leaves ~n * eps residue on operators that vanish exactly
    floor = _ROUNDING_FLOOR * (g.n * p0 + g.max_degree)
    norm_a = 0.0 if norm_a <= floor else norm_a
    norm_l = 0.0 if norm_l <= floor else norm_l
    return evaluate_conditions(g.n, p0, norm_a, norm_l, tol, g.self_loops, ok_a and ok_l)


def certificate_margin(report: CertificateReport) -> float:
    """Smallest signed slack over the three conditions; negative iff inconclusive."""
    if not report.converged:
        return -math.inf
    s1 = COND1_BOUND - report.ratio_a
    s2 = COND2_BOUND - report.ratio_l
    if report.cond3_lhs is None or report.cond3_rhs == DENOM_NONPOSITIVE:
        s3 = -math.inf
    else:
        s3 = report.cond3_lhs - report.cond3_rhs
    return min(s1, s2, s3)
