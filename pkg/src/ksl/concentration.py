"""Monte Carlo checks of the concentration facts behind the high-probability claim.

Covers the adjacency-norm bound ||A - E A|| <= K sqrt(np) for G(n, p), the
per-vertex degree deviation bound sqrt(np) log n, the epsilon used to size the
coupled Erdos-Renyi sandwich, the monotone ER-ER coupling itself, and the
ordering of Laplacian quadratic forms along nested graphs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np

from .errors import InvalidArgument, PreconditionError
from .graphs import Graph, GraphProvenance, laplacian_quadratic, sample_er, subgraph_of
from .spectral import delta_a_matvec, spectral_norm

log = logging.getLogger(__name__)

SAMPLE_FIELDS = ("trial", "seed", "statistic", "observed", "bound", "bound_satisfied", "formula")


@dataclass
class ConcentrationSample:
    trial: int
    seed: Optional[int]
    statistic: str
    observed: float
    bound: float
    bound_satisfied: bool
    formula: str

    def as_row(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EpsilonParams:
    n: int
    p: float
    d: float
    C_eps: float
    C_d: float
    epsilon: float
    side_bound: float  # C_eps sqrt((np + log n) log^4 n / d)

    @property
    def side_inequality_holds(self) -> bool:
        return self.epsilon >= self.side_bound

    @property
    def vacuous(self) -> bool:
        # p(1 + eps) > 1 once eps >= 1/p, and already eps >= 1 is useless
        return self.epsilon >= 1.0


def epsilon_of(n: int, p: float, d: float, C_eps: float = 1.0, C_d: float = 1.0) -> EpsilonParams:
    if n * p <= 0:
        raise InvalidArgument(f"need np > 0, got n={n}, p={p}")
    if C_d <= 0:
        raise InvalidArgument(f"C_d must be positive, got {C_d}")
    eps = max(C_eps / math.sqrt(C_d), 6.0) * math.sqrt(2.0 / (n * p))
    ln = math.log(n)
    side = C_eps * math.sqrt((n * p + ln) * ln ** 4 / d)
    return EpsilonParams(n, p, d, C_eps, C_d, eps, side)


def _trial_rng(rng: np.random.Generator):
    seed = int(rng.integers(0, 2**63 - 1))
    return seed, np.random.default_rng(seed)


def adjacency_concentration(n: int, p: float, trials: int, rng: np.random.Generator,
                            K: float = 2.5, tol: float = 1e-6) -> List[ConcentrationSample]:
    """Measure ||A - E A|| / sqrt(np) on ``trials`` draws of G(n, p).

    Diagonal entries are Bernoulli(p) so that E A = pJ exactly.  The observed
    value is the measured constant; it is compared against ``K``.
    """
    if n * p <= math.log(n):
        log.warning("np = %.3g <= log n = %.3g: outside the lemma's hypothesis", n * p, math.log(n))
    out = []
    for trial in range(trials):
        seed, trng = _trial_rng(rng)
        g = sample_er(n, p, trng, self_loops=True, seed=seed)
        norm = spectral_norm(lambda v: delta_a_matvec(g, p, v), n, tol=tol, rng=trng)
        ratio = norm / math.sqrt(n * p)
        out.append(ConcentrationSample(trial, seed, "adjacency_norm_over_sqrt_np", ratio, K,
                                       ratio <= K, f"||A - pJ|| / sqrt(np) <= K, K={K}"))
    return out


def degree_concentration(g: Graph, p: Optional[float] = None, trial: int = 0,
                         seed: Optional[int] = None) -> ConcentrationSample:
    """max_i |deg_i - np| against sqrt(np) log n."""
    if p is None:
        if g.provenance is None or g.provenance.p is None:
            raise InvalidArgument("p not given and graph has no sampling density")
        p = g.provenance.p
    n = g.n
    dev = float(np.max(np.abs(g.degrees - n * p)))
    bound = math.sqrt(n * p) * math.log(n)
    return ConcentrationSample(trial, seed, "max_degree_deviation", dev, bound, dev <= bound,
                               "max_i |deg_i - np| <= sqrt(np) log n")


def sample_coupled_er(n: int, p: float, eps: float, rng: np.random.Generator,
                      self_loops: bool = False):
    """Monotone coupling of G(n, p(1 - eps)) inside G(n, p(1 + eps)).

    One uniform per pair: present in both when U <= p(1 - eps), in the larger
    graph only when p(1 - eps) < U <= p(1 + eps).
    """
    if not 0 <= eps <= 1:
        raise InvalidArgument(f"eps must lie in [0, 1], got {eps}")
    if p < 0 or p * (1 + eps) > 1:
        raise InvalidArgument(f"need 0 <= p(1 + eps) <= 1, got p={p}, eps={eps}")
    u = np.triu(rng.random((n, n)), k=0 if self_loops else 1)
    mask = np.triu(np.ones((n, n), dtype=bool), k=0 if self_loops else 1)
    lo = mask & (u <= p * (1 - eps))
    hi = mask & (u <= p * (1 + eps))
    lo, hi = lo | lo.T, hi | hi.T
    g_minus = Graph.from_dense(lo, self_loops, GraphProvenance("ER", n, p * (1 - eps)))
    g_plus = Graph.from_dense(hi, self_loops, GraphProvenance("ER", n, p * (1 + eps)))
    return g_minus, g_plus


def degree_gap_sample(g_minus: Graph, g_plus: Graph, p: float, eps: float, trial: int = 0,
                      seed: Optional[int] = None) -> ConcentrationSample:
    """max_i (D+ - D-)_ii against the Chernoff threshold 4 p eps n."""
    gap = g_plus.degrees - g_minus.degrees
    bound = 4 * p * eps * g_plus.n
    obs = float(gap.max())
    return ConcentrationSample(trial, seed, "max_degree_gap", obs, bound, obs <= bound,
                               "max_i (D+ - D-)_ii <= 4 p eps n")


def sandwich_quadratic_check(g_minus: Graph, g: Graph, g_plus: Graph, num_vectors: int,
                             rng: np.random.Generator, slack: float = 1e-12) -> bool:
    """v^T L- v <= v^T L v <= v^T L+ v on ``num_vectors`` Gaussian vectors."""
    if not (subgraph_of(g_minus, g) and subgraph_of(g, g_plus)):
        raise PreconditionError("graphs are not nested g_minus <= g <= g_plus")
    for _ in range(num_vectors):
        v = rng.standard_normal(g.n)
        lo, mid, hi = (laplacian_quadratic(h, v) for h in (g_minus, g, g_plus))
        tol = slack * max(1.0, hi)
        if lo > mid + tol or mid > hi + tol:
            return False
    return True


def coupled_sandwich_trial(n: int, p: float, eps: float, num_vectors: int,
                           rng: np.random.Generator, trial: int = 0) -> List[ConcentrationSample]:
    """One coupled triple: G- <= G <= G+ with G = G- plus a random half of the extra edges."""
    seed, trng = _trial_rng(rng)
    g_minus, g_plus = sample_coupled_er(n, p, eps, trng)
    extra = g_plus.dense() & ~g_minus.dense()
    keep = np.triu(extra & (trng.random((n, n)) < 0.5), k=1)
    mid = Graph.from_dense(g_minus.dense() | keep | keep.T)
    ok = sandwich_quadratic_check(g_minus, mid, g_plus, num_vectors, trng)
    return [
        ConcentrationSample(trial, seed, "sandwich_quadratic", float(ok), 1.0, ok,
                            "v^T L- v <= v^T L v <= v^T L+ v"),
        degree_gap_sample(g_minus, g_plus, p, eps, trial, seed),
    ]
