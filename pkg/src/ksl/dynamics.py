"""Homogeneous Kuramoto model as a gradient flow.

Energy is summed over ordered pairs,

    E(theta) = sum_{i,j} a_ij (1 - cos(theta_i - theta_j)),

so each undirected edge counts twice and dE/dtheta_i = 2 sum_j a_ij sin(theta_i - theta_j).
The usual K/n prefactor of the ODE is a positive time rescaling and is dropped.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import IntegrationFailure, InvalidArgument
from .graphs import Graph

GRAD_TOL = 1e-8
RHO_TOL = 1e-6
MAX_HALVINGS = 40
DESCENT_SLACK = 1e-9

SYNCHRONIZED = "synchronized"
SPURIOUS = "spurious"
NONSTATIONARY = "nonstationary"
NONCONVERGED = "nonconverged"


@dataclass
class PhaseState:
    theta: np.ndarray
    t: float = 0.0

    def wrapped(self) -> np.ndarray:
        return np.mod(self.theta, 2 * np.pi)


@dataclass
class FlowResult:
    final: PhaseState
    status: str
    steps: int
    final_energy: float
    final_grad_inf_norm: float
    final_rho1_abs: float
    trajectory_summary: Optional[List[Tuple[float, float, float, float]]] = field(default=None, repr=False)

    def write_trajectory(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "E", "rho1_abs", "grad_inf"])
            for row in self.trajectory_summary or ():
                w.writerow([repr(float(x)) for x in row])


def _phases(g: Graph, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (g.n,):
        raise InvalidArgument(f"phase vector of shape {theta.shape} does not match n={g.n}")
    return theta


def _trig(g, theta):
    cs = np.column_stack([np.cos(theta), np.sin(theta)])
    return cs, g.matvec(cs)


def energy(g: Graph, theta) -> float:
    theta = _phases(g, theta)
    cs, acs = _trig(g, theta)
    # sum_ij a_ij cos(ti - tj) = c^T A c + s^T A s
    return float(g.degrees.sum() - np.sum(cs * acs))


def grad(g: Graph, theta) -> np.ndarray:
    theta = _phases(g, theta)
    cs, acs = _trig(g, theta)
    # sum_j a_ij sin(ti - tj) = sin(ti) (A c)_i - cos(ti) (A s)_i
    return 2.0 * (cs[:, 1] * acs[:, 0] - cs[:, 0] * acs[:, 1])


def order_parameter(theta, k: int = 1) -> complex:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.size == 0:
        raise InvalidArgument("need at least one phase")
    if k < 0:
        raise InvalidArgument(f"k must be >= 0, got {k}")
    return complex(np.mean(np.exp(1j * k * theta)))


def random_phases(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=n)


def classify_equilibrium(g: Graph, theta, grad_tol: float = GRAD_TOL, rho_tol: float = RHO_TOL) -> str:
    gn = float(np.max(np.abs(grad(g, theta))))
    if gn >= grad_tol:
        return NONSTATIONARY
    if 1.0 - abs(order_parameter(theta, 1)) < rho_tol:
        return SYNCHRONIZED
    return SPURIOUS


def rk4_step(g: Graph, theta: np.ndarray, h: float, k1: Optional[np.ndarray] = None) -> np.ndarray:
    """One classical RK4 step of theta' = -grad E(theta)."""
    if k1 is None:
        k1 = -grad(g, theta)
    k2 = -grad(g, theta + 0.5 * h * k1)
    k3 = -grad(g, theta + 0.5 * h * k2)
    k4 = -grad(g, theta + h * k3)
    return theta + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def default_step(g: Graph, scale: float = 0.01) -> float:
    return scale / (1 + g.max_degree)


def integrate(g: Graph, theta0, step: Optional[float] = None, t_max: float = 1e4,
              stop_grad_tol: float = GRAD_TOL, sample_every: Optional[int] = None,
              rho_tol: float = RHO_TOL) -> FlowResult:
    """Run the gradient flow from ``theta0`` with energy-guarded RK4.

    A step that raises the energy by more than 1e-9 is retried at half the
    step size; the reduced step is kept afterwards.  Stops when the gradient
    sup-norm falls below ``stop_grad_tol`` or flow time reaches ``t_max``.
    If ``sample_every`` is set, (t, E, |rho_1|, grad_inf) is recorded every
    that many accepted steps.
    """
    theta = _phases(g, theta0).copy()
    h = default_step(g) if step is None else float(step)
    if h <= 0:
        raise InvalidArgument(f"step must be positive, got {h}")
    t = 0.0
    steps = 0
    halvings = 0
    e = energy(g, theta)
    gr = grad(g, theta)
    gn = float(np.max(np.abs(gr)))
    traj = [] if sample_every else None

    def record():
        traj.append((t, e, abs(order_parameter(theta, 1)), gn))

    if traj is not None:
        record()
    while gn >= stop_grad_tol and t < t_max:
        h_now = min(h, t_max - t)
        while True:
            cand = rk4_step(g, theta, h_now, -gr)
            e_cand = energy(g, cand)
            if e_cand <= e + DESCENT_SLACK:
                break
            halvings += 1
            if halvings > MAX_HALVINGS:
                raise IntegrationFailure(f"step size underflow at t={t:.6g} after {MAX_HALVINGS} halvings")
            h_now *= 0.5
            h = min(h, h_now)
        theta, e, t = cand, e_cand, t + h_now
        steps += 1
        gr = grad(g, theta)
        gn = float(np.max(np.abs(gr)))
        if traj is not None and steps % sample_every == 0:
            record()
    if traj is not None and traj[-1][0] != t:
        record()

    rho = abs(order_parameter(theta, 1))
    if gn >= stop_grad_tol:
        status = NONCONVERGED
    elif 1.0 - rho < rho_tol:
        status = SYNCHRONIZED
    else:
        status = SPURIOUS
    return FlowResult(PhaseState(theta, t), status, steps, e, gn, rho, traj)


def twisted_state(n: int, q: int = 1) -> np.ndarray:
    return 2 * np.pi * q * np.arange(n) / n


def sync_rate(results) -> float:
    results = list(results)
    if not results:
        return math.nan
    return sum(r.status == SYNCHRONIZED for r in results) / len(results)
