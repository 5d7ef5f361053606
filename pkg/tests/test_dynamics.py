import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ksl.dynamics import (
    NONCONVERGED, NONSTATIONARY, SPURIOUS, SYNCHRONIZED, classify_equilibrium, default_step,
    energy, grad, integrate, order_parameter, random_phases, rk4_step, sync_rate, twisted_state,
)
from ksl.errors import IntegrationFailure, InvalidArgument
from ksl.graphs import Graph, sample_er

from .oracles import brute_energy, fd_grad, random_adjacency


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph.from_dense(~np.eye(n, dtype=bool))


def test_energy_constant_phases():
    g = sample_er(15, 0.5, np.random.default_rng(0))
    assert energy(g, np.full(15, 1.3)) == pytest.approx(0.0, abs=1e-12)


def test_energy_single_edge_antiphase():
    g = Graph.from_edges(2, [(0, 1)])
    assert energy(g, [0.0, math.pi]) == pytest.approx(4.0, abs=1e-12)


def test_energy_matches_double_loop():
    rng = np.random.default_rng(1)
    for _ in range(10):
        a = random_adjacency(20, 0.4, rng)
        theta = rng.uniform(-10, 10, 20)
        assert energy(Graph.from_dense(a), theta) == pytest.approx(brute_energy(a, theta), abs=1e-10)


def test_energy_self_loops_irrelevant():
    g = sample_er(20, 0.4, np.random.default_rng(2))
    theta = random_phases(20, np.random.default_rng(3))
    assert energy(g.with_self_loops(), theta) == pytest.approx(energy(g, theta), abs=1e-12)
    assert np.allclose(grad(g.with_self_loops(), theta), grad(g, theta), atol=1e-12)


def test_grad_constant_phases():
    g = sample_er(12, 0.6, np.random.default_rng(4))
    assert np.max(np.abs(grad(g, np.full(12, -2.0)))) <= 1e-12


@pytest.mark.parametrize("n", [5, 8, 12, 31])
@pytest.mark.parametrize("q", [1, 2])
def test_grad_twisted_state(n, q):
    assert np.max(np.abs(grad(cycle(n), twisted_state(n, q)))) <= 1e-12


def test_grad_finite_differences():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = Graph.from_dense(random_adjacency(20, 0.3, rng))
        theta = rng.uniform(0, 2 * np.pi, 20)
        fd = fd_grad(lambda x: energy(g, x), theta)
        an = grad(g, theta)
        assert np.linalg.norm(an - fd) <= 1e-6 * np.linalg.norm(an)


def test_grad_sums_to_zero():
    g = sample_er(40, 0.3, np.random.default_rng(6))
    theta = random_phases(40, np.random.default_rng(7))
    assert abs(grad(g, theta).sum()) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-50, 50), seed=st.integers(0, 10**6))
def test_rotation_invariance(c, seed):
    rng = np.random.default_rng(seed)
    g = Graph.from_dense(random_adjacency(12, 0.5, rng))
    theta = rng.uniform(0, 2 * np.pi, 12)
    assert abs(energy(g, theta + c) - energy(g, theta)) <= 1e-12
    assert np.max(np.abs(grad(g, theta + c) - grad(g, theta))) <= 1e-12


def test_periodic_in_each_coordinate():
    rng = np.random.default_rng(8)
    g = Graph.from_dense(random_adjacency(15, 0.5, rng))
    theta = rng.uniform(0, 2 * np.pi, 15)
    for i in range(15):
        shifted = theta.copy()
        shifted[i] += 2 * np.pi
        assert abs(energy(g, shifted) - energy(g, theta)) <= 1e-12
        assert np.max(np.abs(grad(g, shifted) - grad(g, theta))) <= 1e-12


def test_size_mismatch():
    with pytest.raises(InvalidArgument):
        energy(complete(3), [0.0, 1.0])
    with pytest.raises(InvalidArgument):
        grad(complete(3), [0.0])


def test_order_parameter_examples():
    assert order_parameter(np.full(7, 0.4), 1) == pytest.approx(complex(math.cos(0.4), math.sin(0.4)))
    assert abs(order_parameter(twisted_state(9), 1)) <= 1e-12
    assert order_parameter(np.random.default_rng(9).uniform(0, 6, 5), 0) == 1
    with pytest.raises(InvalidArgument):
        order_parameter([0.1], -1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=30), st.integers(0, 5))
def test_order_parameter_bounded(theta, k):
    assert abs(order_parameter(theta, k)) <= 1 + 1e-12


def test_random_phases():
    assert 0 <= random_phases(1, np.random.default_rng(0))[0] < 2 * np.pi
    x = random_phases(100_000, np.random.default_rng(1))
    assert x.min() >= 0 and x.max() < 2 * np.pi
    assert abs(np.cos(x).mean()) <= 0.02
    assert np.array_equal(random_phases(10, np.random.default_rng(2)),
                          random_phases(10, np.random.default_rng(2)))


def two_oscillator_exact(delta0, t):
    # delta' = -4 sin(delta)  =>  tan(delta/2) = tan(delta0/2) exp(-4t)
    return 2 * math.atan(math.tan(delta0 / 2) * math.exp(-4 * t))


def test_two_oscillators_synchronize():
    g = Graph.from_edges(2, [(0, 1)])
    res = integrate(g, [0.0, 3.0])
    assert res.status == SYNCHRONIZED
    assert res.final_rho1_abs > 1 - 1e-6
    # phase sum is conserved, both end at the midpoint
    assert np.allclose(res.final.theta, 1.5, atol=1e-8)


def test_two_oscillators_against_closed_form():
    g = Graph.from_edges(2, [(0, 1)])
    for t_end in (0.1, 0.5, 1.0):
        coarse = integrate(g, [0.0, 3.0], step=0.005, t_max=t_end, stop_grad_tol=0)
        fine = integrate(g, [0.0, 3.0], step=0.00005, t_max=t_end, stop_grad_tol=0)
        exact = two_oscillator_exact(3.0, t_end)
        for res, tol in ((coarse, 1e-8), (fine, 1e-12)):
            delta = res.final.theta[1] - res.final.theta[0]
            assert delta == pytest.approx(exact, abs=tol)


def test_constant_start_converges_immediately():
    g = complete(6)
    res = integrate(g, np.full(6, 2.0))
    assert res.steps == 0 and res.final_energy == pytest.approx(0.0, abs=1e-12)
    assert res.status == SYNCHRONIZED


def test_single_vertex():
    g = Graph.from_dense(np.zeros((1, 1), bool))
    res = integrate(g, [1.0])
    assert res.steps == 0 and res.status == SYNCHRONIZED


def hessian_fd(g, theta, h=1e-6):
    n = len(theta)
    hess = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        hess[:, i] = (grad(g, theta + e) - grad(g, theta - e)) / (2 * h)
    return (hess + hess.T) / 2


def test_twisted_c5_is_local_minimum():
    ev = np.linalg.eigvalsh(hessian_fd(cycle(5), twisted_state(5)))
    # one zero mode from global rotation, the rest strictly positive
    assert abs(ev[0]) <= 1e-6
    assert ev[1] > 0.1


def test_twisted_c5_perturbed_returns():
    rng = np.random.default_rng(10)
    theta0 = twisted_state(5) + rng.uniform(-0.01, 0.01, 5)
    res = integrate(cycle(5), theta0)
    assert res.status == SPURIOUS
    assert res.final_rho1_abs < 1e-6
    assert res.final_grad_inf_norm < 1e-8


def test_classify():
    assert classify_equilibrium(complete(5), np.full(5, 0.7)) == SYNCHRONIZED
    assert classify_equilibrium(cycle(5), twisted_state(5)) == SPURIOUS
    theta = random_phases(10, np.random.default_rng(11))
    assert np.max(np.abs(grad(complete(10), theta))) > 1e-8
    assert classify_equilibrium(complete(10), theta) == NONSTATIONARY


def test_classification_stable_under_tiny_perturbation():
    # |grad| <= 4 maxdeg |delta|, so maxdeg <= 2 keeps a 1e-9 kick below 1e-8
    rng = np.random.default_rng(12)
    for g in (cycle(7), Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])):
        res = integrate(g, random_phases(g.n, rng), stop_grad_tol=1e-12)
        assert res.status == SYNCHRONIZED
        for _ in range(20):
            kick = rng.uniform(-1e-9, 1e-9, g.n)
            assert classify_equilibrium(g, res.final.theta + kick) == SYNCHRONIZED


def test_energy_descent_along_trajectory():
    rng = np.random.default_rng(13)
    g = sample_er(30, 0.3, rng)
    res = integrate(g, random_phases(30, rng), sample_every=1)
    energies = [row[1] for row in res.trajectory_summary]
    assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))


def test_rk4_fourth_order():
    rng = np.random.default_rng(14)
    g = sample_er(12, 0.5, rng)
    theta0 = random_phases(12, rng)
    t_end = 0.05

    def run(h):
        theta = theta0.copy()
        for _ in range(int(round(t_end / h))):
            theta = rk4_step(g, theta, h)
        return energy(g, theta)

    ref = run(t_end / 3200)
    h = t_end / 25
    e1, e2 = abs(run(h) - ref), abs(run(h / 2) - ref)
    assert 12 < e1 / e2 < 20


def test_integration_failure_on_runaway_step():
    # near synchrony any wildly oversized step lands higher; 40 halvings cannot recover
    g = complete(8)
    theta0 = 1e-3 * random_phases(8, np.random.default_rng(15))
    with pytest.raises(IntegrationFailure):
        integrate(g, theta0, step=1e14, t_max=1e30)


def test_nonconverged_when_out_of_time():
    res = integrate(complete(8), random_phases(8, np.random.default_rng(16)), t_max=1e-3)
    assert res.status == NONCONVERGED and res.final.t == pytest.approx(1e-3)


def test_k10_all_inits_synchronize():
    g = complete(10)
    rng = np.random.default_rng(17)
    results = [integrate(g, random_phases(10, rng)) for _ in range(20)]
    assert sync_rate(results) == 1.0
    for r in results:
        assert r.final_grad_inf_norm < 1e-8 and r.final_rho1_abs > 1 - 1e-6


def test_c5_has_twisted_basin():
    g = cycle(5)
    rng = np.random.default_rng(18)
    results = [integrate(g, random_phases(5, rng), step=default_step(g, 0.1)) for _ in range(200)]
    assert sync_rate(results) < 1.0


def test_trajectory_csv(tmp_path):
    g = complete(5)
    res = integrate(g, random_phases(5, np.random.default_rng(19)), sample_every=50)
    path = tmp_path / "traj.csv"
    res.write_trajectory(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,E,rho1_abs,grad_inf"
    assert len(lines) == len(res.trajectory_summary) + 1
    assert float(lines[-1].split(",")[0]) == pytest.approx(res.final.t)
