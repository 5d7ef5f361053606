"""Independent reference computations used only by the tests."""
import math

import numpy as np


def jacobi_eigenvalues(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi rotations on a dense symmetric matrix."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * max(1.0, np.linalg.norm(a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    return np.sort(np.diag(a))


def dense_norm(a):
    ev = jacobi_eigenvalues(a)
    return max(abs(ev[0]), abs(ev[-1]))


def dense_delta_a(adj, p0):
    n = adj.shape[0]
    return adj.astype(float) - p0 * np.ones((n, n))


def dense_delta_l(adj, p0):
    a = adj.astype(float)
    n = a.shape[0]
    lap = np.diag(a.sum(axis=1)) - a
    return lap + p0 * np.ones((n, n)) - n * p0 * np.eye(n)


def brute_energy(adj, theta):
    n = len(theta)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if adj[i, j]:
                total += 1 - math.cos(theta[i] - theta[j])
    return total


def fd_grad(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def random_adjacency(n, p, rng):
    u = np.triu(rng.random((n, n)) < p, k=1)
    return u | u.T


def sphere_pairs_mc(d, pairs, rng, chunk=100_000):
    """Inner products of ``pairs`` independent pairs of uniform sphere points."""
    out = []
    left = pairs
    while left:
        m = min(chunk, left)
        x = rng.standard_normal((m, d))
        y = rng.standard_normal((m, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        out.append(np.einsum("ij,ij->i", x, y))
        left -= m
    return np.concatenate(out)
