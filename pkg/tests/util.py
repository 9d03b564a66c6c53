"""Shared fixture generators and independent oracles for the test suite.

Everything is seeded; no test depends on wall-clock or global RNG state.
The oracles here deliberately avoid the library's closed-form code paths:
expectations are computed by direct summation, grids, or generic convex
optimization so each check stays a genuine second route.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize

from alphaleak import Alphabet, Channel, Dist, Joint


def random_dist(rng: np.random.Generator, n: int, conc: float = 1.0) -> Dist:
    return Dist(Alphabet.of_size(n), rng.dirichlet(np.full(n, conc)))


def random_channel(rng: np.random.Generator, n_in: int, n_out: int, conc: float = 1.0) -> Channel:
    rows = rng.dirichlet(np.full(n_out, conc), size=n_in)
    return Channel(Alphabet.of_size(n_in, "x"), Alphabet.of_size(n_out, "y"), rows)


def random_joint(rng: np.random.Generator, n_row: int, n_col: int, conc: float = 1.0) -> Joint:
    m = rng.dirichlet(np.full(n_row * n_col, conc)).reshape(n_row, n_col)
    return Joint(Alphabet.of_size(n_row, "x"), Alphabet.of_size(n_col, "y"), m)


def simplex_grid(resolution: int, dim: int) -> np.ndarray:
    """All points of the dim-simplex with coordinates k/resolution."""
    points = []
    for combo in itertools.combinations(range(resolution + dim - 1), dim - 1):
        prev = -1
        parts = []
        for c in combo:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + dim - 2 - prev)
        points.append(parts)
    return np.asarray(points, dtype=float) / resolution


def maximize_over_simplex(fun, dim: int, coarse: int = 12) -> float:
    """max of a (quasi-)concave function over the probability simplex:
    coarse grid seeding followed by SLSQP polishing from the best seeds."""
    grid = simplex_grid(coarse, dim)
    values = np.array([fun(p) for p in grid])
    order = np.argsort(values)[::-1][:4]
    best = float(values.max())
    constraint = {"type": "eq", "fun": lambda p: p.sum() - 1.0}
    for idx in order:
        res = minimize(
            lambda p: -fun(np.abs(p) / np.abs(p).sum()),
            grid[idx] + 1e-9,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * dim,
            constraints=[constraint],
            options={"maxiter": 300, "ftol": 1e-14},
        )
        if res.success or math.isfinite(res.fun):
            p = np.abs(res.x) / np.abs(res.x).sum()
            best = max(best, float(fun(p)))
    return best


def expected_alpha_loss_of(joint_m: np.ndarray, strategies: np.ndarray, alpha) -> np.ndarray:
    """E[alpha-loss] for a batch of strategies.

    strategies has shape (batch, n_y, n_x): entry [k, y, x] is the mass the
    k-th strategy puts on x after seeing y.  Direct summation against the
    joint; no library code involved.
    """
    jm = joint_m.T[None, :, :]  # (1, n_y, n_x)
    if alpha == "inf" or (isinstance(alpha, float) and math.isinf(alpha)):
        return (jm * (1.0 - strategies)).sum(axis=(1, 2))
    a = float(alpha)
    if a == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(strategies > 0, np.log(strategies), -np.inf)
        vals = np.where(jm > 0, -logs, 0.0)
        return (jm * np.where(jm > 0, vals, 0.0)).sum(axis=(1, 2))
    powed = strategies ** ((a - 1.0) / a)
    return a / (a - 1.0) * (jm * (1.0 - powed)).sum(axis=(1, 2))


def random_strategies(rng: np.random.Generator, count: int, n_y: int, n_x: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_x), size=(count, n_y))
