"""Reproducible random (Q, v0) instances spread over every spectral route."""

from __future__ import annotations

import numpy as np

ROUTES = ("general", "defective", "scalar", "rank-one", "center")


def random_matrix(rng: np.random.Generator, route: str, bound: float = 3.0) -> np.ndarray:
    """A random matrix with entries in ``[-bound, bound]`` whose spectrum follows ``route``."""
    if route == "general":
        return rng.uniform(-bound, bound, (2, 2))
    if route == "defective":
        # lam I + s x y^T with y orthogonal to x; lam = 0 half of the time
        lam = 0.0 if rng.random() < 0.5 else rng.uniform(-bound / 2, bound / 2)
        th = rng.uniform(0.0, 2.0 * np.pi)
        x = np.array([np.cos(th), np.sin(th)])
        y = np.array([-x[1], x[0]])
        s = rng.uniform(-bound / 2, bound / 2)
        return lam * np.eye(2) + s * np.outer(x, y)
    if route == "scalar":
        return rng.uniform(-bound, bound) * np.eye(2)
    if route == "rank-one":
        r = np.sqrt(bound)
        return np.outer(rng.uniform(-r, r, 2), rng.uniform(-r, r, 2))
    if route == "center":
        while True:
            a, b, c = rng.uniform(-bound, bound, 3)
            if a * a + b * c < -1e-3:
                return np.array([[a, b], [c, -a]])
    raise ValueError(f"unknown route {route!r}")


def stratified_instances(n: int, seed: int = 0, v_bound: float = 5.0):
    """Yield ``(route, Q, v0)`` with routes cycling so each gets ``n // 5`` or more."""
    rng = np.random.default_rng(seed)
    for i in range(n):
        route = ROUTES[i % len(ROUTES)]
        Q = random_matrix(rng, route)
        v0 = rng.uniform(-v_bound, v_bound, 2)
        yield route, Q, v0
