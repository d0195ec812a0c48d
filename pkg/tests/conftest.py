import numpy as np
import pytest

from mathieuspec import MathieuPotential, make_solver

POTS = {
    "free": MathieuPotential(0, 0),
    "sa": MathieuPotential(1 + 0.5j, 1 - 0.5j),
    "equal": MathieuPotential(1, 1),
    "asym": MathieuPotential(1, 2),
    "negprod": MathieuPotential(1, -1),
    "gasymov": MathieuPotential(0, 1),
}


@pytest.fixture(scope="session")
def solvers():
    """Shared tracked solvers; building them dominates suite runtime."""
    cache = {}

    def get(name, n_max=9, t_points=96):
        key = (name, n_max, t_points)
        if key not in cache:
            cache[key] = make_solver(POTS[name], n_max, t_points)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
