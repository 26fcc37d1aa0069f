import math

import numpy as np
import pytest

from heatlab import (
    build_circle,
    build_hyperbolic_model,
    build_interval,
    build_solver,
    build_sphere_model,
)

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def circle200():
    return build_circle(200, TWO_PI)


@pytest.fixture(scope="session")
def interval200():
    return build_interval(200, 1.0)


@pytest.fixture(scope="session")
def sphere200():
    return build_sphere_model(200, 2.0)


@pytest.fixture(scope="session")
def hyperbolic200():
    return build_hyperbolic_model(200, 2.0, 1.0)


@pytest.fixture(scope="session")
def sphere400():
    return build_sphere_model(400, 2.0)


@pytest.fixture(scope="session")
def hyperbolic400():
    return build_hyperbolic_model(400, 2.0, 1.0)


@pytest.fixture(scope="session")
def solvers(circle200, interval200, sphere200, hyperbolic200, sphere400, hyperbolic400):
    """Shared eigendecompositions; building them once keeps the suite fast."""
    spaces = {
        "circle200": circle200,
        "interval200": interval200,
        "sphere200": sphere200,
        "hyperbolic200": hyperbolic200,
        "sphere400": sphere400,
        "hyperbolic400": hyperbolic400,
    }
    return {name: build_solver(space) for name, space in spaces.items()}


def smooth_random_values(space, rng, modes=3, floor=0.2, amplitude=1.0):
    """Boundary-compatible smooth nonnegative field values (test helper)."""
    values = np.zeros(space.n_nodes)
    for k in range(1, modes + 1):
        if space.is_circle:
            values += rng.normal() / k**2 * np.cos(TWO_PI * k * space.nodes / space.length)
            values += rng.normal() / k**2 * np.sin(TWO_PI * k * space.nodes / space.length)
        else:
            rel = (space.nodes - space.nodes[0]) / (space.nodes[-1] - space.nodes[0])
            values += rng.normal() / k**2 * np.cos(np.pi * k * rel)
    span = values.max() - values.min()
    if span < 1e-12:
        return np.full(space.n_nodes, floor)
    return floor + amplitude * (values - values.min()) / span
