import functools

import numpy as np
import pytest

from oaiflex.errors import OAIError
from oaiflex.planar import build_spec
from oaiflex.screening import admissible_tau
from oaiflex.planar import xys_to_deltas

# worked example: base angles given to five decimals, delta4 closes the sum
EXAMPLE_DELTAS = np.array([1.36292, 1.41009, 1.80327, 2 * np.pi - 1.36292 - 1.41009 - 1.80327])
EXAMPLE_TAU = -np.arctan(60.0)
# reference table (alpha, beta, gamma rows); gamma2, gamma3 disagree, see README
EXAMPLE_TABLE = {
    "alpha": [1.34086, 1.42575, 1.69859, 1.81798],
    "gamma": [1.15746, 2.00166, 1.4875, 1.63656],
    "beta": [1.11122, 1.18397, 1.61684, 1.68958],
}


@pytest.fixture(scope="session")
def example_spec():
    return build_spec(EXAMPLE_DELTAS, EXAMPLE_TAU)


@functools.lru_cache(maxsize=None)
def random_specs(n: int, seed: int = 0) -> tuple:
    """``n`` specs at random admissible points of the (x, y, s) box."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        x, y, s = rng.uniform(-np.pi / 2, np.pi / 2, 3)
        tau, _ = admissible_tau(x, y, s)
        if tau is None:
            continue
        try:
            out.append(build_spec(xys_to_deltas(x, y, s), tau, strict=False))
        except OAIError:
            continue
    return tuple(out)
