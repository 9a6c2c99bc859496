import logging

import numpy as np
import pytest

from qp_types import BoxQpInstance, ForgeSpec


@pytest.fixture
def indefinite2():
    """Q = [[-1, -2], [-2, 1]], c = (1, 1): RLT value -1/4, global value 0."""
    return BoxQpInstance(np.array([[-1.0, -2.0], [-2.0, 1.0]]), np.array([1.0, 1.0]))


@pytest.fixture
def concave3():
    """Q = ee^T/3 - I, c = 0."""
    return BoxQpInstance(np.full((3, 3), 1.0 / 3.0) - np.eye(3), np.zeros(3))


@pytest.fixture
def spec():
    return ForgeSpec(seed=11)


@pytest.fixture(scope="session")
def random_instances():
    """1000 symmetric Gaussian instances, n from 2 to 5."""
    rng = np.random.default_rng(2024)
    instances = []
    for k in range(1000):
        n = 2 + k % 4
        A = rng.normal(size=(n, n))
        instances.append(BoxQpInstance(A + A.T, rng.normal(size=n)))
    return instances


@pytest.fixture(autouse=True)
def restore_root_handlers():
    """The CLI reconfigures the root logger; undo that after each test."""
    root = logging.getLogger()
    before = list(root.handlers)
    level = root.level
    yield
    for handler in list(root.handlers):
        if handler not in before:
            root.removeHandler(handler)
            handler.close()
    for handler in before:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)
