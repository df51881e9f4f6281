import pytest

import inlslab as il
from inlslab.grid import GridMapping

REF = dict(d=3, b=0.5, sigma=2.0, c=0.0)


@pytest.fixture(scope="session")
def p_ref():
    return il.validate(**REF)


@pytest.fixture(scope="session")
def grid_ref(p_ref):
    """Fine-inner-radius grid for functional and ground-state work."""
    return il.build_grid(p_ref, 2048, 20.0)


@pytest.fixture(scope="session")
def gs_ref(p_ref, grid_ref):
    return il.solve_ground_state(p_ref, grid_ref)


@pytest.fixture(scope="session")
def grid_evolve(p_ref):
    """Evolution grid: inner radius where the stiffness guard stays quiet."""
    return il.build_grid(p_ref, 2048, 20.0, GridMapping("log", 1e-2))


@pytest.fixture(scope="session")
def gs_evolve(p_ref, grid_evolve):
    return il.solve_ground_state(p_ref, grid_evolve)


@pytest.fixture(scope="session")
def grid_blowup(p_ref):
    """Finer inner radius so collapse stays resolved to useful growth."""
    return il.build_grid(p_ref, 2048, 20.0, GridMapping("log", 2e-4))


@pytest.fixture(scope="session")
def gs_blowup(p_ref, grid_blowup):
    return il.solve_ground_state(p_ref, grid_blowup)
