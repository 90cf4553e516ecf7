"""
Shared fixtures for the CURVE-DESIGNS test suite
"""

import pytest

from curvedesigns.autgroup import brute_aut
from curvedesigns.designs import BlockKind, IncidenceStructure, build_design
from curvedesigns.gf2n import new_field_ctx


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: brute-force groups at n = 4 and large-n sampling")


@pytest.fixture(scope="session")
def f4():
    return new_field_ctx(2)


@pytest.fixture(scope="session")
def f8():
    return new_field_ctx(3)


@pytest.fixture(scope="session")
def f16():
    return new_field_ctx(4)


@pytest.fixture(scope="session")
def parabola8(f8):
    return build_design(f8, BlockKind.PARABOLA)


@pytest.fixture(scope="session")
def hyperbola8(f8):
    return build_design(f8, BlockKind.HYPERBOLA)


@pytest.fixture(scope="session")
def aut_u8(parabola8):
    return brute_aut(parabola8)


@pytest.fixture(scope="session")
def aut_o8(hyperbola8):
    return brute_aut(hyperbola8)


@pytest.fixture
def swap_points():
    """Exchange one point between two blocks; sizes and replication survive, pair counts do not"""

    def swap(design: IncidenceStructure, first: int = 0) -> IncidenceStructure:
        masks = list(design.block_masks)
        a = masks[first]
        for k, b in enumerate(masks):
            only_a, only_b = a & ~b, b & ~a
            if k != first and only_a and only_b:
                x = only_a & -only_a
                y = only_b & -only_b
                masks[first] = a ^ x ^ y
                masks[k] = b ^ x ^ y
                break
        return IncidenceStructure.from_masks(design.v, masks, design.kind, design.labels,
                                             design.point_labels, design.ctx)

    return swap
