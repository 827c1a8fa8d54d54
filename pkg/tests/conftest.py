import numpy as np
import pytest
from hypothesis import settings

import hitwalk as hw

settings.register_profile("suite", max_examples=25, deadline=None)
settings.load_profile("suite")


@pytest.fixture
def diamond():
    """Four-node worked example: K_4 minus the {0,3} edge.

    With target 0 the reduced system is
        Q = [[0, 1/3, 1/3], [1/3, 0, 1/3], [1/2, 1/2, 0]],
        P1 = (1/3, 1/3, 0).
    """
    return hw.Graph(4, ((0, 1), (0, 2), (1, 2), (1, 3), (2, 3)))


@pytest.fixture
def diamond_system(diamond):
    return hw.make_absorbing(hw.simple_walk_kernel(diamond), 0)


def preset_zoo(max_nodes=None):
    """Small instances of every preset family, for sweep tests."""
    graphs = {
        "cycle3": hw.build_cycle(3),
        "cycle4": hw.build_cycle(4),
        "cycle6": hw.build_cycle(6),
        "path2": hw.build_path(2),
        "path4": hw.build_path(4),
        "path6": hw.build_path(6),
        "complete2": hw.build_complete(2),
        "complete4": hw.build_complete(4),
        "complete6": hw.build_complete(6),
        "bipartite_1_2": hw.build_complete_bipartite(1, 2),
        "bipartite_2_3": hw.build_complete_bipartite(2, 3),
        "hypercube1": hw.build_hypercube(1),
        "hypercube2": hw.build_hypercube(2),
        "hypercube3": hw.build_hypercube(3),
        "torus_std3": hw.build_torus_standard(3),
        "torus_diag3": hw.build_torus_diagonal(3),
        "cayley_s3": hw.cayley_s3(),
        "cayley_d8": hw.cayley_d8(),
    }
    if max_nodes is not None:
        graphs = {k: g for k, g in graphs.items() if g.node_count <= max_nodes}
    return graphs
