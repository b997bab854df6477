import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import random_connected_row, reference_diffusion
from wardsim.network import (
    EdgeColor,
    Thresholds,
    build_network,
    classify_edge,
    diffuse_trust,
    network_summary,
    occupied_edges,
)


def test_neighbours_small_row():
    net = build_network(5)
    assert net.neighbours_of(0) == {1, 2}
    assert net.neighbours_of(2) == {0, 1, 3, 4}


def test_single_bed_has_no_edges():
    net = build_network(1)
    assert net.edges == frozenset()
    assert net.neighbours_of(0) == set()


@pytest.mark.parametrize("n", range(1, 11))
def test_edges_are_symmetric_and_loop_free(n):
    net = build_network(n)
    for i, j in net.edges:
        assert i < j
        assert 1 <= j - i <= 2
    for i in range(n):
        for j in net.neighbours_of(i):
            assert i in net.neighbours_of(j)
        assert i not in net.neighbours_of(i)


def test_invalid_network_parameters():
    with pytest.raises(ValueError):
        build_network(0)
    with pytest.raises(ValueError):
        build_network(3, alpha=0.0)
    with pytest.raises(ValueError):
        Thresholds(0.3, 0.1)
    with pytest.raises(ValueError):
        Thresholds(0.1, 2.5)


def test_two_patients_relax_toward_each_other():
    net = build_network(2, alpha=0.5)
    assert diffuse_trust([0.2, 0.8], net) == pytest.approx([0.35, 0.65], abs=1e-12)


def test_equal_trust_is_a_fixed_point():
    net = build_network(6)
    assert diffuse_trust([0.4] * 6, net) == [0.4] * 6


def test_empty_beds_and_isolated_patients_untouched():
    net = build_network(7)
    trust = [0.1, None, None, None, 0.9, float("nan"), None]
    out = diffuse_trust(trust, net)
    assert out[0] == 0.1 and out[4] == 0.9
    assert out[1] is None and math.isnan(out[5])


def test_wrong_length_rejected():
    with pytest.raises(ValueError):
        diffuse_trust([0.1, 0.2], build_network(3))


def test_path_of_three_reaches_consensus():
    net = build_network(3, alpha=0.05)
    trust = [0.0, 0.5, 1.0]
    for _ in range(10_000):
        trust = diffuse_trust(trust, net)
    assert max(trust) - min(trust) < 1e-6


@given(st.lists(st.one_of(st.none(), st.floats(0, 1)), min_size=1, max_size=10),
       st.floats(0.01, 1.0))
def test_diffusion_matches_reference_and_contracts(trust, alpha):
    net = build_network(len(trust), alpha=alpha)
    out = diffuse_trust(trust, net)
    assert out == reference_diffusion(trust, len(trust), alpha)
    occupied = [t for t in trust if t is not None]
    after = [t for t in out if t is not None]
    if occupied:
        assert min(after) >= min(occupied) and max(after) <= max(occupied)
        assert all(0.0 <= t <= 1.0 for t in after)


@pytest.mark.parametrize("seed", range(5))
def test_connected_rows_contract_every_hour(seed):
    rng = np.random.default_rng(seed)
    trust = random_connected_row(rng)
    net = build_network(len(trust))
    spread = None
    for _ in range(200):
        trust = diffuse_trust(trust, net)
        values = [t for t in trust if t is not None]
        new_spread = max(values) - min(values)
        if spread is not None:
            assert new_spread <= spread
        spread = new_spread


@pytest.mark.parametrize("a, b, color", [
    (0.90, 0.85, EdgeColor.GREEN),
    (0.50, 0.30, EdgeColor.YELLOW),
    (0.90, 0.30, EdgeColor.RED),
    (0.0, 0.1, EdgeColor.YELLOW),
    (0.0, 0.3, EdgeColor.RED),
])
def test_edge_colours(a, b, color):
    assert classify_edge(a, b) is color


def test_summary_counts():
    net = build_network(4)
    assert network_summary([0.5] * 4, net) == {"green": 5, "yellow": 0, "red": 0}
    assert network_summary([0.1, 0.9], build_network(2)) == {"green": 0, "yellow": 0, "red": 1}
    assert network_summary([None] * 4, net) == {"green": 0, "yellow": 0, "red": 0}


def test_occupied_edges_skip_empty_beds():
    net = build_network(4)
    edges = list(occupied_edges([0.2, None, 0.25, 0.9], net))
    assert [(i, j) for i, j, _, _ in edges] == [(0, 2), (2, 3)]
    assert edges[1][3] is EdgeColor.RED
    assert edges[0][2] == pytest.approx(0.05)
