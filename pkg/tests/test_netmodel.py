import itertools
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgregion.netmodel import (
    HEX,
    TopologyError,
    build_hex,
    build_wyner,
    hex_color_partition,
    hop_distance,
)


def test_line_neighbors():
    topo = build_wyner(3)
    assert topo.neighbors(2) == {1, 3}
    assert topo.neighbors(1) == {2}
    assert build_wyner(1).neighbors(1) == frozenset()


def test_line_rejects_bad_sizes_and_labels():
    for K in (0, -2, 2.5):
        with pytest.raises(TopologyError):
            build_wyner(K)
    with pytest.raises(TopologyError):
        build_wyner(3).neighbors(4)


def test_hex_neighbors_of_origin():
    topo = build_hex(6, 6)
    assert topo.neighbors((0, 0)) == {(1, 0), (5, 0), (0, 1), (0, 5), (1, 1), (5, 5)}
    assert hop_distance(topo, (0, 0), (2, 2)) == 2


def test_hex_size_rules():
    with pytest.raises(TopologyError):
        build_hex(4, 4)
    topo = build_hex(4, 3)
    assert topo.K == 12
    with pytest.raises(TopologyError):
        hex_color_partition(topo)


def test_coloring_example():
    topo = build_hex(6, 6)
    part = hex_color_partition(topo)
    assert part.color_of(topo, (0, 0)) == 1
    assert part.color_of(topo, (1, 0)) == 2
    assert part.color_of(topo, (1, 1)) == 3
    for c in (1, 2, 3):
        assert len(part.members(c)) == 12


def _bfs(topo, src):
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in topo.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5))
def test_coloring_is_proper_and_balanced(w, h):
    topo = build_hex(3 * w, 3 * h)
    part = hex_color_partition(topo)
    for i, nbrs in enumerate(topo.adjacency):
        assert len(set(nbrs)) == 6 or min(topo.W, topo.H) == 3
        own = part.color[i]
        for c in (1, 2, 3):
            count = sum(1 for j in nbrs if part.color[j] == c)
            assert count == (0 if c == own else 3)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_hop_distance_matches_bfs(w, h, data):
    topo = build_hex(3 * w, 3 * h)
    src = data.draw(st.integers(0, topo.K - 1))
    dist = _bfs(topo, src)
    for j in range(topo.K):
        assert hop_distance(topo, src, j) == dist[j]


@given(st.integers(1, 60))
def test_line_graph_is_symmetric_path(K):
    topo = build_wyner(K)
    assert len(topo.edges()) == K - 1
    for a, b in itertools.combinations(range(1, K + 1), 2):
        assert (b in topo.neighbors(a)) == (a in topo.neighbors(b)) == (b - a == 1)
        assert hop_distance(topo, a, b) == b - a


def test_topology_json_header():
    js = build_hex(3, 3).to_json()
    assert js["kind"] == HEX and js["K"] == 9
    assert "row-major" in js["indexing"]
