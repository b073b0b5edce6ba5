import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qccd_shuttle.arch_graph import (
    ENTRY,
    EXIT,
    INTERFACE,
    MEMORY,
    PROCESSING,
    GridSpec,
    build_grid_graph,
    find_cycle,
    free_edge_search,
    junction_distance,
    shortest_path_edges,
)
from qccd_shuttle.circuit import full_register_access
from qccd_shuttle.exceptions import NoCycleError, SaturationError, UnknownElementError, ValidationError
from qccd_shuttle.placement import IonPlacement
from qccd_shuttle.scheduler import Schedule, TimeStep
from qccd_shuttle.verifier_oracle import verify_schedule

specs = st.builds(
    GridSpec,
    m=st.integers(2, 4),
    n=st.integers(2, 4),
    v=st.integers(1, 3),
    h=st.integers(1, 3),
    entry_corner=st.sampled_from(["top-right", "top-left", "bottom-left", "bottom-right"]),
)


def seg_edge(g, u, w):
    """Edge of the segment between junctions u and w that touches u."""
    for s in g.segments:
        if {s.a, s.b} == {u, w} and s.orientation != INTERFACE:
            return s.end_edge(u)
    raise AssertionError(f"no segment {u}-{w}")


def bfs_oracle(g):
    """0-1 weighted line graph over memory edges, built from the raw node tables."""
    lg = nx.Graph()
    for e in g.memory_edges:
        lg.add_node(e)
    for x in range(g.num_nodes):
        inc = [e for e in g.node_edges[x] if g.edge_tag[e] == MEMORY]
        w = 1 if g.node_kind[x] == "major" else 0
        for i, a in enumerate(inc):
            for b in inc[i + 1:]:
                lg.add_edge(a, b, weight=w)
    return lg


# -- construction ---------------------------------------------------------
@pytest.mark.parametrize("dims, count", [((3, 3, 1, 1), 12), ((2, 2, 1, 5), 12), ((2, 2, 1, 1), 4)])
def test_memory_edge_count_examples(dims, count):
    assert len(build_grid_graph(GridSpec(*dims)).memory_edges) == count


@pytest.mark.parametrize("field, dims", [("m", (1, 3, 1, 1)), ("n", (3, 1, 1, 1)), ("v", (3, 3, 0, 1)), ("h", (3, 3, 1, 0))])
def test_invalid_spec_names_field(field, dims):
    with pytest.raises(ValidationError) as err:
        build_grid_graph(GridSpec(*dims))
    assert err.value.field == field


@settings(max_examples=40, deadline=None)
@given(specs)
def test_graph_invariants(spec):
    g = build_grid_graph(spec)
    assert len(g.memory_edges) == spec.memory_edge_count
    tags = list(g.edge_tag)
    assert tags.count(ENTRY) == tags.count(PROCESSING) == tags.count(EXIT) == 1
    for x in range(g.num_nodes):
        deg = len(g.node_edges[x])
        if g.node_kind[x] == "minor":
            assert deg == 2
        else:
            mem_deg = sum(g.is_memory(e) for e in g.node_edges[x])
            assert 2 <= mem_deg <= 4
    for s in g.segments:
        if s.orientation == "vertical":
            assert len(s.edges) == spec.v
        elif s.orientation == "horizontal":
            assert len(s.edges) == spec.h
    # the interface hangs off the configured corner junction
    assert g.pz_junction in g.edge_nodes[g.entry_edge]
    assert g.pz_junction in g.edge_nodes[g.exit_edge]
    r, c = g.node_coord[g.pz_junction]
    assert r in (0, spec.m - 1) and c in (0, spec.n - 1)


def test_numbering_is_deterministic():
    a = build_grid_graph(GridSpec(3, 4, 2, 3))
    b = build_grid_graph(GridSpec(3, 4, 2, 3))
    assert a.edge_nodes == b.edge_nodes and a.node_kind == b.node_kind
    # majors come first, row-major
    assert all(a.node_kind[i] == "major" for i in range(12))
    assert a.node_coord[5] == (1, 1)


def test_dot_export_mentions_every_edge():
    g = build_grid_graph(GridSpec(2, 2, 1, 2))
    dot = g.to_dot()
    assert dot.startswith("graph") and dot.count("--") == g.num_edges


# -- distances ------------------------------------------------------------
def test_distance_trivial_cases():
    g = build_grid_graph(GridSpec(3, 3, 1, 1))
    e = seg_edge(g, 0, 1)
    assert junction_distance(g, e, e) == 0
    assert junction_distance(g, seg_edge(g, 0, 1), seg_edge(g, 1, 4)) == 1
    with pytest.raises(UnknownElementError):
        junction_distance(g, 0, 999)


def test_distance_matches_bfs_oracle_3322():
    g = build_grid_graph(GridSpec(3, 3, 2, 2))
    lg = bfs_oracle(g)
    rng = random.Random(7)
    for _ in range(300):
        a, b = rng.choice(g.memory_edges), rng.choice(g.memory_edges)
        assert junction_distance(g, a, b) == nx.dijkstra_path_length(lg, a, b)


def test_shortest_path_examples_and_oracle_4411():
    g = build_grid_graph(GridSpec(4, 4, 1, 1))
    e = g.memory_edges[0]
    assert shortest_path_edges(g, e, e) == [e]
    nb = next(e2 for _, e2 in g.neighbors(e) if g.is_memory(e2))
    assert shortest_path_edges(g, e, nb) == [e, nb]
    lg = bfs_oracle(g)
    rng = random.Random(3)
    for _ in range(200):
        a, b = rng.choice(g.memory_edges), rng.choice(g.memory_edges)
        path = shortest_path_edges(g, a, b)
        assert path[0] == a and path[-1] == b
        crossings = sum(g.is_major(g.shared_node(x, y)) for x, y in zip(path, path[1:]))
        assert crossings == junction_distance(g, a, b) == nx.dijkstra_path_length(lg, a, b)


@settings(max_examples=25, deadline=None)
@given(specs, st.randoms(use_true_random=False))
def test_distance_is_a_metric(spec, rnd):
    g = build_grid_graph(spec)
    edges = list(g.memory_edges)
    for _ in range(20):
        a, b, c = (rnd.choice(edges) for _ in range(3))
        d_ab = junction_distance(g, a, b)
        assert d_ab >= 0
        assert d_ab == junction_distance(g, b, a)
        assert (d_ab == 0) == (a == b or g.edge_segment[a] == g.edge_segment[b])
        assert junction_distance(g, a, c) <= d_ab + junction_distance(g, b, c)


def test_entry_distance_of_interface():
    g = build_grid_graph(GridSpec(3, 3, 1, 1))
    assert g.entry_distance[g.processing_edge] == 0
    assert g.entry_distance[g.entry_edge] == 0
    assert g.entry_distance[seg_edge(g, 2, 1)] == 1


# -- cycles ---------------------------------------------------------------
def test_turn_block_is_one_rectangle_3311():
    g = build_grid_graph(GridSpec(3, 3, 1, 1))
    mover = seg_edge(g, 3, 4)  # horizontal edge arriving at the centre
    heading = seg_edge(g, 4, 1)  # turn upwards
    cyc = find_cycle(g, mover, 4, heading)
    assert len(cyc) == 4 and cyc.successor(mover) == heading


def test_turn_block_is_one_rectangle_3333():
    g = build_grid_graph(GridSpec(3, 3, 3, 3))
    mover = seg_edge(g, 3, 4)
    heading = seg_edge(g, 4, 1)
    cyc = find_cycle(g, mover, 4, heading)
    assert len(cyc) == 12 == 2 * 3 + 2 * 3
    assert mover in cyc.edges and heading in cyc.edges


def test_straight_block_is_two_rectangles_and_rotation_is_legal():
    g = build_grid_graph(GridSpec(3, 3, 1, 1))
    mover = seg_edge(g, 3, 4)
    heading = seg_edge(g, 4, 5)
    cyc = find_cycle(g, mover, 4, heading)
    assert len(cyc) == 6
    # fill the whole loop and rotate once; the verifier must accept it
    positions = {c: e for c, e in enumerate(cyc.edges)}
    after = cyc.rotate(positions)
    moves = [(c, positions[c], after[c]) for c in positions]
    report = verify_schedule(g, full_register_access(0), IonPlacement(positions), Schedule([TimeStep(0, moves)]))
    assert report.ok, report.to_text()
    chain = cyc.edges.index(mover)
    assert after[chain] == heading


@settings(max_examples=40, deadline=None)
@given(specs, st.randoms(use_true_random=False))
def test_cycle_properties(spec, rnd):
    g = build_grid_graph(spec)
    majors = [x for x in range(g.num_nodes) if g.is_major(x)]
    x = rnd.choice(majors)
    segs = [s for s in g.segments if s.orientation != INTERFACE and x in (s.a, s.b)]
    s_in, s_out = rnd.sample(segs, 2)
    mover = rnd.choice(s_in.edges)
    heading = s_out.end_edge(x)
    try:
        cyc = find_cycle(g, mover, x, heading)
    except NoCycleError:
        return
    k = len(cyc)
    assert len(set(cyc.edges)) == k and mover in cyc.edges
    for i in range(k):
        assert g.shared_node(cyc.edges[i], cyc.edges[(i + 1) % k]) is not None
    assert cyc.successor(s_in.end_edge(x)) == heading
    occupied = rnd.sample(cyc.edges, rnd.randint(0, k))
    pos = {c: e for c, e in enumerate(occupied)}
    after = cyc.rotate(pos)
    assert sorted(after) == sorted(pos)
    assert len(set(after.values())) == len(after)
    assert set(after.values()) <= set(cyc.edges)


def test_no_cycle_when_heading_is_own_segment():
    g = build_grid_graph(GridSpec(3, 3, 1, 1))
    with pytest.raises(NoCycleError):
        find_cycle(g, seg_edge(g, 3, 4), 4, seg_edge(g, 3, 4))


# -- free edge search -------------------------------------------------------
def test_free_edge_examples():
    g = build_grid_graph(GridSpec(3, 3, 1, 1))
    e = free_edge_search(g, set(), 0)
    assert 0 in g.edge_nodes[e]
    with pytest.raises(SaturationError):
        free_edge_search(g, set(g.memory_edges), 0)


def test_free_edge_is_nearest_by_distance_scan():
    g = build_grid_graph(GridSpec(3, 3, 1, 1))
    lg = bfs_oracle(g)
    hop = nx.Graph()
    hop.add_nodes_from(g.memory_edges)
    hop.add_edges_from(lg.edges())
    for seed in range(30):
        rng = random.Random(seed)
        occ = set(rng.sample(g.memory_edges, 6))
        start = rng.randrange(9)
        e = free_edge_search(g, occ, start)
        assert e not in occ
        first = [f for f in g.node_edges[start] if g.is_memory(f)]
        depth = {f: min(nx.shortest_path_length(hop, s, f) for s in first) + 1 for f in g.memory_edges}
        assert depth[e] == min(depth[f] for f in g.memory_edges if f not in occ)
