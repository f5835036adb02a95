import pytest

from graphmoves.errors import GraphError
from graphmoves.fixtures import FIXTURES, fix_b2, fix_inf, fix_loop, fix_vi_e, fix_vi_f
from graphmoves.graph import (
    Graph,
    Ray,
    VertexSet,
    build_graph,
    canonical_key,
    detect_tails,
    full_vertex_set,
    graphs_equal,
    in_multiplicity,
    materialize,
    node_ref,
    out_multiplicity,
    out_slots,
    parse_ref,
    reaches,
    simple_cycles,
    singularities,
    vertex_reaches,
)
from graphmoves.multiplicity import Mult, OMEGA, ONE

# ---------------------------------------------------------------------------
# validation


def test_duplicate_vertex_rejected():
    with pytest.raises(GraphError) as err:
        build_graph({"vertices": ["a", "a"], "edges": []})
    assert err.value.code == "DUPLICATE_ID"


def test_ray_id_shadowing_core_rejected():
    with pytest.raises(GraphError) as err:
        build_graph({
            "vertices": ["L"],
            "edges": [{"src": "L", "dst": "L", "mult": 1}],
            "rays": [{"id": "L", "entry": [{"src": "L", "mult": 1}], "prefix": [], "cycle": [[]]}],
        })
    assert err.value.code == "DUPLICATE_ID"


def test_core_id_shadowing_ray_position_rejected():
    with pytest.raises(GraphError) as err:
        build_graph({
            "vertices": ["v", "L.x0"],
            "edges": [{"src": "v", "dst": "L.x0", "mult": 1}],
            "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}], "prefix": [], "cycle": [[]]}],
        })
    assert err.value.code == "DUPLICATE_ID"


def test_dangling_endpoint_rejected():
    with pytest.raises(GraphError) as err:
        build_graph({"vertices": ["a"], "edges": [{"src": "a", "dst": "b", "mult": 1}]})
    assert err.value.code == "DANGLING_ENDPOINT"


def test_zero_multiplicity_rejected():
    with pytest.raises(GraphError) as err:
        build_graph({"vertices": ["a"], "edges": [{"src": "a", "dst": "a", "mult": 0}]})
    assert err.value.code == "ZERO_MULTIPLICITY"


def test_empty_cycle_rejected():
    with pytest.raises(GraphError) as err:
        build_graph({
            "vertices": ["v"],
            "edges": [],
            "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}], "prefix": [], "cycle": []}],
        })
    assert err.value.code == "EMPTY_CYCLE"


def test_omega_ray_target_rejected():
    with pytest.raises(GraphError) as err:
        build_graph({
            "vertices": ["v"],
            "edges": [],
            "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}], "prefix": [],
                      "cycle": [[{"dst": "v", "mult": "inf"}]]}],
        })
    assert err.value.code == "OMEGA_RAY_TARGET"


def test_mid_ray_edge_target_rejected():
    # only x0 can receive edges; deeper positions are not addressable as dst
    with pytest.raises(GraphError) as err:
        build_graph({
            "vertices": ["v"],
            "edges": [{"src": "v", "dst": "L.x2", "mult": 1}],
            "rays": [{"id": "L", "entry": [], "prefix": [], "cycle": [[]]}],
        })
    assert err.value.code == "DANGLING_ENDPOINT"


def test_all_fixtures_validate():
    for name, build in FIXTURES.items():
        g = build()
        assert isinstance(g, Graph), name


# ---------------------------------------------------------------------------
# refs and slots


def test_ref_round_trip():
    g = fix_vi_e()
    assert parse_ref(g, "v") == "v"
    assert parse_ref(g, "L.x0") == ("L", 0)
    assert parse_ref(g, "L.x17") == ("L", 17)
    assert node_ref(("L", 3)) == "L.x3"
    assert node_ref("w") == "w"
    for bad in ("nope", "L.x", "Q.x0"):
        with pytest.raises(GraphError) as err:
            parse_ref(g, bad)
        assert err.value.code == "UNKNOWN_VERTEX"


def test_ray_targets_and_classes():
    r = Ray(
        id="L",
        entry=(("v", ONE),),
        prefix=((("a", ONE),),),
        cycle=((("b", ONE),), (("c", Mult(2)),)),
    )
    assert r.targets(0) == (("a", ONE),)
    assert r.targets(1) == (("b", ONE),)
    assert r.targets(2) == (("c", Mult(2)),)
    assert r.targets(3) == (("b", ONE),)
    assert r.class_of(0) == 0
    assert r.class_of(1) == r.class_of(3) == 1
    assert r.class_of(2) == r.class_of(4) == 2
    assert r.period_bound == 3


def test_out_slots_and_degrees():
    g = fix_vi_e()
    assert out_multiplicity(g, "v") == Mult(3)
    assert in_multiplicity(g, "w") == OMEGA  # hit by both ray cycles
    assert out_multiplicity(g, ("L", 0)) == Mult(2)  # spine + target
    assert in_multiplicity(g, ("L", 0)) == ONE
    slot_refs = sorted(node_ref(n) for n, _ in out_slots(g, "v"))
    assert slot_refs == ["L.x0", "R.x0", "w"]


def test_singularities():
    assert singularities(fix_inf()) == frozenset({"v", "w"})  # omega emitter + sink
    assert singularities(fix_b2()) == frozenset({"w"})
    assert singularities(fix_loop()) == frozenset()


# ---------------------------------------------------------------------------
# VertexSet


def test_vertex_set_algebra():
    a = VertexSet.make({"v"}, {"L": 2})
    b = VertexSet.make({"w"}, {"L": 5, "R": 0})
    u = a.union(b)
    assert u.core == frozenset({"v", "w"})
    assert u.ray_state("L") == 2  # union takes the lower start
    assert u.ray_state("R") == 0
    i = a.intersection(b)
    assert i.core == frozenset()
    assert i.ray_state("L") == 5  # intersection takes the higher start
    assert i.ray_state("R") is None
    assert a.is_subset(u) and b.is_subset(u)
    assert i.is_subset(a) and i.is_subset(b)
    assert not a.is_subset(b)


def test_vertex_set_contains_and_render():
    s = VertexSet.make({"w"}, {"L": 1})
    assert s.contains_node("w")
    assert not s.contains_node("v")
    assert s.contains_node(("L", 1))
    assert s.contains_node(("L", 9))
    assert not s.contains_node(("L", 0))
    assert s.render() == "{w, L.x1+}"
    assert VertexSet.make(set()).render() == "{}"
    assert VertexSet.make(set()).is_empty()


def test_full_vertex_set():
    f = full_vertex_set(fix_vi_e())
    assert f.core == frozenset({"v", "w"})
    assert f.ray_state("L") == 0 and f.ray_state("R") == 0


# ---------------------------------------------------------------------------
# reachability against a BFS-on-materialize oracle


def _bfs_oracle(g: Graph, depth: int, start_refs, goal_refs) -> bool:
    """Plain BFS over the depth-truncated materialization; no library reuse."""
    m = materialize(g, depth)
    adj = {}
    for src, dst, _ in m.edges:
        adj.setdefault(src, set()).add(dst)
    seen = set(start_refs) & set(m.vertices)
    frontier = list(seen)
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return bool(seen & set(goal_refs))


def test_reaches_matches_materialized_bfs():
    depth = 12  # beyond every fixture's period bound, so truncation is exact
    for name, build in FIXTURES.items():
        g = build()
        refs = list(g.vertices) + [f"{r.id}.x{k}" for r in g.rays for k in range(3)]
        for a in refs:
            for b in g.vertices:
                got = vertex_reaches(g, a, VertexSet.make({b}))
                want = _bfs_oracle(g, depth, [a], [b])
                assert got == want, (name, a, b)


def test_reaches_from_ray_suffix_set():
    g = fix_vi_e()
    assert reaches(g, VertexSet.make(set(), {"L": 4}), "w")
    assert not reaches(g, VertexSet.make(set(), {"L": 4}), "v")
    assert reaches(g, VertexSet.make({"v"}), "w")


# ---------------------------------------------------------------------------
# cycles and tails


def test_simple_cycles_fixture_values():
    assert simple_cycles(fix_loop()) == [("u",)]
    assert simple_cycles(fix_b2()) == []
    assert simple_cycles(fix_inf()) == []
    # esse: single 2-cycle
    from graphmoves.fixtures import fix_esse

    assert simple_cycles(fix_esse()) == [("a", "x")]


def test_simple_cycles_are_real_cycles():
    for name, build in FIXTURES.items():
        g = build()
        for cyc in simple_cycles(g):
            assert len(set(cyc)) == len(cyc), (name, cyc)
            for i, ref in enumerate(cyc):
                nxt = cyc[(i + 1) % len(cyc)]
                assert vertex_reaches(g, ref, _singleton_set(g, nxt)), (name, cyc)


def _singleton_set(g: Graph, ref: str) -> VertexSet:
    node = parse_ref(g, ref)
    if isinstance(node, str):
        return VertexSet.make({node})
    return VertexSet.make(set(), {node[0]: node[1]})


def test_ray_reentry_counts_as_cycle():
    # v -> L.x0, cycle targets v: the loop closes through the ray
    g = build_graph({
        "vertices": ["v"],
        "edges": [],
        "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}], "prefix": [],
                  "cycle": [[{"dst": "v", "mult": 1}]]}],
    })
    cycles = simple_cycles(g)
    assert cycles == [("L.x0", "v")] or cycles == [("v", "L.x0")]


def test_detect_tails_fixtures_clean():
    for name, build in FIXTURES.items():
        assert detect_tails(build()) == [], name


def test_detect_tails_finds_chain():
    g = build_graph({
        "vertices": ["b", "u", "c1"],
        "edges": [
            {"src": "b", "dst": "u", "mult": 1},
            {"src": "b", "dst": "b", "mult": 1},
            {"src": "u", "dst": "c1", "mult": 1},
        ],
        "rays": [{"id": "T", "entry": [{"src": "c1", "mult": 1}], "prefix": [], "cycle": [[]]}],
    })
    (w,) = detect_tails(g)
    assert w.head == "u"
    assert w.core_chain == ("c1",)
    assert w.ray == "T"
    assert w.suffix_start == 0


def test_detect_tails_mid_ray():
    g = build_graph({
        "vertices": ["a"],
        "edges": [{"src": "a", "dst": "a", "mult": 1}],
        "rays": [{"id": "T", "entry": [{"src": "a", "mult": 1}],
                  "prefix": [[{"dst": "a", "mult": 3}]], "cycle": [[]]}],
    })
    (w,) = detect_tails(g)
    assert w.head == "T.x1"
    assert w.suffix_start == 1


# ---------------------------------------------------------------------------
# structural equality


def test_graphs_equal_ignores_record_order():
    g1 = build_graph({
        "vertices": ["a", "b"],
        "edges": [{"src": "a", "dst": "b", "mult": 1}, {"src": "b", "dst": "a", "mult": 2}],
    })
    g2 = build_graph({
        "vertices": ["b", "a"],
        "edges": [{"src": "b", "dst": "a", "mult": 2}, {"src": "a", "dst": "b", "mult": 1}],
    })
    assert graphs_equal(g1, g2)
    assert canonical_key(g1) == canonical_key(g2)


def test_graphs_equal_merges_parallel_records():
    g1 = build_graph({
        "vertices": ["a"],
        "edges": [{"src": "a", "dst": "a", "mult": 1}, {"src": "a", "dst": "a", "mult": 1}],
    })
    g2 = build_graph({"vertices": ["a"], "edges": [{"src": "a", "dst": "a", "mult": 2}]})
    assert graphs_equal(g1, g2)


def test_graphs_equal_folds_ray_presentation():
    base = {
        "vertices": ["v", "w"],
        "edges": [{"src": "w", "dst": "w", "mult": 1}],
    }
    one = build_graph({**base, "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}],
                                         "prefix": [], "cycle": [[{"dst": "w", "mult": 1}]]}]})
    # same infinite tail written with the cycle doubled and one step unrolled
    two = build_graph({**base, "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}],
                                         "prefix": [[{"dst": "w", "mult": 1}]],
                                         "cycle": [[{"dst": "w", "mult": 1}], [{"dst": "w", "mult": 1}]]}]})
    assert graphs_equal(one, two)


def test_graphs_equal_distinguishes_mult():
    g1 = build_graph({"vertices": ["a"], "edges": [{"src": "a", "dst": "a", "mult": 2}]})
    g2 = build_graph({"vertices": ["a"], "edges": [{"src": "a", "dst": "a", "mult": "inf"}]})
    assert not graphs_equal(g1, g2)


def test_materialize_shape():
    g = fix_vi_e()
    m = materialize(g, 1)
    assert set(m.vertices) == {"v", "w", "L.x0", "L.x1", "R.x0", "R.x1"}
    assert not m.rays
    # spine edge exists below the cut, none out of the last position's spine
    pairs = {(s, d) for s, d, _ in m.edges}
    assert ("L.x0", "L.x1") in pairs
    assert all(not (s == "L.x1" and d.startswith("L.")) for s, d in pairs)
