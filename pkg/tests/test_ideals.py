from itertools import chain, combinations

import pytest

from graphmoves.contraction import contract
from graphmoves.errors import GraphError
from graphmoves.fixtures import FIXTURES, fix_b2, fix_inf, fix_loop, fix_vi_e, fix_vi_f
from graphmoves.graph import Graph, VertexSet, build_graph, full_vertex_set
from graphmoves.graphio import RandomSpec, generate_random
from graphmoves.ideals import (
    check_fullness,
    closure_SH,
    enumerate_SH,
    is_hereditary,
    is_saturated,
    sh_hasse_dot,
)
from graphmoves.multiplicity import OMEGA

VW = VertexSet.make({"v", "w"})


# ---------------------------------------------------------------------------
# closure basics


def test_closure_frozen_values():
    assert closure_SH(fix_b2(), VertexSet.make({"w"})) == full_vertex_set(fix_b2())
    assert closure_SH(fix_vi_f(), VertexSet.make({"w"})) == VertexSet.make({"w"})
    assert closure_SH(fix_b2(), VertexSet.make(set())).is_empty()
    got = closure_SH(fix_vi_e(), VertexSet.make(set(), {"L": 2}))
    assert got == VertexSet.make({"w"}, {"L": 0})


def test_hereditary_saturated_flags():
    assert is_hereditary(fix_vi_e(), VertexSet.make({"w"}))
    assert is_saturated(fix_vi_e(), VertexSet.make({"w"}))
    assert not is_hereditary(fix_b2(), VertexSet.make({"t0"}))
    assert not is_saturated(fix_b2(), VertexSet.make({"w", "ta", "tb", "t0"}))


def _atoms(g: Graph):
    atoms = [VertexSet.make({v}) for v in g.vertices]
    for r in g.rays:
        for k in range(len(r.prefix) + 1):
            atoms.append(VertexSet.make(set(), {r.id: k}))
    return atoms


def _all_subsets(g: Graph):
    atoms = _atoms(g)
    sets = []
    for picks in chain.from_iterable(combinations(atoms, k) for k in range(len(atoms) + 1)):
        s = VertexSet.make(set())
        for a in picks:
            s = s.union(a)
        sets.append(s)
    return sets


def test_closure_laws_exhaustive():
    for name, build in FIXTURES.items():
        g = build()
        subsets = _all_subsets(g)
        closures = {s: closure_SH(g, s) for s in subsets}
        for s, c in closures.items():
            assert s.is_subset(c), (name, s.render())  # extensive
            assert closure_SH(g, c) == c, (name, s.render())  # idempotent
            assert is_hereditary(g, c) and is_saturated(g, c), (name, s.render())
        for a in subsets:
            for b in subsets:
                if a.is_subset(b):
                    assert closures[a].is_subset(closures[b]), (name, a.render(), b.render())


# ---------------------------------------------------------------------------
# enumerate_SH frozen families


def _family_shape(g):
    fam = enumerate_SH(g)
    return [m.render() for m in fam.members], fam.nontrivial_count


def test_families_frozen():
    assert _family_shape(fix_loop()) == (["{}", "{u}"], 0)
    assert _family_shape(fix_b2()) == (["{}", "{t0, ta, tb, v, w}"], 0)
    assert _family_shape(fix_inf()) == (["{}", "{w}", "{v, w}"], 1)
    assert _family_shape(fix_vi_e()) == (
        ["{}", "{w}", "{w, L.x0+}", "{w, R.x0+}", "{v, w, L.x0+, R.x0+}"],
        3,
    )
    members, count = _family_shape(fix_vi_f())
    assert count == 2
    assert "{w}" in members and "{w, X.x0+}" in members


def test_order_is_strict_inclusion():
    fam = enumerate_SH(fix_vi_e())
    for i, j in fam.order:
        assert fam.members[i].is_subset(fam.members[j])
        assert fam.members[i] != fam.members[j]
    # and nothing is missing
    pairs = {(i, j) for i, j in fam.order}
    for i, a in enumerate(fam.members):
        for j, b in enumerate(fam.members):
            if i != j and a.is_subset(b):
                assert (i, j) in pairs


def test_fullness_frozen():
    assert check_fullness(fix_b2(), VW)
    assert check_fullness(fix_inf(), VertexSet.make({"v"}))
    assert not check_fullness(fix_vi_f(), VertexSet.make({"w"}))


def test_hasse_dot_chain():
    dot = sh_hasse_dot(enumerate_SH(fix_inf()))
    assert "digraph" in dot
    assert dot.count("->") == 2  # {} -> {w} -> {v, w}, covers only


def test_too_large_guard():
    g = build_graph({
        "vertices": [f"v{i}" for i in range(25)],
        "edges": [{"src": f"v{i}", "dst": f"v{i}", "mult": 1} for i in range(25)],
    })
    with pytest.raises(GraphError) as err:
        enumerate_SH(g)
    assert err.value.code == "TOO_LARGE"


# ---------------------------------------------------------------------------
# brute-force oracle over the finite quotient


def _quotient(g: Graph) -> tuple[Graph, dict]:
    """Finite stand-in: positions become core ids, last class wraps to cycle start."""
    vertices = list(g.vertices)
    edges = [{"src": s, "dst": d, "mult": m.to_json()} for s, d, m in g.edges]
    for r in g.rays:
        P, bound = len(r.prefix), r.period_bound
        names = [f"{r.id}.x{j}" for j in range(bound)]
        vertices.extend(names)
        for src, m in r.entry:
            edges.append({"src": src, "dst": names[0], "mult": m.to_json()})
        for j in range(bound):
            nxt = names[j + 1] if j + 1 < bound else names[P]
            edges.append({"src": names[j], "dst": nxt, "mult": 1})
            for dst, m in r.targets(j):
                edges.append({"src": names[j], "dst": dst, "mult": m.to_json()})
    return build_graph({"vertices": vertices, "edges": edges})


def _brute_SH(g: Graph):
    """All saturated hereditary subsets of a rayless graph, by direct filtering."""
    vs = sorted(g.vertices)
    out_map = {v: [] for v in vs}
    for s, d, m in g.edges:
        out_map[s].append((d, m))
    results = []
    for mask in range(1 << len(vs)):
        s = {vs[i] for i in range(len(vs)) if mask >> i & 1}
        hereditary = all(d in s for v in s for d, _ in out_map[v])
        saturated = True
        for v in vs:
            if v in s:
                continue
            slots = out_map[v]
            if slots and all(not m.is_omega for _, m in slots) and all(d in s for d, _ in slots):
                saturated = False
                break
        if hereditary and saturated:
            results.append(frozenset(s))
    return results


def _as_plain(g: Graph, member: VertexSet) -> frozenset:
    """A VertexSet as the quotient-vertex subset it denotes."""
    out = set(member.core)
    for r in g.rays:
        k = member.ray_state(r.id)
        if k is not None:
            out.update(f"{r.id}.x{j}" for j in range(k, r.period_bound))
    return frozenset(out)


def test_enumerate_matches_brute_force_on_quotients():
    for name, build in FIXTURES.items():
        g = build()
        fam = enumerate_SH(g)
        got = {_as_plain(g, m) for m in fam.members}
        want = set(_brute_SH(_quotient(g)))
        assert got == want, name


def test_enumerate_matches_brute_force_on_random_rayless():
    seen = 0
    for seed in range(40):
        g, _ = generate_random(RandomSpec(seed=seed, ray_range=(0, 0), core_range=(2, 9)))
        fam = enumerate_SH(g)
        got = {frozenset(m.core) for m in fam.members}
        want = set(_brute_SH(g))
        assert got == want, seed
        seen += 1
    assert seen == 40


def test_enumerate_matches_brute_force_on_random_with_rays():
    for seed in range(25):
        g, _ = generate_random(RandomSpec(seed=seed, core_range=(2, 5), ray_range=(1, 2)))
        q = _quotient(g)
        if len(q.vertices) > 14:
            continue
        fam = enumerate_SH(g)
        got = {_as_plain(g, m) for m in fam.members}
        want = set(_brute_SH(q))
        assert got == want, seed


def test_period_stability():
    base = {
        "vertices": ["v", "w"],
        "edges": [{"src": "v", "dst": "w", "mult": 1}, {"src": "w", "dst": "w", "mult": 1}],
    }
    one = build_graph({**base, "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}],
                                         "prefix": [], "cycle": [[{"dst": "w", "mult": 1}]]}]})
    two = build_graph({**base, "rays": [{"id": "L", "entry": [{"src": "v", "mult": 1}],
                                         "prefix": [[{"dst": "w", "mult": 1}]],
                                         "cycle": [[{"dst": "w", "mult": 1}], [{"dst": "w", "mult": 1}]]}]})
    fam1 = {(m.core, m.rays) for m in enumerate_SH(one).members}
    fam2 = {(m.core, m.rays) for m in enumerate_SH(two).members}
    assert fam1 == fam2


# ---------------------------------------------------------------------------
# Morita probe: checked contraction preserves the ideal lattice


def _image(member: VertexSet, g0: VertexSet) -> VertexSet:
    return VertexSet.make(member.core & g0.core)


def _assert_lattice_iso(g, g0):
    contracted = contract(g, g0, "checked").graph
    fam_g = enumerate_SH(g)
    fam_c = enumerate_SH(contracted)
    images = [_image(m, g0) for m in fam_g.members]
    assert len(set(images)) == len(images), "intersection map must be injective"
    assert set(images) == set(fam_c.members)
    assert fam_g.nontrivial_count == fam_c.nontrivial_count
    for i, a in enumerate(fam_g.members):
        for j, b in enumerate(fam_g.members):
            assert a.is_subset(b) == images[i].is_subset(images[j])


def test_morita_probe_fixtures():
    _assert_lattice_iso(fix_b2(), VW)
    _assert_lattice_iso(fix_inf(), VW)
    g = fix_loop()
    _assert_lattice_iso(g, full_vertex_set(g))


def test_morita_probe_random():
    verified = 0
    seed = 0
    while verified < 40:
        g, g0 = generate_random(RandomSpec(seed=seed, passing=True))
        seed += 1
        if not g0.core:
            continue
        _assert_lattice_iso(g, g0)
        verified += 1
