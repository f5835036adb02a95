"""Contractibility checks.

Given a graph and a distinguished vertex set g0, decide whether the
contraction onto g0 is admissible.  Two independent deciders are provided:
`check_theorem` works through the direct conditions (no tails, singularities
inside g0, the complement subgraph T acyclic, and four conditions a-d on
infinite paths through T), while `check_proposition` decides the equivalent
cycle/path formulation (every cycle meets g0, plus primed conditions a'-d').
Both return a ContractionVerdict listing every violation found, with concrete
finite witnesses.

All quantifiers over infinite paths reduce to finite questions: an infinite
path in a finite-core graph must eventually climb one ray forever, so a node
admits an infinite continuation inside T exactly when it reaches a full ray of
T through T-internal edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .errors import GraphError
from .graph import (
    Graph,
    Node,
    TailWitness,
    VertexSet,
    check_membership_args,
    detect_tails,
    in_core_sources,
    in_multiplicity,
    node_ref,
    out_multiplicity,
    out_slots,
    parse_ref,
    quotient_bfs,
    simple_cycles,
    singularities,
    source_nodes,
)
from .multiplicity import Mult, ONE


def _check_g0(g: Graph, g0: VertexSet) -> None:
    check_membership_args(g, g0)
    for rid, k in g0.rays:
        if k != 0:
            raise GraphError(
                "UNSUPPORTED_G0",
                f"g0 may contain a ray only in full (got {rid} from position {k})",
                ray=rid,
            )


@dataclass(frozen=True)
class SubgraphT:
    """The induced complement subgraph T, plus its infinite-path markers."""

    graph: Graph
    g0: VertexSet
    core: frozenset[str]
    ray_ids: frozenset[str]
    core_edges: tuple[tuple[str, str, Mult], ...]
    entries: tuple[tuple[str, str, Mult], ...]  # (core source, ray id, mult)

    @cached_property
    def nodes(self) -> frozenset[Node]:
        out: set[Node] = set(self.core)
        for rid in self.ray_ids:
            ray = self.graph.ray_map[rid]
            out.update((rid, j) for j in range(ray.period_bound))
        return frozenset(out)

    def contains(self, node: Node) -> bool:
        if isinstance(node, str):
            return node in self.core
        return node[0] in self.ray_ids

    def out_nodes(self, node: Node) -> list[tuple[Node, Mult]]:
        """T-internal out-slots of a T node, spine wrapped to class nodes."""
        g = self.graph
        if isinstance(node, str):
            slots: list[tuple[Node, Mult]] = [
                (dst, m) for src, dst, m in self.core_edges if src == node
            ]
            slots.extend(((rid, 0), m) for src, rid, m in self.entries if src == node)
            return slots
        rid, j = node
        ray = g.ray_map[rid]
        slots = [((rid, ray.class_of(j + 1)), ONE)]
        slots.extend((dst, m) for dst, m in ray.targets(j) if dst in self.core)
        return slots

    @cached_property
    def inf_nodes(self) -> frozenset[Node]:
        """Nodes of T admitting an infinite path that stays in T.

        With T acyclic, these are exactly the nodes reaching a full T-ray
        through T-internal edges; every spine node qualifies by climbing.
        """
        ray_nodes = [n for n in self.nodes if isinstance(n, tuple)]
        marked: set[Node] = set(ray_nodes)
        changed = True
        while changed:
            changed = False
            for n in self.nodes:
                if n in marked:
                    continue
                if any(m in marked for m, _ in self.out_nodes(n)):
                    marked.add(n)
                    changed = True
        return frozenset(marked)

    def as_vertex_set(self) -> VertexSet:
        return VertexSet.make(self.core, {rid: 0 for rid in self.ray_ids})

    def to_record(self) -> dict:
        return {
            "core": sorted(self.core),
            "rays": sorted(self.ray_ids),
            "core_edges": sorted((s, d, m.to_json()) for s, d, m in self.core_edges),
            "entries": sorted((s, f"{rid}.x0", m.to_json()) for s, rid, m in self.entries),
        }


def induced_T(g: Graph, g0: VertexSet) -> SubgraphT:
    """The subgraph induced on the complement of g0."""
    _check_g0(g, g0)
    core = frozenset(g.vertex_set - g0.core)
    ray_ids = frozenset(r.id for r in g.rays if g0.ray_state(r.id) is None)
    core_edges = tuple(
        (s, d, m) for s, d, m in g.edges if s in core and d in core
    )
    entries = tuple(
        (u, r.id, m)
        for r in g.rays
        if r.id in ray_ids
        for u, m in r.entry
        if u in core
    )
    return SubgraphT(g, g0, core, ray_ids, core_edges, entries)


# ---------------------------------------------------------------------------
# violations

_KIND_ORDER = {
    "TAILS_PRESENT": 0,
    "SINGULARITY_OUTSIDE_G0": 1,
    "T_CYCLE": 2,
    "COND_B": 3,
    "COND_C": 4,
    "COND_D": 5,
    "COND_A": 6,
}


@dataclass(frozen=True)
class Violation:
    kind: str

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self._witness_key())

    def _witness_key(self):
        return ()

    def to_record(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class TailsPresent(Violation):
    witness: TailWitness

    def _witness_key(self):
        return (self.witness.ray, self.witness.head)

    def to_record(self):
        return {"kind": self.kind, "tail": self.witness.to_record()}


@dataclass(frozen=True)
class SingularityOutsideG0(Violation):
    vertex: str

    def _witness_key(self):
        return (self.vertex,)

    def to_record(self):
        return {"kind": self.kind, "vertex": self.vertex}


@dataclass(frozen=True)
class TCycle(Violation):
    cycle: tuple[str, ...]

    def _witness_key(self):
        return (len(self.cycle), self.cycle)

    def to_record(self):
        return {"kind": self.kind, "cycle": list(self.cycle)}


@dataclass(frozen=True)
class CondA(Violation):
    vertex: str
    prefix1: tuple[str, ...]
    prefix2: tuple[str, ...]
    parallel: bool = False

    def _witness_key(self):
        return (self.vertex, self.prefix1, self.prefix2)

    def to_record(self):
        return {
            "kind": self.kind,
            "vertex": self.vertex,
            "prefix1": list(self.prefix1),
            "prefix2": list(self.prefix2),
            "parallel": self.parallel,
        }


@dataclass(frozen=True)
class CondB(Violation):
    vertex: str
    ray: str

    def _witness_key(self):
        return (self.vertex,)

    def to_record(self):
        return {"kind": self.kind, "vertex": self.vertex, "ray": self.ray}


@dataclass(frozen=True)
class CondC(Violation):
    vertex: str
    in_degree: int | str

    def _witness_key(self):
        return (self.vertex,)

    def to_record(self):
        return {"kind": self.kind, "vertex": self.vertex, "in_degree": self.in_degree}


@dataclass(frozen=True)
class CondD(Violation):
    edge: tuple[str, str]
    source: str

    def _witness_key(self):
        return self.edge

    def to_record(self):
        return {"kind": self.kind, "edge": list(self.edge), "source": self.source}


@dataclass(frozen=True)
class ContractionVerdict:
    passed: bool
    violations: tuple[Violation, ...]

    def kinds(self) -> tuple[str, ...]:
        return tuple(v.kind for v in self.violations)

    def to_record(self) -> dict:
        return {"pass": self.passed, "violations": [v.to_record() for v in self.violations]}


def _verdict(violations: list[Violation]) -> ContractionVerdict:
    ordered = tuple(sorted(violations, key=Violation.sort_key))
    return ContractionVerdict(passed=not ordered, violations=ordered)


# ---------------------------------------------------------------------------
# shared ambient checks


def _ambient_violations(g: Graph, g0: VertexSet) -> list[Violation]:
    out: list[Violation] = []
    for tail in detect_tails(g):
        out.append(TailsPresent("TAILS_PRESENT", tail))
    for v in sorted(singularities(g) - g0.core):
        out.append(SingularityOutsideG0("SINGULARITY_OUTSIDE_G0", v))
    return out


def _reached_from_g0(g: Graph, g0: VertexSet) -> set[Node]:
    return quotient_bfs(g, source_nodes(g, g0))


def _in_degree_json(g: Graph, node: Node):
    return in_multiplicity(g, node).to_json()


# ---------------------------------------------------------------------------
# theorem-form checker


def _first_steps_into(g: Graph, src: Node, region: frozenset[Node], t: SubgraphT) -> list[tuple[Node, Mult]]:
    """Out-slots of a g0 vertex that land in the given T-node region."""
    slots: list[tuple[Node, Mult]] = []
    if isinstance(src, str):
        for dst, m in g._out_edges[src]:
            if dst in region:
                slots.append((dst, m))
        for rid, m in g._entries_by_src[src]:
            if rid in t.ray_ids and (rid, 0) in region:
                slots.append(((rid, 0), m))
    else:
        rid, j = src
        for dst, m in g.ray_map[rid].targets(j):
            if dst in region:
                slots.append((dst, m))
    return slots


def _g0_sources(g: Graph, g0: VertexSet) -> list[Node]:
    nodes: list[Node] = sorted(g0.core)
    for rid, k in g0.rays:
        ray = g.ray_map[rid]
        nodes.extend((rid, j) for j in range(k, ray.period_bound))
    return nodes


def _slot_count(slots: list[tuple[Node, Mult]]) -> int:
    """Total slots, saturating at 2 (omega counts as many)."""
    total = 0
    for _, m in slots:
        total += 2 if m.is_omega else m.n
        if total >= 2:
            return 2
    return total


def _diverging_prefixes(
    g: Graph, t: SubgraphT, src: Node, inf: frozenset[Node]
) -> tuple[tuple[str, ...], tuple[str, ...], bool] | None:
    """Two path prefixes from a g0 vertex witnessing distinct infinite T-paths."""
    v = node_ref(src)
    first = [(n, m) for n, m in _first_steps_into(g, src, inf, t)]
    if _slot_count(first) >= 2:
        targets = sorted(node_ref(n) for n, _ in first)
        if len(targets) >= 2 and targets[0] != targets[1]:
            return ((v, targets[0]), (v, targets[1]), False)
        return ((v, targets[0]), (v, targets[0]), True)
    if not first:
        return None
    # single forced entry; search the reachable inf-region for a branch node
    start = first[0][0]
    parent: dict[Node, Node | None] = {start: None}
    queue = [start]
    while queue:
        node = queue.pop(0)
        inf_slots = [(n, m) for n, m in t.out_nodes(node) if n in inf]
        if _slot_count(inf_slots) >= 2:
            stem = [node_ref(node)]
            back = node
            while parent[back] is not None:
                back = parent[back]
                stem.insert(0, node_ref(back))
            stem.insert(0, v)
            refs = sorted(node_ref(n) for n, _ in inf_slots)
            if len(refs) >= 2 and refs[0] != refs[1]:
                return (tuple(stem + [refs[0]]), tuple(stem + [refs[1]]), False)
            return (tuple(stem + [refs[0]]), tuple(stem + [refs[0]]), True)
        for n, _ in inf_slots:
            if n not in parent:
                parent[n] = node
                queue.append(n)
    return None


def check_theorem(g: Graph, g0: VertexSet) -> ContractionVerdict:
    """Direct conditions: tails, singularities, T acyclic, then (b),(c),(d),(a)."""
    _check_g0(g, g0)
    violations = _ambient_violations(g, g0)
    t = induced_T(g, g0)
    cycles = simple_cycles(g, restrict_to=t.as_vertex_set())
    violations.extend(TCycle("T_CYCLE", c) for c in cycles)
    if cycles:
        return _verdict(violations)

    inf = t.inf_nodes
    reached = _reached_from_g0(g, g0)

    # (b): every start of an infinite T-path is reachable from g0
    for node in sorted(inf, key=node_ref):
        if node not in reached:
            witness_ray = node[0] if isinstance(node, tuple) else _some_ray_reached(t, node)
            violations.append(CondB("COND_B", node_ref(node), witness_ray))

    # (c): vertices along infinite T-paths receive exactly one edge
    for node in sorted(inf, key=node_ref):
        if in_multiplicity(g, node) != ONE:
            violations.append(CondC("COND_C", node_ref(node), _in_degree_json(g, node)))

    # (d): edges into infinite-path starts come from finite emitters
    for node in sorted(inf, key=node_ref):
        for src, _ in in_core_sources(g, node):
            if out_multiplicity(g, src).is_omega:
                violations.append(CondD("COND_D", (src, node_ref(node)), src))

    # (a): no g0 vertex sources two distinct infinite paths through T
    for src in _g0_sources(g, g0):
        witness = _diverging_prefixes(g, t, src, inf)
        if witness is not None:
            violations.append(CondA("COND_A", node_ref(src), witness[0], witness[1], witness[2]))
    return _verdict(violations)


def _some_ray_reached(t: SubgraphT, node: Node) -> str:
    seen = {node}
    queue = [node]
    while queue:
        cur = queue.pop(0)
        if isinstance(cur, tuple):
            return cur[0]
        for nxt, _ in t.out_nodes(cur):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return ""  # unreachable when node is marked infinite


# ---------------------------------------------------------------------------
# proposition-form checker (independent decision route)


def _t_reaching_sets(t: SubgraphT) -> dict[str, set[Node]]:
    """Per T-ray, the T-nodes that reach that ray through T-internal edges."""
    preds: dict[Node, set[Node]] = {n: set() for n in t.nodes}
    for n in t.nodes:
        for m, _ in t.out_nodes(n):
            if m in preds:
                preds[m].add(n)
    out: dict[str, set[Node]] = {}
    for rid in sorted(t.ray_ids):
        ray = t.graph.ray_map[rid]
        frontier = [(rid, j) for j in range(ray.period_bound)]
        seen = set(frontier)
        while frontier:
            cur = frontier.pop()
            for p in preds[cur]:
                if p not in seen:
                    seen.add(p)
                    frontier.append(p)
        out[rid] = seen
    return out


def check_proposition(g: Graph, g0: VertexSet) -> ContractionVerdict:
    """Cycle/path conditions: (1) every cycle meets g0, then (b'),(c'),(d'),(a')."""
    _check_g0(g, g0)
    violations = _ambient_violations(g, g0)

    def in_g0(ref: str) -> bool:
        node = parse_ref(g, ref)
        if isinstance(node, str):
            return node in g0.core
        state = g0.ray_state(node[0])
        return state is not None and node[1] >= state

    bad_cycles = [c for c in simple_cycles(g) if not any(in_g0(r) for r in c)]
    violations.extend(TCycle("T_CYCLE", c) for c in bad_cycles)
    if bad_cycles:
        return _verdict(violations)

    t = induced_T(g, g0)
    reach_by_ray = _t_reaching_sets(t)
    t_inf: set[Node] = set()
    for nodes in reach_by_ray.values():
        t_inf |= nodes

    def witness_ray_for(node: Node) -> str:
        for rid in sorted(reach_by_ray):
            if node in reach_by_ray[rid]:
                return rid
        return ""

    reached = _reached_from_g0(g, g0)

    # (b'): an unreached node starting an all-T infinite path violates
    for node in sorted(t_inf, key=node_ref):
        if node not in reached:
            violations.append(CondB("COND_B", node_ref(node), witness_ray_for(node)))

    # (c'): |r^-1(s(mu))| > 1 with mu avoiding g0 violates
    for node in sorted(t_inf, key=node_ref):
        if ONE < in_multiplicity(g, node):
            violations.append(CondC("COND_C", node_ref(node), _in_degree_json(g, node)))

    # (d'): an omega emitter heading an all-T infinite tail violates
    for node in sorted(t_inf, key=node_ref):
        for src, _ in in_core_sources(g, node):
            if out_multiplicity(g, src).is_omega:
                violations.append(CondD("COND_D", (src, node_ref(node)), src))

    # (a'): two distinct infinite paths from one g0 vertex avoiding g0 after start
    region = frozenset(t_inf)
    can_two = _two_path_nodes(t, region)
    for src in _g0_sources(g, g0):
        slots = _first_steps_into(g, src, region, t)
        count = _slot_count(slots)
        branch = count >= 2 or (count == 1 and slots[0][0] in can_two)
        if branch:
            witness = _diverging_prefixes(g, t, src, region)
            if witness is not None:
                violations.append(CondA("COND_A", node_ref(src), witness[0], witness[1], witness[2]))
    return _verdict(violations)


def _two_path_nodes(t: SubgraphT, t_inf: frozenset[Node]) -> set[Node]:
    """Fixpoint of: node has >= 2 slots into t_inf, or its unique slot leads to one."""
    can_two: set[Node] = set()
    for n in t_inf:
        slots = [(m, mult) for m, mult in t.out_nodes(n) if m in t_inf]
        if _slot_count(slots) >= 2:
            can_two.add(n)
    changed = True
    while changed:
        changed = False
        for n in t_inf:
            if n in can_two:
                continue
            slots = [(m, mult) for m, mult in t.out_nodes(n) if m in t_inf]
            if len(slots) == 1 and slots[0][0] in can_two:
                can_two.add(n)
                changed = True
    return can_two


# ---------------------------------------------------------------------------
# witness revalidation (used by the test suite's truncation oracle)


def validate_witness(g: Graph, g0: VertexSet, violation: Violation) -> bool:
    """Re-check a violation's witness against the graph it was issued for."""
    t = induced_T(g, g0)
    if isinstance(violation, TailsPresent):
        return any(tw == violation.witness for tw in detect_tails(g))
    if isinstance(violation, SingularityOutsideG0):
        return violation.vertex in singularities(g) and violation.vertex not in g0.core
    if isinstance(violation, TCycle):
        refs = violation.cycle
        if not refs:
            return False
        for i, ref in enumerate(refs):
            nxt = refs[(i + 1) % len(refs)]
            here = parse_ref(g, ref)
            step_targets = set()
            for node, _ in out_slots(g, here):
                step_targets.add(node_ref(node))
                if isinstance(node, tuple):
                    rid, j = node
                    step_targets.add(node_ref((rid, g.ray_map[rid].class_of(j))))
            if nxt not in step_targets:
                return False
        return True
    if isinstance(violation, CondB):
        node = parse_ref(g, violation.vertex)
        if isinstance(node, tuple):
            node = (node[0], g.ray_map[node[0]].class_of(node[1]))
        return node in t.inf_nodes and node not in _reached_from_g0(g, g0)
    if isinstance(violation, CondC):
        node = parse_ref(g, violation.vertex)
        if isinstance(node, tuple):
            node = (node[0], g.ray_map[node[0]].class_of(node[1]))
        return node in t.inf_nodes and _in_degree_json(g, node) == violation.in_degree
    if isinstance(violation, CondD):
        src, dst_ref = violation.edge
        node = parse_ref(g, dst_ref)
        if isinstance(node, tuple):
            node = (node[0], g.ray_map[node[0]].class_of(node[1]))
        if node not in t.inf_nodes or not out_multiplicity(g, src).is_omega:
            return False
        return any(s == src for s, _ in in_core_sources(g, node))
    if isinstance(violation, CondA):
        if not g0.contains_node(parse_ref(g, violation.vertex)):
            return False
        for prefix in (violation.prefix1, violation.prefix2):
            if len(prefix) < 2 or prefix[0] != violation.vertex:
                return False
            end = parse_ref(g, prefix[-1])
            if isinstance(end, tuple):
                end = (end[0], g.ray_map[end[0]].class_of(end[1]))
            if end not in t.inf_nodes:
                return False
        if violation.prefix1 == violation.prefix2 and not violation.parallel:
            return False
        return True
    return False
