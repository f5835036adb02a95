"""Core data model: finite directed multigraphs with eventually-periodic tails.

A Graph has finitely many core vertices, a finite multiset of core edges with
multiplicities in the naturals extended by omega, and finitely many rays.  A
ray is a finite presentation of an infinite tail: a spine x0 -> x1 -> x2 -> ...
where every spine position also emits a finite multiset of edges back into the
core, given by a prefix list plus a nonempty repeating cycle of target
multisets.  Edges may enter a ray only at x0 (the ray's entry edges); a graph
whose tails need mid-spine in-edges must model those prefix positions as core
vertices instead.

Ray spine positions are addressed as "rayid.xk" (e.g. "L.x3").  Internally a
vertex is either a core id (str) or a spine position (ray id, index) pair;
`parse_ref` / `node_ref` convert between the two forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import networkx as nx

from .errors import GraphError
from .multiplicity import Mult, OMEGA, ONE, ZERO, msum

Node = str | tuple[str, int]
Slot = tuple[Node, Mult]

_POSITION_RE = re.compile(r"^(.+)\.x(\d+)$")


@dataclass(frozen=True)
class Ray:
    """One infinite tail: entry edges into x0, then per-position core targets."""

    id: str
    entry: tuple[tuple[str, Mult], ...]
    prefix: tuple[tuple[tuple[str, Mult], ...], ...]
    cycle: tuple[tuple[tuple[str, Mult], ...], ...]

    @property
    def prefix_len(self) -> int:
        return len(self.prefix)

    @property
    def cycle_len(self) -> int:
        return len(self.cycle)

    @property
    def period_bound(self) -> int:
        """Positions 0 .. period_bound-1 exhaust all distinct target patterns."""
        return len(self.prefix) + len(self.cycle)

    def targets(self, j: int) -> tuple[tuple[str, Mult], ...]:
        """Core-target multiset emitted by spine position j."""
        if j < len(self.prefix):
            return self.prefix[j]
        return self.cycle[(j - len(self.prefix)) % len(self.cycle)]

    def class_of(self, j: int) -> int:
        """Quotient representative of position j (identity below period_bound)."""
        if j < self.period_bound:
            return j
        p = len(self.prefix)
        return p + (j - p) % len(self.cycle)


@dataclass(frozen=True)
class Graph:
    """Immutable graph value; all operations return new graphs."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, Mult], ...]
    rays: tuple[Ray, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for v in self.vertices:
            if not v:
                raise GraphError("DUPLICATE_ID", "empty vertex id")
            if v in seen:
                raise GraphError("DUPLICATE_ID", f"vertex id {v!r} repeats", vertex=v)
            seen.add(v)
        ray_ids: set[str] = set()
        for r in self.rays:
            if not r.id or "." in r.id:
                raise GraphError("DUPLICATE_ID", f"invalid ray id {r.id!r}", ray=r.id)
            if r.id in ray_ids or r.id in seen:
                raise GraphError("DUPLICATE_ID", f"ray id {r.id!r} repeats", ray=r.id)
            ray_ids.add(r.id)
        for v in self.vertices:
            m = _POSITION_RE.match(v)
            if m and m.group(1) in ray_ids:
                raise GraphError("DUPLICATE_ID", f"vertex id {v!r} shadows a spine position", vertex=v)
        for src, dst, mult in self.edges:
            if src not in seen:
                raise GraphError("DANGLING_ENDPOINT", f"edge source {src!r} is not a core vertex", edge=(src, dst))
            if dst not in seen:
                raise GraphError("DANGLING_ENDPOINT", f"edge target {dst!r} is not a core vertex", edge=(src, dst))
            if mult.is_zero:
                raise GraphError("ZERO_MULTIPLICITY", f"edge {src}->{dst} has multiplicity 0", edge=(src, dst))
        for r in self.rays:
            if not r.cycle:
                raise GraphError("EMPTY_CYCLE", f"ray {r.id} has an empty repeating cycle", ray=r.id)
            for u, mult in r.entry:
                if u not in seen:
                    raise GraphError("DANGLING_ENDPOINT", f"ray {r.id} entry from unknown vertex {u!r}", ray=r.id)
                if mult.is_zero:
                    raise GraphError("ZERO_MULTIPLICITY", f"ray {r.id} entry from {u} has multiplicity 0", ray=r.id)
            for part_name, part in (("prefix", r.prefix), ("cycle", r.cycle)):
                for pos in part:
                    for dst, mult in pos:
                        if dst not in seen:
                            raise GraphError(
                                "DANGLING_ENDPOINT",
                                f"ray {r.id} {part_name} targets unknown vertex {dst!r}",
                                ray=r.id,
                            )
                        if mult.is_zero:
                            raise GraphError("ZERO_MULTIPLICITY", f"ray {r.id} target {dst} has multiplicity 0", ray=r.id)
                        if mult.is_omega:
                            raise GraphError(
                                "OMEGA_RAY_TARGET",
                                f"ray {r.id} target {dst} has infinite multiplicity; spine positions emit finitely",
                                ray=r.id,
                            )

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)

    @cached_property
    def ray_map(self) -> Mapping[str, Ray]:
        return {r.id: r for r in self.rays}

    @cached_property
    def _out_edges(self) -> Mapping[str, tuple[tuple[str, Mult], ...]]:
        acc: dict[str, list[tuple[str, Mult]]] = {v: [] for v in self.vertices}
        for src, dst, mult in self.edges:
            acc[src].append((dst, mult))
        return {v: tuple(slots) for v, slots in acc.items()}

    @cached_property
    def _entries_by_src(self) -> Mapping[str, tuple[tuple[str, Mult], ...]]:
        acc: dict[str, list[tuple[str, Mult]]] = {v: [] for v in self.vertices}
        for r in self.rays:
            for u, mult in r.entry:
                acc[u].append((r.id, mult))
        return {v: tuple(slots) for v, slots in acc.items()}

    def num_edges(self) -> int:
        """Edge records with a core source, ray entry records included."""
        return len(self.edges) + sum(len(r.entry) for r in self.rays)

    def has_omega_edges(self) -> bool:
        if any(m.is_omega for _, _, m in self.edges):
            return True
        return any(m.is_omega for r in self.rays for _, m in r.entry)


def node_ref(node: Node) -> str:
    if isinstance(node, str):
        return node
    rid, j = node
    return f"{rid}.x{j}"


def parse_ref(g: Graph, ref: str) -> Node:
    """Resolve a textual vertex reference against g."""
    if ref in g.vertex_set:
        return ref
    m = _POSITION_RE.match(ref)
    if m and m.group(1) in g.ray_map:
        return (m.group(1), int(m.group(2)))
    raise GraphError("UNKNOWN_VERTEX", f"no vertex {ref!r} in graph", vertex=ref)


def out_slots(g: Graph, node: Node) -> list[Slot]:
    """All out-edges of node as (target node, multiplicity), one per record."""
    if isinstance(node, str):
        slots: list[Slot] = [(dst, m) for dst, m in g._out_edges[node]]
        slots.extend(((rid, 0), m) for rid, m in g._entries_by_src[node])
        return slots
    rid, j = node
    ray = g.ray_map[rid]
    slots = [((rid, j + 1), ONE)]
    slots.extend((dst, m) for dst, m in ray.targets(j))
    return slots


def out_multiplicity(g: Graph, node: Node) -> Mult:
    return msum(m for _, m in out_slots(g, node))


def in_multiplicity(g: Graph, node: Node) -> Mult:
    """Total multiplicity received by node, over the whole graph."""
    if isinstance(node, str):
        total = msum(m for src, dst, m in g.edges if dst == node)
        for r in g.rays:
            total = total + msum(m for pos in r.prefix for dst, m in pos if dst == node)
            if any(dst == node for pos in r.cycle for dst, _ in pos):
                total = total + OMEGA  # hit by infinitely many spine positions
        return total
    rid, j = node
    if j == 0:
        return msum(m for _, m in g.ray_map[rid].entry)
    return ONE  # spine edge only; mid-spine in-edges are excluded by the model


def in_core_sources(g: Graph, node: Node) -> list[tuple[str, Mult]]:
    """Core vertices emitting into node (core edges, or ray entries for x0)."""
    if isinstance(node, str):
        return [(src, m) for src, dst, m in g.edges if dst == node]
    rid, j = node
    if j == 0:
        return [(u, m) for u, m in g.ray_map[rid].entry]
    return []


@dataclass(frozen=True)
class VertexSet:
    """A core subset plus, per ray, an all-positions-from-k suffix marker.

    Sets of this shape are exactly what the closure machinery produces: either
    no position of a ray belongs to the set, or every position from some index
    k on does.  `rays` holds sorted (ray id, k) pairs; an absent ray id means
    no position of that ray is in the set.
    """

    core: frozenset[str] = frozenset()
    rays: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def make(core: Iterable[str] = (), ray_states: Mapping[str, int] | None = None) -> VertexSet:
        states = tuple(sorted((ray_states or {}).items()))
        for rid, k in states:
            if k < 0:
                raise GraphError("UNKNOWN_VERTEX", f"negative ray suffix index {k} for {rid}", ray=rid)
        return VertexSet(frozenset(core), states)

    @cached_property
    def ray_states(self) -> Mapping[str, int]:
        return dict(self.rays)

    def ray_state(self, rid: str) -> int | None:
        return self.ray_states.get(rid)

    def contains_node(self, node: Node) -> bool:
        if isinstance(node, str):
            return node in self.core
        rid, j = node
        k = self.ray_states.get(rid)
        return k is not None and j >= k

    def union(self, other: VertexSet) -> VertexSet:
        states = dict(self.rays)
        for rid, k in other.rays:
            states[rid] = min(k, states.get(rid, k))
        return VertexSet.make(self.core | other.core, states)

    def intersection(self, other: VertexSet) -> VertexSet:
        states = {}
        mine = self.ray_states
        for rid, k in other.rays:
            if rid in mine:
                states[rid] = max(k, mine[rid])
        return VertexSet.make(self.core & other.core, states)

    def is_subset(self, other: VertexSet) -> bool:
        if not self.core <= other.core:
            return False
        theirs = other.ray_states
        return all(rid in theirs and theirs[rid] <= k for rid, k in self.rays)

    def is_empty(self) -> bool:
        return not self.core and not self.rays

    def render(self) -> str:
        parts = sorted(self.core)
        parts.extend(f"{rid}.x{k}+" for rid, k in self.rays)
        return "{" + ", ".join(parts) + "}"


def full_vertex_set(g: Graph) -> VertexSet:
    return VertexSet.make(g.vertices, {r.id: 0 for r in g.rays})


def check_membership_args(g: Graph, vset: VertexSet) -> None:
    for v in vset.core:
        if v not in g.vertex_set:
            raise GraphError("UNKNOWN_VERTEX", f"no core vertex {v!r} in graph", vertex=v)
    for rid, _ in vset.rays:
        if rid not in g.ray_map:
            raise GraphError("UNKNOWN_VERTEX", f"no ray {rid!r} in graph", ray=rid)


def build_graph(description: Mapping) -> Graph:
    """Validate a plain description (parsed file contents) into a Graph.

    Edge records may target a ray at position 0 (written "rayid.x0"); such
    records are folded into the ray's entry list.
    """
    if not isinstance(description, Mapping):
        raise GraphError("PARSE_ERROR", "graph description must be a mapping")
    vertices = tuple(description.get("vertices", ()))
    for v in vertices:
        if not isinstance(v, str):
            raise GraphError("DUPLICATE_ID", f"vertex ids must be strings, got {v!r}")
    ray_descs = description.get("rays", ())
    ray_ids = []
    for rd in ray_descs:
        rid = rd.get("id")
        if not isinstance(rid, str):
            raise GraphError("DUPLICATE_ID", f"ray ids must be strings, got {rid!r}")
        ray_ids.append(rid)

    extra_entries: dict[str, list[tuple[str, Mult]]] = {rid: [] for rid in ray_ids}
    edges = []
    for e in description.get("edges", ()):
        src, dst = e["src"], e["dst"]
        mult = Mult.from_json(e.get("mult", 1))
        m = _POSITION_RE.match(dst) if isinstance(dst, str) else None
        if m and m.group(1) in extra_entries and dst not in vertices:
            if int(m.group(2)) != 0:
                raise GraphError(
                    "DANGLING_ENDPOINT",
                    f"edge {src}->{dst}: rays accept in-edges only at position 0",
                    edge=(src, dst),
                )
            extra_entries[m.group(1)].append((src, mult))
        else:
            edges.append((src, dst, mult))

    def _positions(raw) -> tuple[tuple[tuple[str, Mult], ...], ...]:
        return tuple(
            tuple((t["dst"], Mult.from_json(t.get("mult", 1))) for t in pos) for pos in raw
        )

    rays = []
    for rd, rid in zip(ray_descs, ray_ids):
        entry = [(t["src"], Mult.from_json(t.get("mult", 1))) for t in rd.get("entry", ())]
        entry.extend(extra_entries[rid])
        rays.append(
            Ray(
                id=rid,
                entry=tuple(entry),
                prefix=_positions(rd.get("prefix", ())),
                cycle=_positions(rd.get("cycle", ())),
            )
        )
    return Graph(vertices=vertices, edges=tuple(edges), rays=tuple(rays))


# ---------------------------------------------------------------------------
# derived queries


def singularities(g: Graph) -> frozenset[str]:
    """Sinks and infinite emitters.  Spine positions are never singular."""
    out = set()
    for v in g.vertices:
        m = out_multiplicity(g, v)
        if m.is_zero or m.is_omega:
            out.add(v)
    return frozenset(out)


def is_row_finite(g: Graph) -> bool:
    return not any(out_multiplicity(g, v).is_omega for v in g.vertices)


def quotient_out(g: Graph, node: Node) -> Iterator[Node]:
    """Successors in the finite reachability quotient (spine wraps modulo period)."""
    if isinstance(node, str):
        for dst, _ in g._out_edges[node]:
            yield dst
        for rid, _ in g._entries_by_src[node]:
            yield (rid, 0)
        return
    rid, j = node
    ray = g.ray_map[rid]
    yield (rid, ray.class_of(j + 1))
    for dst, _ in ray.targets(j):
        yield dst


def quotient_bfs(g: Graph, sources: Iterable[Node]) -> set[Node]:
    seen = set(sources)
    frontier = list(seen)
    while frontier:
        nxt = []
        for node in frontier:
            for succ in quotient_out(g, node):
                if succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
        frontier = nxt
    return seen


def source_nodes(g: Graph, vset: VertexSet) -> list[Node]:
    nodes: list[Node] = [v for v in vset.core if v in g.vertex_set]
    for rid, k in vset.rays:
        ray = g.ray_map.get(rid)
        if ray is None:
            continue
        p = len(ray.prefix)
        nodes.extend((rid, j) for j in range(k, p))
        nodes.extend((rid, p + c) for c in range(len(ray.cycle)))
    return nodes


def reaches(g: Graph, frm: VertexSet, to: str) -> bool:
    """Does some vertex of frm reach the vertex referenced by to?"""
    check_membership_args(g, frm)
    target = parse_ref(g, to)
    if frm.contains_node(target):
        return True
    reached = quotient_bfs(g, source_nodes(g, frm))
    if isinstance(target, str):
        return target in reached
    rid, j = target
    state = frm.ray_state(rid)
    if state is not None and state <= j:
        return True
    # any other route into a spine position passes through the ray's x0 entry
    return any(u in reached for u, _ in g.ray_map[rid].entry)


def vertex_reaches(g: Graph, ref: str, targets: VertexSet) -> bool:
    """Does the single vertex ref reach some member of targets?"""
    check_membership_args(g, targets)
    node = parse_ref(g, ref)
    if isinstance(node, tuple):
        rid, j = node
        node = (rid, g.ray_map[rid].class_of(j))
    for reached in quotient_bfs(g, [node]):
        if isinstance(reached, str):
            if reached in targets.core:
                return True
        else:
            # visiting any spine node allows climbing arbitrarily far up the ray
            if targets.ray_state(reached[0]) is not None:
                return True
    return False


def reachable_set(g: Graph, frm: VertexSet) -> VertexSet:
    """All vertices reachable from frm, frm included (hereditary closure)."""
    check_membership_args(g, frm)
    reached = quotient_bfs(g, source_nodes(g, frm))
    core = {n for n in reached if isinstance(n, str)}
    states = dict(frm.ray_states)
    for r in g.rays:
        if any(u in core for u, _ in r.entry):
            states[r.id] = 0
    return VertexSet.make(core | set(frm.core), states)


def simple_cycles(g: Graph, restrict_to: VertexSet | None = None) -> list[tuple[str, ...]]:
    """Representative simple cycles inside restrict_to, canonically ordered.

    A cycle visiting spine positions beyond one full period has a shorter twin
    exiting within the first period, so the search graph truncates each ray
    after period_bound positions without losing emptiness-exactness.  Cycles
    re-enter a ray only at x0, so rays whose x0 lies outside restrict_to
    cannot carry a cycle at all.
    """
    restrict = restrict_to if restrict_to is not None else full_vertex_set(g)
    check_membership_args(g, restrict)
    dig = nx.DiGraph()
    for v in g.vertices:
        if v in restrict.core:
            dig.add_node(v)
    usable_rays = [r for r in g.rays if restrict.ray_state(r.id) == 0]
    for r in usable_rays:
        for j in range(r.period_bound):
            dig.add_node((r.id, j))
    for src, dst, _ in g.edges:
        if dig.has_node(src) and dig.has_node(dst):
            dig.add_edge(src, dst)
    for r in usable_rays:
        for u, _ in r.entry:
            if dig.has_node(u):
                dig.add_edge(u, (r.id, 0))
        for j in range(r.period_bound):
            if j + 1 < r.period_bound:
                dig.add_edge((r.id, j), (r.id, j + 1))
            for dst, _ in r.targets(j):
                if dig.has_node(dst):
                    dig.add_edge((r.id, j), dst)
    cycles = []
    for nodes in nx.simple_cycles(dig):
        refs = [node_ref(n) for n in nodes]
        pivot = refs.index(min(refs))
        cycles.append(tuple(refs[pivot:] + refs[:pivot]))
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


@dataclass(frozen=True)
class TailWitness:
    """A maximal infinite tail: head, core chain, then a bare spine suffix."""

    head: str
    core_chain: tuple[str, ...]
    ray: str
    suffix_start: int

    def to_record(self) -> dict:
        return {
            "head": self.head,
            "core_chain": list(self.core_chain),
            "ray": self.ray,
            "suffix_start": self.suffix_start,
        }


def detect_tails(g: Graph) -> list[TailWitness]:
    """Find every maximal tail (infinite path whose edges are forced both ways)."""
    witnesses = []
    for ray in sorted(g.rays, key=lambda r: r.id):
        if any(pos for pos in ray.cycle):
            continue  # spine keeps emitting into the core, never a bare tail
        j_min = len(ray.prefix)
        while j_min > 0 and not ray.prefix[j_min - 1]:
            j_min -= 1
        if j_min > 0:
            witnesses.append(TailWitness(node_ref((ray.id, j_min)), (), ray.id, j_min))
            continue
        # bare from x0: extend backwards through single-in single-out vertices
        chain: list[str] = []
        head: Node = (ray.id, 0)
        visited: set[Node] = {head}
        while True:
            if in_multiplicity(g, head) != ONE:
                break
            sources = in_core_sources(g, head)
            if len(sources) != 1:
                break  # the one in-edge comes from a spine position, which also emits its spine
            u = sources[0][0]
            if u in visited or out_multiplicity(g, u) != ONE:
                break
            if isinstance(head, str):
                chain.insert(0, head)
            head = u
            visited.add(u)
        head_ref = node_ref(head)
        witnesses.append(TailWitness(head_ref, tuple(chain), ray.id, 0))
    return witnesses


def materialize(g: Graph, depth: int) -> Graph:
    """Finite truncation: cut every ray after spine position depth.

    The last retained spine vertex keeps its core-target edges but loses its
    spine edge.  Spine positions become core vertices named "rayid.xk".
    """
    if depth < 0:
        raise GraphError("UNKNOWN_VERTEX", f"materialize depth must be nonnegative, got {depth}")
    vertices = list(g.vertices)
    edges = list(g.edges)
    for ray in g.rays:
        names = [f"{ray.id}.x{j}" for j in range(depth + 1)]
        vertices.extend(names)
        for u, m in ray.entry:
            edges.append((u, names[0], m))
        for j in range(depth + 1):
            if j + 1 <= depth:
                edges.append((names[j], names[j + 1], ONE))
            for dst, m in ray.targets(j):
                edges.append((names[j], dst, m))
    return Graph(vertices=tuple(vertices), edges=tuple(edges), rays=())


# ---------------------------------------------------------------------------
# canonical form and structural equality


def _canon_multiset(pairs: Iterable[tuple[str, Mult]]) -> tuple[tuple[str, int | str], ...]:
    acc: dict[str, Mult] = {}
    for name, m in pairs:
        acc[name] = acc.get(name, ZERO) + m
    return tuple(sorted((name, m.to_json()) for name, m in acc.items()))


def _canon_ray(ray: Ray):
    prefix = [_canon_multiset(pos) for pos in ray.prefix]
    cycle = [_canon_multiset(pos) for pos in ray.cycle]
    for d in range(1, len(cycle) + 1):
        if len(cycle) % d == 0 and cycle == cycle[:d] * (len(cycle) // d):
            cycle = cycle[:d]
            break
    while prefix and prefix[-1] == cycle[-1]:
        prefix.pop()
        cycle = [cycle[-1]] + cycle[:-1]
    return (ray.id, _canon_multiset(ray.entry), tuple(prefix), tuple(cycle))


def canonical_key(g: Graph):
    """A hashable form invariant under parallel-edge splits, edge order and
    redundant ray presentations (unrolled periods, prefix tails equal to the cycle)."""
    edge_acc: dict[tuple[str, str], Mult] = {}
    for src, dst, m in g.edges:
        edge_acc[(src, dst)] = edge_acc.get((src, dst), ZERO) + m
    edges = tuple(sorted((src, dst, m.to_json()) for (src, dst), m in edge_acc.items()))
    rays = tuple(sorted((_canon_ray(r) for r in g.rays), key=lambda t: t[0]))
    return (tuple(sorted(g.vertices)), edges, rays)


def graphs_equal(a: Graph, b: Graph) -> bool:
    """Labeled structural equality up to canonical form."""
    return canonical_key(a) == canonical_key(b)
