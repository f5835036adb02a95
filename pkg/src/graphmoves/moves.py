"""Companion moves: desingularization, delays, ESSE splitting, skew products,
and tail removal.

Each move is a pure Graph -> Graph construction chosen so that the contraction
machinery can undo or analyze it: desingularization and the two delays are
inverted by contracting back onto the original vertex set, an ESSE split is
literally a pair of contractions of the bipartite middle graph, and skew
products / tail removal produce inputs the checkers accept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .contraction import ContractedGraph, contract
from .errors import GraphError
from .graph import Graph, Ray, VertexSet, detect_tails, node_ref, out_multiplicity, parse_ref
from .multiplicity import Mult, ONE, ZERO


def _fresh_ids(g: Graph, wanted: Sequence[str]) -> None:
    taken = set(g.vertices) | set(g.ray_map)
    for name in wanted:
        if name in taken:
            raise GraphError("DUPLICATE_ID", f"generated id {name!r} already taken", vertex=name)


def _entry_ray(g: Graph, ref: str) -> str | None:
    """The ray id when ref names an existing ray's x0 position, else None."""
    if ref in g.vertex_set:
        return None
    if ref.endswith(".x0") and ref[: -len(".x0")] in g.ray_map:
        return ref[: -len(".x0")]
    return None


class _EdgeAcc:
    """Accumulates edges and ray entries with multiplicity aggregation."""

    def __init__(self, g: Graph):
        self.g = g
        self.edges: dict[tuple[str, str], Mult] = {}
        self.entries: dict[str, list[tuple[str, Mult]]] = {r.id: [] for r in g.rays}

    def add(self, src: str, dst_ref: str, m: Mult) -> None:
        rid = _entry_ray(self.g, dst_ref)
        if rid is not None:
            self.entries[rid].append((src, m))
        else:
            key = (src, dst_ref)
            self.edges[key] = self.edges.get(key, ZERO) + m

    def edge_tuple(self) -> tuple[tuple[str, str, Mult], ...]:
        return tuple((s, d, m) for (s, d), m in sorted(self.edges.items()))

    def rays_tuple(self) -> tuple[Ray, ...]:
        return tuple(
            Ray(id=r.id, entry=tuple(self.entries[r.id]), prefix=r.prefix, cycle=r.cycle)
            for r in self.g.rays
        )


# ---------------------------------------------------------------------------
# desingularization


def desingularize(g: Graph) -> Graph:
    """Push every infinite emitter's omega edges onto a new ray.

    Each omega target w of an emitter v contributes one direct edge v -> w and
    one position {w} in the new ray's repeating cycle (targets visited round
    robin, sorted by id).  Finite edges stay at v.  The result is row finite.
    """
    tails = detect_tails(g)
    if tails:
        raise GraphError(
            "HAS_TAILS",
            "desingularization needs a tail-free graph; run tails_to_sinks first",
            tails=[t.to_record() for t in tails],
        )
    for r in g.rays:
        for u, m in r.entry:
            if m.is_omega:
                raise GraphError(
                    "OMEGA_ENTRY",
                    f"cannot desingularize the infinite entry {u} -> {r.id}.x0: "
                    "ray positions cannot carry the distributed targets",
                    ray=r.id,
                )

    emitters = sorted(v for v in g.vertices if out_multiplicity(g, v).is_omega)
    if not emitters:
        return g
    new_ray_ids = {v: f"{v}_inf" for v in emitters}
    _fresh_ids(g, list(new_ray_ids.values()))

    edges = [(src, dst, m) for src, dst, m in g.edges if not m.is_omega]
    new_rays: list[Ray] = []
    for v in emitters:
        omega_targets = sorted({dst for src, dst, m in g.edges if src == v and m.is_omega})
        edges.extend((v, w, ONE) for w in omega_targets)
        new_rays.append(
            Ray(
                id=new_ray_ids[v],
                entry=((v, ONE),),
                prefix=(),
                cycle=tuple(((w, ONE),) for w in omega_targets),
            )
        )
    return Graph(vertices=g.vertices, edges=tuple(edges), rays=g.rays + tuple(new_rays))


# ---------------------------------------------------------------------------
# delays


@dataclass(frozen=True)
class DelayPlan:
    """Per-slot stage assignment for one vertex's out- or in-edges.

    stages[i] applies to the i-th slot in canonical order (see out_slot_units
    and in_slot_units); a slot at stage k attaches k steps along the gantlet.
    """

    vertex: str
    stages: tuple[int, ...]

    def __post_init__(self):
        if any(s < 0 for s in self.stages):
            raise GraphError("STAGE_MISMATCH", "stages must be nonnegative", vertex=self.vertex)


def out_slot_units(g: Graph, v: str) -> list[str]:
    """Unit out-slots of v in canonical order: one ref per multiplicity unit."""
    if v not in g.vertex_set:
        raise GraphError("UNKNOWN_VERTEX", f"no core vertex {v!r} in graph", vertex=v)
    if out_multiplicity(g, v).is_omega:
        raise GraphError("INFINITE_DEGREE", f"{v} emits infinitely many edges", vertex=v)
    pairs = [(dst, m) for dst, m in g._out_edges[v]]
    pairs.extend((f"{rid}.x0", m) for rid, m in g._entries_by_src[v])
    units: list[str] = []
    for ref, m in sorted(pairs, key=lambda pair: pair[0]):
        units.extend([ref] * m.n)
    return units


def in_slot_units(g: Graph, v: str) -> list[str]:
    """Unit in-slots of core vertex v in canonical order (source refs)."""
    if v not in g.vertex_set:
        raise GraphError("UNKNOWN_VERTEX", f"no core vertex {v!r} in graph", vertex=v)
    pairs: list[tuple[str, Mult]] = []
    for src, dst, m in g.edges:
        if dst == v:
            if m.is_omega:
                raise GraphError("INFINITE_DEGREE", f"{v} receives infinitely many edges", vertex=v)
            pairs.append((src, m))
    for r in g.rays:
        if any(dst == v for pos in r.cycle for dst, _ in pos):
            raise GraphError(
                "INFINITE_DEGREE",
                f"{v} is hit by ray {r.id}'s repeating cycle",
                vertex=v,
                ray=r.id,
            )
        for j, pos in enumerate(r.prefix):
            for dst, m in pos:
                if dst == v:
                    pairs.append((f"{r.id}.x{j}", m))
    units: list[str] = []
    for ref, m in sorted(pairs, key=lambda pair: pair[0]):
        units.extend([ref] * m.n)
    return units


def _validated_plans(g: Graph, plans: Sequence[DelayPlan], units_of) -> dict[str, tuple[DelayPlan, list[str]]]:
    out: dict[str, tuple[DelayPlan, list[str]]] = {}
    for plan in plans:
        if plan.vertex in out:
            raise GraphError("STAGE_MISMATCH", f"two plans for {plan.vertex}", vertex=plan.vertex)
        units = units_of(g, plan.vertex)
        if len(plan.stages) != len(units):
            raise GraphError(
                "STAGE_MISMATCH",
                f"{plan.vertex}: plan has {len(plan.stages)} stages for {len(units)} edge slots",
                vertex=plan.vertex,
            )
        out[plan.vertex] = (plan, units)
    return out


def _gantlet_names(g: Graph, v: str, depth: int) -> list[str]:
    names = [f"{v}_{k}" for k in range(1, depth + 1)]
    _fresh_ids(g, names)
    return [v] + names


def out_delay(g: Graph, plans: Sequence[DelayPlan]) -> Graph:
    """Replace each planned vertex by a gantlet re-sourcing its out-edges.

    The vertex keeps its in-edges; an out-slot at stage k leaves from the k-th
    gantlet vertex instead.
    """
    planned = _validated_plans(g, plans, out_slot_units)
    acc = _EdgeAcc(g)
    vertices = list(g.vertices)

    for src, dst, m in g.edges:
        if src not in planned:
            acc.add(src, dst, m)
    for r in g.rays:
        for u, m in r.entry:
            if u not in planned:
                acc.entries[r.id].append((u, m))

    for v in sorted(planned):
        plan, units = planned[v]
        names = _gantlet_names(g, v, max(plan.stages, default=0))
        vertices.extend(names[1:])
        for k in range(len(names) - 1):
            acc.add(names[k], names[k + 1], ONE)
        for ref, stage in zip(units, plan.stages):
            acc.add(names[stage], ref, ONE)

    return Graph(vertices=tuple(vertices), edges=acc.edge_tuple(), rays=acc.rays_tuple())


def in_delay(g: Graph, plans: Sequence[DelayPlan]) -> Graph:
    """Replace each planned vertex by a gantlet re-targeting its in-edges.

    The gantlet feeds downward into the vertex; an in-slot at stage k lands k
    steps up the gantlet.  Out-edges are unaffected.
    """
    planned = _validated_plans(g, plans, in_slot_units)

    queues: dict[tuple[str, str], list[int]] = {}
    for v, (plan, units) in planned.items():
        for ref, stage in zip(units, plan.stages):
            queues.setdefault((ref, v), []).append(stage)

    vertices = list(g.vertices)
    gantlets: dict[str, list[str]] = {}
    for v in sorted(planned):
        plan, _ = planned[v]
        names = _gantlet_names(g, v, max(plan.stages, default=0))
        gantlets[v] = names
        vertices.extend(names[1:])

    def landing(src_ref: str, v: str) -> str:
        return gantlets[v][queues[(src_ref, v)].pop(0)]

    acc = _EdgeAcc(g)
    for v, names in gantlets.items():
        for k in range(len(names) - 1):
            acc.add(names[k + 1], names[k], ONE)
    for src, dst, m in g.edges:
        if dst in planned:
            for _ in range(m.n):
                acc.add(src, landing(src, dst), ONE)
        else:
            acc.add(src, dst, m)

    def remap_positions(rid: str, positions, base: int):
        out = []
        for j, targets in enumerate(positions):
            new_pos: list[tuple[str, Mult]] = []
            for dst, m in targets:
                if dst in planned:
                    ref = f"{rid}.x{base + j}"
                    for _ in range(m.n):
                        new_pos.append((landing(ref, dst), ONE))
                else:
                    new_pos.append((dst, m))
            out.append(tuple(new_pos))
        return tuple(out)

    rays = tuple(
        Ray(
            id=r.id,
            entry=r.entry,
            prefix=remap_positions(r.id, r.prefix, 0),
            cycle=remap_positions(r.id, r.cycle, len(r.prefix)),
        )
        for r in g.rays
    )
    return Graph(vertices=tuple(vertices), edges=acc.edge_tuple(), rays=rays)


# ---------------------------------------------------------------------------
# elementary strong shift equivalence


def esse_split(g3: Graph, partition: tuple[VertexSet, VertexSet]) -> tuple[ContractedGraph, ContractedGraph]:
    """Contract a bipartite middle graph onto each side of its partition."""
    v1, v2 = partition
    if g3.rays:
        raise GraphError("HAS_RAYS", "the middle graph of a split must be finite")
    if v1.rays or v2.rays:
        raise GraphError("NOT_BIPARTITE", "partition sides must be core vertex sets")
    if v1.core & v2.core or (v1.core | v2.core) != g3.vertex_set:
        raise GraphError(
            "NOT_BIPARTITE",
            "the two sides must partition the vertex set",
            v1=sorted(v1.core),
            v2=sorted(v2.core),
        )
    for src, dst, _ in g3.edges:
        if (src in v1.core) == (dst in v1.core):
            raise GraphError(
                "NOT_BIPARTITE",
                f"edge {src} -> {dst} does not cross the partition",
                edge=(src, dst),
            )
    sides = []
    for i, side in enumerate((v1, v2), start=1):
        try:
            sides.append(contract(g3, side, "checked"))
        except GraphError as err:
            if err.code != "CONDITIONS_FAILED":
                raise
            raise GraphError(
                "CONDITIONS_FAILED",
                f"side {i} contraction fails: {err.message}",
                side=i,
                **err.context,
            ) from err
    return (sides[0], sides[1])


# ---------------------------------------------------------------------------
# skew products


@dataclass(frozen=True)
class CocycleLabeling:
    """A Z_p label per edge record, aligned with the graph's edge order."""

    p: int
    labels: tuple[int, ...]

    def __post_init__(self):
        if self.p < 1:
            raise GraphError("PARSE_ERROR", f"modulus must be >= 1, got {self.p}")
        if any(not 0 <= l < self.p for l in self.labels):
            raise GraphError("PARSE_ERROR", "labels must lie in [0, p)")


def skew_product(g: Graph, c: CocycleLabeling) -> Graph:
    """The fibered graph over Z_p: edge e sends fiber k to fiber k + c(e)."""
    if g.rays:
        raise GraphError("HAS_RAYS", "skew products are defined for finite graphs here")
    if len(c.labels) != len(g.edges):
        raise GraphError(
            "STAGE_MISMATCH",
            f"{len(c.labels)} labels for {len(g.edges)} edge records",
        )

    def at(v: str, k: int) -> str:
        return f"{v}@{k}"

    _fresh_ids(g, [at(v, k) for v in g.vertices for k in range(c.p)])
    vertices = tuple(at(v, k) for v in g.vertices for k in range(c.p))
    edges = tuple(
        (at(src, k), at(dst, (k + label) % c.p), m)
        for (src, dst, m), label in zip(g.edges, c.labels)
        for k in range(c.p)
    )
    return Graph(vertices=vertices, edges=edges)


def fiber_zero(g: Graph) -> VertexSet:
    """The canonical g0 for undoing a skew product: every fiber-0 vertex."""
    return VertexSet.make({v for v in g.vertices if v.endswith("@0")})


# ---------------------------------------------------------------------------
# tails to sinks


def tails_to_sinks(g: Graph) -> Graph:
    """Collapse every maximal tail onto its head, which becomes a sink."""
    witnesses = detect_tails(g)
    if not witnesses:
        return g
    doomed_core: set[str] = set()
    cut: dict[str, int] = {}  # ray id -> number of spine positions kept as core
    heads_core: set[str] = set()
    for w in witnesses:
        doomed_core.update(w.core_chain)
        node = parse_ref(g, w.head)
        if isinstance(node, str):
            heads_core.add(node)
            cut[w.ray] = 0  # the whole ray vanishes into the core head
        else:
            cut[w.ray] = node[1] + 1  # the head position stays as the sink

    vertices = list(g.vertices)
    edges: list[tuple[str, str, Mult]] = []
    rays: list[Ray] = []
    for r in g.rays:
        if r.id not in cut:
            rays.append(r)
            continue
        keep = cut[r.id]
        names = [f"{r.id}.x{j}" for j in range(keep)]
        vertices.extend(names)
        if keep:
            for u, m in r.entry:
                if u not in doomed_core and u not in heads_core:
                    edges.append((u, names[0], m))
            for j in range(keep - 1):
                edges.append((names[j], names[j + 1], ONE))
                for dst, m in r.targets(j):
                    edges.append((names[j], dst, m))
    for src, dst, m in g.edges:
        if src in doomed_core or dst in doomed_core:
            continue
        if src in heads_core:
            continue  # the head's single out-edge fed the tail
        edges.append((src, dst, m))
    vertices = [v for v in vertices if v not in doomed_core]
    return Graph(vertices=tuple(vertices), edges=tuple(edges), rays=tuple(rays))
