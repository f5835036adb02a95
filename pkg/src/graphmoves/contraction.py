"""Path families B_v and the contraction they induce.

For a graph with distinguished vertex set g0 and complement subgraph T, B_v is
the set of paths that start at v, end at a g0 vertex, and keep every interior
range inside T.  When T is acyclic these families are computed exactly: finite
paths are listed one by one, and paths that climb a ray and exit at a position
inside the repeating cycle are grouped into infinite families (one family per
quotient pattern, each standing for countably many paths obtained by inserting
extra full loops before a climb exit).

`contract` replaces the graph by g0 with one edge per B-path; `ck_expand`
recomputes a finite B_v by the leaf-rewriting rule, giving an independent
cross-check of the enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .conditions import SubgraphT, check_theorem, induced_T
from .errors import GraphError
from .graph import (
    Graph,
    Node,
    Ray,
    VertexSet,
    node_ref,
    out_multiplicity,
    out_slots,
    parse_ref,
    simple_cycles,
)
from .multiplicity import Mult, OMEGA, ONE, ZERO, msum


@dataclass(frozen=True)
class BvPath:
    """One finite B-path: its vertex sequence and how many parallel copies."""

    refs: tuple[str, ...]
    count: Mult

    @property
    def length(self) -> int:
        return len(self.refs) - 1

    def to_record(self) -> dict:
        return {"refs": list(self.refs), "count": self.count.to_json()}


@dataclass(frozen=True)
class Climb:
    """A cycle-class exit inside a path: the free loop parameter lives here."""

    ref_index: int  # index into refs of the position the exit is taken from
    ray: str
    position: int  # real spine index of the minimal member

    def to_record(self) -> dict:
        return {"ref_index": self.ref_index, "ray": self.ray, "position": self.position}


@dataclass(frozen=True)
class InfiniteFamily:
    """Countably many B-paths: a minimal member plus its free climb parameters.

    periods[i] is the spine period of the ray behind climbs[i]; adding one to
    parameter i inserts one more full loop (periods[i] positions) before that
    climb's exit.
    """

    refs: tuple[str, ...]
    climbs: tuple[Climb, ...]
    base_count: Mult
    periods: tuple[int, ...] = ()

    def member(self, params: tuple[int, ...]) -> tuple[str, ...]:
        """The member path with params[i] extra loops before climb exit i."""
        if len(params) != len(self.climbs):
            raise GraphError("UNKNOWN_VERTEX", "one loop parameter per climb required")
        by_index = {
            c.ref_index: (c, period, extra)
            for c, period, extra in zip(self.climbs, self.periods, params)
        }
        out: list[str] = []
        for i, ref in enumerate(self.refs):
            if i in by_index:
                climb, period, extra = by_index[i]
                stop = climb.position + extra * period
                out.extend(f"{climb.ray}.x{j}" for j in range(climb.position, stop + 1))
            else:
                out.append(ref)
        return tuple(out)

    def members(self, k: int) -> list[tuple[str, ...]]:
        """The k members with smallest total extra loops, deterministic order."""
        out: list[tuple[str, ...]] = []
        total = 0
        while len(out) < k:
            for params in _compositions(total, len(self.climbs)):
                out.append(self.member(params))
                if len(out) == k:
                    break
            total += 1
        return out

    def to_record(self) -> dict:
        return {
            "refs": list(self.refs),
            "climbs": [c.to_record() for c in self.climbs],
            "base_count": self.base_count.to_json(),
        }


def _compositions(total: int, n: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        if total == 0:
            yield ()
        return
    if n == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, n - 1):
            yield (head,) + rest


@dataclass(frozen=True)
class PathFamily:
    """The complete B_v: finite paths plus infinite families."""

    owner: str
    finite_part: tuple[BvPath, ...]
    infinite_families: tuple[InfiniteFamily, ...]

    @property
    def cardinality(self) -> Mult:
        total = msum(p.count for p in self.finite_part)
        if self.infinite_families:
            total = total + OMEGA
        return total

    @property
    def max_length(self) -> Mult | None:
        """N(v): the supremum of member lengths; None when B_v is empty."""
        if self.infinite_families:
            return OMEGA
        if not self.finite_part:
            return None
        return Mult(max(p.length for p in self.finite_part))

    def endpoints(self) -> dict[str, Mult]:
        acc: dict[str, Mult] = {}
        for p in self.finite_part:
            acc[p.refs[-1]] = acc.get(p.refs[-1], ZERO) + p.count
        for f in self.infinite_families:
            acc[f.refs[-1]] = acc.get(f.refs[-1], ZERO) + OMEGA
        return acc

    def to_record(self) -> dict:
        return {
            "owner": self.owner,
            "finite": [p.to_record() for p in self.finite_part],
            "families": [f.to_record() for f in self.infinite_families],
            "cardinality": self.cardinality.to_json(),
            "max_length": None if self.max_length is None else self.max_length.to_json(),
        }


def _require_acyclic_T(g: Graph, g0: VertexSet, t: SubgraphT) -> None:
    cycles = simple_cycles(g, restrict_to=t.as_vertex_set())
    if cycles:
        raise GraphError(
            "T_NOT_ACYCLIC",
            f"complement subgraph has {len(cycles)} cycle(s), e.g. {' -> '.join(cycles[0])}",
            cycles=[list(c) for c in cycles],
        )


def enumerate_Bv(g: Graph, g0: VertexSet, v: str) -> PathFamily:
    """All B-paths from v, grouped into finite paths and infinite families."""
    t = induced_T(g, g0)
    _require_acyclic_T(g, g0, t)
    start = parse_ref(g, v)

    finite: list[BvPath] = []
    families: list[InfiniteFamily] = []

    def complete(refs: list[str], cnt: Mult, climbs: list[tuple[Climb, int]]):
        if not climbs:
            finite.append(BvPath(tuple(refs), cnt))
        else:
            fam = InfiniteFamily(
                refs=tuple(refs),
                climbs=tuple(c for c, _ in climbs),
                base_count=cnt,
                periods=tuple(p for _, p in climbs),
            )
            families.append(fam)

    def step_to(node: Node, m: Mult, refs: list[str], cnt: Mult, climbs):
        nxt = refs + [node_ref(node)]
        if g0.contains_node(node):
            complete(nxt, cnt * m, climbs)
        elif t.contains(node):
            if isinstance(node, str):
                walk_core(node, nxt, cnt * m, climbs)
            else:
                walk_ray(node[0], node[1], nxt[:-1], cnt * m, climbs)
        # a node outside both is impossible: g0 and T partition the vertices

    def walk_core(u: str, refs: list[str], cnt: Mult, climbs):
        for node, m in out_slots(g, u):
            step_to(node, m, refs, cnt, climbs)

    def walk_ray(rid: str, j0: int, refs: list[str], cnt: Mult, climbs):
        """Climb ray rid from real position j0; refs excludes the positions."""
        ray = g.ray_map[rid]
        p, bound, period = len(ray.prefix), ray.period_bound, len(ray.cycle)
        here = list(refs)
        for j in range(j0, bound):
            here = here + [f"{rid}.x{j}"]
            for dst, m in ray.targets(j):
                if j < p:
                    step_to(dst, m, here, cnt, climbs)
                else:
                    marker = (Climb(len(here) - 1, rid, j), period)
                    step_to(dst, m, here, cnt, climbs + [marker])

    if isinstance(start, str):
        walk_core(start, [start], ONE, [])
    else:
        rid, j = start
        if rid in t.ray_ids:
            walk_ray(rid, j, [], ONE, [])
        else:
            # position of a g0 ray: spine and targets are immediate slots
            for node, m in out_slots(g, start):
                step_to(node, m, [node_ref(start)], ONE, [])

    key = lambda refs: (refs[-1], len(refs), refs)
    finite.sort(key=lambda pth: key(pth.refs))
    families.sort(key=lambda fam: key(fam.refs))
    return PathFamily(owner=v, finite_part=tuple(finite), infinite_families=tuple(families))


@dataclass(frozen=True)
class ContractedGraph:
    """The contraction onto g0, with per-edge path provenance."""

    graph: Graph
    provenance: Mapping[tuple[str, str], tuple]

    def to_record(self) -> dict:
        return {
            "vertices": list(self.graph.vertices),
            "edges": [
                {"src": s, "dst": d, "mult": m.to_json()} for s, d, m in self.graph.edges
            ],
            "rays": [
                {
                    "id": r.id,
                    "entry": [{"src": u, "mult": m.to_json()} for u, m in r.entry],
                    "prefix": [[{"dst": d, "mult": m.to_json()} for d, m in pos] for pos in r.prefix],
                    "cycle": [[{"dst": d, "mult": m.to_json()} for d, m in pos] for pos in r.cycle],
                }
                for r in self.graph.rays
            ],
            "provenance": {
                f"{s}->{d}": [rec for rec in recs] for (s, d), recs in sorted(self.provenance.items())
            },
        }


def contract(g: Graph, g0: VertexSet, mode: str = "checked") -> ContractedGraph:
    """Collapse to g0 with one edge per B-path.

    Checked mode demands the full contractibility verdict; unchecked mode
    (used to study what goes wrong without the conditions) only requires the
    complement subgraph to be acyclic.
    """
    if mode not in ("checked", "unchecked"):
        raise GraphError("PARSE_ERROR", f"unknown contraction mode {mode!r}")
    t = induced_T(g, g0)  # validates g0 along the way
    if mode == "checked":
        verdict = check_theorem(g, g0)
        if not verdict.passed:
            raise GraphError(
                "CONDITIONS_FAILED",
                "contraction conditions do not hold: " + ", ".join(verdict.kinds()),
                verdict=verdict.to_record(),
            )
    _require_acyclic_T(g, g0, t)

    kept_rays = []
    for r in g.rays:
        if g0.ray_state(r.id) != 0:
            continue
        targets = {dst for pos in (*r.prefix, *r.cycle) for dst, _ in pos}
        if not targets <= g0.core:
            raise GraphError(
                "G0_CONTAINS_RAY",
                f"ray {r.id} lies in g0 but targets vertices outside it; "
                "contract that ray's positions as core vertices instead",
                ray=r.id,
            )
        kept_rays.append(r)

    vertices = tuple(u for u in g.vertices if u in g0.core)
    edge_mult: dict[tuple[str, str], Mult] = {}
    entry_mult: dict[tuple[str, str], Mult] = {}  # (source, ray id)
    provenance: dict[tuple[str, str], list] = {}

    for u in vertices:
        fam = enumerate_Bv(g, g0, u)
        for p in fam.finite_part:
            _record_path(edge_mult, entry_mult, provenance, g, u, p.refs, p.count, None)
        for f in fam.infinite_families:
            _record_path(edge_mult, entry_mult, provenance, g, u, f.refs, OMEGA, f)

    rays = tuple(
        Ray(
            id=r.id,
            entry=tuple(sorted(
                ((src, m) for (src, rid), m in entry_mult.items() if rid == r.id),
                key=lambda pair: pair[0],
            )),
            prefix=r.prefix,
            cycle=r.cycle,
        )
        for r in kept_rays
    )
    edges = tuple(
        (s, d, m) for (s, d), m in sorted(edge_mult.items())
    )
    contracted = Graph(vertices=vertices, edges=edges, rays=rays)
    return ContractedGraph(graph=contracted, provenance={k: tuple(v) for k, v in provenance.items()})


def _record_path(edge_mult, entry_mult, provenance, g: Graph, src: str, refs, count: Mult, family):
    end = refs[-1]
    node = parse_ref(g, end)
    if isinstance(node, tuple):
        rid, j = node
        # B-paths into a kept ray stop at its x0
        key = (src, rid)
        entry_mult[key] = entry_mult.get(key, ZERO) + count
        pkey = (src, end)
    else:
        key = (src, end)
        edge_mult[key] = edge_mult.get(key, ZERO) + count
        pkey = key
    rec = {"path": list(refs), "count": count.to_json()}
    if family is not None:
        rec["climbs"] = [c.to_record() for c in family.climbs]
    provenance.setdefault(pkey, []).append(rec)


def ck_expand(g: Graph, g0: VertexSet, v: str) -> dict[tuple[str, ...], Mult]:
    """Recompute a finite B_v by repeatedly rewriting non-g0 leaves.

    Starting from the trivial path at v, the first sweep always rewrites; after
    that only leaves ending outside g0 are rewritten, each leaf being replaced
    by its one-edge extensions.  Dead ends (sinks inside T) drop out.  Returns
    the leaf multiset, which matches enumerate_Bv's finite part.
    """
    fam = enumerate_Bv(g, g0, v)
    if fam.cardinality.is_zero:
        raise GraphError("BV_EMPTY", f"B_{v} is empty", vertex=v)
    if fam.cardinality.is_omega:
        raise GraphError("BV_INFINITE", f"B_{v} is infinite", vertex=v)
    if out_multiplicity(g, parse_ref(g, v)).is_omega:
        raise GraphError("BV_INFINITE", f"{v} emits infinitely many edges", vertex=v)

    t = induced_T(g, g0)
    rounds_max = len(t.core) + sum(g.ray_map[rid].period_bound for rid in t.ray_ids) + 2

    leaves: dict[tuple[str, ...], Mult] = {(v,): ONE}

    def sweep(first: bool) -> bool:
        nonlocal leaves
        nxt: dict[tuple[str, ...], Mult] = {}
        rewrote = False
        for refs, cnt in leaves.items():
            node = parse_ref(g, refs[-1])
            if not first and g0.contains_node(node):
                nxt[refs] = nxt.get(refs, ZERO) + cnt
                continue
            rewrote = True
            for target, m in out_slots(g, node):
                child = refs + (node_ref(target),)
                nxt[child] = nxt.get(child, ZERO) + cnt * m
        leaves = nxt
        return rewrote

    sweep(True)
    for _ in range(rounds_max):
        if not sweep(False):
            return dict(sorted(leaves.items(), key=lambda kv: (kv[0][-1], len(kv[0]), kv[0])))
    raise GraphError("NONTERMINATING", f"expansion at {v} exceeded {rounds_max} sweeps", vertex=v)
