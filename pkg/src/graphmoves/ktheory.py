"""Integer Smith normal form and the K-theory invariants it yields.

A checked contraction should preserve these invariants, which makes them a
cheap necessary-condition probe: compute before and after, compare.  The
formula used is the standard one for a finite row-finite graph with no sinks:
K0 = coker(A^t - I) and K1 = ker(A^t - I), read off the Smith normal form.

Every smith_normal_form call re-verifies its own output (U m V = D, both
transforms unimodular, diagonal divisibility), so a wrong answer cannot
escape silently.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GraphError
from .graph import Graph, out_multiplicity

IntMatrix = tuple[tuple[int, ...], ...]


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _mat_mul(a, b) -> list[list[int]]:
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    cols = len(b[0])
    return [[sum(ra[k] * b[k][j] for k in range(len(b))) for j in range(cols)] for ra in a]


def _det(m) -> int:
    """Bareiss fraction-free determinant; exact over the integers."""
    a = [list(row) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _freeze(m) -> IntMatrix:
    return tuple(tuple(row) for row in m)


def _verify_snf(m: IntMatrix, U, D, V) -> None:
    if _freeze(_mat_mul(_mat_mul(U, [list(r) for r in m]), V)) != _freeze(D):
        raise RuntimeError("SNF self-check failed: U m V != D")
    if abs(_det(U)) != 1 or abs(_det(V)) != 1:
        raise RuntimeError("SNF self-check failed: transform not unimodular")
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            if i != j and x != 0:
                raise RuntimeError("SNF self-check failed: D not diagonal")
    diag = [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]
    for a, b in zip(diag, diag[1:]):
        if a < 0 or (a == 0 and b != 0) or (a != 0 and b % a != 0):
            raise RuntimeError("SNF self-check failed: divisibility chain broken")


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U m V = D in Smith normal form.

    D is diagonal with nonnegative entries, each dividing the next; U and V
    are unimodular.  The identities are re-verified before returning.
    """
    A = [list(row) for row in m]
    nr = len(A)
    nc = len(A[0]) if nr else 0
    if any(len(row) != nc for row in A):
        raise GraphError("PARSE_ERROR", "ragged matrix")
    U = _identity(nr)
    V = _identity(nc)

    def row_add(i, j, q):
        A[i] = [a + q * b for a, b in zip(A[i], A[j])]
        U[i] = [a + q * b for a, b in zip(U[i], U[j])]

    def col_add(i, j, q):
        for row in A:
            row[i] += q * row[j]
        for row in V:
            row[i] += q * row[j]

    t = 0
    while t < min(nr, nc):
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        if bi != t:
            A[bi], A[t] = A[t], A[bi]
            U[bi], U[t] = U[t], U[bi]
        if bj != t:
            for row in A:
                row[bj], row[t] = row[t], row[bj]
            for row in V:
                row[bj], row[t] = row[t], row[bj]
        dirty = False
        for i in range(t + 1, nr):
            if A[i][t]:
                row_add(i, t, -(A[i][t] // A[t][t]))
                dirty = dirty or A[i][t] != 0
        for j in range(t + 1, nc):
            if A[t][j]:
                col_add(j, t, -(A[t][j] // A[t][t]))
                dirty = dirty or A[t][j] != 0
        if dirty:
            continue  # remainders are strictly smaller; re-pick the pivot
        offender = None
        for i in range(t + 1, nr):
            if any(A[i][j] % A[t][t] for j in range(t + 1, nc)):
                offender = i
                break
        if offender is not None:
            row_add(t, offender, 1)
            continue
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1

    Uf, Df, Vf = _freeze(U), _freeze(A), _freeze(V)
    _verify_snf(m, Uf, Df, Vf)
    return Uf, Df, Vf


@dataclass(frozen=True)
class KInvariants:
    """K0 = Z^k0_free_rank + sum Z/d over k0_torsion; K1 = Z^k1_rank."""

    k0_torsion: tuple[int, ...]
    k0_free_rank: int
    k1_rank: int

    def render(self) -> str:
        parts = []
        if self.k0_free_rank == 1:
            parts.append("Z")
        elif self.k0_free_rank > 1:
            parts.append(f"Z^{self.k0_free_rank}")
        parts.extend(f"Z/{d}" for d in self.k0_torsion)
        k0 = " (+) ".join(parts) if parts else "0"
        k1 = "Z" if self.k1_rank == 1 else ("0" if self.k1_rank == 0 else f"Z^{self.k1_rank}")
        return f"K0 = {k0}; K1 = {k1}"

    def to_record(self) -> dict:
        return {
            "k0_torsion": list(self.k0_torsion),
            "k0_free_rank": self.k0_free_rank,
            "k1_rank": self.k1_rank,
        }


def adjacency_matrix(g: Graph) -> tuple[tuple[str, ...], IntMatrix]:
    """Vertex order and the matrix A with A[u][w] = total multiplicity u->w."""
    if g.rays:
        raise GraphError("HAS_RAYS", "adjacency matrix needs a finite graph")
    order = tuple(sorted(g.vertices))
    index = {v: i for i, v in enumerate(order)}
    a = [[0] * len(order) for _ in order]
    for src, dst, m in g.edges:
        if m.is_omega:
            raise GraphError("NOT_ROW_FINITE", f"edge {src} -> {dst} has infinite multiplicity")
        a[index[src]][index[dst]] += m.n
    return order, _freeze(a)


def k_theory(g: Graph) -> KInvariants:
    """K-theory invariants of a finite row-finite graph with no sinks."""
    if g.rays:
        raise GraphError("HAS_RAYS", "k_theory is defined for finite graphs here")
    order, a = adjacency_matrix(g)
    sinks = [v for v in order if out_multiplicity(g, v).n == 0]
    if sinks:
        raise GraphError("HAS_SINKS", "k_theory needs a sink-free graph", sinks=sinks)
    n = len(order)
    m = _freeze([[a[j][i] - int(i == j) for j in range(n)] for i in range(n)])
    _, d, _ = smith_normal_form(m)
    diag = [d[i][i] for i in range(n)]
    zeros = sum(1 for x in diag if x == 0)
    return KInvariants(
        k0_torsion=tuple(x for x in diag if x > 1),
        k0_free_rank=zeros,
        k1_rank=zeros,
    )
