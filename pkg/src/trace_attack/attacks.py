"""Recovering the secret quadtree from EN and exact locations from A / C.

Both procedures are purely algebraic: they eliminate the shared masking
randoms and reduce to linear systems over Z_p.
"""

from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import FrozenSet, List, Optional, Tuple

from .errors import AmbiguousIntersection, EmptyIntersection, RecoveryError
from .linalg import MatrixZp, SolveOutcome, Status, rank, solve
from .modmath import signed_rep
from .protocol import MaskedPoint, MaskedQuadtree, permute_block
from .quadtree import Point

PERMUTATIONS = tuple(permutations(range(4)))
BATCH = 4
UNKNOWNS_PER_NODE = 8


def _col(node_slot, j, coord):
    """Column of x (coord=0) or y (coord=1) of vertex j of the batch's slot-th node."""
    return UNKNOWNS_PER_NODE * node_slot + 2 * j + coord


@dataclass
class PairSystem:
    P: MatrixZp
    Q: list


def _pair_rows(en_i, en_k, p, slot_i, slot_k, ncols):
    """The 28 linear relations between the vertices of two masked nodes."""
    rows, rhs = [], []

    def emit(terms, value):
        row = [0] * ncols
        for coeff, col in terms:
            row[col] = (row[col] + coeff) % p
        rows.append(row)
        rhs.append(value % p)

    for j in range(4):
        jn = (j + 1) % 4
        d1, d2, d3, d4, d5, d6 = ((u - v) % p for u, v in zip(en_i[j], en_k[j]))
        X = lambda slot, v: _col(slot, v, 0)  # noqa: E731
        Y = lambda slot, v: _col(slot, v, 1)  # noqa: E731
        i, k = slot_i, slot_k
        emit([(d1, Y(i, jn)), (d4, X(k, j))], d5)
        emit([(d1, Y(k, jn)), (d4, X(i, j))], d5)
        emit([(d2, X(i, jn)), (d3, Y(k, j))], d6)
        emit([(d2, X(k, jn)), (d3, Y(i, j))], d6)
        emit([(d2, X(i, j)), (-d2, X(k, j)), (-d1, Y(i, j)), (d1, Y(k, j))], 0)
        emit([(d3, Y(i, j)), (-d3, Y(k, j)), (-d2, X(i, jn)), (d2, X(k, jn))], 0)
        emit([(d4, X(i, jn)), (-d4, X(k, jn)), (-d3, Y(i, jn)), (d3, Y(k, jn))], 0)
    return rows, rhs


def build_pair_system(en_i, en_k, p):
    """28x16 system in (vertices of node i, vertices of node k)."""
    rows, rhs = _pair_rows(en_i, en_k, p, 0, 1, 2 * UNKNOWNS_PER_NODE)
    return PairSystem(MatrixZp(rows, p), rhs)


def build_quad_system(nodes, p):
    """168x32 block system over all six pairs of four masked nodes."""
    if len(nodes) != BATCH:
        raise ValueError("need exactly four node slices")
    ncols = BATCH * UNKNOWNS_PER_NODE
    rows, rhs = [], []
    for a, b in combinations(range(BATCH), 2):
        r, q = _pair_rows(nodes[a], nodes[b], p, a, b, ncols)
        rows += r
        rhs += q
    return PairSystem(MatrixZp(rows, p), rhs)


def vertices_vector(vertex_lists):
    """Flatten ``[[(x, y)] * 4, ...]`` into the unknown ordering used above."""
    return [c for verts in vertex_lists for v in verts for c in v]


def _decode_vertices(solution, p):
    vals = [signed_rep(v, p) for v in solution]
    return [
        tuple(Point(vals[8 * s + 2 * j], vals[8 * s + 2 * j + 1]) for j in range(4))
        for s in range(len(vals) // 8)
    ]


def solve_batch(en, idx, p):
    """Solve the batch system for node indices ``idx``.

    Returns (outcome, vertices-or-None).
    """
    system = build_quad_system([en[i] for i in idx], p)
    outcome = solve(system.P, system.Q)
    verts = _decode_vertices(outcome.solution, p) if outcome.unique else None
    return outcome, verts


@dataclass
class QuadtreeRecovery:
    vertices: List[Tuple[Point, ...]]
    batches: List[Tuple[int, ...]] = field(default_factory=list)
    ranks: List[int] = field(default_factory=list)


def _dedupe(batch, en):
    # identical masked nodes zero every difference and add no equations
    out = []
    for i in batch:
        if en[i] not in [en[b] for b in out]:
            out.append(i)
    return out


def recover_quadtree(en, p, rng=None, max_attempts=4):
    """Recover every node's four vertices from the masked quadtree alone.

    Nodes are consumed four at a time (shuffled when ``rng`` is given). The
    last batch is padded with already recovered nodes whose re-solved values
    must agree. A batch that fails is retried with substitute companions
    before the failure is raised as :class:`RecoveryError`.
    """
    en = en.en if isinstance(en, MaskedQuadtree) else en
    m = len(en)
    if m < BATCH:
        raise ValueError(f"need at least {BATCH} nodes, got {m}")
    order = list(range(m))
    if rng is not None:
        rng.shuffle(order)

    recovered = {}
    result = QuadtreeRecovery([])
    pending = order
    while pending:
        head = pending[:BATCH]
        attempt = 0
        while True:
            # retries keep the first pending node and rotate its companions
            batch = list(head) if attempt == 0 else head[:1]
            batch = _dedupe(batch, en)
            others = [i for i in order if i not in batch]
            others.sort(key=lambda i: i not in recovered)
            if attempt:
                shift = (attempt - 1) % max(len(others), 1)
                others = others[shift:] + others[:shift]
            batch += [i for i in others if en[i] not in [en[b] for b in batch]][: BATCH - len(batch)]
            if len(batch) < BATCH:
                raise RecoveryError(Status.UNDERDETERMINED, 0, batch)
            outcome, verts = solve_batch(en, batch, p)
            if outcome.unique:
                break
            attempt += 1
            if attempt >= max_attempts:
                raise RecoveryError(outcome.status, outcome.rank, batch)
        result.batches.append(tuple(batch))
        result.ranks.append(outcome.rank)
        for i, v in zip(batch, verts):
            if i in recovered and recovered[i] != v:
                raise RecoveryError(Status.INCONSISTENT, outcome.rank, batch)
            recovered[i] = v
        pending = [i for i in pending if i not in recovered]
    result.vertices = [recovered[i] for i in range(m)]
    return result


# -- location recovery -----------------------------------------------------

_PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def location_equations(a_block, en_node, p):
    """Per-vertex linear equation ``cx*x + cy*y = c0`` eliminating r and alpha."""
    eqs = []
    for (a1, a2), e in zip(a_block, en_node):
        cx = (a1 * e[1] - a2 * e[3]) % p
        cy = (a1 * e[2] - a2 * e[0]) % p
        c0 = (a2 * e[5] - a1 * e[4]) % p
        eqs.append((cx, cy, c0))
    return eqs


def _solve2(e, f, p):
    det = (e[0] * f[1] - e[1] * f[0]) % p
    if det == 0:
        return None
    inv = pow(det, -1, p)
    x = (e[2] * f[1] - e[1] * f[2]) * inv % p
    y = (e[0] * f[2] - e[2] * f[0]) * inv % p
    return x, y


def _satisfies(eq, x, y, p):
    return (eq[0] * x + eq[1] * y - eq[2]) % p == 0


@dataclass(frozen=True)
class CandidateSet:
    node: int
    candidates: FrozenSet[Point]
    perms: Tuple[Tuple[int, ...], ...] = ()


def candidate_locations(a_block, en_node, p, node=0):
    """Locations consistent with some un-permutation of one node's masked block."""
    found = {}
    for rho in PERMUTATIONS:
        eqs = location_equations(permute_block(a_block, rho), en_node, p)
        for (s1, s2), checks in _PAIRINGS:
            sol = _solve2(eqs[s1], eqs[s2], p)
            if sol is None:
                continue
            if all(_satisfies(eqs[c], *sol, p) for c in checks):
                pt = Point(signed_rep(sol[0], p), signed_rep(sol[1], p))
                found.setdefault(pt, []).append(rho)
            break
    return CandidateSet(node, frozenset(found), tuple(r for rs in found.values() for r in rs))


@dataclass
class LocationRecovery:
    point: Point
    sizes: List[int]

    @property
    def max_candidates(self):
        return max(self.sizes)


def recover_location(masked, en, p, detail=False):
    """Intersect the per-node candidate sets; the survivor is the location."""
    a = masked.a if isinstance(masked, MaskedPoint) else masked
    en = en.en if isinstance(en, MaskedQuadtree) else en
    if not a:
        raise ValueError("empty masked point")
    common = None
    sizes = []
    for i, (block, node) in enumerate(zip(a, en)):
        cs = candidate_locations(block, node, p, i).candidates
        sizes.append(len(cs))
        common = set(cs) if common is None else common & cs
    if not common:
        raise EmptyIntersection("candidate sets share no location")
    if len(common) > 1:
        raise AmbiguousIntersection(common)
    (pt,) = common
    return LocationRecovery(pt, sizes) if detail else pt


def recover_pickup(C, en, p):
    corners = [recover_location(c, en, p) for c in C[:4]]
    sx = sum(c.x for c in corners)
    sy = sum(c.y for c in corners)
    if sx % 4 or sy % 4:
        raise RecoveryError(Status.INCONSISTENT, 0, ())
    return Point(sx // 4, sy // 4)


def recover_takeoff(c5, en, p):
    return recover_location(c5, en, p)


def pair_rank(en, i, k, p):
    return rank(build_pair_system(en[i], en[k], p).P)


def attack_transcript(transcript):
    """Run every applicable attack on a recorded transcript.

    Returns a dict with the recovered quadtree vertices (or the failure) and
    the recovered location of every masked point found.
    """
    params = transcript.first("params").payload
    p = params["p"]
    en = transcript.first("EN").payload
    out = {"quadtree": None, "locations": {}}
    try:
        rec = recover_quadtree(en, p)
        out["quadtree"] = [[list(v) for v in verts] for verts in rec.vertices]
    except RecoveryError as exc:
        out["quadtree_error"] = str(exc)

    def attempt(label, fn):
        try:
            out["locations"][label] = list(fn())
        except (AmbiguousIntersection, EmptyIntersection, RecoveryError) as exc:
            out["locations"][label] = {"error": str(exc)}

    for msg in transcript.find("A"):
        attempt(msg.sender, lambda a=msg.payload: recover_location(a, en, p))
    for msg in transcript.find("request"):
        attempt("RC:pickup", lambda c=msg.payload["C"]: recover_pickup(c, en, p))
    for msg in transcript.find("takeoff"):
        attempt("RC:takeoff", lambda c=msg.payload["C5"]: recover_takeoff(c, en, p))
    return out
