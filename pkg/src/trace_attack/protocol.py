"""Single-process execution of the TRACE masking protocol (steps 0-8).

Parties are modelled by plain functions over immutable records; the caller
owns the RNG. Indices are 0-based throughout: node ``i``, vertex ``j`` and
mask component ``h`` map to the 1-based subscripts of the protocol text.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import modmath
from .errors import InvalidParams, NoContainingChild, PickupTooCloseToOrigin
from .quadtree import Point, Quadtree

SHARED = "shared"
FRESH = "fresh"
MODES = (SHARED, FRESH)


@dataclass(frozen=True)
class SecurityParams:
    k1: int
    k2: int
    k3: int
    k4: int
    coord_bits: int = 20

    def violations(self):
        """Human-readable list of broken constraints (empty when valid)."""
        k1, k2, k3, k4, L = self.k1, self.k2, self.k3, self.k4, self.coord_bits
        out = []
        if min(k1, k2, k3, k4, L) < 1:
            out.append("all bit lengths must be positive")
        if not k4 + 2 * k2 < k1:
            out.append(f"k4 + 2*k2 < k1 fails ({k4 + 2 * k2} >= {k1})")
        if not k2 + k3 < k1:
            out.append(f"k2 + k3 < k1 fails ({k2 + k3} >= {k1})")
        if not k3 + k4 < k2:
            out.append(f"k3 + k4 < k2 fails ({k3 + k4} >= {k2})")
        # floor((B mod p) / alpha^2) must keep the sign of every nonzero edge
        # test and of every nonzero distance margin
        if not L + max(k3, k4) + 4 < k2:
            out.append(f"L + max(k3, k4) + 4 < k2 fails ({L + max(k3, k4) + 4} >= {k2})")
        return out

    @property
    def valid(self):
        return not self.violations()

    def validate(self):
        bad = self.violations()
        if bad:
            raise InvalidParams("; ".join(bad))
        return self

    def as_tuple(self):
        return (self.k1, self.k2, self.k3, self.k4)


PAPER_PARAMS = SecurityParams(512, 160, 75, 75, 20)
LARGE_PARAMS = SecurityParams(2048, 1000, 400, 400, 50)


@dataclass(frozen=True)
class PublicParams:
    p: int
    alpha: int


@dataclass(frozen=True)
class RsSecret:
    s: int
    a: list  # shared: 4x6, fresh: m x 4 x 6
    mode: str = SHARED

    def a_for(self, i):
        return self.a if self.mode == SHARED else self.a[i]


@dataclass(frozen=True)
class MaskedQuadtree:
    en: list  # m x 4 x 6

    @property
    def m(self):
        return len(self.en)

    def __getitem__(self, i):
        return self.en[i]


@dataclass(frozen=True)
class MaskedPoint:
    a: list  # m x 4 x 2, each node's four blocks permuted

    @property
    def m(self):
        return len(self.a)

    def __getitem__(self, i):
        return self.a[i]


@dataclass(frozen=True)
class VehicleMaskSecret:
    r: list  # m x 4
    perms: list  # m permutations of range(4)


@dataclass(frozen=True)
class UnmaskedPair:
    b1: int
    b2: int

    @property
    def b(self):
        return self.b2 - self.b1


@dataclass(frozen=True)
class RiderSecret:
    p_prime: int
    alpha_prime: int
    s_prime: int
    d: Tuple[int, int, int, int]


@dataclass(frozen=True)
class RideRequest:
    pickup: Point
    R: int
    square: Tuple[Point, Point, Point, Point]
    C: Tuple[MaskedPoint, ...]
    D: Tuple[int, int, int, int]
    E: int
    p_prime: int
    alpha_prime: int


@dataclass(frozen=True)
class SrvResponse:
    F: int
    I: int
    r: Tuple[int, int, int] = field(default=(0, 0, 0), compare=False)


# -- step 0 ----------------------------------------------------------------

def setup(sp, mode, m, rng, strict=True):
    """RS draws the public primes, its secret scalar and the masking randoms.

    ``strict=False`` skips the parameter checks so that attack experiments
    can run on sets that break protocol correctness.
    """
    if mode not in MODES:
        raise InvalidParams(f"unknown mode {mode!r}")
    if strict:
        sp.validate()
    p = modmath.gen_prime(sp.k1, rng)
    alpha = modmath.gen_prime(sp.k2, rng)
    s = rng.randrange(1, p)

    def block():
        return [[modmath.rand_bits(sp.k3, rng) for _ in range(6)] for _ in range(4)]

    a = block() if mode == SHARED else [block() for _ in range(m)]
    return PublicParams(p, alpha), RsSecret(s, a, mode)


# -- step 1 ----------------------------------------------------------------

def mask_node(vertices, a, s, alpha, p):
    out = []
    for j in range(4):
        x, y = vertices[j]
        xn, yn = vertices[(j + 1) % 4]
        plain = (x, y, xn, yn, x * yn, xn * y)
        out.append([s * (v * alpha + a[j][h]) % p for h, v in enumerate(plain)])
    return out


def mask_quadtree(tree, pub, sec):
    if sec.mode == FRESH and len(sec.a) != tree.m:
        raise InvalidParams(f"fresh randoms cover {len(sec.a)} nodes, tree has {tree.m}")
    return MaskedQuadtree(
        [
            mask_node(node.vertices, sec.a_for(i), sec.s, pub.alpha, pub.p)
            for i, node in enumerate(tree.nodes)
        ]
    )


# -- step 2 ----------------------------------------------------------------

def permute_block(block, rho):
    """Move block ``j`` to position ``rho[j]``; inner pairs are untouched."""
    out = [None] * 4
    for j in range(4):
        out[rho[j]] = block[j]
    return out


def mask_point_with(en, P, alpha, p, r, perms):
    x, y = P
    masked = []
    for i, node in enumerate(en.en):
        blocks = []
        for j, e in enumerate(node):
            k = r[i][j] * alpha
            blocks.append(
                [
                    k * (x * e[3] + y * e[0] + e[5]) % p,
                    k * (x * e[1] + y * e[2] + e[4]) % p,
                ]
            )
        masked.append(permute_block(blocks, perms[i]))
    return MaskedPoint(masked)


def mask_point(en, P, pub, k4, rng):
    """RV (or RC) masks a location against every node of ``EN``."""
    r = [[modmath.rand_bits(k4, rng) for _ in range(4)] for _ in range(en.m)]
    perms = []
    for _ in range(en.m):
        pi = [0, 1, 2, 3]
        rng.shuffle(pi)
        perms.append(tuple(pi))
    return mask_point_with(en, P, pub.alpha, pub.p, r, perms), VehicleMaskSecret(r, perms)


# -- step 3 ----------------------------------------------------------------

def unmask_pair(a1, a2, pub, s):
    s_inv = modmath.mod_inv(s, pub.p)
    a2_sq = pub.alpha * pub.alpha
    return UnmaskedPair(s_inv * a1 % pub.p // a2_sq, s_inv * a2 % pub.p // a2_sq)


def node_accepts(block, pub, s):
    # the conjunction over j is order-free, so the permutation never matters
    return all(unmask_pair(a1, a2, pub, s).b >= 0 for a1, a2 in block)


def identify_quadrant(masked, tree, pub, sec):
    """Root-to-leaf path found by RS from a masked location alone."""
    if not node_accepts(masked[0], pub, sec.s):
        raise NoContainingChild(0, "root quadrant rejects the point")
    path = [0]
    node = tree.root
    while not node.is_leaf:
        nxt = next((c for c in node.children if node_accepts(masked[c], pub, sec.s)), None)
        if nxt is None:
            raise NoContainingChild(path[-1])
        path.append(nxt)
        node = tree[nxt]
    return path


# -- step 4 ----------------------------------------------------------------

def square_corners(pickup, R):
    x, y = pickup
    return (
        Point(x - R, y - R),
        Point(x + R, y - R),
        Point(x + R, y + R),
        Point(x - R, y + R),
    )


def rc_mask_pickup(pickup, R, sp, rng, primes=None):
    """The distance half of the request: (D, E, RiderSecret).

    ``primes`` optionally reuses an existing ``(p', alpha')`` pair.
    """
    x, y = pickup
    if primes is None:
        primes = modmath.gen_prime(sp.k1, rng), modmath.gen_prime(sp.k2, rng)
    p_prime, alpha_prime = primes
    s_prime = rng.randrange(1, p_prime)
    d = tuple(modmath.rand_bits(sp.k4, rng) for _ in range(4))
    D = (
        s_prime * (x * alpha_prime + d[0]) % p_prime,
        s_prime * (y * alpha_prime + d[1]) % p_prime,
        s_prime * d[2] % p_prime,
        s_prime * d[3] % p_prime,
    )
    E = x * x + y * y - R * R
    return D, E, RiderSecret(p_prime, alpha_prime, s_prime, d)


def rc_build_request(pickup, R, en, pub, sp, rng):
    pickup = Point(*pickup)
    if R < 1:
        raise ValueError("R must be positive")
    if pickup.x < R or pickup.y < R:
        raise PickupTooCloseToOrigin(f"square around {tuple(pickup)} with R={R} leaves the grid")
    square = square_corners(pickup, R)
    C = tuple(mask_point(en, corner, pub, sp.k4, rng)[0] for corner in square)
    D, E, rider = rc_mask_pickup(pickup, R, sp, rng)
    req = RideRequest(pickup, R, square, C, D, E, rider.p_prime, rider.alpha_prime)
    return req, rider


# -- step 5 ----------------------------------------------------------------

def _overlaps(a, b):
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def enclosing_region(tree, corner_leaves):
    """Leaves whose box overlaps the bounding box of the corner leaves."""
    boxes = [tree[i].bbox() for i in corner_leaves]
    hull = (
        min(b[0] for b in boxes),
        min(b[1] for b in boxes),
        max(b[2] for b in boxes),
        max(b[3] for b in boxes),
    )
    return {i for i in tree.leaves() if _overlaps(tree[i].bbox(), hull)}


def rs_select_srvs(C, tree, pub, sec, vehicle_leaves):
    """Returns (selected vehicle ids, CS_RC leaf set)."""
    corner_leaves = [identify_quadrant(c, tree, pub, sec)[-1] for c in C[:4]]
    region = enclosing_region(tree, corner_leaves)
    srvs = {v for v, leaf in vehicle_leaves.items() if leaf in region}
    return srvs, region


# -- steps 6-7 -------------------------------------------------------------

def srv_respond(D, E, loc, p_prime, alpha_prime, k4, rng):
    x, y = loc
    r1, r2, r3 = (modmath.rand_bits(k4, rng) for _ in range(3))
    F1 = x * alpha_prime * D[0] % p_prime
    F2 = y * alpha_prime * D[1] % p_prime
    F3 = r1 * D[2] % p_prime
    F4 = r2 * D[3] % p_prime
    F = r3 * (F1 + F2 + F3 + F4) % p_prime
    I = r3 * (x * x + y * y + E)
    return SrvResponse(F, I, (r1, r2, r3))


def rc_filter(resp, rsec):
    """(K, within): K carries the sign of dist^2 - R^2, scaled by r3."""
    J = modmath.mod_inv(rsec.s_prime, rsec.p_prime) * resp.F % rsec.p_prime
    J_floor = J // (rsec.alpha_prime * rsec.alpha_prime)
    K = resp.I - 2 * J_floor
    return K, K <= 0


# -- step 8 ----------------------------------------------------------------

def rs_pick_atp(c5, tree, pub, sec, rng):
    """Returns (ATP, leaf index) for the leaf holding the take-off point."""
    leaf = identify_quadrant(c5, tree, pub, sec)[-1]
    x0, y0, x1, y1 = tree[leaf].bbox()
    if x1 - x0 >= 2 and y1 - y0 >= 2:
        atp = Point(rng.randint(x0 + 1, x1 - 1), rng.randint(y0 + 1, y1 - 1))
    else:
        # degenerate sliver leaf: no strictly interior grid point
        atp = Point(rng.randint(x0, x1), rng.randint(y0, y1))
    return atp, leaf
