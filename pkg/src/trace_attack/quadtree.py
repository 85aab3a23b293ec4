"""Plaintext quadtree: side-sign test, point location, random generation.

Node indices are 0-based; node 0 is the root. Vertices run anticlockwise.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

from .errors import OutsideRoot, Unsplittable


class Point(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class QuadNode:
    vertices: Tuple[Point, Point, Point, Point]
    children: Optional[Tuple[int, int, int, int]] = None

    @property
    def is_leaf(self):
        return self.children is None

    def bbox(self):
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def rect(x0, y0, x1, y1, children=None):
    """Axis-aligned quadrant, anticlockwise from the minimum corner."""
    return QuadNode(
        (Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)), children
    )


class Quadtree:
    def __init__(self, nodes):
        self.nodes = list(nodes)

    @property
    def m(self):
        return len(self.nodes)

    @property
    def root(self):
        return self.nodes[0]

    def __getitem__(self, i):
        return self.nodes[i]

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        return isinstance(other, Quadtree) and self.nodes == other.nodes

    def leaves(self):
        return [i for i, n in enumerate(self.nodes) if n.is_leaf]

    def vertex_table(self):
        """All vertices as ``[[(x, y)] * 4] * m`` plain tuples."""
        return [[tuple(v) for v in n.vertices] for n in self.nodes]

    def to_dict(self):
        return {
            "m": self.m,
            "nodes": [
                {
                    "v": [[str(v.x), str(v.y)] for v in n.vertices],
                    "children": list(n.children) if n.children else None,
                }
                for n in self.nodes
            ],
        }

    @classmethod
    def from_dict(cls, data):
        nodes = [
            QuadNode(
                tuple(Point(int(x), int(y)) for x, y in d["v"]),
                tuple(d["children"]) if d["children"] else None,
            )
            for d in data["nodes"]
        ]
        if data.get("m", len(nodes)) != len(nodes):
            raise ValueError("node count does not match 'm'")
        return cls(nodes)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def side_signs(P, quad):
    """Signed edge tests S_1..S_4; all >= 0 iff P lies in the quadrant."""
    x, y = P
    vs = quad.vertices if isinstance(quad, QuadNode) else quad
    out = []
    for j in range(4):
        xj, yj = vs[j]
        xn, yn = vs[(j + 1) % 4]
        out.append((x * yj + y * xn + xj * yn) - (x * yn + y * xj + xn * yj))
    return tuple(out)


def contains(P, quad):
    return all(s >= 0 for s in side_signs(P, quad))


def strictly_inside(P, quad):
    return all(s > 0 for s in side_signs(P, quad))


def locate(tree, P):
    """Root-to-leaf index path; ties go to the lowest-index child."""
    if not contains(P, tree.root):
        raise OutsideRoot(f"{tuple(P)} is outside the root quadrant")
    path = [0]
    node = tree.root
    while not node.is_leaf:
        nxt = next((c for c in node.children if contains(P, tree[c])), None)
        if nxt is None:
            # children must partition the parent
            raise OutsideRoot(f"{tuple(P)} not covered by children of node {path[-1]}")
        path.append(nxt)
        node = tree[nxt]
    return path


def is_generic(tree, P):
    """True when P avoids every edge met along its location path."""
    try:
        path = locate(tree, P)
    except OutsideRoot:
        return False
    return all(strictly_inside(P, tree[i]) for i in path)


def split(node, cx, cy):
    """Four axis-aligned children around the split point (SW, SE, NE, NW)."""
    x0, y0, x1, y1 = node.bbox()
    return [
        rect(x0, y0, cx, cy),
        rect(cx, y0, x1, cy),
        rect(cx, cy, x1, y1),
        rect(x0, cy, cx, y1),
    ]


def _splittable(node):
    x0, y0, x1, y1 = node.bbox()
    return x1 - x0 >= 2 and y1 - y0 >= 2


def target_size(m):
    """Smallest node count of the form 1 + 4t that is >= m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return 1 + 4 * -(-(m - 1) // 4)


def gen_random_quadtree(bounds, m, rng, strict=False):
    """Split uniformly chosen leaves at uniform interior grid points until m nodes.

    A split adds four nodes, so with ``strict=False`` a requested ``m`` that is
    not 1 mod 4 is rounded up to the next reachable size.
    """
    if strict and (m < 1 or m % 4 != 1):
        raise ValueError(f"m={m} is not reachable by 4-way splits (need m = 1 mod 4)")
    m = target_size(m)
    nodes = [QuadNode(bounds.vertices)]
    while len(nodes) < m:
        candidates = [i for i, n in enumerate(nodes) if n.is_leaf and _splittable(n)]
        if not candidates:
            raise Unsplittable(f"no leaf has an interior grid point ({len(nodes)} nodes)")
        i = rng.choice(candidates)
        x0, y0, x1, y1 = nodes[i].bbox()
        cx = rng.randint(x0 + 1, x1 - 1)
        cy = rng.randint(y0 + 1, y1 - 1)
        first = len(nodes)
        nodes.extend(split(nodes[i], cx, cy))
        nodes[i] = QuadNode(nodes[i].vertices, tuple(range(first, first + 4)))
    return Quadtree(nodes)


def random_bounds(coord_bits, rng, min_side=16):
    """Axis-aligned outer quadrant with corners drawn from [0, 2**coord_bits - 1]."""
    hi = (1 << coord_bits) - 1
    while True:
        xa, xb = sorted(rng.randint(0, hi) for _ in range(2))
        ya, yb = sorted(rng.randint(0, hi) for _ in range(2))
        if xb - xa >= min_side and yb - ya >= min_side:
            return rect(xa, ya, xb, yb)


def random_interior_point(tree, rng, node=0, box=None):
    """Uniform grid point strictly inside ``node`` that avoids all internal edges.

    ``box`` optionally narrows the sampling window ``(x0, y0, x1, y1)``.
    """
    x0, y0, x1, y1 = box or tree[node].bbox()
    if x1 - x0 < 2 or y1 - y0 < 2:
        raise Unsplittable("sampling window has no interior grid point")
    for _ in range(10_000):
        P = Point(rng.randint(x0 + 1, x1 - 1), rng.randint(y0 + 1, y1 - 1))
        if is_generic(tree, P):
            return P
    raise Unsplittable("could not find a generic interior point")
