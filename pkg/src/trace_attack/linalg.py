"""Dense exact linear algebra over a prime field Z_p."""

from dataclasses import dataclass
from enum import Enum

from .errors import DimensionMismatch


class MatrixZp:
    """Row-major dense matrix with entries reduced into ``[0, p)``."""

    def __init__(self, rows, p):
        rows = [[int(v) % p for v in row] for row in rows]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatch("ragged rows")
        self.rows = rows
        self.p = p

    @classmethod
    def zeros(cls, nrows, ncols, p):
        return cls([[0] * ncols for _ in range(nrows)], p)

    @classmethod
    def identity(cls, n, p):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], p)

    @property
    def shape(self):
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, MatrixZp) and self.p == other.p and self.rows == other.rows

    def __repr__(self):
        r, c = self.shape
        return f"MatrixZp({r}x{c}, p={self.p})"

    def matvec(self, x):
        if len(x) != self.shape[1]:
            raise DimensionMismatch(f"{self.shape} matrix times vector of length {len(x)}")
        p = self.p
        return [sum(a * b for a, b in zip(row, x)) % p for row in self.rows]


class Status(str, Enum):
    UNIQUE = "unique"
    UNDERDETERMINED = "underdetermined"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class SolveOutcome:
    status: Status
    rank: int
    solution: tuple = None

    @property
    def unique(self):
        return self.status is Status.UNIQUE


def _echelon(rows, p, ncols):
    """Reduce ``rows`` in place to reduced row echelon form over the first ``ncols`` columns.

    Returns the pivot column list. Any nonzero entry is an exact pivot.
    """
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        prow = [v * inv % p for v in rows[r]]
        rows[r] = prow
        for i in range(nrows):
            f = rows[i][c]
            if i != r and f:
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], prow)]
        pivots.append(c)
        r += 1
    return pivots


def rank(M):
    rows = [list(r) for r in M.rows]
    return len(_echelon(rows, M.p, M.shape[1]))


def solve(M, b):
    """Classify and solve ``M x = b``; extra rows act as consistency checks."""
    nrows, ncols = M.shape
    if len(b) != nrows:
        raise DimensionMismatch(f"{nrows} rows but right-hand side of length {len(b)}")
    p = M.p
    aug = [list(row) + [int(v) % p] for row, v in zip(M.rows, b)]
    pivots = _echelon(aug, p, ncols)
    rk = len(pivots)
    if any(row[ncols] for row in aug[rk:]):
        return SolveOutcome(Status.INCONSISTENT, rk)
    if rk < ncols:
        return SolveOutcome(Status.UNDERDETERMINED, rk)
    return SolveOutcome(Status.UNIQUE, rk, tuple(aug[i][ncols] for i in range(ncols)))


def residual(M, x, b):
    """``M x - b`` componentwise in Z_p."""
    if len(b) != M.shape[0]:
        raise DimensionMismatch("right-hand side length does not match row count")
    return [(v - w) % M.p for v, w in zip(M.matvec(x), b)]
