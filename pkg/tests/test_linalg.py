import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import classify_square, rank_by_minors
from trace_attack.errors import DimensionMismatch
from trace_attack.linalg import MatrixZp, Status, rank, residual, solve

P = 1009


def test_rank_basic():
    assert rank(MatrixZp.zeros(3, 3, 7)) == 0
    assert rank(MatrixZp.identity(5, 7)) == 5


def test_solve_identity():
    b = [3, 1, 4, 1]
    out = solve(MatrixZp.identity(4, 7), b)
    assert out.status is Status.UNIQUE and list(out.solution) == [3, 1, 4, 1]


def test_solve_small_unique():
    out = solve(MatrixZp([[2, 1], [1, 1]], 7), [5, 3])
    assert out.unique and out.solution == (2, 1)


def test_solve_inconsistent():
    assert solve(MatrixZp([[1, 1], [2, 2]], 7), [1, 3]).status is Status.INCONSISTENT


def test_solve_underdetermined():
    out = solve(MatrixZp([[1, 1], [2, 2]], 7), [1, 2])
    assert out.status is Status.UNDERDETERMINED and out.rank == 1


def test_solve_overdetermined_consistent():
    M = MatrixZp([[1, 0], [0, 1], [1, 1], [2, 3]], 11)
    out = solve(M, [4, 5, 9, 23])
    assert out.unique and out.solution == (4, 5)


def test_dimension_checks():
    M = MatrixZp.identity(2, 7)
    with pytest.raises(DimensionMismatch):
        solve(M, [1, 2, 3])
    with pytest.raises(DimensionMismatch):
        residual(M, [1], [1, 2])
    with pytest.raises(DimensionMismatch):
        MatrixZp([[1, 2], [3]], 7)


def test_residual_zero_solution_is_minus_b():
    M = MatrixZp([[1, 2], [3, 4]], 7)
    assert residual(M, [0, 0], [1, 5]) == [6, 2]


def _random_system(r, n):
    """Square system over Z_1009, deliberately rank-deficient half the time."""
    M = [[r.randrange(P) for _ in range(n)] for _ in range(n)]
    kind = r.choice(["full", "deficient-consistent", "deficient-inconsistent"])
    if kind != "full" and n > 1:
        k = r.randrange(1, n)
        for i in range(k, n):
            coeffs = [r.randrange(P) for _ in range(k)]
            M[i] = [sum(c * M[t][j] for t, c in enumerate(coeffs)) % P for j in range(n)]
        x = [r.randrange(P) for _ in range(n)]
        b = [sum(a * v for a, v in zip(row, x)) % P for row in M]
        if kind == "deficient-inconsistent":
            b[-1] = (b[-1] + 1 + r.randrange(P - 1)) % P
    else:
        b = [r.randrange(P) for _ in range(n)]
    return M, b


def test_against_bruteforce_oracle():
    r = random.Random(2024)
    seen = {}
    for _ in range(200):
        n = r.randint(1, 8)
        M, b = _random_system(r, n)
        expected, x = classify_square(M, b, P)
        out = solve(MatrixZp(M, P), b)
        assert out.status.value == expected, (M, b)
        if x is not None:
            assert out.solution == x
            assert residual(MatrixZp(M, P), out.solution, b) == [0] * n
        seen[expected] = seen.get(expected, 0) + 1
    assert sum(seen.values()) == 200
    assert set(seen) == {"unique", "underdetermined", "inconsistent"}


def test_rank_matches_minor_oracle():
    r = random.Random(7)
    for _ in range(40):
        rows, cols = r.randint(1, 5), r.randint(1, 5)
        M = [[r.choice([0, 0, r.randrange(P)]) for _ in range(cols)] for _ in range(rows)]
        assert rank(MatrixZp(M, P)) == rank_by_minors(M, P)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_rank_invariant_under_row_ops(data):
    rows = data.draw(st.integers(1, 7))
    cols = data.draw(st.integers(1, 7))
    entries = st.integers(0, P - 1)
    M = data.draw(st.lists(st.lists(entries, min_size=cols, max_size=cols), min_size=rows, max_size=rows))
    perm = data.draw(st.permutations(range(rows)))
    scales = data.draw(st.lists(st.integers(1, P - 1), min_size=rows, max_size=rows))
    shuffled = [[v * scales[i] % P for v in M[perm[i]]] for i in range(rows)]
    assert rank(MatrixZp(M, P)) == rank(MatrixZp(shuffled, P))
