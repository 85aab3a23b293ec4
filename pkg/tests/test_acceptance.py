"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is echoed in the terminal summary.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import random
import time

import pytest

from oracles import classify_square
from trace_attack import attacks, harness
from trace_attack import protocol as proto
from trace_attack import quadtree as qt
from trace_attack.linalg import MatrixZp, rank, residual, solve
from trace_attack.modmath import SeededRng, gen_prime, mod_inv

pytestmark = pytest.mark.slow

PAPER = proto.PAPER_PARAMS
LARGE = proto.LARGE_PARAMS
TRIALS = 30
M = 50


def run(experiment, params=PAPER, trials=TRIALS, **kw):
    cfg = harness.ExperimentConfig(params=params, m=M, trials=trials, seed=2021,
                                   experiment=experiment, **kw)
    return harness.run_experiment(cfg)


def test_c1_protocol_roundtrip(acceptance_line):
    start = time.perf_counter()
    agree = total = 0
    master = SeededRng(1)
    for t in range(TRIALS):
        rng = master.child(t)
        tree = qt.gen_random_quadtree(qt.random_bounds(PAPER.coord_bits, rng), M, rng)
        pub, sec = proto.setup(PAPER, proto.SHARED, tree.m, rng)
        en = proto.mask_quadtree(tree, pub, sec)
        agree += harness.quadrant_roundtrip(tree, pub, sec, en, PAPER, rng, 200)
        total += 200
    elapsed = time.perf_counter() - start
    ok = agree == total and elapsed < 120
    acceptance_line("C1 protocol round-trip", ok, f"{agree}/{total} paths agree in {elapsed:.1f}s (< 120s)")
    assert agree == total
    assert elapsed < 120


@pytest.mark.parametrize("params", [PAPER, LARGE], ids=["paper-512", "large-2048"])
def test_c2_range_filter(params, acceptance_line):
    agree = harness.range_filter_check(params, SeededRng(2), 500)
    acceptance_line(f"C2 range filter {params.as_tuple()}", agree == 500, f"{agree}/500 agree with dist^2 <= R^2")
    assert agree == 500


def test_c3_quadtree_attack(acceptance_line):
    reports, s = run("quadtree-attack")
    slowest = s["max_seconds"]
    ok = s["success_rate"] == 1.0 and slowest < 600
    acceptance_line("C3 quadtree attack (512,160,75,75)", ok,
                    f"{s['successes']}/{s['trials']} exact, m={s['m']}, mean {s['mean_seconds']:.3f}s")
    assert s["success_rate"] == 1.0
    assert slowest < 600


def test_c4_quadtree_attack_large(acceptance_line):
    reports, s = run("quadtree-attack", params=LARGE, trials=3)
    ok = s["success_rate"] == 1.0 and s["max_seconds"] < 7200
    acceptance_line("C4 quadtree attack (2048,1000,400,400)", ok,
                    f"{s['successes']}/{s['trials']} exact, mean {s['mean_seconds']:.3f}s")
    assert s["success_rate"] == 1.0
    assert s["max_seconds"] < 7200


def test_c5_location_attack(acceptance_line):
    reports, s = run("location-attack")
    unique = all(r.diagnostics.get("ambiguous") == 0 and "recovered" in r.diagnostics for r in reports)
    ok = s["success_rate"] == 1.0 and unique and s["max_seconds"] < 30
    acceptance_line("C5 location attack", ok,
                    f"{s['successes']}/{s['trials']} exact with |intersection| = 1, mean {s['mean_seconds']:.3f}s")
    assert unique
    assert s["success_rate"] == 1.0
    assert s["max_seconds"] < 30


def test_c6_rank_properties(acceptance_line):
    master = SeededRng(6)
    pair_ranks, quad_ranks = [], []
    for t in range(TRIALS):
        rng = master.child(t)
        tree = qt.gen_random_quadtree(qt.random_bounds(PAPER.coord_bits, rng), M, rng)
        pub, sec = proto.setup(PAPER, proto.SHARED, tree.m, rng)
        en = proto.mask_quadtree(tree, pub, sec)
        i, k = rng.sample(range(tree.m), 2)
        pair_ranks.append(attacks.pair_rank(en, i, k, pub.p))
        idx = rng.sample(range(tree.m), 4)
        quad = attacks.build_quad_system([en[j] for j in idx], pub.p)
        quad_ranks.append(rank(quad.P))
    ok = max(pair_ranks) <= 13 and set(quad_ranks) == {32}
    acceptance_line("C6 rank properties", ok,
                    f"pair rank max {max(pair_ranks)} (<= 13), batch ranks {sorted(set(quad_ranks))} (== 32)")
    assert max(pair_ranks) <= 13
    assert set(quad_ranks) == {32}


def test_c7_countermeasure(acceptance_line):
    reports, s = run("countermeasure", mode=proto.FRESH)
    a1_failed = sum(r.diagnostics["attack1_failed"] for r in reports)
    a2_ok = sum(r.diagnostics["attack2_ok"] for r in reports)
    rt_ok = sum(r.diagnostics["quadrant_agree"] == r.diagnostics["checks"] for r in reports)
    ok = a1_failed == a2_ok == rt_ok == TRIALS
    acceptance_line("C7 countermeasure separation", ok,
                    f"attack 1 failed {a1_failed}/{TRIALS}, round-trip {rt_ok}/{TRIALS}, attack 2 {a2_ok}/{TRIALS}")
    assert a1_failed == TRIALS
    assert rt_ok == TRIALS
    assert a2_ok == TRIALS


def test_c8_pickup_takeoff(acceptance_line):
    reports, s = run("pickup-attack")
    acceptance_line("C8 pickup / take-off recovery", s["success_rate"] == 1.0,
                    f"{s['successes']}/{s['trials']} exact")
    assert s["success_rate"] == 1.0


def test_c9_oracle_suites(acceptance_line):
    r = random.Random(9)
    p = 1009
    agree = 0
    for _ in range(200):
        n = r.randint(1, 8)
        M_ = [[r.randrange(p) for _ in range(n)] for _ in range(n)]
        if n > 1 and r.random() < 0.5:
            # force a singular matrix
            M_[-1] = [(a + b) % p for a, b in zip(M_[0], M_[1])]
        b = [r.randrange(p) for _ in range(n)]
        if r.random() < 0.5:
            x = [r.randrange(p) for _ in range(n)]
            b = [sum(c * v for c, v in zip(row, x)) % p for row in M_]
        expected, x = classify_square(M_, b, p)
        out = solve(MatrixZp(M_, p), b)
        same = out.status.value == expected and (x is None or out.solution == x)
        if out.unique:
            same &= residual(MatrixZp(M_, p), out.solution, b) == [0] * n
        agree += same

    rng = SeededRng(99)
    inv_ok = inv_total = 0
    for bits in (512, 2048):
        q = gen_prime(bits, rng)
        for _ in range(1000):
            a = rng.randrange(1, q)
            inv_ok += a * mod_inv(a, q) % q == 1
            inv_total += 1
    ok = agree == 200 and inv_ok == inv_total
    acceptance_line("C9 oracle suites", ok, f"linalg {agree}/200, mod_inv {inv_ok}/{inv_total}")
    assert agree == 200
    assert inv_ok == inv_total
