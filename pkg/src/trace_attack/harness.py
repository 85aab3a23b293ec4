"""Experiment runner: repeated randomized trials of the protocol and attacks.

Every trial draws a fresh quadtree, fresh secrets and fresh locations from a
child RNG derived from ``(seed, trial)``, so a configuration replays exactly.
"""

import csv
import io
import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from . import attacks
from . import protocol as proto
from . import quadtree as qt
from .errors import (
    AmbiguousIntersection,
    ConfigError,
    EmptyIntersection,
    NoContainingChild,
    RecoveryError,
)
from .modmath import SeededRng

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "quadtree-attack",
    "location-attack",
    "pickup-attack",
    "protocol-roundtrip",
    "countermeasure",
)
# experiments whose outcome depends on the honest protocol being correct
NEEDS_VALID_PARAMS = {"protocol-roundtrip", "countermeasure"}


@dataclass
class ExperimentConfig:
    params: proto.SecurityParams = proto.PAPER_PARAMS
    m: int = 50
    trials: int = 30
    seed: int = 0
    mode: str = proto.SHARED
    experiment: str = "quadtree-attack"
    points: int = 200
    workers: int = 1
    allow_invalid: bool = False

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.mode not in proto.MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.experiment == "quadtree-attack" and qt.target_size(self.m) < attacks.BATCH:
            raise ConfigError("the quadtree attack needs at least 4 nodes")
        bad = self.params.violations()
        if bad:
            if self.experiment in NEEDS_VALID_PARAMS and not self.allow_invalid:
                raise ConfigError("invalid security parameters: " + "; ".join(bad))
            log.warning("parameters break protocol correctness: %s", "; ".join(bad))
        return self

    def to_dict(self):
        d = asdict(self)
        d["params"] = asdict(self.params)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if isinstance(d.get("params"), dict):
            d["params"] = proto.SecurityParams(**d["params"])
        return cls(**d)


@dataclass
class TrialReport:
    trial: int
    success: bool
    seconds: float
    diagnostics: dict = field(default_factory=dict)
    ground_truth: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


# -- per-trial pipelines ---------------------------------------------------

def _instance(cfg, rng, mode=None):
    sp = cfg.params
    tree = qt.gen_random_quadtree(qt.random_bounds(sp.coord_bits, rng), cfg.m, rng)
    pub, sec = proto.setup(sp, mode or cfg.mode, tree.m, rng, strict=False)
    return tree, pub, sec, proto.mask_quadtree(tree, pub, sec)


def _tree_truth(tree):
    return {"m": tree.m, "vertices": [[list(v) for v in vs] for vs in tree.vertex_table()]}


def _location_attack(masked, en, p, truth):
    try:
        rec = attacks.recover_location(masked, en, p, detail=True)
    except AmbiguousIntersection as exc:
        return False, {"ambiguous": 1, "survivors": len(exc.candidates)}
    except EmptyIntersection:
        return False, {"ambiguous": 0, "survivors": 0}
    return rec.point == truth, {
        "ambiguous": 0,
        "max_candidates": rec.max_candidates,
        "recovered": list(rec.point),
    }


def trial_quadtree_attack(cfg, rng):
    tree, pub, sec, en = _instance(cfg, rng)
    truth = tree.vertex_table()
    try:
        rec = attacks.recover_quadtree(en, pub.p)
    except RecoveryError as exc:
        return False, {"error": str(exc.status), "rank_min": exc.rank}, _tree_truth(tree)
    got = [[tuple(v) for v in vs] for vs in rec.vertices]
    return got == truth, {
        "rank_min": min(rec.ranks),
        "batches": len(rec.batches),
        "m": tree.m,
    }, _tree_truth(tree)


def trial_location_attack(cfg, rng):
    tree, pub, sec, en = _instance(cfg, rng)
    P = qt.random_interior_point(tree, rng)
    masked, _ = proto.mask_point(en, P, pub, cfg.params.k4, rng)
    ok, diag = _location_attack(masked, en, pub.p, P)
    diag["m"] = tree.m
    return ok, diag, {"vehicle": list(P), **_tree_truth(tree)}


def _pickup_window(tree, R):
    x0, y0, x1, y1 = tree.root.bbox()
    return x0 + R, y0 + R, x1 - R, y1 - R


def sample_ride(tree, rng):
    """(pickup, R, takeoff) with the pickup square inside the root quadrant."""
    x0, y0, x1, y1 = tree.root.bbox()
    side = min(x1 - x0, y1 - y0)
    R = rng.randint(1, max(1, side // 8))
    pickup = qt.random_interior_point(tree, rng, box=_pickup_window(tree, R))
    near = (pickup.x - R, pickup.y - R, pickup.x + R, pickup.y + R)
    takeoff = qt.random_interior_point(tree, rng, box=near)
    return pickup, R, takeoff


def trial_pickup_attack(cfg, rng):
    sp = cfg.params
    tree, pub, sec, en = _instance(cfg, rng)
    pickup, R, takeoff = sample_ride(tree, rng)
    req, _ = proto.rc_build_request(pickup, R, en, pub, sp, rng)
    c5, _ = proto.mask_point(en, takeoff, pub, sp.k4, rng)
    diag = {"m": tree.m}
    try:
        got_pickup = attacks.recover_pickup(req.C, en, pub.p)
        got_takeoff = attacks.recover_takeoff(c5, en, pub.p)
    except (AmbiguousIntersection, EmptyIntersection, RecoveryError) as exc:
        diag.update(error=type(exc).__name__, ambiguous=int(isinstance(exc, AmbiguousIntersection)))
        ok = False
    else:
        diag.update(ambiguous=0, recovered_pickup=list(got_pickup), recovered_takeoff=list(got_takeoff))
        ok = got_pickup == pickup and got_takeoff == takeoff
    return ok, diag, {"pickup": list(pickup), "R": R, "takeoff": list(takeoff), **_tree_truth(tree)}


def quadrant_roundtrip(tree, pub, sec, en, sp, rng, n):
    """Count of ``n`` random vehicles whose masked quadrant path matches ``locate``."""
    agree = 0
    for _ in range(n):
        P = qt.random_interior_point(tree, rng)
        masked, _ = proto.mask_point(en, P, pub, sp.k4, rng)
        try:
            agree += proto.identify_quadrant(masked, tree, pub, sec) == qt.locate(tree, P)
        except NoContainingChild:
            pass
    return agree


def sample_range_triple(coord_bits, rng):
    hi = (1 << coord_bits) - 1
    R = rng.randint(1, max(1, hi >> 4))
    pickup = (rng.randint(0, hi), rng.randint(0, hi))
    roll = rng.random()
    if roll < 0.1:
        # exactly on the circle
        dx = R if rng.random() < 0.5 else 0
        dy = R - dx
        srv = (pickup[0] + dx, pickup[1] + dy)
    elif roll < 0.6:
        srv = (pickup[0] + rng.randint(-2 * R, 2 * R), pickup[1] + rng.randint(-2 * R, 2 * R))
    else:
        srv = (rng.randint(0, hi), rng.randint(0, hi))
    srv = tuple(min(max(c, 0), hi) for c in srv)
    return pickup, R, srv


def range_filter_check(sp, rng, n):
    """Count of ``n`` random (pickup, R, SRV) triples where the masked filter is exact."""
    primes = None
    agree = 0
    for _ in range(n):
        pickup, R, srv = sample_range_triple(sp.coord_bits, rng)
        D, E, rider = proto.rc_mask_pickup(pickup, R, sp, rng, primes)
        primes = rider.p_prime, rider.alpha_prime
        resp = proto.srv_respond(D, E, srv, rider.p_prime, rider.alpha_prime, sp.k4, rng)
        dist2 = (pickup[0] - srv[0]) ** 2 + (pickup[1] - srv[1]) ** 2
        agree += proto.rc_filter(resp, rider)[1] == (dist2 <= R * R)
    return agree


def trial_roundtrip(cfg, rng):
    tree, pub, sec, en = _instance(cfg, rng)
    n = cfg.points
    quad = quadrant_roundtrip(tree, pub, sec, en, cfg.params, rng, n)
    rng_ok = range_filter_check(cfg.params, rng, n)
    diag = {"m": tree.m, "quadrant_agree": quad, "range_agree": rng_ok, "checks": n}
    return quad == n and rng_ok == n, diag, _tree_truth(tree)


def attack1_batches(en, p, truth):
    """Outcome of every batch of the quadtree attack (no retries)."""
    m = en.m
    order = list(range(m))
    out = []
    for start in range(0, m, attacks.BATCH):
        batch = order[start : start + attacks.BATCH]
        batch += [i for i in order if i not in batch][: attacks.BATCH - len(batch)]
        outcome, verts = attacks.solve_batch(en, batch, p)
        hit = verts is not None and all(list(verts[k]) == list(truth[i]) for k, i in enumerate(batch))
        out.append((outcome, hit))
    return out


def trial_countermeasure(cfg, rng):
    sp = cfg.params
    tree, pub, sec, en = _instance(cfg, rng, mode=proto.FRESH)
    truth = tree.vertex_table()
    batches = attack1_batches(en, pub.p, truth)
    attack1_failed = not any(hit for _, hit in batches)
    P = qt.random_interior_point(tree, rng)
    masked, _ = proto.mask_point(en, P, pub, sp.k4, rng)
    attack2_ok, loc_diag = _location_attack(masked, en, pub.p, P)
    quad = quadrant_roundtrip(tree, pub, sec, en, sp, rng, cfg.points)
    diag = {
        "m": tree.m,
        "attack1_failed": attack1_failed,
        "batch_status": [o.status.value for o, _ in batches],
        "rank_min": min(o.rank for o, _ in batches),
        "attack2_ok": attack2_ok,
        "quadrant_agree": quad,
        "checks": cfg.points,
        **loc_diag,
    }
    ok = attack1_failed and attack2_ok and quad == cfg.points
    return ok, diag, {"vehicle": list(P), **_tree_truth(tree)}


PIPELINES = {
    "quadtree-attack": trial_quadtree_attack,
    "location-attack": trial_location_attack,
    "pickup-attack": trial_pickup_attack,
    "protocol-roundtrip": trial_roundtrip,
    "countermeasure": trial_countermeasure,
}


def run_trial(cfg, index):
    rng = SeededRng(cfg.seed).child(index)
    start = time.perf_counter()
    ok, diag, truth = PIPELINES[cfg.experiment](cfg, rng)
    elapsed = time.perf_counter() - start
    return TrialReport(index, bool(ok), elapsed, diag, truth)


def summarize(cfg, reports):
    times = [r.seconds for r in reports]
    return {
        "experiment": cfg.experiment,
        "params": list(cfg.params.as_tuple()),
        "coord_bits": cfg.params.coord_bits,
        "mode": cfg.mode,
        "m_requested": cfg.m,
        "m": qt.target_size(cfg.m),
        "trials": len(reports),
        "successes": sum(r.success for r in reports),
        "success_rate": sum(r.success for r in reports) / len(reports) if reports else 0.0,
        "mean_seconds": statistics.fmean(times) if times else 0.0,
        "min_seconds": min(times, default=0.0),
        "max_seconds": max(times, default=0.0),
    }


def run_experiment(cfg):
    """Run ``cfg.trials`` independent trials; returns (reports, summary)."""
    cfg.validate()
    indices = range(cfg.trials)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            reports = list(pool.map(run_trial, [cfg] * cfg.trials, indices))
    else:
        reports = [run_trial(cfg, i) for i in indices]
    for r in reports:
        log.info("trial %d: %s in %.3fs", r.trial, "ok" if r.success else "FAIL", r.seconds)
    return reports, summarize(cfg, reports)


# -- reports ---------------------------------------------------------------

CSV_COLUMNS = ("trial", "success", "seconds", "rank_min", "max_candidates", "ambiguous")


def render_report(reports, summary=None, fmt="json", config=None):
    if fmt == "json":
        doc = {
            "config": config.to_dict() if config else None,
            "summary": summary,
            "trials": [r.to_dict() for r in reports],
        }
        return json.dumps(doc, indent=2, sort_keys=True)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        d = r.diagnostics
        w.writerow([r.trial, int(r.success), f"{r.seconds:.6f}",
                    d.get("rank_min", ""), d.get("max_candidates", ""), d.get("ambiguous", "")])
    if reports and summary:
        label = "summary k=({}) m={}".format(",".join(map(str, summary["params"])), summary["m"])
        w.writerow([label, summary["success_rate"], f"{summary['mean_seconds']:.6f}", "", "", ""])
    return buf.getvalue()


def emit_report(reports, path, fmt="json", summary=None, config=None):
    text = render_report(reports, summary, fmt, config)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def load_report(path):
    with open(path) as fh:
        doc = json.load(fh)
    return [TrialReport.from_dict(t) for t in doc["trials"]], doc["summary"]
