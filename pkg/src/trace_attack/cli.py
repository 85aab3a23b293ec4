"""Command line entry point.

Exit status is 0 iff every trial of the selected experiment succeeded.
"""

import argparse
import json
import logging
import sys

from . import attacks, harness
from . import protocol as proto
from . import quadtree as qt
from .errors import ConfigError
from .modmath import SeededRng
from .simulation import simulate_ride
from .transcript import Transcript

COMMANDS = {
    "simulate": "protocol-roundtrip",
    "attack-quadtree": "quadtree-attack",
    "attack-location": "location-attack",
    "attack-pickup": "pickup-attack",
    "countermeasure": "countermeasure",
}

DEFAULTS = {
    "k1": 512, "k2": 160, "k3": 75, "k4": 75, "coord_bits": 20,
    "m": 50, "trials": 30, "seed": 0, "mode": "shared",
    "points": 200, "workers": 1, "format": "json", "out": None,
    "allow_invalid": False,
}


def _common(p):
    p.add_argument("--config", help="JSON file with any of the flags below")
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--k3", type=int)
    p.add_argument("--k4", type=int)
    p.add_argument("--coord-bits", dest="coord_bits", type=int)
    p.add_argument("--m", type=int, help="requested quadtree size (rounded up to 1 mod 4)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=proto.MODES)
    p.add_argument("--points", type=int, help="vehicles / range triples per round-trip trial")
    p.add_argument("--workers", type=int)
    p.add_argument("--allow-invalid", dest="allow_invalid", action="store_true", default=None)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="trace-attack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "simulate":
            p.add_argument("--transcript", help="also write one full ride transcript (JSON) here")
        if name in ("attack-quadtree", "attack-location"):
            p.add_argument("--transcript", help="attack a saved transcript instead of running trials")
    bench = sub.add_parser("bench", help="timing table for both attacks")
    _common(bench)
    bench.add_argument("--sizes", default="50,100", help="comma-separated m values")
    bench.add_argument("--param-sets", default="paper,large", help="paper and/or large")
    return parser


def resolve(args):
    """Defaults < config file < explicit flags."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            opts.update({k.replace("-", "_"): v for k, v in json.load(fh).items()})
    opts.update({k: v for k, v in vars(args).items() if v is not None and k in DEFAULTS})
    return opts


def config_from(opts, experiment):
    sp = proto.SecurityParams(opts["k1"], opts["k2"], opts["k3"], opts["k4"], opts["coord_bits"])
    return harness.ExperimentConfig(
        params=sp, m=opts["m"], trials=opts["trials"], seed=opts["seed"], mode=opts["mode"],
        experiment=experiment, points=opts["points"], workers=opts["workers"],
        allow_invalid=bool(opts["allow_invalid"]),
    )


def _write(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump_transcript(cfg, path):
    sp = cfg.params
    rng = SeededRng(cfg.seed).child("transcript")
    tree = qt.gen_random_quadtree(qt.random_bounds(sp.coord_bits, rng), cfg.m, rng)
    vehicles = {f"v{i}": qt.random_interior_point(tree, rng) for i in range(5)}
    pickup, R, takeoff = harness.sample_ride(tree, rng)
    run = simulate_ride(tree, sp, vehicles, pickup, R, takeoff, rng, mode=cfg.mode)
    with open(path, "w") as fh:
        fh.write(run.transcript.to_json(indent=1))


def _attack_saved(path, out):
    with open(path) as fh:
        result = attacks.attack_transcript(Transcript.from_json(fh.read()))
    _write(json.dumps(result, indent=2), out)
    failed = "quadtree_error" in result or any(
        isinstance(v, dict) for v in result["locations"].values()
    )
    return 1 if failed else 0


def _bench(opts):
    sets = {"paper": proto.PAPER_PARAMS, "large": proto.LARGE_PARAMS}
    sizes = [int(s) for s in opts["sizes"].split(",")]
    rows = []
    all_ok = True
    for label in opts["param_sets"].split(","):
        sp = sets[label.strip()]
        for experiment in ("quadtree-attack", "location-attack"):
            for m in sizes:
                cfg = config_from({**opts, "m": m, "coord_bits": sp.coord_bits,
                                   "k1": sp.k1, "k2": sp.k2, "k3": sp.k3, "k4": sp.k4}, experiment)
                _, summary = harness.run_experiment(cfg)
                all_ok &= summary["success_rate"] == 1.0
                rows.append(summary)
    lines = [f"{'experiment':<16} {'(k1,k2,k3,k4)':<22} {'m':>4} {'success':>8} {'mean s':>10}"]
    for s in rows:
        lines.append(
            f"{s['experiment']:<16} {str(tuple(s['params'])):<22} {s['m']:>4} "
            f"{s['success_rate']:>8.2f} {s['mean_seconds']:>10.3f}"
        )
    if opts["format"] == "json":
        _write(json.dumps(rows, indent=2), opts["out"])
    else:
        _write("\n".join(lines), opts["out"])
    return 0 if all_ok else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    opts = resolve(args)
    try:
        if args.command == "bench":
            opts.update(sizes=args.sizes, param_sets=args.param_sets)
            if args.format is None:
                opts["format"] = "csv"
            return _bench(opts)
        if getattr(args, "transcript", None) and args.command != "simulate":
            return _attack_saved(args.transcript, opts["out"])
        cfg = config_from(opts, COMMANDS[args.command])
        reports, summary = harness.run_experiment(cfg)
        if args.command == "simulate" and args.transcript:
            _dump_transcript(cfg, args.transcript)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write(harness.render_report(reports, summary, opts["format"], cfg), opts["out"])
    return 0 if summary["successes"] == summary["trials"] else 1


if __name__ == "__main__":
    sys.exit(main())
