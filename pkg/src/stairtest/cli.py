"""Command line interface.

    stairtest generate          write a sample file drawn from p (or a perturbed p)
    stairtest evaluate          granularity sweep on sample files
    stairtest rank              multi-model granularity + TV report over trials
    stairtest validate-binning  Kendall tau of optimized vs random binning
    stairtest export-pmf        per-element plot data for one sample file

Settings come from ``--config`` (JSON with the ExperimentConfig fields) and
are overridden by explicit flags. Any input error exits with status 2.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .errors import ConstructionError, InputError
from .io import dump_json, export_empirical_pmf, generate_dataset, load_json, read_samples
from .stair import StairSpec
from .synthetic import MODES, perturb

# Per-command defaults applied below the config file.
_COMMAND_DEFAULTS = {
    "generate": {"m": 10_000},
    "rank": {"m": 10_000, "trials": 10},
    "validate-binning": {"m": 1000, "trials": 50},
}


def _add_stair(p):
    g = p.add_argument_group("reference distribution")
    g.add_argument("--n", type=int, help="positions per element")
    g.add_argument("--c", type=int, help="categories per position")
    g.add_argument("--s", type=int, help="number of flat regions (last one has zero mass)")
    g.add_argument("--support-ratio", type=float, help="fraction of the space with mass (default c!/c^c)")
    g.add_argument("--mass-profile", type=float, nargs="+", help="masses of the s-1 positive regions")


def _add_test(p):
    g = p.add_argument_group("closeness test")
    g.add_argument("--epsilon-test", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--bootstrap-reps", type=int)
    g.add_argument("--distance", choices=["l2", "tv"])
    g.add_argument("--bonferroni", action="store_true", default=None)
    g.add_argument("--holdout", action="store_true", default=None,
                   help="choose binnings on half of the samples, test on the other half")
    g.add_argument("--k-min", type=int)
    g.add_argument("--k-max", type=int)


def _add_suite(p):
    g = p.add_argument_group("synthetic suite")
    g.add_argument("--suite", type=float, nargs="+", help="target TV of each synthetic model")
    g.add_argument("--suite-mode", choices=MODES)
    g.add_argument("--donor", type=int, help="region losing mass in the synthetic models")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stairtest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="master seed")
        _add_stair(p)
        return p

    p = common("generate", "write a sample file")
    p.add_argument("--m", type=int)
    p.add_argument("--target-tv", type=float, help="sample a perturbed model at this TV instead of p")
    p.add_argument("--mode", choices=MODES, default="within_support")
    p.add_argument("--donor", type=int)
    p.add_argument("--out", required=True)

    p = common("evaluate", "granularity sweep on sample files (all samples at once)")
    p.add_argument("files", nargs="+")
    _add_test(p)
    p.add_argument("--out", help="JSON report path (default: print only)")

    p = common("rank", "granularity histogram and empirical TV per model over trials")
    p.add_argument("--samples", nargs="+", help="sample files; default is the synthetic suite")
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int)
    _add_test(p)
    _add_suite(p)
    p.add_argument("--out", required=True)

    p = common("validate-binning", "Kendall tau of optimized vs random binning")
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--random-mode", choices=["region", "scattered"])
    _add_suite(p)
    p.add_argument("--out", required=True)
    p.add_argument("--summary-csv", help="also write mean tau and CI per (k, method)")

    p = common("export-pmf", "per-element plot data of one sample file")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    return parser


def resolve_config(args) -> harness.ExperimentConfig:
    data = dict(_COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        data.update(load_json(args.config))
    cfg = harness.ExperimentConfig.from_dict(data)

    stair = cfg.stair.to_dict()
    for key, attr in [("n", "n"), ("c", "c"), ("s", "s"), ("support_ratio", "support_ratio"),
                      ("mass_profile", "mass_profile")]:
        value = getattr(args, attr, None)
        if value is not None:
            stair[key] = value
    if args.seed is not None:
        stair["seed"] = args.seed
    updates = {"stair": StairSpec.from_dict(stair)}

    test = {}
    for key in ("epsilon_test", "delta", "bootstrap_reps", "distance", "bonferroni"):
        value = getattr(args, key, None)
        if value is not None:
            test[key] = value
    if test:
        updates["test"] = replace(cfg.test, **test)
    for key in ("m", "trials", "k_min", "k_max", "holdout", "random_mode", "suite_mode", "donor",
                "seed"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "suite", None) is not None:
        updates["suite"] = tuple(args.suite)
    if getattr(args, "samples", None) is not None:
        updates["samples"] = tuple(args.samples)
    return replace(cfg, **updates)


def _generate(args, cfg):
    p = cfg.stair.build()
    dist = p if args.target_tv is None else perturb(p, args.target_tv, args.mode, donor=args.donor)
    path = generate_dataset(dist, cfg.m, cfg.stair.seed, args.out)
    print(f"wrote {cfg.m} samples to {path}")


def _evaluate(args, cfg):
    p = cfg.stair.build()
    results = harness.evaluate_files(p, args.files, cfg.test, cfg.holdout, cfg.k_min, cfg.k_max)
    for r in results:
        print(f"{r['label']}: m={r['m']} failed_at={r['failed_at']} "
              f"highest_passed={r['highest_passed']} empirical_tv={r['empirical_tv']:.4f}")
    if args.out:
        dump_json({"experiment": "evaluate", "version": harness.VERSION,
                   "config": cfg.resolved().to_dict(), "distance": cfg.test.distance,
                   "results": results}, args.out)


def _rank(args, cfg):
    report = harness.run_granularity_eval(cfg)
    dump_json(report, args.out)
    for m in report["models"]:
        print(f"{m['label']}: mean highest_passed={m['mean_highest_passed']:.2f} "
              f"histogram={m['histogram_highest_passed']} "
              f"mean empirical_tv={m['mean_empirical_tv']:.4f}")


def _validate(args, cfg):
    report = harness.run_ranking_validation(cfg)
    dump_json(report, args.out)
    rows = []
    for k, methods in report["summary"].items():
        for method, v in methods.items():
            rows.append([k, method, repr(v["mean_tau"]), repr(v["ci90"][0]), repr(v["ci90"][1])])
            print(f"k={k} {method:9s} mean tau={v['mean_tau']:+.3f} "
                  f"90% CI=[{v['ci90'][0]:+.3f}, {v['ci90'][1]:+.3f}]")
    if args.summary_csv:
        Path(args.summary_csv).parent.mkdir(parents=True, exist_ok=True)
        with open(args.summary_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "method", "mean_tau", "ci90_low", "ci90_high"])
            w.writerows(rows)


def _export(args, cfg):
    p = cfg.stair.build()
    samples = read_samples(args.file, p.space)
    dtv = export_empirical_pmf(p, samples, args.out)
    print(f"wrote {args.out} (empirical tv={dtv:.4f})")


_COMMANDS = {"generate": _generate, "evaluate": _evaluate, "rank": _rank,
             "validate-binning": _validate, "export-pmf": _export}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        _COMMANDS[args.command](args, cfg)
    except (InputError, ConstructionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
