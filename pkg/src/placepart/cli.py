"""Command-line front end: synth -> partition -> evaluate -> compare.

Exit codes: 0 success, 1 runtime/data failure, 2 usage error. Every run
writes a manifest (resolved flags + input digests) next to its outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import statistics
import sys
from pathlib import Path


from . import __version__, evaluation, io_formats, partitioning, synthworld
from .partitioning import PartitionConfig, Strategy


class UsageError(Exception):
    pass


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(path, subcommand: str, flags: dict, inputs: dict) -> None:
    manifest = {
        "tool": "placepart",
        "version": __version__,
        "subcommand": subcommand,
        "flags": flags,
        "input_digests": {name: _sha256(p) for name, p in inputs.items()},
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


def _speed_profile(args):
    if args.speed_min == args.speed_max:
        return synthworld.ConstantSpeed()
    return synthworld.VariableSpeed(args.speed_min, args.speed_max)


# --- subcommands -------------------------------------------------------------


def cmd_synth(args) -> int:
    try:
        spec = synthworld.WorldSpec(
            n_places=args.n_places,
            n_samples=args.n_samples,
            feature_dim=args.feature_dim,
            speed_profile=_speed_profile(args),
            feature_noise_sigma=args.noise_sigma,
            revisit=args.revisit,
            seed=args.seed,
            appearance_gain=args.appearance_gain,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    world = synthworld.generate_world(spec)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io_formats.write_trajectory_csv(world.train, out / "train_trajectory.csv")
    io_formats.write_trajectory_csv(world.test, out / "test_trajectory.csv")
    io_formats.write_features(world.train_features, out / "train_features.vpcf")
    io_formats.write_features(world.test_features, out / "test_features.vpcf")
    with open(out / "true_places.csv", "w", newline="") as fh:
        fh.write("sample_id,place_id\n")
        for sid in sorted(world.true_place_of):
            fh.write(f"{sid},{world.true_place_of[sid]}\n")
    _write_manifest(
        out / "manifest.json",
        "synth",
        {
            "n_places": args.n_places,
            "n_samples": args.n_samples,
            "feature_dim": args.feature_dim,
            "speed_min": args.speed_min,
            "speed_max": args.speed_max,
            "noise_sigma": args.noise_sigma,
            "appearance_gain": args.appearance_gain,
            "revisit": args.revisit,
            "seed": args.seed,
            "out_dir": str(out),
        },
        {},
    )
    return 0


def _resolve_strategy(name: str) -> Strategy:
    try:
        return Strategy(name)
    except ValueError as exc:
        raise UsageError(f"unknown strategy {name!r}") from exc


def cmd_partition(args) -> int:
    strategy = _resolve_strategy(args.strategy)
    if strategy.is_hybrid and args.features is None:
        raise UsageError(f"--strategy {strategy.value} requires --features")
    traj = io_formats.load_trajectory_csv(args.trajectory)
    features = io_formats.load_features(args.features) if args.features else None
    cfg = PartitionConfig(
        strategy=strategy,
        n_classes_target=args.classes,
        k_appearance=args.k_appearance,
        seed=args.seed,
    )
    partition = partitioning.run_strategy(traj, cfg, features)
    io_formats.write_partition_csv(partition, args.out)
    if args.svg:
        io_formats.render_partition_svg(traj, partition, args.svg)
    inputs = {"trajectory": args.trajectory}
    if args.features:
        inputs["features"] = args.features
    _write_manifest(
        str(args.out) + ".manifest.json",
        "partition",
        {
            "trajectory": str(args.trajectory),
            "strategy": strategy.value,
            "classes": args.classes,
            "features": str(args.features) if args.features else None,
            "k_appearance": args.k_appearance,
            "seed": args.seed,
            "svg": str(args.svg) if args.svg else None,
            "out": str(args.out),
        },
        inputs,
    )
    return 0


def cmd_evaluate(args) -> int:
    train = io_formats.load_trajectory_csv(args.train_trajectory)
    train_features = io_formats.load_features(args.train_features)
    partition = io_formats.load_partition_csv(args.train_partition)
    test = io_formats.load_trajectory_csv(args.test_trajectory)
    test_features = io_formats.load_features(args.test_features)
    report = evaluation.evaluate(
        train,
        train_features,
        partition,
        test,
        test_features,
        orient_thresh_deg=args.orient_thresh,
        dist_thresh_m=args.dist_thresh,
        top_x=args.top,
    )
    flags = {
        "train_trajectory": str(args.train_trajectory),
        "train_features": str(args.train_features),
        "train_partition": str(args.train_partition),
        "test_trajectory": str(args.test_trajectory),
        "test_features": str(args.test_features),
        "orient_thresh": args.orient_thresh,
        "dist_thresh": args.dist_thresh,
        "top": args.top,
        "out": str(args.out),
    }
    io_formats.write_report_json(report, args.out, args.strategy_label, flags)
    _write_manifest(
        str(args.out) + ".manifest.json",
        "evaluate",
        flags,
        {
            "train_trajectory": args.train_trajectory,
            "train_features": args.train_features,
            "train_partition": args.train_partition,
            "test_trajectory": args.test_trajectory,
            "test_features": args.test_features,
        },
    )
    return 0


def _compare_cell(strategy: Strategy, seed: int, args):
    """One (strategy, seed) run: generate or load data, partition, evaluate."""
    if args.train_trajectory:
        train = io_formats.load_trajectory_csv(args.train_trajectory)
        train_features = io_formats.load_features(args.train_features)
        test = io_formats.load_trajectory_csv(args.test_trajectory)
        test_features = io_formats.load_features(args.test_features)
    else:
        spec = synthworld.WorldSpec(
            n_places=args.n_places,
            n_samples=args.n_samples,
            feature_dim=args.feature_dim,
            speed_profile=_speed_profile(args),
            feature_noise_sigma=args.noise_sigma,
            seed=seed,
            appearance_gain=args.appearance_gain,
        )
        world = synthworld.generate_world(spec)
        train, train_features = world.train, world.train_features
        test, test_features = world.test, world.test_features
    cfg = PartitionConfig(
        strategy=strategy,
        n_classes_target=args.classes,
        k_appearance=args.k_appearance,
        seed=seed,
    )
    partition = partitioning.run_strategy(train, cfg, train_features)
    return evaluation.evaluate(train, train_features, partition, test, test_features)


def cmd_compare(args) -> int:
    strategies = [_resolve_strategy(s.strip()) for s in args.strategies.split(",") if s.strip()]
    if not strategies:
        raise UsageError("--strategies must name at least one strategy")
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        raise UsageError("--seeds must name at least one seed")
    file_mode = args.train_trajectory is not None
    if file_mode and not (args.train_features and args.test_trajectory and args.test_features):
        raise UsageError("file inputs require --train-features, --test-trajectory, --test-features")

    rows = []
    for strategy in strategies:
        per_seed = []
        for seed in seeds:
            rep = _compare_cell(strategy, seed, args)
            per_seed.append(
                {
                    "seed": seed,
                    "n_classes": rep.n_classes,
                    "sr_top1": rep.sr_top1,
                    "sr_top5": rep.sr_topx,
                    "nsr_top1": rep.nsr_top1,
                }
            )
        summary = {}
        for key in ("n_classes", "sr_top1", "sr_top5", "nsr_top1"):
            vals = [r[key] for r in per_seed]
            summary[key] = {
                "mean": statistics.mean(vals),
                "stddev": statistics.stdev(vals) if len(vals) > 1 else 0.0,
            }
        rows.append({"strategy": strategy.value, "per_seed": per_seed, "summary": summary})

    header = f"{'strategy':<22} {'n_classes':>12} {'sr_top1':>16} {'sr_top5':>16} {'nsr_top1':>16}"
    print(header)
    print("-" * len(header))
    for row in rows:
        s = row["summary"]
        print(
            f"{row['strategy']:<22}"
            f" {s['n_classes']['mean']:>12.1f}"
            f" {s['sr_top1']['mean']:>8.4f}±{s['sr_top1']['stddev']:<7.4f}"
            f" {s['sr_top5']['mean']:>8.4f}±{s['sr_top5']['stddev']:<7.4f}"
            f" {s['nsr_top1']['mean']:>8.4f}±{s['nsr_top1']['stddev']:<7.4f}"
        )

    if args.out:
        flags = {k: v for k, v in vars(args).items() if k != "func"}
        flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in flags.items()}
        payload = {"config": flags, "results": rows}
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        inputs = {}
        if file_mode:
            inputs = {
                "train_trajectory": args.train_trajectory,
                "train_features": args.train_features,
                "test_trajectory": args.test_trajectory,
                "test_features": args.test_features,
            }
        _write_manifest(str(args.out) + ".manifest.json", "compare", flags, inputs)
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="placepart",
        description="Workspace partitioning and evaluation for visual place classification",
    )
    parser.add_argument("--version", action="version", version=f"placepart {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a synthetic train/test world")
    p.add_argument("--n-places", type=int, required=True)
    p.add_argument("--n-samples", type=int, required=True)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--speed-min", type=float, default=1.0)
    p.add_argument("--speed-max", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--appearance-gain", type=float, default=0.0)
    p.add_argument("--revisit", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("partition", help="partition a trajectory into place classes")
    p.add_argument("--trajectory", required=True)
    p.add_argument(
        "--strategy",
        required=True,
        choices=[s.value for s in Strategy],
    )
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--k-appearance", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("evaluate", help="evaluate a partition on a test session")
    p.add_argument("--train-trajectory", required=True)
    p.add_argument("--train-features", required=True)
    p.add_argument("--train-partition", required=True)
    p.add_argument("--test-trajectory", required=True)
    p.add_argument("--test-features", required=True)
    p.add_argument("--orient-thresh", type=float, default=20.0)
    p.add_argument("--dist-thresh", type=float, default=18.0)
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--strategy-label", default="file-partition")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run strategies end-to-end and tabulate")
    p.add_argument("--strategies", default=",".join(s.value for s in Strategy))
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--k-appearance", type=int, default=8)
    p.add_argument("--seeds", default="0")
    # synthworld inputs
    p.add_argument("--n-places", type=int, default=8)
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--speed-min", type=float, default=1.0)
    p.add_argument("--speed-max", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.15)
    p.add_argument("--appearance-gain", type=float, default=0.7)
    # or file inputs
    p.add_argument("--train-trajectory", default=None)
    p.add_argument("--train-features", default=None)
    p.add_argument("--test-trajectory", default=None)
    p.add_argument("--test-features", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"placepart {args.subcommand}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"placepart {args.subcommand}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
