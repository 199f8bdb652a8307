"""Command-line interface: stage-by-stage subcommands plus the full pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PipelineConfig
from .errors import PhmPrepError
from .frame import load_sensor_frame, save_event_log, save_sensor_frame
from .outliers import CutoffSpec, emit_diagnostics
from .pipeline import (
    PipelineContext,
    run_baseline_preset,
    run_pipeline,
    stage_evaluate,
    stage_label,
    stage_prepare,
    stage_reduce,
    stage_select,
    stage_train,
)
from .synth import default_config, generate_scenario


def _add_common(sub, config_required=True):
    sub.add_argument("--config", required=config_required,
                     help="pipeline config JSON")
    sub.add_argument("--out", required=True, help="artifact directory")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the config master seed")


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    return config


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = default_config(seed=args.seed if args.seed is not None else 42)
    frame, log, truth = generate_scenario(cfg)
    save_sensor_frame(frame, out / "sensors.csv")
    save_event_log(log, out / "events.csv")
    truth.to_json(out / "ground_truth.json")
    pipeline_config = PipelineConfig(
        sensors=str(out / "sensors.csv"),
        events=str(out / "events.csv"),
        seed=cfg.seed,
        cutoffs=CutoffSpec(dict(truth.nominal_bounds)))
    pipeline_config.labeling.operation_signal = (cfg.current_channel, 0.0)
    pipeline_config.to_json(out / "config.json")
    print(f"wrote {frame.n_rows} rows x {frame.n_cols} channels to {out}")
    return 0


def cmd_inspect(args) -> int:
    config = _load_config(args)
    frame = load_sensor_frame(config.sensors, config.time_column,
                              set(config.missing_tokens))
    written = emit_diagnostics(frame, args.out)
    print(f"wrote {len(written)} diagnostic files to {args.out}")
    return 0


def _stage_command(stage_fn):
    def run(args) -> int:
        config = _load_config(args)
        ctx = PipelineContext(config, args.out)
        stage_fn(ctx)
        print(f"{args.command}: done -> {args.out}")
        return 0
    return run


def cmd_pipeline(args) -> int:
    config = _load_config(args)
    out = run_pipeline(config, args.out)
    print(f"pipeline complete -> {out}")
    return 0


def cmd_baseline(args) -> int:
    config = _load_config(args)
    if args.preset:
        config.baseline.preset = args.preset
    ctx = PipelineContext(config, args.out)
    reports = run_baseline_preset(ctx)
    print(json.dumps(reports, indent=2))
    return 0


def cmd_report(args) -> int:
    out = Path(args.out)
    manifest = out / "manifest.json"
    if manifest.exists():
        with open(manifest) as f:
            m = json.load(f)
        print("stages:")
        for entry in m["stages"]:
            print(f"  {entry['name']:18s} {entry['hash'][:16]}")
    for name in ("eval.json", "baseline_eval.json"):
        path = out / name
        if path.exists():
            with open(path) as f:
                print(f"{name}:")
                print(json.dumps(json.load(f), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phmprep",
        description="Machinery-data preprocessing pipeline and diagnostics "
                    "baselines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_synth)

    for name, fn, description in [
        ("inspect", cmd_inspect, "emit per-feature diagnostics"),
        ("pipeline", cmd_pipeline, "run the full pipeline"),
        ("report", None, None),
    ]:
        if name == "report":
            p = sub.add_parser("report", help="summarize an artifact directory")
            p.add_argument("--out", required=True)
            p.set_defaults(fn=cmd_report)
            continue
        p = sub.add_parser(name, help=description)
        _add_common(p)
        p.set_defaults(fn=fn)

    for name, stage_fn, description in [
        ("select", stage_select, "exclusions and NaN-ratio filtering"),
        ("reduce", stage_reduce, "outlier stats, cv filter, dedup, reload"),
        ("label", stage_label, "health-state labeling and partitioning"),
        ("prepare", stage_prepare, "balance, split, and scale"),
        ("train", stage_train, "train configured models"),
        ("evaluate", stage_evaluate, "evaluate trained models on the test set"),
    ]:
        p = sub.add_parser(name, help=description)
        _add_common(p)
        p.set_defaults(fn=_stage_command(stage_fn))

    p = sub.add_parser("baseline", help="run a comparison preset")
    _add_common(p)
    p.add_argument("--preset",
                   choices=["scenario1", "scenario2", "scenario3", "scenario4"])
    p.set_defaults(fn=cmd_baseline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except PhmPrepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
