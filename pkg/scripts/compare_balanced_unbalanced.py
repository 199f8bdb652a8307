"""Run the four comparison presets on one scenario and print their test-set
scores side by side.

All presets are evaluated on the identical balanced test rows, so the effect
of class balancing and of the preprocessing depth is directly comparable:

  scenario1  unsupervised autoencoder threshold, unbalanced data
  scenario2  PCA features + MLP classifier, unbalanced training set
  scenario3  autoencoder latent features + MLP, unbalanced training set
  scenario4  PCA features + MLP, balanced training set

Usage: python3 scripts/compare_balanced_unbalanced.py [--out DIR] [--seed N]
"""

import argparse
from pathlib import Path

from phmprep.config import PipelineConfig
from phmprep.frame import save_event_log, save_sensor_frame
from phmprep.outliers import CutoffSpec
from phmprep.pipeline import PipelineContext, run_baseline_preset
from phmprep.synth import default_config, generate_scenario

PRESETS = ("scenario1", "scenario2", "scenario3", "scenario4")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="baseline_comparison",
                        help="output directory (default: ./baseline_comparison)")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    print(f"generating default scenario (seed {args.seed}) ...")
    frame, log, truth = generate_scenario(default_config(seed=args.seed))
    save_sensor_frame(frame, out / "sensors.csv")
    save_event_log(log, out / "events.csv")

    config = PipelineConfig(
        sensors=str(out / "sensors.csv"),
        events=str(out / "events.csv"),
        seed=args.seed,
        cutoffs=CutoffSpec(dict(truth.nominal_bounds)))
    config.labeling.operation_signal = ("motor_current", 0.0)

    rows = {}
    for preset in PRESETS:
        print(f"running {preset} ...")
        config.baseline.preset = preset
        ctx = PipelineContext(config, out / preset)
        # reuse the generated data instead of re-reading the CSVs
        ctx.cache["raw"] = frame
        ctx.cache["log"] = log
        rows[preset] = run_baseline_preset(ctx)["test"]

    print()
    print(f"{'preset':10s} {'accuracy':>9s} {'f1':>7s} "
          f"{'false_healthy':>14s} {'false_degraded':>15s}")
    for preset in PRESETS:
        r = rows[preset]
        print(f"{preset:10s} {r['accuracy']:9.3f} {r['f1']:7.3f} "
              f"{r['false_healthy']:14.3f} {r['false_degraded']:15.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
