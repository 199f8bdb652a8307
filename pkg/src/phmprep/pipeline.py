"""Stage-by-stage pipeline orchestration.

Each stage reads its inputs from the artifact directory (or an in-memory
cache warmed by a previous stage in the same process) and writes its outputs
plus a manifest entry there. Running stages one-by-one or through
``run_pipeline`` therefore produces identical artifacts.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import pandas as pd

from . import baselines, labeling, selection
from .config import PipelineConfig
from .errors import StageError
from .frame import SensorFrame, load_event_log, load_sensor_frame, write_csv
from .labeling import LabelingConfig, LabelSequence
from .models import (
    ForestModel,
    ForestParams,
    MlpModel,
    MlpParams,
    cross_validate,
    evaluate,
    random_search,
    train_forest,
    train_mlp,
)
from .outliers import CutoffSpec, apply_cutoffs
from .reduction import correlation_dedup, low_variability_filter, pearson_matrix
from .splitting import (
    DataSplits,
    SplitPart,
    SplitSpec,
    fit_scaler,
    inverse_transform,  # noqa: F401  (re-export for callers)
    transform,
)

STAGE_ORDER = ["ingest", "exclude", "nan_filter", "outlier_stats", "cv_filter",
               "correlation_dedup", "reload", "label", "partition", "prepare",
               "train", "evaluate"]


def derive_seed(master: int, label: str) -> int:
    """Fixed labeled sub-seed derivation; adding a stage never perturbs the
    randomness of the others."""
    digest = hashlib.sha256(f"{master}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def hash_frame(frame: SensorFrame) -> str:
    h = hashlib.sha256()
    h.update(frame.timestamps.tobytes())
    h.update(np.ascontiguousarray(frame.values).tobytes())
    h.update("\x00".join(frame.feature_names).encode())
    return h.hexdigest()


def hash_obj(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True).encode()).hexdigest()


class PipelineContext:
    """Artifact directory plus an in-memory cache of stage outputs."""

    def __init__(self, config: PipelineConfig, out_dir):
        self.config = config
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.cache: dict[str, object] = {}

    # --- manifest ---------------------------------------------------------

    def record(self, stage: str, digest: str) -> None:
        path = self.out / "manifest.json"
        manifest = {"stages": []}
        if path.exists():
            with open(path) as f:
                manifest = json.load(f)
        entries = {e["name"]: e["hash"] for e in manifest["stages"]}
        entries[stage] = digest
        manifest["stages"] = [{"name": s, "hash": entries[s]}
                              for s in STAGE_ORDER if s in entries]
        with open(path, "w") as f:
            json.dump(manifest, f, indent=2)

    def write_json(self, name: str, obj) -> None:
        with open(self.out / name, "w") as f:
            json.dump(obj, f, indent=2, sort_keys=True)

    def read_json(self, name: str):
        with open(self.out / name) as f:
            return json.load(f)

    # --- frame persistence ------------------------------------------------

    def write_frame(self, name: str, frame: SensorFrame) -> None:
        write_csv(frame.to_dataframe(self.config.time_column), self.out / name)
        self.cache[name] = frame

    def read_frame(self, name: str) -> SensorFrame:
        if name not in self.cache:
            self.cache[name] = load_sensor_frame(
                self.out / name, self.config.time_column,
                set(self.config.missing_tokens))
        return self.cache[name]


def _load_inputs(ctx: PipelineContext):
    if "raw" not in ctx.cache:
        ctx.cache["raw"] = load_sensor_frame(
            ctx.config.sensors, ctx.config.time_column,
            set(ctx.config.missing_tokens))
    if "log" not in ctx.cache:
        ctx.cache["log"] = load_event_log(ctx.config.events)
    return ctx.cache["raw"], ctx.cache["log"]


def _present_cutoffs(spec: CutoffSpec, frame: SensorFrame) -> CutoffSpec:
    return CutoffSpec({n: b for n, b in spec.bounds.items()
                       if n in frame.feature_names})


def _protected(cfg: PipelineConfig) -> set[str]:
    if cfg.labeling.operation_signal is not None:
        return {cfg.labeling.operation_signal[0]}
    return set()


# --- stages ---------------------------------------------------------------

def stage_select(ctx: PipelineContext) -> SensorFrame:
    """ingest -> expert exclusions / time trim -> NaN-ratio filtering."""
    cfg = ctx.config
    try:
        raw, log = _load_inputs(ctx)
        ctx.record("ingest", hash_frame(raw))
    except Exception as exc:
        raise StageError("ingest", exc) from exc
    try:
        trimmed = selection.apply_exclusions(raw, set(cfg.exclusions),
                                             cfg.keep_window)
        ctx.record("exclude", hash_frame(trimmed))
    except Exception as exc:
        raise StageError("exclude", exc) from exc
    try:
        filtered, report = selection.missing_ratio_filter(
            trimmed, cfg.col_threshold, cfg.row_threshold)
        report.excluded_by_expert = sorted(cfg.exclusions)
        ctx.write_json("select_report.json", report.to_dict())
        ctx.write_frame("selected.csv", filtered)
        ctx.record("nan_filter", hash_frame(filtered))
    except Exception as exc:
        raise StageError("nan_filter", exc) from exc
    return filtered


def stage_reduce(ctx: PipelineContext) -> SensorFrame:
    """Cutoff statistics pass, cv filter, correlation dedup, raw-data reload."""
    cfg = ctx.config
    selected = ctx.read_frame("selected.csv")
    protected = _protected(cfg)
    try:
        cut_frame, cut_report = apply_cutoffs(
            selected, _present_cutoffs(cfg.cutoffs, selected))
        ctx.write_json("outlier_report.json", cut_report.to_dict())
        ctx.record("outlier_stats", hash_frame(cut_frame))
    except Exception as exc:
        raise StageError("outlier_stats", exc) from exc
    try:
        cv_frame, cv_report = low_variability_filter(
            cut_frame, cfg.cv_threshold, protect=protected)
        ctx.record("cv_filter", hash_frame(cv_frame))
    except Exception as exc:
        raise StageError("cv_filter", exc) from exc
    try:
        matrix = pearson_matrix(cv_frame)
        dedup_report = correlation_dedup(
            matrix, cfg.correlation_threshold,
            seed=derive_seed(cfg.seed, "correlation_dedup"), protect=protected)
        dedup_report.dropped_low_cv = cv_report.dropped_low_cv
        dedup_report.undefined_cv = cv_report.undefined_cv
        ctx.write_json("reduction_report.json", dedup_report.to_dict())
        ctx.record("correlation_dedup", hash_obj(dedup_report.to_dict()))
    except Exception as exc:
        raise StageError("correlation_dedup", exc) from exc
    try:
        raw, _ = _load_inputs(ctx)
        trimmed = selection.apply_exclusions(raw, set(cfg.exclusions),
                                             cfg.keep_window)
        final = [n for n in trimmed.feature_names
                 if n in set(dedup_report.final_features) | protected]
        reloaded = trimmed.select_columns(final)
        complete = ~reloaded.missing_mask().any(axis=1)
        reloaded = reloaded.select_rows(complete)
        ctx.write_frame("reduced.csv", reloaded)
        ctx.record("reload", hash_frame(reloaded))
    except Exception as exc:
        raise StageError("reload", exc) from exc
    return reloaded


def stage_label(ctx: PipelineContext):
    """Operational-interval extraction, labeling, and state partitioning."""
    cfg = ctx.config
    reduced = ctx.read_frame("reduced.csv")
    _, log = _load_inputs(ctx)
    try:
        intervals, in_op = labeling.extract_operational_intervals(
            log, reduced, cfg.labeling)
        labels = labeling.generate_labels(intervals, log, cfg.labeling,
                                          reduced, in_op)
        _write_labels(ctx, reduced, labels)
        ctx.record("label", hash_obj(labels.states.tolist()))
    except Exception as exc:
        raise StageError("label", exc) from exc
    try:
        healthy, degraded, transition = labeling.partition_by_state(
            reduced, labels)
        ctx.write_frame("healthy.csv", healthy)
        ctx.write_frame("transition.csv", transition)
        for mode, frame in degraded.items():
            ctx.write_frame(f"degraded_{mode}.csv", frame)
        summary = {
            "healthy_rows": healthy.n_rows,
            "transition_rows": transition.n_rows,
            "degraded_rows": {m: f.n_rows for m, f in degraded.items()},
            "excluded_rows": int((labels.states == labeling.EXCLUDED).sum()),
            "modes": sorted(degraded),
        }
        ctx.write_json("label_report.json", summary)
        ctx.record("partition", hash_obj(summary))
    except Exception as exc:
        raise StageError("partition", exc) from exc
    return healthy, degraded, transition


def _write_labels(ctx: PipelineContext, frame: SensorFrame,
                  labels: LabelSequence) -> None:
    with open(ctx.out / "labels.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp", "state", "failure_mode", "provenance"])
        for t, s, m, p in zip(frame.timestamps, labels.state_names(),
                              labels.modes, labels.provenance):
            w.writerow([int(t), s, m or "", p])


def _concat_degraded(ctx: PipelineContext, modes: list[str]) -> SensorFrame:
    frames = [ctx.read_frame(f"degraded_{m}.csv") for m in modes]
    base = frames[0]
    ts = np.concatenate([f.timestamps for f in frames])
    vals = np.vstack([f.values for f in frames])
    order = np.argsort(ts, kind="stable")
    return SensorFrame(ts[order], list(base.feature_names), vals[order])


def stage_prepare(ctx: PipelineContext) -> DataSplits:
    """Healthy-only cutoff re-application, balance/split, scaler fit/transform."""
    cfg = ctx.config
    try:
        modes = ctx.read_json("label_report.json")["modes"]
        healthy = ctx.read_frame("healthy.csv")
        degraded = _concat_degraded(ctx, modes)
        healthy, _ = apply_cutoffs(healthy,
                                   _present_cutoffs(cfg.cutoffs, healthy))
        spec = SplitSpec(cfg.split.test_fraction,
                         cfg.split.validation_fraction_of_train,
                         cfg.split.balance,
                         seed=derive_seed(cfg.seed, "split"))
        splits = balance_and_split_frames(healthy, degraded, spec)
        scaler = fit_scaler(splits.train.x, cfg.scaler, splits.feature_names,
                            exempt={n for n in splits.feature_names if "=" in n})
        for part in (splits.train, splits.validation, splits.test):
            part.x = transform(part.x, scaler)
        _write_split(ctx, "train.csv", splits, splits.train)
        _write_split(ctx, "validation.csv", splits, splits.validation)
        _write_split(ctx, "test.csv", splits, splits.test)
        ctx.write_json("scaler.json", scaler.to_dict())
        ctx.write_json("prepare_report.json", {
            "train_rows": len(splits.train.y),
            "validation_rows": len(splits.validation.y),
            "test_rows": len(splits.test.y),
            "train_degraded": int(splits.train.y.sum()),
            "test_degraded": int(splits.test.y.sum()),
        })
        ctx.cache["splits"] = splits
        ctx.record("prepare", hash_obj({
            "train": _part_hash(splits.train),
            "validation": _part_hash(splits.validation),
            "test": _part_hash(splits.test)}))
    except Exception as exc:
        raise StageError("prepare", exc) from exc
    return splits


def balance_and_split_frames(healthy, degraded, spec: SplitSpec) -> DataSplits:
    from .splitting import balance_and_split
    return balance_and_split(healthy, degraded, spec)


def _part_hash(part: SplitPart) -> str:
    h = hashlib.sha256()
    h.update(part.timestamps.tobytes())
    h.update(np.ascontiguousarray(part.x).tobytes())
    h.update(part.y.tobytes())
    return h.hexdigest()


def _write_split(ctx: PipelineContext, name: str, splits: DataSplits,
                 part: SplitPart) -> None:
    df = pd.DataFrame(part.x, columns=splits.feature_names)
    df.insert(0, "label", part.y)
    df.insert(0, ctx.config.time_column, part.timestamps)
    write_csv(df, ctx.out / name)


def _read_split(ctx: PipelineContext, name: str) -> tuple[SplitPart, list[str]]:
    if "splits" in ctx.cache:
        splits: DataSplits = ctx.cache["splits"]
        part = {"train.csv": splits.train, "validation.csv": splits.validation,
                "test.csv": splits.test}[name]
        return part, splits.feature_names
    df = pd.read_csv(ctx.out / name, float_precision="round_trip")
    t = df[ctx.config.time_column].to_numpy(dtype=np.int64)
    y = df["label"].to_numpy(dtype=np.int64)
    features = [c for c in df.columns if c not in (ctx.config.time_column, "label")]
    return SplitPart(df[features].to_numpy(dtype=np.float64), y, t), features


def stage_train(ctx: PipelineContext) -> dict:
    cfg = ctx.config
    try:
        train, _ = _read_split(ctx, "train.csv")
        val, _ = _read_split(ctx, "validation.csv")
        trained: dict[str, object] = {}
        hashes = {}
        if cfg.models.forest is not None or cfg.models.forest_grid:
            seed = derive_seed(cfg.seed, "forest")
            if cfg.models.forest_grid:
                grid = [ForestParams(**{**g, "seed": seed})
                        for g in cfg.models.forest_grid]
                params, _scores = cross_validate(train.x, train.y, grid,
                                                 k=5, seed=seed)
            else:
                params = ForestParams(**{**cfg.models.forest, "seed": seed})
            forest = train_forest(train.x, train.y, params)
            ctx.write_json("forest.json", forest.to_dict())
            trained["forest"] = forest
            hashes["forest"] = hash_obj(forest.to_dict())
        if cfg.models.mlp is not None or cfg.models.search_draws:
            seed = derive_seed(cfg.seed, "mlp")
            if cfg.models.search_draws and cfg.models.mlp_space:
                params, _scores = random_search(
                    train.x, train.y, val.x, val.y, cfg.models.mlp_space,
                    cfg.models.search_draws, seed)
            else:
                p = dict(cfg.models.mlp)
                p["hidden_layer_sizes"] = tuple(p.get("hidden_layer_sizes",
                                                      (32, 16)))
                params = MlpParams(**{**p, "seed": seed})
            mlp = train_mlp(train.x, train.y, val.x, val.y, params)
            ctx.write_json("mlp.json", mlp.to_dict())
            _write_curves(ctx.out / "curves.csv", mlp.curve)
            trained["mlp"] = mlp
            hashes["mlp"] = hash_obj(mlp.to_dict())
        ctx.cache["models"] = trained
        ctx.record("train", hash_obj(hashes))
        return trained
    except Exception as exc:
        raise StageError("train", exc) from exc


def _write_curves(path, curve) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "train_loss", "val_loss", "train_acc", "val_acc"])
        for row in curve.rows():
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def stage_evaluate(ctx: PipelineContext) -> dict:
    try:
        test, _ = _read_split(ctx, "test.csv")
        models = ctx.cache.get("models")
        if models is None:
            models = {}
            if (ctx.out / "forest.json").exists():
                models["forest"] = ForestModel.from_dict(
                    ctx.read_json("forest.json"))
            if (ctx.out / "mlp.json").exists():
                models["mlp"] = MlpModel.from_dict(ctx.read_json("mlp.json"))
        reports = {}
        for name, model in sorted(models.items()):
            report = evaluate(model.predict(test.x), test.y)
            reports[name] = report.to_dict()
        ctx.write_json("eval.json", reports)
        ctx.record("evaluate", hash_obj(reports))
        return reports
    except Exception as exc:
        raise StageError("evaluate", exc) from exc


def run_pipeline(config: PipelineConfig, out_dir) -> Path:
    """Execute the full stage sequence (or a baseline preset) into out_dir."""
    ctx = PipelineContext(config, out_dir)
    if config.baseline.preset:
        run_baseline_preset(ctx)
        return ctx.out
    stage_select(ctx)
    stage_reduce(ctx)
    stage_label(ctx)
    stage_prepare(ctx)
    stage_train(ctx)
    stage_evaluate(ctx)
    return ctx.out


# --- baseline presets -----------------------------------------------------

def _minimal_clean(frame: SensorFrame) -> SensorFrame:
    """The comparison scenarios' minimal preprocessing: drop constant-in-time
    channels and replace missing cells with zeros."""
    keep = []
    for j, name in enumerate(frame.feature_names):
        col = frame.values[:, j]
        vals = col[~np.isnan(col)]
        if len(vals) and vals.std() > 0:
            keep.append(name)
    out = frame.select_columns(keep)
    out.values = np.nan_to_num(out.values, nan=0.0)
    return out


def _scenario_split(healthy, degraded, spec: SplitSpec, balance: bool,
                    max_train_rows: int | None):
    """Balanced test set shared across scenarios; the training pool is either
    every remaining row (unbalanced) or downsampled to class parity."""
    rng = np.random.default_rng(spec.seed)
    n_d = degraded.n_rows
    n_test = int(round(spec.test_fraction * n_d))
    d_perm = rng.permutation(n_d)
    h_perm = rng.permutation(healthy.n_rows)
    d_test, d_rest = d_perm[:n_test], d_perm[n_test:]
    h_test, h_rest = h_perm[:n_test], h_perm[n_test:]
    if balance:
        h_rest = h_rest[:len(d_rest)]
    if max_train_rows is not None and len(h_rest) > max_train_rows:
        h_rest = h_rest[:max_train_rows]

    def build(d_idx, h_idx):
        x = np.vstack([degraded.values[d_idx], healthy.values[h_idx]])
        y = np.concatenate([np.ones(len(d_idx), dtype=np.int64),
                            np.zeros(len(h_idx), dtype=np.int64)])
        t = np.concatenate([degraded.timestamps[d_idx],
                            healthy.timestamps[h_idx]])
        return x, y, t

    x_pool, y_pool, t_pool = build(d_rest, h_rest)
    n_val = int(round(spec.validation_fraction_of_train * len(y_pool)))
    perm = rng.permutation(len(y_pool))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    x_test, y_test, t_test = build(d_test, h_test)
    return DataSplits(
        train=SplitPart(x_pool[train_idx], y_pool[train_idx], t_pool[train_idx]),
        validation=SplitPart(x_pool[val_idx], y_pool[val_idx], t_pool[val_idx]),
        test=SplitPart(x_test, y_test, t_test),
        feature_names=list(healthy.feature_names))


def _budgeted_epochs(budget: int, n_rows: int, batch_size: int) -> int:
    steps_per_epoch = max(1, -(-n_rows // batch_size))
    return max(1, int(round(budget / steps_per_epoch)))


def _baseline_classifier(ctx, x_train, y_train, x_val, y_val, seed):
    cfg = ctx.config
    if cfg.baseline.classifier == "forest":
        params = ForestParams(**{**(cfg.models.forest or {}), "seed": seed})
        model = train_forest(x_train, y_train, params)
    else:
        p = dict(cfg.models.mlp or {})
        p["hidden_layer_sizes"] = tuple(p.get("hidden_layer_sizes", (32, 16)))
        p["epochs"] = _budgeted_epochs(cfg.baseline.train_step_budget,
                                       len(x_train), p.get("batch_size", 32))
        params = MlpParams(**{**p, "seed": seed})
        model = train_mlp(x_train, y_train, x_val, y_val, params)
    return model


def run_baseline_preset(ctx: PipelineContext) -> dict:
    """The four comparison scenarios: unsupervised AE anomaly detection on
    minimally-preprocessed data, PCA / AE-latent classifiers with unbalanced
    training, and their balanced variants."""
    cfg = ctx.config
    preset = cfg.baseline.preset
    if preset not in ("scenario1", "scenario2", "scenario3", "scenario4"):
        raise StageError("baseline", ValueError(f"unknown preset: {preset}"))
    raw, log = _load_inputs(ctx)
    frame = _minimal_clean(raw)

    intervals, in_op = labeling.extract_operational_intervals(
        log, frame, cfg.labeling)
    labels = labeling.generate_labels(intervals, log, cfg.labeling, frame, in_op)
    healthy, degraded_by_mode, _transition = labeling.partition_by_state(
        frame, labels)
    modes = sorted(degraded_by_mode)
    frames = [degraded_by_mode[m] for m in modes]
    ts = np.concatenate([f.timestamps for f in frames])
    vals = np.vstack([f.values for f in frames])
    order = np.argsort(ts, kind="stable")
    degraded = SensorFrame(ts[order], list(frame.feature_names), vals[order])

    seed = derive_seed(cfg.seed, f"baseline-{preset}")
    # the split seed is shared across presets so every scenario is judged on
    # the exact same held-out test rows
    spec = SplitSpec(cfg.split.test_fraction,
                     cfg.split.validation_fraction_of_train,
                     balance=True, seed=derive_seed(cfg.seed, "baseline-split"))
    splits = _scenario_split(healthy, degraded, spec,
                             balance=(preset == "scenario4"),
                             max_train_rows=cfg.baseline.max_train_rows)
    scaler = fit_scaler(splits.train.x, "standard", splits.feature_names)
    x_train = transform(splits.train.x, scaler)
    x_val = transform(splits.validation.x, scaler)
    x_test = transform(splits.test.x, scaler)

    pca = baselines.fit_pca(x_train)
    k = baselines.select_components(pca, cfg.baseline.pca_threshold)
    baselines.write_explained_variance(pca, ctx.out / "explained_variance.csv")

    reports = {"preset": preset, "latent_dim": k}
    ae_epochs = _budgeted_epochs(cfg.baseline.train_step_budget,
                                 len(x_train), 64)
    if preset == "scenario1":
        ae_params = MlpParams(learning_rate=0.01, batch_size=64,
                              epochs=ae_epochs, seed=seed)
        ae = baselines.train_autoencoder(x_train, k, ae_params)
        train_errors = ae.reconstruction_errors(x_train)
        ae.threshold = baselines.choose_error_threshold(
            train_errors, splits.train.y, cfg.baseline.threshold_criterion)
        baselines.write_reconstruction_errors(
            train_errors, ae.threshold, ctx.out / "reconstruction_errors.csv")
        reports["train"] = evaluate(ae.classify(x_train),
                                    splits.train.y).to_dict()
        reports["test"] = evaluate(ae.classify(x_test), splits.test.y).to_dict()
    elif preset in ("scenario2", "scenario4"):
        z_train = baselines.project(pca, k, x_train)
        z_val = baselines.project(pca, k, x_val)
        z_test = baselines.project(pca, k, x_test)
        model = _baseline_classifier(ctx, z_train, splits.train.y,
                                     z_val, splits.validation.y, seed)
        reports["test"] = evaluate(model.predict(z_test),
                                   splits.test.y).to_dict()
    else:  # scenario3: AE latent space as classifier input
        ae_params = MlpParams(learning_rate=0.01, batch_size=64,
                              epochs=ae_epochs, seed=seed)
        ae = baselines.train_autoencoder(x_train, k, ae_params)
        model = _baseline_classifier(
            ctx, ae.encode(x_train), splits.train.y,
            ae.encode(x_val), splits.validation.y, seed)
        reports["test"] = evaluate(model.predict(ae.encode(x_test)),
                                   splits.test.y).to_dict()
    ctx.write_json("baseline_eval.json", reports)
    ctx.record("evaluate", hash_obj(reports))
    return reports
