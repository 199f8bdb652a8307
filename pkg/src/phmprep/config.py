"""Pipeline configuration: a single versioned JSON document."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .labeling import LabelingConfig, WindowSpec
from .outliers import CutoffSpec
from .splitting import SplitSpec

CONFIG_VERSION = 1


@dataclass
class ModelConfig:
    forest: dict | None = field(default_factory=lambda: {
        "n_trees": 40, "max_depth": 10, "min_samples_leaf": 1})
    mlp: dict | None = field(default_factory=lambda: {
        "hidden_layer_sizes": [64, 32], "learning_rate": 0.1,
        "batch_size": 32, "epochs": 100})
    forest_grid: list[dict] = field(default_factory=list)
    mlp_space: dict = field(default_factory=dict)
    search_draws: int = 0


@dataclass
class BaselineConfig:
    preset: str | None = None          # scenario1 .. scenario4
    classifier: str = "mlp"
    pca_threshold: float = 0.90
    threshold_criterion: str = "accuracy"
    max_train_rows: int | None = None
    # total number of gradient updates granted to each trained network, so
    # scenarios with very different training-set sizes compete at equal compute
    train_step_budget: int = 6000


@dataclass
class PipelineConfig:
    sensors: str
    events: str
    seed: int = 0
    time_column: str = "t"
    missing_tokens: list[str] = field(
        default_factory=lambda: ["", "NaN", "nan", "NA", "null"])
    exclusions: list[str] = field(default_factory=list)
    keep_window: tuple[int, int] | None = None
    col_threshold: float = 0.50
    row_threshold: float | None = 0.20
    cutoffs: CutoffSpec = field(default_factory=CutoffSpec)
    cv_threshold: float = 0.05
    correlation_threshold: float = 0.95
    labeling: LabelingConfig = field(default_factory=LabelingConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    scaler: str = "standard"
    models: ModelConfig = field(default_factory=ModelConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)

    def to_dict(self) -> dict:
        lab = self.labeling
        return {
            "version": CONFIG_VERSION,
            "seed": self.seed,
            "paths": {"sensors": self.sensors, "events": self.events},
            "time_column": self.time_column,
            "missing_tokens": self.missing_tokens,
            "exclusions": self.exclusions,
            "keep_window": list(self.keep_window) if self.keep_window else None,
            "nan_filter": {"col_threshold": self.col_threshold,
                           "row_threshold": self.row_threshold},
            "cutoffs": {name: {"lower": lo, "upper": hi}
                        for name, (lo, hi) in self.cutoffs.bounds.items()},
            "cv_threshold": self.cv_threshold,
            "correlation_threshold": self.correlation_threshold,
            "labeling": {
                "degraded_window_hours": lab.degraded_window / 3600.0,
                "transition_window_hours": lab.transition_window / 3600.0,
                "warmup_hours": lab.warmup / 3600.0,
                "cooldown_hours": lab.cooldown / 3600.0,
                "operation_signal": (list(lab.operation_signal)
                                     if lab.operation_signal else None),
                "per_mode": {m: {"degraded_window_hours": w.degraded / 3600.0,
                                 "transition_window_hours": w.transition / 3600.0}
                             for m, w in lab.per_mode_windows.items()},
            },
            "split": {"test_fraction": self.split.test_fraction,
                      "validation_fraction_of_train":
                          self.split.validation_fraction_of_train,
                      "balance": self.split.balance},
            "scaler": self.scaler,
            "models": {"forest": self.models.forest, "mlp": self.models.mlp,
                       "forest_grid": self.models.forest_grid,
                       "mlp_space": self.models.mlp_space,
                       "search_draws": self.models.search_draws},
            "baseline": {"preset": self.baseline.preset,
                         "classifier": self.baseline.classifier,
                         "pca_threshold": self.baseline.pca_threshold,
                         "threshold_criterion": self.baseline.threshold_criterion,
                         "max_train_rows": self.baseline.max_train_rows,
                         "train_step_budget": self.baseline.train_step_budget},
        }

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        if d.get("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise ValueError(f"unsupported config version: {d.get('version')}")
        lab_d = d.get("labeling", {})
        op = lab_d.get("operation_signal")
        labeling = LabelingConfig(
            degraded_window=lab_d.get("degraded_window_hours", 2.0) * 3600.0,
            transition_window=lab_d.get("transition_window_hours", 3.0) * 3600.0,
            warmup=lab_d.get("warmup_hours", 0.5) * 3600.0,
            cooldown=lab_d.get("cooldown_hours", 0.5) * 3600.0,
            operation_signal=(op[0], float(op[1])) if op else None,
            per_mode_windows={
                m: WindowSpec(w["degraded_window_hours"] * 3600.0,
                              w["transition_window_hours"] * 3600.0)
                for m, w in lab_d.get("per_mode", {}).items()})
        nan_d = d.get("nan_filter", {})
        split_d = d.get("split", {})
        models_d = d.get("models", {})
        base_d = d.get("baseline", {})
        kw = d.get("keep_window")
        return cls(
            sensors=d["paths"]["sensors"],
            events=d["paths"]["events"],
            seed=d.get("seed", 0),
            time_column=d.get("time_column", "t"),
            missing_tokens=d.get("missing_tokens",
                                 ["", "NaN", "nan", "NA", "null"]),
            exclusions=d.get("exclusions", []),
            keep_window=(int(kw[0]), int(kw[1])) if kw else None,
            col_threshold=nan_d.get("col_threshold", 0.50),
            row_threshold=nan_d.get("row_threshold", 0.20),
            cutoffs=CutoffSpec({name: (b.get("lower"), b.get("upper"))
                                for name, b in d.get("cutoffs", {}).items()}),
            cv_threshold=d.get("cv_threshold", 0.05),
            correlation_threshold=d.get("correlation_threshold", 0.95),
            labeling=labeling,
            split=SplitSpec(
                test_fraction=split_d.get("test_fraction", 0.15),
                validation_fraction_of_train=split_d.get(
                    "validation_fraction_of_train", 0.10),
                balance=split_d.get("balance", True),
                seed=d.get("seed", 0)),
            scaler=d.get("scaler", "standard"),
            models=ModelConfig(
                forest=models_d.get("forest"),
                mlp=models_d.get("mlp"),
                forest_grid=models_d.get("forest_grid", []),
                mlp_space=models_d.get("mlp_space", {}),
                search_draws=models_d.get("search_draws", 0)),
            baseline=BaselineConfig(
                preset=base_d.get("preset"),
                classifier=base_d.get("classifier", "mlp"),
                pca_threshold=base_d.get("pca_threshold", 0.90),
                threshold_criterion=base_d.get("threshold_criterion", "accuracy"),
                max_train_rows=base_d.get("max_train_rows"),
                train_step_budget=base_d.get("train_step_budget", 6000)))

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))
