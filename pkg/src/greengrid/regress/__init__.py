"""Ensemble tree regressors behind one uniform interface.

Three algorithms: random_forest (bagged CART trees with feature subsampling),
boosted_trees (exact-split gradient boosting) and hist_gbm (gradient boosting
with 255-bin histogram splits). Default hyperparameter grids below; fitting is
fully deterministic under a fixed random_state.
"""

import itertools
import json
from dataclasses import dataclass

import numpy as np

from ..errors import SchemaError
from ._ensembles import (GradientBoostingRegressor, RandomForestRegressor,
                         HIST_MAX_BINS)

ALGORITHMS = ("random_forest", "boosted_trees", "hist_gbm")

MODEL_FORMAT_VERSION = 1

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "random_forest": {
        "max_features": [0.5, 0.6],
        "n_estimators": [10, 16, 32, 40, 50],
        "random_state": [42],
    },
    "boosted_trees": {
        "learning_rate": [0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
        "n_estimators": [25, 50, 75, 100],
        "random_state": [42],
    },
    "hist_gbm": {
        "learning_rate": [0.01, 0.05, 0.1, 0.15, 0.2],
        "n_estimators": [10, 16, 32, 40, 50],
        "random_state": [42],
    },
}

_REQUIRED_PARAMS = {
    "random_forest": {"max_features", "n_estimators", "random_state"},
    "boosted_trees": {"learning_rate", "n_estimators", "random_state"},
    "hist_gbm": {"learning_rate", "n_estimators", "random_state"},
}

_OPTIONAL_PARAMS = {"max_depth", "min_samples_leaf"}


@dataclass(frozen=True)
class RegressorSpec:
    algorithm: str
    params: tuple  # sorted (name, value) pairs; hashable for reporting keys

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise SchemaError(f"unknown algorithm {self.algorithm!r}")
        names = {k for k, _ in self.params}
        missing = _REQUIRED_PARAMS[self.algorithm] - names
        if missing:
            raise SchemaError(
                f"{self.algorithm} spec missing params: {sorted(missing)}")
        extra = names - _REQUIRED_PARAMS[self.algorithm] - _OPTIONAL_PARAMS
        if extra:
            raise SchemaError(
                f"{self.algorithm} spec has unknown params: {sorted(extra)}")

    @classmethod
    def make(cls, algorithm: str, **params) -> "RegressorSpec":
        return cls(algorithm, tuple(sorted(params.items())))

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "params": self.param_dict}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressorSpec":
        return cls.make(d["algorithm"], **d["params"])


@dataclass
class TrainedModel:
    spec: RegressorSpec
    model: object
    feature_schema: list[str]
    train_range: tuple[str, str]  # (first date, last date), ISO strings


def grid(algorithm: str, grids: dict | None = None) -> list[RegressorSpec]:
    """Full cross-product of the configured parameter ranges for an algorithm."""
    if algorithm not in ALGORITHMS:
        raise SchemaError(f"unknown algorithm {algorithm!r}")
    space = (grids or DEFAULT_GRIDS)[algorithm]
    names = sorted(space)
    specs = []
    for combo in itertools.product(*(space[n] for n in names)):
        specs.append(RegressorSpec.make(algorithm, **dict(zip(names, combo))))
    return specs


def _build_estimator(spec: RegressorSpec):
    p = spec.param_dict
    if spec.algorithm == "random_forest":
        return RandomForestRegressor(
            n_estimators=p["n_estimators"], max_features=p["max_features"],
            random_state=p["random_state"],
            max_depth=p.get("max_depth"),
            min_samples_leaf=p.get("min_samples_leaf", 1))
    max_bins = HIST_MAX_BINS if spec.algorithm == "hist_gbm" else None
    return GradientBoostingRegressor(
        n_estimators=p["n_estimators"], learning_rate=p["learning_rate"],
        random_state=p["random_state"],
        max_depth=p.get("max_depth", 6),
        min_samples_leaf=p.get("min_samples_leaf", 1),
        max_bins=max_bins)


def fit(spec: RegressorSpec, rows: np.ndarray, targets: np.ndarray,
        feature_schema: list[str], train_range: tuple[str, str]) -> TrainedModel:
    rows = np.asarray(rows, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise SchemaError("need at least 2 training samples")
    if rows.shape[1] != len(feature_schema):
        raise SchemaError(
            f"schema mismatch: {rows.shape[1]} columns vs "
            f"{len(feature_schema)} schema names")
    if not np.all(np.isfinite(rows)) or not np.all(np.isfinite(targets)):
        raise SchemaError("non-finite values in training data")
    if rows.shape[0] != targets.shape[0]:
        raise SchemaError("rows/targets length mismatch")
    estimator = _build_estimator(spec)
    estimator.fit(rows, targets)
    return TrainedModel(spec, estimator, list(feature_schema), train_range)


def predict(model: TrainedModel, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != len(model.feature_schema):
        raise SchemaError(
            f"schema mismatch: expected {len(model.feature_schema)} columns")
    return model.model.predict(rows)


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "feature_schema": model.feature_schema,
        "train_range": list(model.train_range),
        "estimator": model.model.to_dict(),
    }


def model_from_dict(d: dict) -> TrainedModel:
    if d.get("format_version") != MODEL_FORMAT_VERSION:
        raise SchemaError(f"unsupported model format {d.get('format_version')}")
    spec = RegressorSpec.from_dict(d["spec"])
    est = d["estimator"]
    if est["kind"] == "random_forest":
        model = RandomForestRegressor.from_dict(est)
    else:
        model = GradientBoostingRegressor.from_dict(est)
    return TrainedModel(spec, model, list(d["feature_schema"]),
                        tuple(d["train_range"]))


def model_to_json(model: TrainedModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str) -> TrainedModel:
    return model_from_dict(json.loads(text))
