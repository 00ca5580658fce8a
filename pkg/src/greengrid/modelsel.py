"""Monthly model selection by sliding-window backtesting.

For a target month, every spec in every algorithm's grid is fitted once per
backtest window (train through train_end, predict the following month) and
scored with MSE and Adjusted R-squared averaged across windows. Demand models
are scored on the relative monthly total against the invoice; occupancy models
on raw daily counts. The winner minimizes average MSE, ties broken by higher
average Adjusted R-squared, then by algorithm order.
"""

import logging
from dataclasses import dataclass
from datetime import timedelta

import numpy as np

from . import features, months, regress
from .datastore import TimeSeriesStore
from .errors import MissingPrerequisiteError
from .regress import RegressorSpec, TrainedModel

logger = logging.getLogger(__name__)

TASKS = ("occupancy", "demand")


@dataclass(frozen=True)
class BacktestWindow:
    train_end: str  # year-month, inclusive
    test_month: str

    def __post_init__(self):
        if months.add_months(self.train_end, 1) != self.test_month:
            raise ValueError("test_month must be train_end + 1 month")


@dataclass
class MetricReport:
    mse: float
    r2_adj: float
    n_samples: int
    n_features: int

    def to_dict(self) -> dict:
        return {"mse": self.mse, "r2_adj": self.r2_adj,
                "n_samples": self.n_samples, "n_features": self.n_features}


@dataclass
class ModelSelectionReport:
    evaluated: list[tuple[RegressorSpec, MetricReport]]
    winner: RegressorSpec
    target_month: str
    task: str

    def to_dict(self) -> dict:
        return {
            "target_month": self.target_month,
            "task": self.task,
            "winner": self.winner.to_dict(),
            "evaluated": [
                {"spec": spec.to_dict(), "metrics": metrics.to_dict()}
                for spec, metrics in self.evaluated
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSelectionReport":
        return cls(
            evaluated=[(RegressorSpec.from_dict(e["spec"]),
                        MetricReport(**e["metrics"]))
                       for e in d["evaluated"]],
            winner=RegressorSpec.from_dict(d["winner"]),
            target_month=d["target_month"],
            task=d["task"],
        )


def make_windows(target_month: str, n_windows: int = 2,
                 data_start: str | None = None) -> list[BacktestWindow]:
    """Backtest windows with the newest test month = target_month - 1."""
    if n_windows < 1:
        raise ValueError("n_windows must be >= 1")
    if data_start is not None and months.month_diff(target_month, data_start) < n_windows + 1:
        raise MissingPrerequisiteError(
            f"insufficient history: target {target_month} needs at least "
            f"{n_windows + 1} months after {data_start}")
    windows = []
    for i in range(n_windows, 0, -1):
        test = months.add_months(target_month, -i)
        windows.append(BacktestWindow(months.add_months(test, -1), test))
    return windows


def mse(truth, pred) -> float:
    truth = np.asarray(truth, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if truth.shape != pred.shape or truth.size == 0:
        raise ValueError("length mismatch or empty input")
    return float(np.mean((truth - pred) ** 2))


def r2_adjusted(truth, pred, k_features: int) -> float:
    truth = np.asarray(truth, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if truth.shape != pred.shape or truth.size == 0:
        raise ValueError("length mismatch or empty input")
    n = truth.size
    if n <= k_features + 1:
        raise ValueError(f"need N > K+1 samples (N={n}, K={k_features})")
    ss_tot = float(np.sum((truth - truth.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("zero-variance truth")
    ss_res = float(np.sum((truth - pred) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k_features - 1)


def _training_data(store: TimeSeriesStore, facility_id: str, task: str,
                   train_end: str):
    """Feature matrix / target vector for all complete days through train_end."""
    end = months.month_end(train_end)
    if task == "occupancy":
        start = _earliest_covered_date(store, facility_id)
        rows = features.build_occupancy_rows(store, facility_id, start, end)
        rows = [r for r in rows if r.target_occupancy is not None]
        schema = features.OCCUPANCY_SCHEMA
    else:
        start = _earliest_covered_date(store, facility_id) + timedelta(
            days=features.TREND_WINDOW_DAYS)
        rows = features.build_demand_rows(store, facility_id, start, end,
                                          occupancy_source="actual")
        schema = features.DEMAND_SCHEMA
    X = features.matrix(rows)
    y = features.targets(rows)
    first = rows[0].date.isoformat() if rows else end.isoformat()
    return X, y, schema, (first, end.isoformat())


def _earliest_covered_date(store: TimeSeriesStore, facility_id: str):
    """First date with calendar, swipe, weather and complete meter coverage."""
    cal_dates = store.calendar_dates(facility_id)
    if not cal_dates:
        raise MissingPrerequisiteError("no calendar data")
    return cal_dates[0]


def _score_window(store: TimeSeriesStore, facility_id: str, task: str,
                  window: BacktestWindow, model: TrainedModel) -> MetricReport:
    test_start = months.month_start(window.test_month)
    test_end = months.month_end(window.test_month)
    if task == "occupancy":
        rows = features.build_occupancy_rows(store, facility_id, test_start, test_end)
        truth = features.targets(rows)
        pred = regress.predict(model, features.matrix(rows))
        window_mse = mse(truth, pred)
        k = len(features.OCCUPANCY_SCHEMA)
    else:
        rows = features.build_demand_rows(store, facility_id, test_start, test_end,
                                          occupancy_source="actual")
        truth = features.targets(rows)
        pred = regress.predict(model, features.matrix(rows))
        invoice = store.invoice(facility_id, window.test_month)
        if invoice is None:
            raise MissingPrerequisiteError(
                f"no invoice for {facility_id} {window.test_month}")
        # predicted daily units aggregate to a monthly total compared
        # with the invoice, as a relative squared error
        window_mse = ((float(pred.sum()) - invoice.total_kwh) / invoice.total_kwh) ** 2
        k = len(features.DEMAND_SCHEMA)
    r2 = r2_adjusted(truth, pred, k)
    return MetricReport(window_mse, r2, truth.size, k)


def select_model(store: TimeSeriesStore, facility_id: str, target_month: str,
                 task: str, n_windows: int = 2,
                 grids: dict | None = None) -> tuple[ModelSelectionReport, TrainedModel]:
    """Evaluate every grid spec over the backtest windows and refit the winner.

    Returns the report plus the winning model retrained on all data through
    target_month - 1.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    windows = make_windows(target_month, n_windows)

    specs = []
    for algorithm in regress.ALGORITHMS:
        specs.extend(regress.grid(algorithm, grids))

    per_window_data = []
    for window in windows:
        X, y, schema, train_range = _training_data(store, facility_id, task,
                                                   window.train_end)
        per_window_data.append((window, X, y, schema, train_range))

    evaluated = []
    for spec in specs:
        window_metrics = []
        for window, X, y, schema, train_range in per_window_data:
            model = regress.fit(spec, X, y, schema, train_range)
            window_metrics.append(_score_window(store, facility_id, task,
                                                window, model))
        avg = MetricReport(
            mse=float(np.mean([m.mse for m in window_metrics])),
            r2_adj=float(np.mean([m.r2_adj for m in window_metrics])),
            n_samples=sum(m.n_samples for m in window_metrics),
            n_features=window_metrics[0].n_features,
        )
        evaluated.append((spec, avg))

    def sort_key(item):
        spec, metrics = item
        return (metrics.mse, -metrics.r2_adj,
                regress.ALGORITHMS.index(spec.algorithm))

    winner_spec, _ = min(evaluated, key=sort_key)
    report = ModelSelectionReport(evaluated, winner_spec, target_month, task)

    final_end = months.add_months(target_month, -1)
    X, y, schema, train_range = _training_data(store, facility_id, task, final_end)
    winner_model = regress.fit(winner_spec, X, y, schema, train_range)
    return report, winner_model
