"""Invoice-anchored gap filling for hourly meter data.

Gaps are seeded from historic bucket means, then corrected by gradient
descent on the relative monthly squared error

    e = ((S - T) / T)^2

where S is the month's total consumption (observed + imputed) and T the
invoice total. The gradient with respect to every imputed value x_j is the
same, 2(S - T)/T^2, so with step size eta = T^2 / (2k) each iteration moves
the k free values by -(S - T)/k (clamped at zero), which distributes the
residual exactly in one step when no clamping occurs and converges
monotonically otherwise.
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from . import months
from .datastore import MeterReading, TimeSeriesStore, QUALITY_IMPUTED, QUALITY_OBSERVED
from .errors import ConvergenceError, MissingPrerequisiteError

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 10_000


@dataclass
class ImputationResult:
    facility_id: str
    month: str
    filled: list[tuple[datetime, float]]
    iterations: int
    final_monthly_mse: float
    mse_history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "facility_id": self.facility_id,
            "month": self.month,
            "filled": [(ts.isoformat(), kwh) for ts, kwh in self.filled],
            "iterations": self.iterations,
            "final_monthly_mse": self.final_monthly_mse,
        }


def seed_estimates(store: TimeSeriesStore, facility_id: str,
                   gaps: list[datetime]) -> dict[datetime, float]:
    """Initial estimate per gap from historic bucket means.

    Fallback ladder: (day-of-week, month-of-year, hour) -> (day-of-week, hour)
    -> (hour) -> global mean. Only observed readings seed buckets.
    """
    readings = [r for r in store.meter_readings(facility_id)
                if r.quality == QUALITY_OBSERVED]
    if not readings:
        raise MissingPrerequisiteError("no seed basis")

    full: dict[tuple, list[float]] = {}
    dow_hour: dict[tuple, list[float]] = {}
    hour_only: dict[int, list[float]] = {}
    total = 0.0
    for r in readings:
        ts = r.timestamp
        full.setdefault((ts.weekday(), ts.month, ts.hour), []).append(r.kwh)
        dow_hour.setdefault((ts.weekday(), ts.hour), []).append(r.kwh)
        hour_only.setdefault(ts.hour, []).append(r.kwh)
        total += r.kwh
    global_mean = total / len(readings)

    def mean(vals: list[float]) -> float:
        return sum(vals) / len(vals)

    seeds = {}
    for ts in gaps:
        bucket = full.get((ts.weekday(), ts.month, ts.hour))
        if bucket is None:
            bucket = dow_hour.get((ts.weekday(), ts.hour))
        if bucket is None:
            bucket = hour_only.get(ts.hour)
        seeds[ts] = mean(bucket) if bucket is not None else global_mean
    return seeds


def monthly_mse(predicted_monthly: list[float], invoice_monthly: list[float]) -> float:
    """Mean over months of squared relative error ((S_i - T_i) / T_i)^2."""
    if len(predicted_monthly) != len(invoice_monthly):
        raise ValueError("length mismatch")
    if not predicted_monthly:
        raise ValueError("empty input")
    for t in invoice_monthly:
        if t <= 0:
            raise ValueError("invoice values must be > 0")
    return sum(((s - t) / t) ** 2
               for s, t in zip(predicted_monthly, invoice_monthly)) / len(predicted_monthly)


def impute_month(store: TimeSeriesStore, facility_id: str, month: str,
                 threshold: float | None = None,
                 max_iterations: int = DEFAULT_MAX_ITERATIONS) -> ImputationResult:
    """Fill the month's gaps so the monthly error falls below threshold.

    Observed readings are never modified; imputed values are clamped at zero.
    Converged values are written back to the store with quality='imputed'.
    """
    cfg = store.config(facility_id)
    if threshold is None:
        threshold = cfg.imputation_mse_threshold

    invoice = store.invoice(facility_id, month)
    if invoice is None:
        raise MissingPrerequisiteError(
            f"no invoice for {facility_id} {month}")
    target = invoice.total_kwh

    gaps = store.find_gaps(facility_id, month)
    start = datetime.combine(months.month_start(month), datetime.min.time())
    end = datetime.combine(months.month_end(month), datetime.min.time()) + timedelta(hours=23)
    observed_sum = sum(r.kwh for r in store.meter_readings(facility_id, start, end)
                       if r.quality == QUALITY_OBSERVED)

    if not gaps:
        e = ((observed_sum - target) / target) ** 2
        if e >= threshold:
            raise ConvergenceError(
                f"month fully observed but e={e:.6g} exceeds threshold", e)
        return ImputationResult(facility_id, month, [], 0, e, [e])

    values = seed_estimates(store, facility_id, gaps)
    order = sorted(values)
    x = [values[ts] for ts in order]
    k = len(x)

    def error() -> float:
        s = observed_sum + sum(x)
        return ((s - target) / target) ** 2

    e = error()
    history = [e]
    iterations = 0
    # always take at least one corrective step so the residual is actually
    # absorbed (the closed-form distribution), even when the seeds already
    # sit below the configured threshold
    while iterations < max_iterations and \
            (e >= threshold or (iterations == 0 and e > 0)):
        s = observed_sum + sum(x)
        step = (s - target) / k  # eta * de/dx_j with eta = T^2 / (2k)
        new_x = [max(0.0, v - step) for v in x]
        if new_x == x:
            if e < threshold:
                break
            raise ConvergenceError(
                f"imputation stalled at e={e:.6g} (all values clamped)", e)
        x = new_x
        iterations += 1
        e = error()
        if e > history[-1] + 1e-15:
            raise ConvergenceError(
                f"monthly error increased at iteration {iterations}", e)
        history.append(e)

    if e >= threshold:
        raise ConvergenceError(
            f"no convergence after {max_iterations} iterations, e={e:.6g}", e)

    filled = list(zip(order, x))
    store.upsert_readings(facility_id, [
        MeterReading(facility_id, ts, kwh, QUALITY_IMPUTED)
        for ts, kwh in filled
    ])
    return ImputationResult(facility_id, month, filled, iterations, e, history)
