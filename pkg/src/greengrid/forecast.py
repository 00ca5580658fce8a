"""Serial occupancy-then-demand forecast pipeline.

The occupancy model predicts first; its rounded non-negative predictions are
the only occupancy input the demand model sees at inference time (demand
inference never reads swipe data). Daily demand predictions are aggregated to
the monthly total carried on the bundle.
"""

import logging
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from . import features, months, regress
from .datastore import TimeSeriesStore
from .regress import TrainedModel

logger = logging.getLogger(__name__)

MAX_HORIZON_MONTHS = 12


@dataclass
class ForecastBundle:
    facility_id: str
    month: str
    daily_occupancy: dict  # date -> count
    daily_kwh: dict  # date -> kWh
    monthly_kwh: float
    models_used: tuple  # (occupancy spec dict, demand spec dict)
    generated_at: str

    def to_dict(self) -> dict:
        return {
            "facility_id": self.facility_id,
            "month": self.month,
            "daily_occupancy": {d.isoformat(): v
                                for d, v in sorted(self.daily_occupancy.items())},
            "daily_kwh": {d.isoformat(): v
                          for d, v in sorted(self.daily_kwh.items())},
            "monthly_kwh": self.monthly_kwh,
            "models_used": list(self.models_used),
            "generated_at": self.generated_at,
        }

    def to_csv(self) -> str:
        lines = ["date,occupancy,kwh"]
        for d in sorted(self.daily_kwh):
            lines.append(f"{d.isoformat()},{self.daily_occupancy[d]},"
                         f"{repr(self.daily_kwh[d])}")
        return "\n".join(lines) + "\n"


def forecast_month(store: TimeSeriesStore, facility_id: str, target_month: str,
                   occupancy_model: TrainedModel, demand_model: TrainedModel,
                   frozen_trend_end=None,
                   generated_at: str | None = None) -> ForecastBundle:
    """Forecast daily occupancy and kWh for one month plus the monthly total."""
    start = months.month_start(target_month)
    end = months.month_end(target_month)

    occ_rows = features.build_occupancy_rows(store, facility_id, start, end)
    occ_pred = regress.predict(occupancy_model, features.matrix(occ_rows))
    occupancy = {row.date: int(max(0, round(float(p))))
                 for row, p in zip(occ_rows, occ_pred)}

    demand_rows = features.build_demand_rows(
        store, facility_id, start, end,
        occupancy_source="forecast",
        occupancy_overrides=occupancy,
        frozen_trend_end=frozen_trend_end)
    kwh_pred = regress.predict(demand_model, features.matrix(demand_rows))
    daily_kwh = {row.date: float(p) for row, p in zip(demand_rows, kwh_pred)}

    if generated_at is None:
        generated_at = datetime.now(timezone.utc).isoformat()
    return ForecastBundle(
        facility_id=facility_id,
        month=target_month,
        daily_occupancy=occupancy,
        daily_kwh=daily_kwh,
        monthly_kwh=float(sum(daily_kwh.values())),
        models_used=(occupancy_model.spec.to_dict(), demand_model.spec.to_dict()),
        generated_at=generated_at,
    )


def forecast_horizon(store: TimeSeriesStore, facility_id: str, start_month: str,
                     n_months: int, occupancy_model: TrainedModel,
                     demand_model: TrainedModel,
                     generated_at: str | None = None) -> list[ForecastBundle]:
    """One bundle per month; all months reuse the start month's models and the
    trend window frozen before start_month."""
    if not 1 <= n_months <= MAX_HORIZON_MONTHS:
        raise ValueError(
            f"n_months must be in [1, {MAX_HORIZON_MONTHS}], got {n_months}")
    frozen_end = months.month_start(start_month) - timedelta(days=1)
    bundles = []
    for i in range(n_months):
        month = months.add_months(start_month, i)
        bundles.append(forecast_month(store, facility_id, month,
                                      occupancy_model, demand_model,
                                      frozen_trend_end=frozen_end,
                                      generated_at=generated_at))
    return bundles


def historic_comparison(store: TimeSeriesStore, facility_id: str,
                        month: str) -> dict:
    """Aligned actual-vs-forecast daily pairs plus monthly totals.

    Absence of either side is reported as null, not zero. Actual days carry
    their quality flag (observed / imputed).
    """
    bundle = store.latest_bundle(facility_id, month)
    forecast_daily = bundle["daily_kwh"] if bundle else {}

    try:
        actual_daily = store.daily_kwh(facility_id, months.month_start(month),
                                       months.month_end(month),
                                       require_complete=False)
    except Exception:
        actual_daily = {}
    qualities = store.day_qualities(facility_id, month)

    days = {}
    for d in months.month_dates(month):
        iso = d.isoformat()
        days[iso] = {
            "actual_kwh": actual_daily.get(d),
            "forecast_kwh": forecast_daily.get(iso),
            "quality": qualities.get(d),
        }
    actual_total = (sum(v for v in actual_daily.values())
                    if len(actual_daily) == months.days_in_month(month) else None)
    return {
        "facility_id": facility_id,
        "month": month,
        "days": days,
        "monthly_actual_kwh": actual_total,
        "monthly_forecast_kwh": bundle["monthly_kwh"] if bundle else None,
        "forecast_generated_at": bundle["generated_at"] if bundle else None,
    }
