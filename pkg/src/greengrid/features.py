"""Daily feature assembly for the occupancy and demand models.

Column orders are fixed and positional; models carry the schema and check it
at predict time.
"""

import logging
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from . import months
from .datastore import TimeSeriesStore
from .errors import MissingPrerequisiteError

logger = logging.getLogger(__name__)

OCCUPANCY_SCHEMA = ["day_of_week", "month_of_year", "is_holiday", "event_count",
                    "visitor_count", "lockdown_flag"]
DEMAND_SCHEMA = ["occupancy", "day_of_week", "is_holiday", "lockdown_flag",
                 "avg_temp", "avg_precip", "avg_humidity", "avg_pressure",
                 "recent_trend"]

TREND_WINDOW_DAYS = 7


@dataclass
class OccupancyFeatureRow:
    date: date
    day_of_week: int
    month_of_year: int
    is_holiday: bool
    event_count: int
    visitor_count: int
    lockdown_flag: bool
    target_occupancy: int | None = None

    def vector(self) -> list[float]:
        return [float(self.day_of_week), float(self.month_of_year),
                float(self.is_holiday), float(self.event_count),
                float(self.visitor_count), float(self.lockdown_flag)]


@dataclass
class DemandFeatureRow:
    date: date
    occupancy: int
    day_of_week: int
    is_holiday: bool
    lockdown_flag: bool
    avg_temp: float
    avg_precip: float
    avg_humidity: float
    avg_pressure: float
    recent_trend: float
    target_kwh: float | None = None

    def vector(self) -> list[float]:
        return [float(self.occupancy), float(self.day_of_week),
                float(self.is_holiday), float(self.lockdown_flag),
                self.avg_temp, self.avg_precip, self.avg_humidity,
                self.avg_pressure, self.recent_trend]


def build_occupancy_rows(store: TimeSeriesStore, facility_id: str,
                         start: date, end: date) -> list[OccupancyFeatureRow]:
    """One row per date; target = employee_swipes + visitor_count when historical.

    Dates without a swipe record (future/inference) carry no target and a
    visitor count of zero. Missing calendar records are an error.
    """
    missing = [d for d in months.date_range(start, end)
               if store.calendar(facility_id, d) is None]
    if missing:
        raise MissingPrerequisiteError(
            "calendar coverage gap: " + ", ".join(d.isoformat() for d in missing[:10]))

    rows = []
    for d in months.date_range(start, end):
        cal = store.calendar(facility_id, d)
        swipe = store.swipe(facility_id, d)
        rows.append(OccupancyFeatureRow(
            date=d,
            day_of_week=d.weekday(),
            month_of_year=d.month,
            is_holiday=cal.is_holiday,
            event_count=cal.event_count,
            visitor_count=swipe.visitor_count if swipe else 0,
            lockdown_flag=cal.lockdown_flag,
            target_occupancy=(swipe.employee_swipes + swipe.visitor_count
                              if swipe else None),
        ))
    return rows


def climatology(store: TimeSeriesStore, facility_id: str,
                before: date) -> dict[tuple[int, int], tuple[float, float, float, float]]:
    """Per-(month, day-of-month) mean weather from history strictly before a date."""
    sums: dict[tuple[int, int], list[float]] = {}
    counts: dict[tuple[int, int], int] = {}
    for rec in store.weather_history(facility_id, before):
        key = (rec.date.month, rec.date.day)
        if key not in sums:
            sums[key] = [0.0, 0.0, 0.0, 0.0]
            counts[key] = 0
        sums[key][0] += rec.avg_temp
        sums[key][1] += rec.avg_precip
        sums[key][2] += rec.avg_humidity
        sums[key][3] += rec.avg_pressure
        counts[key] += 1
    return {k: tuple(s / counts[k] for s in v) for k, v in sums.items()}


def build_demand_rows(store: TimeSeriesStore, facility_id: str,
                      start: date, end: date,
                      occupancy_source: str = "actual",
                      occupancy_overrides: dict[date, int] | None = None,
                      frozen_trend_end: date | None = None,
                      with_targets: bool = True) -> list[DemandFeatureRow]:
    """One row per date with weather, calendar, occupancy and the trend feature.

    occupancy_source='actual' reads swipe records (training); 'forecast' takes
    occupancy from occupancy_overrides (inference) and freezes recent_trend at
    the last fully observed 7-day window ending at frozen_trend_end.

    recent_trend(d) = mean daily kWh over [d-7, d-1]; training requires a
    continuous daily series over (start - 7 days, end).
    """
    if occupancy_source not in ("actual", "forecast"):
        raise ValueError(f"invalid occupancy_source {occupancy_source!r}")
    if occupancy_source == "forecast" and occupancy_overrides is None:
        raise MissingPrerequisiteError("forecast occupancy not provided")

    dates = months.date_range(start, end)
    missing_cal = [d for d in dates if store.calendar(facility_id, d) is None]
    if missing_cal:
        raise MissingPrerequisiteError(
            "calendar coverage gap: " + ", ".join(d.isoformat() for d in missing_cal[:10]))

    if occupancy_source == "forecast":
        if frozen_trend_end is None:
            frozen_trend_end = start - timedelta(days=1)
        window = store.daily_kwh(facility_id,
                                 frozen_trend_end - timedelta(days=TREND_WINDOW_DAYS - 1),
                                 frozen_trend_end)
        frozen_trend = sum(window.values()) / TREND_WINDOW_DAYS
        daily = {}
        clim = climatology(store, facility_id, start)
    else:
        daily = store.daily_kwh(facility_id, start - timedelta(days=TREND_WINDOW_DAYS),
                                end)
        frozen_trend = None

    rows = []
    for d in dates:
        cal = store.calendar(facility_id, d)
        wx = store.weather(facility_id, d)
        if wx is None:
            # inference months may lack weather records: fall back to
            # per-(month, day) climatological means from history
            if occupancy_source == "forecast" and (d.month, d.day) in clim:
                temp, precip, humidity, pressure = clim[(d.month, d.day)]
            else:
                raise MissingPrerequisiteError(f"no weather for {d.isoformat()}")
        else:
            temp, precip, humidity, pressure = (wx.avg_temp, wx.avg_precip,
                                                wx.avg_humidity, wx.avg_pressure)

        if occupancy_source == "actual":
            swipe = store.swipe(facility_id, d)
            if swipe is None:
                raise MissingPrerequisiteError(f"no swipe record for {d.isoformat()}")
            occupancy = swipe.employee_swipes + swipe.visitor_count
            trend_days = [daily[d - timedelta(days=i)]
                          for i in range(1, TREND_WINDOW_DAYS + 1)]
            trend = sum(trend_days) / TREND_WINDOW_DAYS
            target = daily[d] if with_targets else None
        else:
            if d not in occupancy_overrides:
                raise MissingPrerequisiteError(f"no forecast occupancy for {d.isoformat()}")
            occupancy = occupancy_overrides[d]
            trend = frozen_trend
            target = None

        rows.append(DemandFeatureRow(
            date=d,
            occupancy=occupancy,
            day_of_week=d.weekday(),
            is_holiday=cal.is_holiday,
            lockdown_flag=cal.lockdown_flag,
            avg_temp=temp,
            avg_precip=precip,
            avg_humidity=humidity,
            avg_pressure=pressure,
            recent_trend=trend,
            target_kwh=target,
        ))
    return rows


def matrix(rows) -> np.ndarray:
    return np.array([r.vector() for r in rows], dtype=np.float64)


def targets(rows) -> np.ndarray:
    vals = []
    for r in rows:
        t = r.target_occupancy if isinstance(r, OccupancyFeatureRow) else r.target_kwh
        if t is None:
            raise MissingPrerequisiteError(f"row {r.date} has no target")
        vals.append(float(t))
    return np.array(vals, dtype=np.float64)


def rows_to_csv(rows) -> str:
    """Fixed-column CSV export for offline inspection."""
    if not rows:
        return ""
    schema = (OCCUPANCY_SCHEMA if isinstance(rows[0], OccupancyFeatureRow)
              else DEMAND_SCHEMA)
    lines = ["date," + ",".join(schema) + ",target"]
    for r in rows:
        t = r.target_occupancy if isinstance(r, OccupancyFeatureRow) else r.target_kwh
        vec = ",".join(repr(v) for v in r.vector())
        lines.append(f"{r.date.isoformat()},{vec},{'' if t is None else t}")
    return "\n".join(lines) + "\n"
