import math
from datetime import date, datetime, timedelta

import numpy as np
import pytest

from greengrid import months
from greengrid.datastore import FacilityConfig, TimeSeriesStore

GREEN_RATE = 5.0
CONV_RATE = 8.0

# fixed hourly load profile, sums to 1
_HOUR_WEIGHTS = np.array([0.5, 0.4, 0.4, 0.4, 0.4, 0.5, 0.8, 1.2, 1.6, 1.8,
                          1.9, 1.9, 1.8, 1.8, 1.8, 1.7, 1.6, 1.4, 1.1, 0.9,
                          0.7, 0.6, 0.5, 0.5])
_HOUR_WEIGHTS = _HOUR_WEIGHTS / _HOUR_WEIGHTS.sum()


def synth_temperature(d: date, rng) -> float:
    doy = d.timetuple().tm_yday
    return 25.0 + 6.0 * math.sin(2 * math.pi * doy / 365.0) + rng.normal(0, 0.8)


def synth_occupancy(d: date, is_holiday: bool, rng) -> int:
    if is_holiday or d.weekday() >= 5:
        base = 150.0
    else:
        base = 800.0 + 60.0 * math.sin(2 * math.pi * d.month / 12.0)
    return max(0, int(round(base + rng.normal(0, 15))))


def synth_daily_kwh(occupancy: int, temp: float, rng, noise: float = 25.0) -> float:
    return 1500.0 + 2.2 * occupancy + 12.0 * temp + rng.normal(0, noise)


def populate_synthetic_facility(store: TimeSeriesStore, facility_id: str = "fac1",
                                start_month: str = "2019-01", n_months: int = 24,
                                seed: int = 0,
                                constant: bool = False) -> dict:
    """Fill a store with a synthetic facility; returns per-month kwh totals.

    With constant=True every day is identical (no weekends, no noise), which
    makes tree-model forecasts exactly flat.
    """
    rng = np.random.default_rng(seed)
    store.add_facility(FacilityConfig(facility_id=facility_id, name=facility_id))

    meter_rows = ["facility_id,timestamp,kwh"]
    swipe_rows = ["facility_id,date,employee_swipes,visitor_count"]
    weather_rows = ["facility_id,date,avg_temp,avg_precip,avg_humidity,avg_pressure"]
    calendar_rows = ["facility_id,date,is_holiday,event_count,lockdown_flag"]
    invoice_rows = ["facility_id,month,total_kwh,green_kwh_billed,green_rate,"
                    "conventional_rate"]

    monthly_totals = {}
    for i in range(n_months):
        month = months.add_months(start_month, i)
        total = 0.0
        for d in months.month_dates(month):
            if constant:
                holiday = False
                occ = 700
                temp, precip, humidity, pressure = 25.0, 1.0, 60.0, 1010.0
                daily = 3000.0
            else:
                holiday = (d.day == 26 and d.month == 1)
                occ = synth_occupancy(d, holiday, rng)
                temp = synth_temperature(d, rng)
                precip = max(0.0, rng.normal(2.0, 2.0))
                humidity = min(100.0, max(0.0, rng.normal(60.0, 10.0)))
                pressure = rng.normal(1010.0, 4.0)
                daily = synth_daily_kwh(occ, temp, rng)
            swipes = int(round(occ * 0.9))
            visitors = occ - swipes
            swipe_rows.append(f"{facility_id},{d.isoformat()},{swipes},{visitors}")
            weather_rows.append(
                f"{facility_id},{d.isoformat()},{temp},{precip},{humidity},{pressure}")
            calendar_rows.append(
                f"{facility_id},{d.isoformat()},{str(holiday).lower()},0,false")
            day_total = 0.0
            for h in range(24):
                kwh = daily * float(_HOUR_WEIGHTS[h])
                day_total += kwh
                ts = datetime.combine(d, datetime.min.time()) + timedelta(hours=h)
                meter_rows.append(f"{facility_id},{ts.isoformat()},{kwh!r}")
            total += day_total
        monthly_totals[month] = total
        invoice_rows.append(
            f"{facility_id},{month},{total!r},{0.8 * total!r},"
            f"{GREEN_RATE},{CONV_RATE}")

    store.ingest(facility_id, "meter", "\n".join(meter_rows))
    store.ingest(facility_id, "swipe", "\n".join(swipe_rows))
    store.ingest(facility_id, "weather", "\n".join(weather_rows))
    store.ingest(facility_id, "calendar", "\n".join(calendar_rows))
    store.ingest(facility_id, "invoice", "\n".join(invoice_rows))
    return monthly_totals


@pytest.fixture
def store():
    return TimeSeriesStore()


@pytest.fixture(scope="session")
def small_grids():
    """Reduced grids for fast pipeline tests (full grids reserved for acceptance)."""
    return {
        "random_forest": {"max_features": [0.6], "n_estimators": [10],
                          "random_state": [42]},
        "boosted_trees": {"learning_rate": [0.1], "n_estimators": [25],
                          "random_state": [42]},
        "hist_gbm": {"learning_rate": [0.1], "n_estimators": [10],
                     "random_state": [42]},
    }
