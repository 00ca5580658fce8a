"""Unified per-facility repository for meter, invoice, swipe, weather and calendar data.

Ingestion is file based (CSV, schemas below); all records are upserted keyed on
(facility, timestamp/date/month) so re-ingesting a file is idempotent. The store
optionally persists to a data directory with one CSV per facility and dataset
kind; files are rewritten atomically and deterministically (sorted keys) so two
stores with equal content are byte-identical on disk.

CSV schemas (UTF-8, header row, ISO-8601 dates):
    meter.csv:    facility_id,timestamp,kwh[,quality]
    invoice.csv:  facility_id,month,total_kwh,green_kwh_billed,green_rate,conventional_rate
    swipe.csv:    facility_id,date,employee_swipes,visitor_count
    weather.csv:  facility_id,date,avg_temp,avg_precip,avg_humidity,avg_pressure
    calendar.csv: facility_id,date,is_holiday,event_count,lockdown_flag
"""

import csv
import io
import json
import logging
import os
import threading
from dataclasses import dataclass, field, asdict
from datetime import date, datetime, timedelta
from typing import Callable, Iterable

from . import months
from .errors import NotFoundError, SchemaError

logger = logging.getLogger(__name__)

QUALITY_OBSERVED = "observed"
QUALITY_IMPUTED = "imputed"

DATASET_KINDS = ("meter", "invoice", "swipe", "weather", "calendar")

STORE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class MeterReading:
    facility_id: str
    timestamp: datetime
    kwh: float
    quality: str = QUALITY_OBSERVED


@dataclass(frozen=True)
class InvoiceRecord:
    facility_id: str
    month: str
    total_kwh: float
    green_kwh_billed: float
    green_rate: float
    conventional_rate: float


@dataclass(frozen=True)
class SwipeRecord:
    facility_id: str
    date: date
    employee_swipes: int
    visitor_count: int


@dataclass(frozen=True)
class WeatherRecord:
    facility_id: str
    date: date
    avg_temp: float
    avg_precip: float
    avg_humidity: float
    avg_pressure: float


@dataclass(frozen=True)
class CalendarRecord:
    facility_id: str
    date: date
    is_holiday: bool
    event_count: int
    lockdown_flag: bool


@dataclass
class FacilityConfig:
    facility_id: str
    name: str = ""
    retention_months: int = 24
    imputation_mse_threshold: float = 0.01
    emission_factor: float = 0.82  # kgCO2e per kWh, configurable per facility
    timezone: str = "Asia/Kolkata"

    def __post_init__(self):
        if self.retention_months < 3:
            raise SchemaError("retention_months must be >= 3")
        if not 0 < self.imputation_mse_threshold < 1:
            raise SchemaError("imputation_mse_threshold must be in (0, 1)")
        if self.emission_factor <= 0:
            raise SchemaError("emission_factor must be > 0")


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    reasons: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_timestamp(s: str) -> datetime:
    ts = datetime.fromisoformat(s.strip())
    if ts.tzinfo is not None:
        raise ValueError("timestamps must be naive facility-local time")
    if ts.minute or ts.second or ts.microsecond:
        raise ValueError("timestamps must be on the hour")
    return ts


def _parse_date(s: str) -> date:
    return date.fromisoformat(s.strip())


class TimeSeriesStore:
    """In-memory store with optional on-disk persistence.

    Writes are serialized per facility via a lock; reads see consistent
    snapshots (record objects are immutable and containers are replaced,
    not mutated, during flushes).
    """

    def __init__(self, data_dir: str | None = None):
        self.data_dir = data_dir
        self._configs: dict[str, FacilityConfig] = {}
        self._meter: dict[str, dict[datetime, MeterReading]] = {}
        self._invoice: dict[str, dict[str, InvoiceRecord]] = {}
        self._swipe: dict[str, dict[date, SwipeRecord]] = {}
        self._weather: dict[str, dict[date, WeatherRecord]] = {}
        self._calendar: dict[str, dict[date, CalendarRecord]] = {}
        self._bundles: dict[str, dict[str, list[dict]]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._observer: Callable[[str, object], None] | None = None
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)
            self._load()

    # -- facility management ------------------------------------------------

    def add_facility(self, config: FacilityConfig) -> None:
        self._configs[config.facility_id] = config
        self._locks.setdefault(config.facility_id, threading.Lock())
        for table in (self._meter, self._invoice, self._swipe,
                      self._weather, self._calendar, self._bundles):
            table.setdefault(config.facility_id, {})
        self._flush_configs()

    def facilities(self) -> list[FacilityConfig]:
        return sorted(self._configs.values(), key=lambda c: c.facility_id)

    def config(self, facility_id: str) -> FacilityConfig:
        self._check_facility(facility_id)
        return self._configs[facility_id]

    def lock(self, facility_id: str) -> threading.Lock:
        self._check_facility(facility_id)
        return self._locks[facility_id]

    def _check_facility(self, facility_id: str) -> None:
        if facility_id not in self._configs:
            raise NotFoundError(f"unknown facility {facility_id!r}")

    # -- access instrumentation ---------------------------------------------

    def set_access_observer(self, fn: Callable[[str, object], None] | None) -> None:
        """Register a callback invoked as fn(kind, key_date) on every record read.

        Used by tests to assert that training never touches data beyond its
        window and that demand inference never reads swipe data.
        """
        self._observer = fn

    def _observe(self, kind: str, key) -> None:
        if self._observer is not None:
            self._observer(kind, key)

    # -- ingestion ----------------------------------------------------------

    def ingest(self, facility_id: str, dataset_kind: str, file) -> IngestReport:
        self._check_facility(facility_id)
        if dataset_kind not in DATASET_KINDS:
            raise SchemaError(f"unknown dataset kind {dataset_kind!r}")
        if isinstance(file, (bytes, bytearray)):
            text = file.decode("utf-8")
        elif isinstance(file, str):
            text = file
        else:
            raw = file.read()
            text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

        parser, required = _PARSERS[dataset_kind]
        reader = csv.DictReader(io.StringIO(text))
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{dataset_kind} file missing columns: {', '.join(missing)}")

        report = IngestReport()
        staged: dict = {}
        with self._locks[facility_id]:
            for lineno, row in enumerate(reader, start=2):
                try:
                    key, record = parser(row)
                except (ValueError, KeyError) as exc:
                    report.rejected += 1
                    report.reasons.append(f"line {lineno}: {exc}")
                    continue
                if record.facility_id != facility_id:
                    report.rejected += 1
                    report.reasons.append(
                        f"line {lineno}: facility_id mismatch "
                        f"({record.facility_id!r} != {facility_id!r})")
                    continue
                if key in staged:
                    report.rejected += 1
                    report.reasons.append(f"line {lineno}: duplicate key {key}")
                    continue
                staged[key] = record
            # all-or-nothing per row set: valid rows land, invalid never do
            table = self._table(dataset_kind)[facility_id]
            table.update(staged)
            report.accepted = len(staged)
            self._flush_kind(facility_id, dataset_kind)
        return report

    def _table(self, kind: str) -> dict:
        return {"meter": self._meter, "invoice": self._invoice,
                "swipe": self._swipe, "weather": self._weather,
                "calendar": self._calendar}[kind]

    # -- meter queries ------------------------------------------------------

    def upsert_readings(self, facility_id: str, readings: Iterable[MeterReading]) -> None:
        self._check_facility(facility_id)
        with self._locks[facility_id]:
            table = self._meter[facility_id]
            for r in readings:
                if r.kwh < 0:
                    raise SchemaError("negative kwh")
                table[r.timestamp] = r
            self._flush_kind(facility_id, "meter")

    def meter_readings(self, facility_id: str, start: datetime | None = None,
                       end: datetime | None = None) -> list[MeterReading]:
        """Readings sorted by timestamp, inclusive bounds."""
        self._check_facility(facility_id)
        out = []
        for ts in sorted(self._meter[facility_id]):
            if start is not None and ts < start:
                continue
            if end is not None and ts > end:
                continue
            r = self._meter[facility_id][ts]
            self._observe("meter", ts)
            out.append(r)
        return out

    def find_gaps(self, facility_id: str, month: str) -> list[datetime]:
        """Hourly slots of the month with no observed reading, ascending."""
        self._check_facility(facility_id)
        table = self._meter[facility_id]
        gaps = []
        for slot in months.hourly_slots(month):
            rec = table.get(slot)
            if rec is None or rec.quality != QUALITY_OBSERVED:
                gaps.append(slot)
        return gaps

    def daily_kwh(self, facility_id: str, start: date, end: date,
                  require_complete: bool = True) -> dict[date, float]:
        """Daily totals over the inclusive range, any quality.

        With require_complete, days missing any of their 24 hourly readings
        raise NotFoundError listing the offending dates.
        """
        self._check_facility(facility_id)
        table = self._meter[facility_id]
        sums: dict[date, float] = {}
        counts: dict[date, int] = {}
        for d in months.date_range(start, end):
            sums[d] = 0.0
            counts[d] = 0
        t = datetime.combine(start, datetime.min.time())
        end_t = datetime.combine(end, datetime.min.time()) + timedelta(hours=23)
        while t <= end_t:
            rec = table.get(t)
            if rec is not None:
                self._observe("meter", t)
                sums[t.date()] += rec.kwh
                counts[t.date()] += 1
            t += timedelta(hours=1)
        if require_complete:
            bad = [d for d, c in counts.items() if c != 24]
            if bad:
                raise NotFoundError(
                    f"incomplete daily series for {facility_id}: "
                    + ", ".join(d.isoformat() for d in bad[:10]))
        else:
            sums = {d: s for d, s in sums.items() if counts[d] == 24}
        return sums

    def day_qualities(self, facility_id: str, month: str) -> dict[date, str]:
        """Per-day quality: 'observed' if every hour observed, else 'imputed'."""
        self._check_facility(facility_id)
        table = self._meter[facility_id]
        out: dict[date, str] = {}
        for d in months.month_dates(month):
            qualities = []
            for h in range(24):
                rec = table.get(datetime.combine(d, datetime.min.time()) + timedelta(hours=h))
                if rec is not None:
                    qualities.append(rec.quality)
            if len(qualities) == 24:
                out[d] = (QUALITY_OBSERVED if all(q == QUALITY_OBSERVED for q in qualities)
                          else QUALITY_IMPUTED)
        return out

    # -- other queries ------------------------------------------------------

    def invoice(self, facility_id: str, month: str) -> InvoiceRecord | None:
        self._check_facility(facility_id)
        rec = self._invoice[facility_id].get(month)
        if rec is not None:
            self._observe("invoice", month)
        return rec

    def swipe(self, facility_id: str, d: date) -> SwipeRecord | None:
        self._check_facility(facility_id)
        rec = self._swipe[facility_id].get(d)
        if rec is not None:
            self._observe("swipe", d)
        return rec

    def weather(self, facility_id: str, d: date) -> WeatherRecord | None:
        self._check_facility(facility_id)
        rec = self._weather[facility_id].get(d)
        if rec is not None:
            self._observe("weather", d)
        return rec

    def weather_history(self, facility_id: str, before: date) -> list[WeatherRecord]:
        self._check_facility(facility_id)
        out = []
        for d in sorted(self._weather[facility_id]):
            if d < before:
                self._observe("weather", d)
                out.append(self._weather[facility_id][d])
        return out

    def calendar_dates(self, facility_id: str) -> list[date]:
        self._check_facility(facility_id)
        return sorted(self._calendar[facility_id])

    def calendar(self, facility_id: str, d: date) -> CalendarRecord | None:
        self._check_facility(facility_id)
        rec = self._calendar[facility_id].get(d)
        if rec is not None:
            self._observe("calendar", d)
        return rec

    # -- retention ----------------------------------------------------------

    def prune_history(self, facility_id: str, as_of: date) -> int:
        """Remove all records dated before (as_of - retention_months). Returns count."""
        cfg = self.config(facility_id)
        cutoff_month = months.add_months(months.month_of(as_of), -cfg.retention_months)
        cutoff_day = min(as_of.day, months.days_in_month(cutoff_month))
        cutoff_date = months.month_start(cutoff_month) + timedelta(days=cutoff_day - 1)
        removed = 0
        with self._locks[facility_id]:
            meter = self._meter[facility_id]
            for ts in [t for t in meter if t.date() < cutoff_date]:
                del meter[ts]
                removed += 1
            for table in (self._swipe, self._weather, self._calendar):
                sub = table[facility_id]
                for d in [d for d in sub if d < cutoff_date]:
                    del sub[d]
                    removed += 1
            invoices = self._invoice[facility_id]
            for m in [m for m in invoices if months.month_end(m) < cutoff_date]:
                del invoices[m]
                removed += 1
            if removed:
                for kind in DATASET_KINDS:
                    self._flush_kind(facility_id, kind)
        return removed

    # -- forecast bundles ---------------------------------------------------

    def save_bundle(self, facility_id: str, month: str, bundle: dict) -> None:
        self._check_facility(facility_id)
        with self._locks[facility_id]:
            self._bundles[facility_id].setdefault(month, []).append(bundle)
            self._flush_bundles(facility_id)

    def latest_bundle(self, facility_id: str, month: str) -> dict | None:
        self._check_facility(facility_id)
        stored = self._bundles[facility_id].get(month)
        if not stored:
            return None
        return max(stored, key=lambda b: b["generated_at"])

    # -- persistence --------------------------------------------------------

    def _facility_dir(self, facility_id: str) -> str:
        return os.path.join(self.data_dir, facility_id)

    def _atomic_write(self, path: str, text: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)

    def _flush_configs(self) -> None:
        if not self.data_dir:
            return
        payload = {
            "format_version": STORE_FORMAT_VERSION,
            "facilities": [asdict(c) for c in self.facilities()],
        }
        self._atomic_write(os.path.join(self.data_dir, "facilities.json"),
                           json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def _flush_kind(self, facility_id: str, kind: str) -> None:
        if not self.data_dir:
            return
        os.makedirs(self._facility_dir(facility_id), exist_ok=True)
        buf = io.StringIO()
        writer = csv.writer(buf)
        if kind == "meter":
            writer.writerow(["facility_id", "timestamp", "kwh", "quality"])
            for ts in sorted(self._meter[facility_id]):
                r = self._meter[facility_id][ts]
                writer.writerow([r.facility_id, ts.isoformat(), repr(r.kwh), r.quality])
        elif kind == "invoice":
            writer.writerow(["facility_id", "month", "total_kwh", "green_kwh_billed",
                             "green_rate", "conventional_rate"])
            for m in sorted(self._invoice[facility_id]):
                r = self._invoice[facility_id][m]
                writer.writerow([r.facility_id, m, repr(r.total_kwh),
                                 repr(r.green_kwh_billed), repr(r.green_rate),
                                 repr(r.conventional_rate)])
        elif kind == "swipe":
            writer.writerow(["facility_id", "date", "employee_swipes", "visitor_count"])
            for d in sorted(self._swipe[facility_id]):
                r = self._swipe[facility_id][d]
                writer.writerow([r.facility_id, d.isoformat(),
                                 r.employee_swipes, r.visitor_count])
        elif kind == "weather":
            writer.writerow(["facility_id", "date", "avg_temp", "avg_precip",
                             "avg_humidity", "avg_pressure"])
            for d in sorted(self._weather[facility_id]):
                r = self._weather[facility_id][d]
                writer.writerow([r.facility_id, d.isoformat(), repr(r.avg_temp),
                                 repr(r.avg_precip), repr(r.avg_humidity),
                                 repr(r.avg_pressure)])
        elif kind == "calendar":
            writer.writerow(["facility_id", "date", "is_holiday", "event_count",
                             "lockdown_flag"])
            for d in sorted(self._calendar[facility_id]):
                r = self._calendar[facility_id][d]
                writer.writerow([r.facility_id, d.isoformat(),
                                 str(r.is_holiday).lower(), r.event_count,
                                 str(r.lockdown_flag).lower()])
        self._atomic_write(
            os.path.join(self._facility_dir(facility_id), f"{kind}.csv"),
            buf.getvalue())

    def _flush_bundles(self, facility_id: str) -> None:
        if not self.data_dir:
            return
        os.makedirs(self._facility_dir(facility_id), exist_ok=True)
        self._atomic_write(
            os.path.join(self._facility_dir(facility_id), "bundles.json"),
            json.dumps(self._bundles[facility_id], indent=2, sort_keys=True) + "\n")

    def _load(self) -> None:
        cfg_path = os.path.join(self.data_dir, "facilities.json")
        if not os.path.exists(cfg_path):
            return
        with open(cfg_path, encoding="utf-8") as fh:
            payload = json.load(fh)
        for raw in payload.get("facilities", []):
            cfg = FacilityConfig(**raw)
            self._configs[cfg.facility_id] = cfg
            self._locks.setdefault(cfg.facility_id, threading.Lock())
            for table in (self._meter, self._invoice, self._swipe,
                          self._weather, self._calendar, self._bundles):
                table.setdefault(cfg.facility_id, {})
            fdir = self._facility_dir(cfg.facility_id)
            for kind in DATASET_KINDS:
                path = os.path.join(fdir, f"{kind}.csv")
                if os.path.exists(path):
                    with open(path, encoding="utf-8") as fh:
                        self._load_kind(cfg.facility_id, kind, fh.read())
            bpath = os.path.join(fdir, "bundles.json")
            if os.path.exists(bpath):
                with open(bpath, encoding="utf-8") as fh:
                    self._bundles[cfg.facility_id] = json.load(fh)

    def _load_kind(self, facility_id: str, kind: str, text: str) -> None:
        parser, _ = _PARSERS[kind]
        table = self._table(kind)[facility_id]
        for row in csv.DictReader(io.StringIO(text)):
            key, record = parser(row)
            table[key] = record


# -- row parsers (raise ValueError with a human-readable reason) -------------

def _parse_meter(row: dict) -> tuple[datetime, MeterReading]:
    ts = _parse_timestamp(row["timestamp"])
    kwh = float(row["kwh"])
    if kwh < 0:
        raise ValueError("negative kwh")
    quality = (row.get("quality") or QUALITY_OBSERVED).strip()
    if quality not in (QUALITY_OBSERVED, QUALITY_IMPUTED):
        raise ValueError(f"invalid quality {quality!r}")
    return ts, MeterReading(row["facility_id"].strip(), ts, kwh, quality)


def _parse_invoice(row: dict) -> tuple[str, InvoiceRecord]:
    month = row["month"].strip()
    months.parse_month(month)
    total = float(row["total_kwh"])
    green = float(row["green_kwh_billed"])
    green_rate = float(row["green_rate"])
    conv_rate = float(row["conventional_rate"])
    if total < 0 or green < 0:
        raise ValueError("negative kwh")
    if green_rate <= 0 or conv_rate <= 0:
        raise ValueError("rates must be > 0")
    return month, InvoiceRecord(row["facility_id"].strip(), month, total, green,
                                green_rate, conv_rate)


def _parse_swipe(row: dict) -> tuple[date, SwipeRecord]:
    d = _parse_date(row["date"])
    swipes = int(row["employee_swipes"])
    visitors = int(row["visitor_count"])
    if swipes < 0 or visitors < 0:
        raise ValueError("negative count")
    return d, SwipeRecord(row["facility_id"].strip(), d, swipes, visitors)


def _parse_weather(row: dict) -> tuple[date, WeatherRecord]:
    d = _parse_date(row["date"])
    humidity = float(row["avg_humidity"])
    if not 0 <= humidity <= 100:
        raise ValueError("humidity out of [0, 100]")
    return d, WeatherRecord(row["facility_id"].strip(), d, float(row["avg_temp"]),
                            float(row["avg_precip"]), humidity,
                            float(row["avg_pressure"]))


def _parse_calendar(row: dict) -> tuple[date, CalendarRecord]:
    d = _parse_date(row["date"])
    events = int(row["event_count"])
    if events < 0:
        raise ValueError("negative count")
    return d, CalendarRecord(row["facility_id"].strip(), d,
                             _parse_bool(row["is_holiday"]), events,
                             _parse_bool(row["lockdown_flag"]))


_PARSERS = {
    "meter": (_parse_meter, ["facility_id", "timestamp", "kwh"]),
    "invoice": (_parse_invoice, ["facility_id", "month", "total_kwh",
                                 "green_kwh_billed", "green_rate",
                                 "conventional_rate"]),
    "swipe": (_parse_swipe, ["facility_id", "date", "employee_swipes",
                             "visitor_count"]),
    "weather": (_parse_weather, ["facility_id", "date", "avg_temp", "avg_precip",
                                 "avg_humidity", "avg_pressure"]),
    "calendar": (_parse_calendar, ["facility_id", "date", "is_holiday",
                                   "event_count", "lockdown_flag"]),
}
