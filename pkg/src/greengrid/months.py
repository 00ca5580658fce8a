"""Helpers for year-month strings ("YYYY-MM") and hourly/daily grids."""

import calendar
import re
from datetime import date, datetime, timedelta

from .errors import SchemaError

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def parse_month(month: str) -> tuple[int, int]:
    m = _MONTH_RE.match(month)
    if not m:
        raise SchemaError(f"invalid month {month!r}, expected YYYY-MM")
    year, mon = int(m.group(1)), int(m.group(2))
    if not 1 <= mon <= 12:
        raise SchemaError(f"invalid month {month!r}")
    return year, mon


def format_month(year: int, mon: int) -> str:
    return f"{year:04d}-{mon:02d}"


def month_of(d: date) -> str:
    return format_month(d.year, d.month)


def add_months(month: str, n: int) -> str:
    year, mon = parse_month(month)
    total = year * 12 + (mon - 1) + n
    return format_month(total // 12, total % 12 + 1)


def month_diff(a: str, b: str) -> int:
    """Number of months from b to a (a - b)."""
    ya, ma = parse_month(a)
    yb, mb = parse_month(b)
    return (ya * 12 + ma) - (yb * 12 + mb)


def days_in_month(month: str) -> int:
    year, mon = parse_month(month)
    return calendar.monthrange(year, mon)[1]


def month_start(month: str) -> date:
    year, mon = parse_month(month)
    return date(year, mon, 1)


def month_end(month: str) -> date:
    year, mon = parse_month(month)
    return date(year, mon, days_in_month(month))


def month_dates(month: str) -> list[date]:
    start = month_start(month)
    return [start + timedelta(days=i) for i in range(days_in_month(month))]


def hourly_slots(month: str) -> list[datetime]:
    """Complete hourly grid of a month in facility-local civil time."""
    start = datetime.combine(month_start(month), datetime.min.time())
    return [start + timedelta(hours=h) for h in range(24 * days_in_month(month))]


def date_range(start: date, end: date) -> list[date]:
    """Inclusive day range."""
    if end < start:
        return []
    return [start + timedelta(days=i) for i in range((end - start).days + 1)]
