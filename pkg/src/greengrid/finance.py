"""Green-power billing simulation, what-if curves and KPI reporting.

Billing rule: green power is ordered in advance ("ask") and billed in full
even if underused; consumption beyond the ask is served and billed from
conventional energy. So

    cost = ask * green_rate + max(0, consumption - ask) * conventional_rate

All arithmetic stays in the numeric types supplied: pass integer kWh and
integer minor-unit rates to get exact integer costs.
"""

import logging
from dataclasses import dataclass

from .errors import SchemaError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProcurementScenario:
    ask_kwh: float
    consumption_kwh: float
    green_rate: float
    conventional_rate: float

    def __post_init__(self):
        if self.ask_kwh < 0 or self.consumption_kwh < 0:
            raise SchemaError("ask and consumption must be >= 0")
        if self.green_rate <= 0 or self.conventional_rate <= 0:
            raise SchemaError("rates must be > 0")


@dataclass
class InvoiceResult:
    total_cost: float
    green_billed_kwh: float
    conventional_billed_kwh: float
    green_consumed_kwh: float
    gp_utilization: float
    wasted_green_kwh: float

    def to_dict(self) -> dict:
        return {
            "total_cost": self.total_cost,
            "green_billed_kwh": self.green_billed_kwh,
            "conventional_billed_kwh": self.conventional_billed_kwh,
            "green_consumed_kwh": self.green_consumed_kwh,
            "gp_utilization": self.gp_utilization,
            "wasted_green_kwh": self.wasted_green_kwh,
        }


@dataclass
class KpiRow:
    facility_id: str
    period: str
    gp_utilization_pct: float
    co2_reduction_mtco2e: float
    savings_per_unit: float

    def to_dict(self) -> dict:
        return {
            "facility_id": self.facility_id,
            "period": self.period,
            "gp_utilization_pct": self.gp_utilization_pct,
            "co2_reduction_mtco2e": self.co2_reduction_mtco2e,
            "savings_per_unit": self.savings_per_unit,
        }


def simulate_invoice(s: ProcurementScenario) -> InvoiceResult:
    overrun = max(0, s.consumption_kwh - s.ask_kwh)
    green_consumed = min(s.ask_kwh, s.consumption_kwh)
    if s.consumption_kwh > 0:
        utilization = green_consumed / s.consumption_kwh
    else:
        utilization = 1.0  # degenerate 0/0: nothing consumed, nothing missed
    return InvoiceResult(
        total_cost=s.ask_kwh * s.green_rate + overrun * s.conventional_rate,
        green_billed_kwh=s.ask_kwh,
        conventional_billed_kwh=overrun,
        green_consumed_kwh=green_consumed,
        gp_utilization=utilization,
        wasted_green_kwh=max(0, s.ask_kwh - s.consumption_kwh),
    )


def whatif_curve(consumption_forecast_kwh: float, green_rate: float,
                 conventional_rate: float,
                 ask_grid: list[float]) -> list[tuple[float, InvoiceResult]]:
    """Simulated invoice per candidate ask. Cost is piecewise linear in the ask
    with its single breakpoint at ask = consumption."""
    if not ask_grid:
        raise SchemaError("ask_grid must be non-empty")
    if any(b < a for a, b in zip(ask_grid, ask_grid[1:])):
        raise SchemaError("ask_grid must be ascending")
    return [(ask, simulate_invoice(ProcurementScenario(
        ask, consumption_forecast_kwh, green_rate, conventional_rate)))
        for ask in ask_grid]


def whatif_csv(curve: list[tuple[float, InvoiceResult]]) -> str:
    lines = ["ask,total_cost,gp_utilization"]
    for ask, result in curve:
        lines.append(f"{ask},{result.total_cost},{result.gp_utilization}")
    return "\n".join(lines) + "\n"


def recommend_ask(forecast_kwh: float, green_rate: float,
                  conventional_rate: float,
                  risk_margin: float = 0.0) -> dict:
    """Pre-fill for the what-if UI: order the (margin-shaded) forecast when
    green power is the cheaper source, otherwise order none."""
    if forecast_kwh < 0:
        raise SchemaError("forecast_kwh must be >= 0")
    if not 0 <= risk_margin < 1:
        raise SchemaError("risk_margin must be in [0, 1)")
    if green_rate < conventional_rate:
        ask = forecast_kwh * (1 - risk_margin)
        rationale = ("green power cheaper than conventional: ask the forecast "
                     f"shaded by the {risk_margin:.0%} risk margin")
    else:
        ask = 0.0
        rationale = ("green power not cheaper than conventional: any ask only "
                     "raises cost, recommend zero")
    return {"ask_kwh": ask, "rationale": rationale}


def kpi_summary(rows: list[KpiRow]) -> KpiRow:
    """Aggregate row: utilizations and savings averaged, CO2 reduction summed."""
    if not rows:
        raise SchemaError("kpi_summary needs at least one row")
    n = len(rows)
    return KpiRow(
        facility_id="summary",
        period=rows[0].period,
        gp_utilization_pct=sum(r.gp_utilization_pct for r in rows) / n,
        co2_reduction_mtco2e=sum(r.co2_reduction_mtco2e for r in rows),
        savings_per_unit=sum(r.savings_per_unit for r in rows) / n,
    )


def kpi_from_invoice(facility_id: str, month: str, total_kwh: float,
                     green_kwh_billed: float, green_rate: float,
                     conventional_rate: float, emission_factor: float) -> KpiRow:
    """Derive the monthly KPI row from an invoice.

    savings_per_unit = conventional_rate - blended effective rate, where the
    blended rate is total cost over consumption; co2 reduction converts the
    green-served kWh via the facility emission factor (kg -> metric tonnes).
    """
    green_consumed = min(green_kwh_billed, total_kwh)
    result = simulate_invoice(ProcurementScenario(
        green_kwh_billed, total_kwh, green_rate, conventional_rate))
    if total_kwh > 0:
        blended = result.total_cost / total_kwh
        savings = conventional_rate - blended
        utilization_pct = 100.0 * result.gp_utilization
    else:
        savings = 0.0
        utilization_pct = 100.0
    return KpiRow(
        facility_id=facility_id,
        period=month,
        gp_utilization_pct=utilization_pct,
        co2_reduction_mtco2e=green_consumed * emission_factor / 1000.0,
        savings_per_unit=savings,
    )
