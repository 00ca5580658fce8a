"""Command-line front door.

Every subcommand is a thin adapter over one library operation: data to stdout,
diagnostics to stderr, exit 0 on success, 1 on domain error, 2 on usage error.
--json emits the same structures the HTTP API returns.
"""

import json
import sys

import click

from . import finance, forecast as forecast_mod, imputation, modelsel, months, offset
from .datastore import FacilityConfig, TimeSeriesStore
from .errors import DomainError, MissingPrerequisiteError
from .registry import ModelRegistry, ModelRegistryEntry
from .service import ServiceConfig


def _open_store(data_dir: str) -> TimeSeriesStore:
    return TimeSeriesStore(data_dir)


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.option("--data-dir", envvar="GREENGRID_DATA_DIR", default="./data",
              show_default=True, help="Store directory.")
@click.option("--json", "as_json", is_flag=True,
              help="Emit machine-readable JSON on stdout.")
@click.pass_context
def main(ctx, data_dir, as_json):
    """Facility energy management: ingest, impute, retrain, forecast,
    what-if procurement analysis and carbon-offset planning."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir
    ctx.obj["json"] = as_json


@main.command("add-facility")
@click.argument("facility")
@click.option("--name", default="")
@click.option("--retention-months", default=24, type=int)
@click.option("--emission-factor", default=0.82, type=float)
@click.pass_context
def add_facility(ctx, facility, name, retention_months, emission_factor):
    """Register a facility in the store."""
    store = _open_store(ctx.obj["data_dir"])
    store.add_facility(FacilityConfig(
        facility_id=facility, name=name or facility,
        retention_months=retention_months, emission_factor=emission_factor))
    click.echo(json.dumps({"facility_id": facility}) if ctx.obj["json"]
               else f"added facility {facility}")


@main.command()
@click.argument("facility")
@click.argument("kind", type=click.Choice(["meter", "invoice", "swipe",
                                           "weather", "calendar"]))
@click.argument("file", type=click.File("rb"))
@click.pass_context
def ingest(ctx, facility, kind, file):
    """Ingest a CSV file into the store."""
    store = _open_store(ctx.obj["data_dir"])
    try:
        report = store.ingest(facility, kind, file)
    except DomainError as exc:
        _fail(exc)
    if ctx.obj["json"]:
        click.echo(json.dumps(report.to_dict()))
    else:
        click.echo(f"accepted {report.accepted}, rejected {report.rejected}")
        for reason in report.reasons:
            click.echo(f"  {reason}", err=True)


@main.command()
@click.argument("facility")
@click.argument("month")
@click.pass_context
def impute(ctx, facility, month):
    """Fill the month's meter gaps against the invoice total."""
    store = _open_store(ctx.obj["data_dir"])
    try:
        months.parse_month(month)
        result = imputation.impute_month(store, facility, month)
    except DomainError as exc:
        _fail(exc)
    if ctx.obj["json"]:
        click.echo(json.dumps(result.to_dict()))
    else:
        click.echo(f"{facility} {month}: filled {len(result.filled)} hours in "
                   f"{result.iterations} iterations, "
                   f"monthly error {result.final_monthly_mse:.3g}")


@main.command()
@click.argument("facility")
@click.argument("month")
@click.option("--task", type=click.Choice(["occupancy", "demand"]),
              multiple=True, help="Default: both tasks.")
@click.pass_context
def retrain(ctx, facility, month, task):
    """Select and activate models for the month by backtesting the full grid.

    Prints every evaluated spec sorted by MSE ascending
    (Algorithm | Parameter | MSE | Adj R2).
    """
    store = _open_store(ctx.obj["data_dir"])
    registry = ModelRegistry(ctx.obj["data_dir"])
    tasks = list(task) or list(modelsel.TASKS)
    reports = {}
    try:
        months.parse_month(month)
        for t in tasks:
            report, model = modelsel.select_model(store, facility, month, t)
            registry.activate(ModelRegistryEntry(
                facility_id=facility, task=t, month=month,
                model=model, report=report))
            reports[t] = report
    except DomainError as exc:
        _fail(exc)
    if ctx.obj["json"]:
        click.echo(json.dumps({t: r.to_dict() for t, r in reports.items()}))
        return
    for t, report in reports.items():
        click.echo(f"== {t} models for {month} "
                   f"(winner: {report.winner.algorithm}) ==")
        click.echo(f"{'Algorithm':<16} {'Parameter':<40} {'MSE':>12} {'Adj R2':>8}")
        for spec, metrics in sorted(report.evaluated,
                                    key=lambda item: item[1].mse):
            params = " ".join(f"{k}={v}" for k, v in spec.params
                              if k != "random_state")
            params += f" random_state={spec.param_dict['random_state']}"
            click.echo(f"{spec.algorithm:<16} {params:<40} "
                       f"{metrics.mse:>12.6g} {metrics.r2_adj:>8.3f}")


@main.command()
@click.argument("facility")
@click.argument("month")
@click.option("--horizon", default=1, type=int,
              help="Number of months to forecast (1-12).")
@click.option("--out", type=click.Choice(["summary", "csv"]), default="summary")
@click.pass_context
def forecast(ctx, facility, month, horizon, out):
    """Forecast daily occupancy and demand starting at MONTH."""
    if not 1 <= horizon <= forecast_mod.MAX_HORIZON_MONTHS:
        raise click.UsageError(
            f"--horizon must be in [1, {forecast_mod.MAX_HORIZON_MONTHS}]")
    store = _open_store(ctx.obj["data_dir"])
    registry = ModelRegistry(ctx.obj["data_dir"])
    try:
        months.parse_month(month)
        pair = registry.active_pair(facility, month)
        if pair is None:
            raise MissingPrerequisiteError(
                f"no active model pair for {facility} {month}; retrain first")
        occ, dem = pair
        bundles = forecast_mod.forecast_horizon(store, facility, month,
                                                horizon, occ.model, dem.model)
        for bundle in bundles:
            store.save_bundle(facility, bundle.month, bundle.to_dict())
    except DomainError as exc:
        _fail(exc)
    if ctx.obj["json"]:
        click.echo(json.dumps([b.to_dict() for b in bundles]))
    elif out == "csv":
        for bundle in bundles:
            click.echo(bundle.to_csv(), nl=False)
    else:
        for bundle in bundles:
            click.echo(f"{facility} {bundle.month}: "
                       f"{bundle.monthly_kwh:.1f} kWh forecast "
                       f"({len(bundle.daily_kwh)} days)")


@main.command()
@click.argument("facility")
@click.option("--month", required=True)
@click.option("--green-rate", required=True, type=float)
@click.option("--conv-rate", required=True, type=float)
@click.option("--grid", "grid_spec", required=True,
              help="Ask grid as start:stop:step (kWh).")
@click.pass_context
def whatif(ctx, facility, month, green_rate, conv_rate, grid_spec):
    """Simulate month-end invoices over a grid of green-power asks."""
    try:
        start, stop, step = (float(x) for x in grid_spec.split(":"))
    except ValueError:
        raise click.UsageError("--grid must be start:stop:step")
    if step <= 0 or stop < start:
        raise click.UsageError("--grid must be ascending with positive step")
    store = _open_store(ctx.obj["data_dir"])
    grid = []
    ask = start
    while ask <= stop + 1e-9:
        grid.append(ask)
        ask += step
    try:
        months.parse_month(month)
        bundle = store.latest_bundle(facility, month)
        if bundle is None:
            raise MissingPrerequisiteError(
                f"no stored forecast for {facility} {month}")
        consumption = bundle["monthly_kwh"]
        curve = finance.whatif_curve(consumption, green_rate, conv_rate, grid)
    except DomainError as exc:
        _fail(exc)
    if ctx.obj["json"]:
        click.echo(json.dumps({
            "consumption_kwh": consumption,
            "points": [{"ask": a, **r.to_dict()} for a, r in curve],
        }))
    else:
        click.echo(finance.whatif_csv(curve), nl=False)


@main.command("offset")
@click.option("--instance", "instance_file", required=True,
              type=click.File("r"), help="OffsetInstance JSON file.")
@click.option("--mode", type=click.Choice(["max", "min"]), default=None,
              help="Override the instance mode.")
@click.pass_context
def offset_cmd(ctx, instance_file, mode):
    """Solve a carbon-offset planning instance exactly."""
    try:
        raw = json.load(instance_file)
        if mode is not None:
            raw["mode"] = (offset.MODE_MAX_OFFSET if mode == "max"
                           else offset.MODE_MIN_COST)
        instance = offset.OffsetInstance.from_dict(raw)
        plan = offset.solve(instance)
    except (DomainError, json.JSONDecodeError) as exc:
        _fail(exc)
    if ctx.obj["json"]:
        click.echo(json.dumps(plan.to_dict()))
        if not plan.feasible:
            sys.exit(1)
        return
    if not plan.feasible:
        click.echo("infeasible:", err=True)
        for v in plan.violations:
            click.echo(f"  {v}", err=True)
        sys.exit(1)
    click.echo(f"total offset: {plan.total_offset} MTCO2e, "
               f"cost: {plan.total_cost}")
    for name, units in plan.allocations.items():
        click.echo(f"  {name}: {units}")


@main.group()
def report():
    """Reporting commands."""


@report.command("kpi")
@click.argument("facility")
@click.option("--from", "start", required=True)
@click.option("--to", "end", required=True)
@click.pass_context
def report_kpi(ctx, facility, start, end):
    """Monthly KPI rows (GP utilization, CO2 reduction, savings per unit)."""
    store = _open_store(ctx.obj["data_dir"])
    try:
        months.parse_month(start)
        months.parse_month(end)
        cfg = store.config(facility)
        rows = []
        month = start
        while months.month_diff(month, end) <= 0:
            invoice = store.invoice(facility, month)
            if invoice is not None:
                rows.append(finance.kpi_from_invoice(
                    facility, month, invoice.total_kwh,
                    invoice.green_kwh_billed, invoice.green_rate,
                    invoice.conventional_rate, cfg.emission_factor))
            month = months.add_months(month, 1)
    except DomainError as exc:
        _fail(exc)
    summary = finance.kpi_summary(rows) if rows else None
    if ctx.obj["json"]:
        click.echo(json.dumps({
            "rows": [r.to_dict() for r in rows],
            "summary": summary.to_dict() if summary else None,
        }))
        return
    click.echo(f"{'Period':<9} {'GP %':>7} {'CO2 MTCO2e':>11} {'Savings/unit':>13}")
    for r in rows:
        click.echo(f"{r.period:<9} {r.gp_utilization_pct:>7.2f} "
                   f"{r.co2_reduction_mtco2e:>11.2f} {r.savings_per_unit:>13.4f}")
    if summary:
        click.echo(f"{'summary':<9} {summary.gp_utilization_pct:>7.2f} "
                   f"{summary.co2_reduction_mtco2e:>11.2f} "
                   f"{summary.savings_per_unit:>13.4f}")


@main.command()
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True), envvar="GREENGRID_CONFIG")
def serve(config_file):
    """Run the HTTP service."""
    from . import service
    service.run(ServiceConfig.load(config_file))


if __name__ == "__main__":
    main()
