"""HTTP/JSON service exposing ingestion, imputation, retraining, forecasting,
what-if analysis, offset planning and KPI reporting.

All endpoints are thin adapters over the library operations; retraining runs
as an asynchronous job because full-grid evaluation takes minutes. State is an
embedded on-disk store (see datastore/registry module docs for the layout);
everything survives restart byte-identically.

Error mapping: 400 schema violations, 404 unknown facility, 409 missing
prerequisites (no invoice, no model), 422 infeasible or non-convergent
optimization (body carries the violated-constraint report).
"""

import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass, field, asdict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import finance, forecast, imputation, modelsel, months, offset
from .datastore import FacilityConfig, TimeSeriesStore
from .errors import (ConvergenceError, DomainError, InfeasibleError,
                     MissingPrerequisiteError, NotFoundError, SchemaError)
from .registry import ModelRegistry, ModelRegistryEntry

logger = logging.getLogger(__name__)

ENV_LISTEN = "GREENGRID_LISTEN"
ENV_DATA_DIR = "GREENGRID_DATA_DIR"

JOB_STATES = ("queued", "running", "done", "failed")


@dataclass
class ServiceConfig:
    data_dir: str
    host: str = "127.0.0.1"
    port: int = 8000
    facilities: list = field(default_factory=list)  # FacilityConfig

    @classmethod
    def load(cls, path: str) -> "ServiceConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        cfg = cls(
            data_dir=raw["data_dir"],
            host=raw.get("listen", {}).get("host", "127.0.0.1"),
            port=raw.get("listen", {}).get("port", 8000),
            facilities=[FacilityConfig(**f) for f in raw.get("facilities", [])],
        )
        return cfg.with_env_overrides()

    def with_env_overrides(self) -> "ServiceConfig":
        listen = os.environ.get(ENV_LISTEN)
        if listen:
            host, _, port = listen.rpartition(":")
            self.host = host or self.host
            self.port = int(port)
        data_dir = os.environ.get(ENV_DATA_DIR)
        if data_dir:
            self.data_dir = data_dir
        return self


@dataclass
class JobRecord:
    job_id: str
    kind: str
    state: str = "queued"
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


class JobTable:
    def __init__(self, path: str | None):
        self.path = path
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                for raw in json.load(fh):
                    self._jobs[raw["job_id"]] = JobRecord(**raw)

    def create(self, kind: str) -> JobRecord:
        job = JobRecord(job_id=uuid.uuid4().hex, kind=kind)
        with self._lock:
            self._jobs[job.job_id] = job
            self._persist()
        return job

    def update(self, job_id: str, state: str, detail: str = "") -> None:
        with self._lock:
            job = self._jobs[job_id]
            if job.state in ("done", "failed"):
                raise RuntimeError("terminal job states are immutable")
            job.state = state
            if detail:
                job.detail = detail
            self._persist()

    def get(self, job_id: str) -> JobRecord | None:
        with self._lock:
            return self._jobs.get(job_id)

    def _persist(self) -> None:
        if not self.path:
            return
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump([j.to_dict() for j in self._jobs.values()], fh,
                      sort_keys=True)
        os.replace(tmp, self.path)


def create_app(config: ServiceConfig, retrain_in_thread: bool = True) -> FastAPI:
    """Build the application around an on-disk store rooted at config.data_dir.

    retrain_in_thread=False runs retrain jobs synchronously inside the request
    (used by tests to avoid polling).
    """
    app = FastAPI(title="greengrid", version="0.1.0")
    store = TimeSeriesStore(config.data_dir)
    for fc in config.facilities:
        if fc.facility_id not in {c.facility_id for c in store.facilities()}:
            store.add_facility(fc)
    registry = ModelRegistry(config.data_dir)
    jobs = JobTable(os.path.join(config.data_dir, "jobs.json"))

    app.state.store = store
    app.state.registry = registry
    app.state.jobs = jobs

    @app.exception_handler(DomainError)
    async def domain_error_handler(request: Request, exc: DomainError):
        if isinstance(exc, SchemaError):
            status = 400
        elif isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, MissingPrerequisiteError):
            status = 409
        elif isinstance(exc, (InfeasibleError, ConvergenceError)):
            status = 422
        else:
            status = 400
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, InfeasibleError):
            body["violations"] = exc.violations
        return JSONResponse(status_code=status, content=body)

    @app.get("/facilities")
    def list_facilities():
        return [asdict(c) for c in store.facilities()]

    @app.post("/facilities/{facility_id}/data/{kind}")
    async def ingest(facility_id: str, kind: str, request: Request):
        payload = await request.body()
        report = store.ingest(facility_id, kind, payload)
        return report.to_dict()

    @app.post("/facilities/{facility_id}/impute")
    def impute(facility_id: str, month: str):
        months.parse_month(month)
        with store.lock(facility_id):
            result = imputation.impute_month(store, facility_id, month)
        return result.to_dict()

    def _run_retrain(job_id: str, facility_id: str, month: str, tasks):
        try:
            jobs.update(job_id, "running")
            for task in tasks:
                with store.lock(facility_id):
                    report, model = modelsel.select_model(store, facility_id,
                                                          month, task)
                registry.activate(ModelRegistryEntry(
                    facility_id=facility_id, task=task, month=month,
                    model=model, report=report))
            jobs.update(job_id, "done",
                        f"activated {', '.join(tasks)} for {month}")
        except Exception as exc:  # job failure is data, not a crash
            logger.exception("retrain job %s failed", job_id)
            jobs.update(job_id, "failed", str(exc))

    @app.post("/facilities/{facility_id}/retrain")
    def retrain(facility_id: str, month: str, task: str | None = None):
        store.config(facility_id)  # 404 on unknown facility
        months.parse_month(month)
        tasks = [task] if task else list(modelsel.TASKS)
        for t in tasks:
            if t not in modelsel.TASKS:
                raise SchemaError(f"unknown task {t!r}")
        job = jobs.create("retrain")
        if retrain_in_thread:
            threading.Thread(target=_run_retrain,
                             args=(job.job_id, facility_id, month, tasks),
                             daemon=True).start()
        else:
            _run_retrain(job.job_id, facility_id, month, tasks)
        return jobs.get(job.job_id).to_dict()

    def _forecast_bundle(facility_id: str, month: str):
        pair = registry.active_pair(facility_id, month)
        if pair is None:
            raise MissingPrerequisiteError(
                f"no active model pair for {facility_id} {month}; retrain first")
        occ, dem = pair
        bundle = forecast.forecast_month(store, facility_id, month,
                                         occ.model, dem.model)
        store.save_bundle(facility_id, month, bundle.to_dict())
        return bundle

    @app.get("/facilities/{facility_id}/forecast")
    def get_forecast(facility_id: str, month: str):
        store.config(facility_id)
        months.parse_month(month)
        return _forecast_bundle(facility_id, month).to_dict()

    @app.get("/facilities/{facility_id}/history")
    def history(facility_id: str, month: str):
        store.config(facility_id)
        months.parse_month(month)
        return forecast.historic_comparison(store, facility_id, month)

    @app.post("/facilities/{facility_id}/whatif")
    async def whatif(facility_id: str, request: Request):
        store.config(facility_id)
        body = await request.json()
        try:
            rates = body["rates"]
            green = rates["green_rate"]
            conv = rates["conventional_rate"]
            ask_grid = body["ask_grid"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"whatif body missing field: {exc}")
        consumption = body.get("forecast_kwh")
        if consumption is None:
            month = body.get("month")
            if month is None:
                raise SchemaError("whatif needs forecast_kwh or month")
            bundle = store.latest_bundle(facility_id, month)
            if bundle is None:
                raise MissingPrerequisiteError(
                    f"no stored forecast for {facility_id} {month}")
            consumption = bundle["monthly_kwh"]
        curve = finance.whatif_curve(consumption, green, conv, ask_grid)
        return {
            "consumption_kwh": consumption,
            "points": [{"ask": ask, **result.to_dict()}
                       for ask, result in curve],
        }

    @app.post("/facilities/{facility_id}/offset/recommend")
    async def offset_recommend(facility_id: str, request: Request):
        cfg = store.config(facility_id)
        body = await request.json()
        horizon = body.pop("horizon", None)
        liability = None
        if horizon is not None:
            start_month = horizon["start_month"]
            n_months = horizon["n_months"]
            planned = {m: float(v)
                       for m, v in horizon.get("planned_green_kwh", {}).items()}
            bundles = []
            for i in range(n_months):
                month = months.add_months(start_month, i)
                bundle = store.latest_bundle(facility_id, month)
                if bundle is None:
                    raise MissingPrerequisiteError(
                        f"no stored forecast for {facility_id} {month}")
                bundles.append(bundle)
                planned.setdefault(month, 0.0)
            liability = offset.emissions_liability(bundles, planned,
                                                   cfg.emission_factor)
            if body.get("mode") == offset.MODE_MIN_COST and \
                    body.get("target_offset") is None:
                body["target_offset"] = int(round(liability))
        instance = offset.OffsetInstance.from_dict(body)
        plan = offset.solve(instance)
        if not plan.feasible:
            return JSONResponse(status_code=422, content={
                "error": "InfeasibleError",
                "plan": plan.to_dict(),
                "violations": plan.violations,
            })
        result = plan.to_dict()
        if liability is not None:
            result["emissions_liability_mtco2e"] = liability
        return result

    @app.get("/facilities/{facility_id}/kpi")
    def kpi(facility_id: str, request: Request):
        cfg = store.config(facility_id)
        params = request.query_params
        start = params.get("from")
        end = params.get("to")
        if not start or not end:
            raise SchemaError("kpi needs from= and to= months")
        months.parse_month(start)
        months.parse_month(end)
        rows = []
        month = start
        while months.month_diff(month, end) <= 0:
            invoice = store.invoice(facility_id, month)
            if invoice is not None:
                rows.append(finance.kpi_from_invoice(
                    facility_id, month, invoice.total_kwh,
                    invoice.green_kwh_billed, invoice.green_rate,
                    invoice.conventional_rate, cfg.emission_factor))
            month = months.add_months(month, 1)
        if not rows:
            return {"rows": [], "summary": None}
        summary = finance.kpi_summary(rows)
        return {"rows": [r.to_dict() for r in rows],
                "summary": summary.to_dict()}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job {job_id!r}")
        return job.to_dict()

    ui_dir = os.environ.get("GREENGRID_UI_DIR",
                            os.path.join(os.path.dirname(__file__), "..", "..",
                                         "frontend", "dist"))
    if os.path.isdir(ui_dir):
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn
    uvicorn.run(create_app(config), host=config.host, port=config.port)
