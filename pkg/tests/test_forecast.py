import pytest

from greengrid import features, forecast, modelsel, months, regress
from greengrid.datastore import TimeSeriesStore
from greengrid.forecast import (forecast_horizon, forecast_month,
                                historic_comparison)

from conftest import populate_synthetic_facility


def fit_task_models(store, facility_id, train_end):
    models = {}
    for task, spec in [
        ("occupancy", regress.RegressorSpec.make(
            "random_forest", max_features=0.6, n_estimators=10,
            random_state=42)),
        ("demand", regress.RegressorSpec.make(
            "boosted_trees", learning_rate=0.1, n_estimators=25,
            random_state=42)),
    ]:
        X, y, schema, rng = modelsel._training_data(store, facility_id, task,
                                                    train_end)
        models[task] = regress.fit(spec, X, y, schema, rng)
    return models["occupancy"], models["demand"]


@pytest.fixture(scope="module")
def flat_store():
    store = TimeSeriesStore()
    populate_synthetic_facility(store, "fac1", "2019-01", 12, seed=0,
                                constant=True)
    occ_model, dem_model = fit_task_models(store, "fac1", "2019-10")
    return store, occ_model, dem_model


class TestForecastMonth:
    def test_flat_history_gives_flat_forecast(self, flat_store):
        store, occ_model, dem_model = flat_store
        bundle = forecast_month(store, "fac1", "2019-12", occ_model, dem_model)
        assert set(bundle.daily_occupancy.values()) == {700}
        for v in bundle.daily_kwh.values():
            assert v == pytest.approx(3000.0, rel=1e-9)
        assert bundle.monthly_kwh == pytest.approx(31 * 3000.0, rel=1e-9)

    def test_monthly_total_is_sum_of_days(self, flat_store):
        store, occ_model, dem_model = flat_store
        bundle = forecast_month(store, "fac1", "2019-12", occ_model, dem_model)
        assert bundle.monthly_kwh == sum(bundle.daily_kwh.values())
        assert len(bundle.daily_kwh) == months.days_in_month("2019-12")

    def test_deterministic(self, flat_store):
        store, occ_model, dem_model = flat_store
        a = forecast_month(store, "fac1", "2019-12", occ_model, dem_model,
                           generated_at="t0")
        b = forecast_month(store, "fac1", "2019-12", occ_model, dem_model,
                           generated_at="t0")
        assert a == b

    def test_occupancy_nonnegative_integers(self, flat_store):
        store, occ_model, dem_model = flat_store
        bundle = forecast_month(store, "fac1", "2019-12", occ_model, dem_model)
        for v in bundle.daily_occupancy.values():
            assert isinstance(v, int) and v >= 0

    def test_bundle_dict_and_csv(self, flat_store):
        store, occ_model, dem_model = flat_store
        bundle = forecast_month(store, "fac1", "2019-12", occ_model, dem_model,
                                generated_at="t0")
        d = bundle.to_dict()
        assert d["month"] == "2019-12"
        assert list(d["daily_kwh"]) == sorted(d["daily_kwh"])
        csv_text = bundle.to_csv()
        assert csv_text.splitlines()[0] == "date,occupancy,kwh"
        assert len(csv_text.splitlines()) == 32

    def test_demand_inference_reads_no_swipe_data(self, flat_store):
        # occupancy enters the demand features only through the occupancy
        # model's predictions, never through swipe records
        store, occ_model, dem_model = flat_store
        bundle = forecast_month(store, "fac1", "2019-12", occ_model, dem_model)
        accessed = []
        store.set_access_observer(lambda kind, key: accessed.append(kind))
        try:
            features.build_demand_rows(
                store, "fac1", months.month_start("2019-12"),
                months.month_end("2019-12"), occupancy_source="forecast",
                occupancy_overrides=bundle.daily_occupancy)
        finally:
            store.set_access_observer(None)
        assert accessed
        assert "swipe" not in accessed


class TestForecastHorizon:
    def test_bundles_are_sequential(self, flat_store):
        store, occ_model, dem_model = flat_store
        bundles = forecast_horizon(store, "fac1", "2019-11", 2,
                                   occ_model, dem_model)
        assert [b.month for b in bundles] == ["2019-11", "2019-12"]

    def test_frozen_trend_stops_before_start(self, flat_store):
        store, occ_model, dem_model = flat_store
        bundles = forecast_horizon(store, "fac1", "2019-11", 2,
                                   occ_model, dem_model)
        # with flat history both months come out identical day-for-day values
        assert set(round(v, 6) for v in bundles[0].daily_kwh.values()) == \
            set(round(v, 6) for v in bundles[1].daily_kwh.values())

    @pytest.mark.parametrize("n", [0, 13, -1])
    def test_horizon_bounds(self, flat_store, n):
        store, occ_model, dem_model = flat_store
        with pytest.raises(ValueError):
            forecast_horizon(store, "fac1", "2019-11", n, occ_model, dem_model)

    def test_max_horizon_accepted(self):
        assert forecast.MAX_HORIZON_MONTHS == 12


class TestHistoricComparison:
    def test_actual_and_forecast_aligned(self, flat_store):
        store, occ_model, dem_model = flat_store
        bundle = forecast_month(store, "fac1", "2019-12", occ_model, dem_model,
                                generated_at="t1")
        store.save_bundle("fac1", "2019-12", bundle.to_dict())
        cmp = historic_comparison(store, "fac1", "2019-12")
        assert cmp["monthly_forecast_kwh"] == pytest.approx(bundle.monthly_kwh)
        assert cmp["monthly_actual_kwh"] == pytest.approx(31 * 3000.0)
        day = cmp["days"]["2019-12-15"]
        assert day["actual_kwh"] == pytest.approx(3000.0)
        assert day["forecast_kwh"] == pytest.approx(3000.0, rel=1e-9)
        assert day["quality"] == "observed"

    def test_missing_forecast_is_null(self):
        store = TimeSeriesStore()
        populate_synthetic_facility(store, "facX", "2019-01", 2, seed=3)
        cmp = historic_comparison(store, "facX", "2019-02")
        assert cmp["monthly_forecast_kwh"] is None
        assert all(d["forecast_kwh"] is None for d in cmp["days"].values())
        assert cmp["days"]["2019-02-10"]["actual_kwh"] is not None

    def test_missing_actual_is_null(self, flat_store):
        store, occ_model, dem_model = flat_store
        cmp = historic_comparison(store, "fac1", "2020-03")
        assert cmp["monthly_actual_kwh"] is None
        assert all(d["actual_kwh"] is None for d in cmp["days"].values())
