import json

import pytest
from click.testing import CliRunner

from greengrid import regress
from greengrid.cli import main
from greengrid.datastore import TimeSeriesStore

from conftest import populate_synthetic_facility


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def data_dir(tmp_path):
    path = str(tmp_path / "data")
    store = TimeSeriesStore(path)
    populate_synthetic_facility(store, "fac1", "2019-01", 8, seed=6)
    return path


@pytest.fixture()
def fast_grids(monkeypatch, small_grids):
    monkeypatch.setattr(regress, "DEFAULT_GRIDS", small_grids)


class TestBasics:
    def test_add_facility_and_list_roundtrip(self, runner, tmp_path):
        path = str(tmp_path / "data")
        result = runner.invoke(main, ["--data-dir", path, "add-facility",
                                      "plant7", "--retention-months", "12"])
        assert result.exit_code == 0
        store = TimeSeriesStore(path)
        assert store.config("plant7").retention_months == 12

    def test_ingest_file(self, runner, data_dir, tmp_path):
        csv_path = tmp_path / "meter.csv"
        csv_path.write_text("facility_id,timestamp,kwh\n"
                            "fac1,2019-09-01T00:00:00,10\n"
                            "fac1,2019-09-01T00:00:00,-5\n")
        result = runner.invoke(main, ["--data-dir", data_dir, "--json",
                                      "ingest", "fac1", "meter",
                                      str(csv_path)])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["accepted"] == 1
        assert report["rejected"] == 1

    def test_ingest_unknown_facility_exit_1(self, runner, data_dir, tmp_path):
        csv_path = tmp_path / "meter.csv"
        csv_path.write_text("facility_id,timestamp,kwh\n")
        result = runner.invoke(main, ["--data-dir", data_dir, "ingest",
                                      "ghost", "meter", str(csv_path)])
        assert result.exit_code == 1
        assert "error:" in result.stderr

    def test_impute_without_invoice_exit_1(self, runner, data_dir):
        result = runner.invoke(main, ["--data-dir", data_dir, "impute",
                                      "fac1", "2030-01"])
        assert result.exit_code == 1


class TestRetrainAndForecast:
    def test_retrain_prints_sorted_table(self, runner, data_dir, fast_grids):
        result = runner.invoke(main, ["--data-dir", data_dir, "retrain",
                                      "fac1", "2019-08", "--task", "demand"])
        assert result.exit_code == 0, result.output
        lines = result.stdout.splitlines()
        assert lines[0].startswith("== demand models for 2019-08")
        header = lines[1].split()
        assert header[:2] == ["Algorithm", "Parameter"]
        mses = [float(line.split()[-2]) for line in lines[2:] if line.strip()]
        assert len(mses) == 3
        assert mses == sorted(mses)

    def test_forecast_requires_retrain(self, runner, data_dir):
        result = runner.invoke(main, ["--data-dir", data_dir, "forecast",
                                      "fac1", "2019-08"])
        assert result.exit_code == 1
        assert "retrain" in result.stderr

    def test_forecast_horizon_13_usage_error(self, runner, data_dir):
        result = runner.invoke(main, ["--data-dir", data_dir, "forecast",
                                      "fac1", "2019-08", "--horizon", "13"])
        assert result.exit_code == 2

    def test_full_flow_json_equivalence(self, runner, data_dir, fast_grids):
        retrain = runner.invoke(main, ["--data-dir", data_dir, "--json",
                                       "retrain", "fac1", "2019-08"])
        assert retrain.exit_code == 0, retrain.output
        reports = json.loads(retrain.stdout)
        assert set(reports) == {"occupancy", "demand"}

        fc = runner.invoke(main, ["--data-dir", data_dir, "--json",
                                  "forecast", "fac1", "2019-08"])
        assert fc.exit_code == 0, fc.output
        bundles = json.loads(fc.stdout)
        assert len(bundles) == 1
        assert bundles[0]["month"] == "2019-08"

        csv_out = runner.invoke(main, ["--data-dir", data_dir, "forecast",
                                       "fac1", "2019-08", "--out", "csv"])
        assert csv_out.stdout.splitlines()[0] == "date,occupancy,kwh"

        whatif = runner.invoke(main, [
            "--data-dir", data_dir, "--json", "whatif", "fac1",
            "--month", "2019-08", "--green-rate", "5", "--conv-rate", "8",
            "--grid", "0:200000:50000"])
        assert whatif.exit_code == 0, whatif.output
        payload = json.loads(whatif.stdout)
        assert payload["consumption_kwh"] == pytest.approx(
            bundles[0]["monthly_kwh"])
        assert len(payload["points"]) == 5

    def test_whatif_bad_grid_exit_2(self, runner, data_dir):
        result = runner.invoke(main, ["--data-dir", data_dir, "whatif", "fac1",
                                      "--month", "2019-08", "--green-rate",
                                      "5", "--conv-rate", "8", "--grid",
                                      "nope"])
        assert result.exit_code == 2


class TestOffsetCommand:
    def write_instance(self, tmp_path, body):
        path = tmp_path / "instance.json"
        path.write_text(json.dumps(body))
        return str(path)

    def test_solve_from_file(self, runner, tmp_path):
        path = self.write_instance(tmp_path, {
            "mode": "max_offset", "budget": 100,
            "projects": [{"name": "wind", "unit_cost": 10},
                         {"name": "solar", "unit_cost": 7}]})
        result = runner.invoke(main, ["--json", "offset", "--instance", path])
        assert result.exit_code == 0
        plan = json.loads(result.stdout)
        assert plan["total_offset"] == 14
        assert plan["allocations"] == {"wind": 0, "solar": 14}

    def test_mode_override(self, runner, tmp_path):
        path = self.write_instance(tmp_path, {
            "mode": "max_offset", "budget": 100, "target_offset": 5,
            "projects": [{"name": "wind", "unit_cost": 10}]})
        result = runner.invoke(main, ["--json", "offset", "--instance", path,
                                      "--mode", "min"])
        assert json.loads(result.stdout)["total_cost"] == 50

    def test_infeasible_exit_1(self, runner, tmp_path):
        path = self.write_instance(tmp_path, {
            "mode": "max_offset", "budget": 100,
            "projects": [{"name": "a", "unit_cost": 60, "min_share": 0.5},
                         {"name": "b", "unit_cost": 70, "min_share": 0.5}]})
        result = runner.invoke(main, ["offset", "--instance", path])
        assert result.exit_code == 1
        assert "infeasible" in result.stderr

    def test_invalid_json_exit_1(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        result = runner.invoke(main, ["offset", "--instance", str(path)])
        assert result.exit_code == 1


class TestKpiReport:
    def test_table_and_json_agree(self, runner, data_dir):
        table = runner.invoke(main, ["--data-dir", data_dir, "report", "kpi",
                                     "fac1", "--from", "2019-01", "--to",
                                     "2019-03"])
        assert table.exit_code == 0
        assert table.stdout.splitlines()[0].startswith("Period")
        assert "summary" in table.stdout

        as_json = runner.invoke(main, ["--data-dir", data_dir, "--json",
                                       "report", "kpi", "fac1", "--from",
                                       "2019-01", "--to", "2019-03"])
        payload = json.loads(as_json.stdout)
        assert len(payload["rows"]) == 3
        assert payload["summary"]["gp_utilization_pct"] == pytest.approx(80.0)

    def test_unknown_facility_exit_1(self, runner, data_dir):
        result = runner.invoke(main, ["--data-dir", data_dir, "report", "kpi",
                                      "ghost", "--from", "2019-01", "--to",
                                      "2019-02"])
        assert result.exit_code == 1
