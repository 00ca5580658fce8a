import numpy as np

from greengrid import regress
from greengrid.modelsel import (MetricReport, ModelSelectionReport,
                                RegressorSpec)
from greengrid.registry import (STATUS_ACTIVE, STATUS_SUPERSEDED,
                                ModelRegistry, ModelRegistryEntry)


def make_entry(facility_id="f1", task="demand", month="2020-08", seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 10, (20, 2))
    y = rng.uniform(0, 100, 20)
    spec = RegressorSpec.make("boosted_trees", learning_rate=0.1,
                              n_estimators=3, random_state=42)
    model = regress.fit(spec, X, y, ["a", "b"], ("2020-01-01", "2020-07-31"))
    report = ModelSelectionReport(
        evaluated=[(spec, MetricReport(0.01, 0.9, 20, 2))],
        winner=spec, target_month=month, task=task)
    return ModelRegistryEntry(facility_id, task, month, model, report)


class TestActivation:
    def test_single_active_entry(self):
        reg = ModelRegistry()
        entry = make_entry()
        reg.activate(entry)
        assert reg.active("f1", "demand", "2020-08") is entry
        assert entry.status == STATUS_ACTIVE

    def test_activation_supersedes(self):
        reg = ModelRegistry()
        first = make_entry(seed=1)
        second = make_entry(seed=2)
        reg.activate(first)
        reg.activate(second)
        assert first.status == STATUS_SUPERSEDED
        assert reg.active("f1", "demand", "2020-08") is second

    def test_active_pair_requires_both_tasks(self):
        reg = ModelRegistry()
        reg.activate(make_entry(task="demand"))
        assert reg.active_pair("f1", "2020-08") is None
        reg.activate(make_entry(task="occupancy"))
        occ, dem = reg.active_pair("f1", "2020-08")
        assert occ.task == "occupancy" and dem.task == "demand"

    def test_entries_sorted(self):
        reg = ModelRegistry()
        reg.activate(make_entry(task="demand", month="2020-09"))
        reg.activate(make_entry(task="occupancy", month="2020-08"))
        listed = reg.entries("f1")
        assert [(e.month, e.task) for e in listed] == [
            ("2020-08", "occupancy"), ("2020-09", "demand")]


class TestPersistence:
    def test_reload_preserves_predictions(self, tmp_path):
        reg = ModelRegistry(str(tmp_path))
        entry = make_entry(seed=3)
        reg.activate(entry)

        reloaded = ModelRegistry(str(tmp_path))
        back = reloaded.active("f1", "demand", "2020-08")
        assert back is not None
        probes = np.random.default_rng(9).uniform(0, 10, (15, 2))
        assert regress.predict(back.model, probes).tolist() == \
            regress.predict(entry.model, probes).tolist()
        assert back.report.winner == entry.report.winner

    def test_reactivation_overwrites_file(self, tmp_path):
        reg = ModelRegistry(str(tmp_path))
        reg.activate(make_entry(seed=4))
        reg.activate(make_entry(seed=5))
        files = list((tmp_path / "f1" / "models").iterdir())
        assert len(files) == 1  # one file per (task, month), latest wins
