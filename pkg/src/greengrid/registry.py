"""Model registry: persisted trained models plus the selection reports that
justified them, with atomic per-(facility, task, month) activation."""

import json
import logging
import os
import threading
from dataclasses import dataclass

from . import regress
from .modelsel import ModelSelectionReport
from .regress import TrainedModel

logger = logging.getLogger(__name__)

STATUS_ACTIVE = "active"
STATUS_SUPERSEDED = "superseded"


@dataclass
class ModelRegistryEntry:
    facility_id: str
    task: str
    month: str
    model: TrainedModel
    report: ModelSelectionReport
    status: str = STATUS_ACTIVE

    def to_dict(self) -> dict:
        return {
            "facility_id": self.facility_id,
            "task": self.task,
            "month": self.month,
            "status": self.status,
            "model": regress.model_to_dict(self.model),
            "report": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelRegistryEntry":
        return cls(
            facility_id=d["facility_id"],
            task=d["task"],
            month=d["month"],
            model=regress.model_from_dict(d["model"]),
            report=ModelSelectionReport.from_dict(d["report"]),
            status=d["status"],
        )


class ModelRegistry:
    """At most one active entry per (facility, task, month); activation swaps
    the in-memory pointer under a lock so readers never observe a partial
    (occupancy, demand) pair mid-update."""

    def __init__(self, data_dir: str | None = None):
        self.data_dir = data_dir
        self._active: dict[tuple[str, str, str], ModelRegistryEntry] = {}
        self._history: list[ModelRegistryEntry] = []
        self._lock = threading.Lock()
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)
            self._load()

    def activate(self, entry: ModelRegistryEntry) -> None:
        key = (entry.facility_id, entry.task, entry.month)
        with self._lock:
            previous = self._active.get(key)
            if previous is not None:
                previous.status = STATUS_SUPERSEDED
                self._history.append(previous)
            entry.status = STATUS_ACTIVE
            self._active[key] = entry
            self._persist(entry)

    def active(self, facility_id: str, task: str,
               month: str) -> ModelRegistryEntry | None:
        with self._lock:
            return self._active.get((facility_id, task, month))

    def active_pair(self, facility_id: str, month: str):
        """Consistent (occupancy, demand) snapshot for one month, or None."""
        with self._lock:
            occ = self._active.get((facility_id, "occupancy", month))
            dem = self._active.get((facility_id, "demand", month))
        if occ is None or dem is None:
            return None
        return occ, dem

    def entries(self, facility_id: str) -> list[ModelRegistryEntry]:
        with self._lock:
            return sorted(
                (e for e in self._active.values()
                 if e.facility_id == facility_id),
                key=lambda e: (e.month, e.task))

    def _path(self, entry: ModelRegistryEntry) -> str:
        fdir = os.path.join(self.data_dir, entry.facility_id, "models")
        os.makedirs(fdir, exist_ok=True)
        return os.path.join(fdir, f"{entry.task}_{entry.month}.json")

    def _persist(self, entry: ModelRegistryEntry) -> None:
        if not self.data_dir:
            return
        path = self._path(entry)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(entry.to_dict(), fh, sort_keys=True)
        os.replace(tmp, path)

    def _load(self) -> None:
        for facility_id in sorted(os.listdir(self.data_dir)):
            mdir = os.path.join(self.data_dir, facility_id, "models")
            if not os.path.isdir(mdir):
                continue
            for name in sorted(os.listdir(mdir)):
                if not name.endswith(".json"):
                    continue
                with open(os.path.join(mdir, name), encoding="utf-8") as fh:
                    entry = ModelRegistryEntry.from_dict(json.load(fh))
                self._active[(entry.facility_id, entry.task, entry.month)] = entry
