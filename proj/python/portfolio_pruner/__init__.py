"""Python bindings for the patent portfolio pruner."""

import json
from pathlib import Path

from . import _core
from ._core import (
    PpError,
    cagr,
    dcg,
    demand_snr,
    inventor_score,
    list_runs,
    ma_score,
    ndcg,
    partnership_score,
    rejection_score,
    remaining_life_years,
    supply_chain_score,
    train,
)

__all__ = [
    "PpError",
    "Run",
    "cagr",
    "dcg",
    "demand_snr",
    "inventor_score",
    "list_runs",
    "ma_score",
    "ndcg",
    "partnership_score",
    "rejection_score",
    "remaining_life_years",
    "supply_chain_score",
    "train",
]


class Run:
    """A pipeline run stored under ``runs_root/<run_id>``."""

    def __init__(self, handle):
        self._h = handle

    @classmethod
    def create(cls, runs_root, config, base_dir="."):
        if isinstance(config, (str, Path)):
            path = Path(config)
            config = json.loads(path.read_text())
            base_dir = path.parent
        return cls(_core.create_run(str(runs_root), json.dumps(config), str(base_dir)))

    @classmethod
    def open(cls, runs_root, run_id):
        return cls(_core.open_run(str(runs_root), run_id))

    @property
    def id(self):
        return self._h.id

    @property
    def dir(self):
        return Path(self._h.dir)

    @property
    def phase(self):
        return self._h.phase

    def info(self):
        return json.loads(self._h.info())

    def advance(self, auto_approve=False):
        return self._h.advance(auto_approve)

    def select_categories(self, keys):
        self._h.select_categories(list(keys))

    def categories(self, profile=None):
        return json.loads(self._h.categories(profile))

    def ranking(self, profile=None):
        return json.loads(self._h.ranking(profile))

    def matches(self):
        return json.loads(self._h.matches())

    def reports(self):
        return json.loads(self._h.reports())

    def gate(self, gate):
        return json.loads(self._h.gate(gate))

    def review(self, gate, submission=None):
        self._h.review(gate, json.dumps(submission or {}))

    def reopen(self, gate):
        self._h.reopen(gate)

    def export_labels(self):
        return json.loads(self._h.export_labels())
