"""CSV writers for trajectories, ledgers, and step distributions."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .reverse import step_distribution


def _num(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


class CsvSink:
    """Row writer that formats floats with ``repr`` for byte-stable output."""

    def __init__(self, path, header):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(header)

    def row(self, *values):
        self._w.writerow([_num(v) for v in values])

    def rows(self, rows):
        for r in rows:
            self.row(*r)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


GAP_HEADER = ["replica", "t", "index", "gap"]
POINT_HEADER = ["replica", "t", "point_index", "position", "multiplicity"]
TREE_HEADER = ["t", "point_id", "parent_id", "position_unrescaled"]
WEIGHT_HEADER = ["replica", "t", "index", "weight"]
LEDGER_HEADER = ["replica", "t", "total_weight", "M_num", "M_den", "sum_sq_num", "sum_sq_den"]
STEP_HEADER = ["replica", "t", "x", "cumulative_mass"]


def write_gaps(sink: CsvSink, replica: int, t: int, gaps):
    for i, g in enumerate(gaps):
        sink.row(replica, t, i, g)


def write_ledger(sink: CsvSink, replica: int, ledger):
    for r in ledger.rows:
        sink.row(replica, r.t, r.total_weight, r.M.numerator, r.M.denominator,
                 r.sum_sq.numerator, r.sum_sq.denominator)


def write_weights(sink: CsvSink, replica: int, eta):
    for i, w in enumerate(eta.weights):
        sink.row(replica, eta.t, eta.offset + i, int(w))


def step_rows(eta):
    """``(x, cumulative_mass)`` at every jump of the step distribution of ``eta``."""
    F = step_distribution(eta)
    return list(zip(F.support.tolist(), (np.cumsum(F.weights) * 0.375**F.t).tolist()))


def write_step_distribution(sink: CsvSink, replica: int, eta):
    for x, c in step_rows(eta):
        sink.row(replica, eta.t, x, c)


def tree_rows(trajectory):
    """Genealogy rows from a run with ``record_points`` and ``record_merges``.

    ``point_id`` numbers points across all times; ``parent_id`` is the point
    at ``t + 1`` the point merges into (``-1`` at the final time).
    """
    ids = []
    next_id = 0
    for pos in trajectory.positions:
        ids.append(np.arange(next_id, next_id + pos.size))
        next_id += pos.size
    rows = []
    T = len(trajectory.positions) - 1
    for t, pos in enumerate(trajectory.positions):
        if t < T:
            parents = ids[t + 1][trajectory.merges[t].survivor_map]
        else:
            parents = np.full(pos.size, -1)
        for i in range(pos.size):
            rows.append((t, int(ids[t][i]), int(parents[i]), float(pos[i])))
    return rows
