import csv

import numpy as np

from clusterflow.export import CsvSink, step_rows, tree_rows
from clusterflow.forward import GapSequence, run_forward
from clusterflow.reverse import WeightSequence
from clusterflow.svg import Panel, render


def test_svg_sidecar_holds_plotted_numbers(tmp_path):
    p = Panel("demo", "x", "y")
    p.add("a", [0, 1, 2], [0.0, 0.5, 1.0], kind="step")
    p.add("b", [0, 2], [1.0, 0.0])
    q = Panel("segments")
    q.add("s", [0, 1, 2, 3], [0, 1, 0, 1], kind="segment", legend=False)
    path = render([p, q], tmp_path / "fig.svg", "title", columns=1)
    text = path.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert text.count("<polyline") == 2 and text.count("<line x1") > 4
    with open(tmp_path / "fig.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["panel", "series", "point", "x", "y"]
    assert len(rows) == 1 + 3 + 2 + 4
    assert rows[2] == ["demo", "a", "1", "1.0", "0.5"]


def test_csv_sink_repr_floats(tmp_path):
    with CsvSink(tmp_path / "a.csv", ["v"]) as s:
        s.row(0.1)
        s.row(np.float64(1 / 3))
        s.row(np.int64(4))
    assert (tmp_path / "a.csv").read_text() == "v\n0.1\n0.3333333333333333\n4\n"


def test_step_rows():
    rows = step_rows(WeightSequence(np.array([1, 2, 1]), 0, 1))
    assert rows == [(0.0, 0.375), (0.75, 1.125), (1.5, 1.5)]


def test_tree_rows_link_to_next_time(rng):
    tr = run_forward(GapSequence(np.ones(16)), 3, "alg1", rng, record_points=True, record_merges=True)
    rows = tree_rows(tr)
    ids = {r[1]: r for r in rows}
    for t, pid, parent, x in rows:
        if parent >= 0:
            assert ids[parent][0] == t + 1
    assert sum(1 for r in rows if r[0] == 0) == 16
