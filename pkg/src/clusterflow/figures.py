"""Builders for the three figure types: gap CDFs, genealogy trees, and F^(t) panels."""
from __future__ import annotations

import numpy as np

from .analysis import EmpiricalDistribution
from .reverse import step_distribution
from .svg import Panel, render

CDF_GRID = np.round(np.linspace(0.0, 5.0, 201), 10)


def cdf_on_grid(values, grid=CDF_GRID) -> np.ndarray:
    return EmpiricalDistribution(values).cdf(grid)


def gap_cdf_figure(curves, path, title="Palm gap distribution"):
    """``curves`` maps ``(algorithm, t)`` to ``{law label: cdf values on CDF_GRID}``."""
    panels = []
    columns = max(sum(1 for a, _ in curves if a == alg) for alg, _ in curves)
    for (algorithm, t), by_law in curves.items():
        p = Panel(f"{algorithm}, t = {t}", "gap", "CDF", ylim=(0.0, 1.0))
        for label, cdf in by_law.items():
            p.add(label, CDF_GRID.tolist(), np.asarray(cdf).tolist(), kind="step")
        panels.append(p)
    return render(panels, path, title, columns=columns)


def tree_figure(rows, path, title="Merging trajectories (unrescaled)"):
    """``rows`` are ``(t, point_id, parent_id, position)`` tuples."""
    pos = {r[1]: (r[0], r[3]) for r in rows}
    first = [r[3] for r in rows if r[0] == 0]
    span = max(first) - min(first) if first else 0.0
    xs, ys = [], []
    for t, pid, parent, x in rows:
        if parent >= 0:
            t1, x1 = pos[parent]
            if abs(x1 - x) > span / 2:
                continue  # merge across the periodic boundary
            xs += [x, x1]
            ys += [t, t1]
    p = Panel("genealogy", "position", "t")
    if not xs:
        # no step taken: one vertical tick per point
        for t, pid, parent, x in rows:
            xs += [x, x]
            ys += [t - 0.25, t + 0.25]
    p.add("trajectory", xs, ys, kind="segment", color="#1f77b4", width=1.0, legend=False)
    return render([p], path, title, panel_width=640, panel_height=420)


def step_panels_figure(runs, times, path, title="F(t) across time"):
    """One panel per reverse run, one step curve per requested time."""
    panels = []
    for i, traj in enumerate(runs):
        p = Panel(f"replica {i}", "x", "F(x)")
        for t in times:
            if t >= len(traj.states):
                continue
            F = step_distribution(traj.states[t])
            x = np.concatenate([[0.0], F.support, [F.support[-1] + F.spacing]])
            y = np.concatenate([[0.0], np.cumsum(F.masses), [np.sum(F.masses)]])
            p.add(f"t = {t}", x.tolist(), y.tolist(), kind="step")
        panels.append(p)
    return render(panels, path, title)
