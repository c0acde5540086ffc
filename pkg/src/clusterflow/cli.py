"""Command-line runner: ``clusterflow {forward,tree,reverse,duality,verify}``.

Exit codes: 0 success, 1 failed acceptance assertion (verify), 2 bad
configuration or arguments, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import figures
from .analysis import duality_check, mean_se
from .config import ConfigError, load_config, with_overrides
from .export import (
    GAP_HEADER,
    LEDGER_HEADER,
    POINT_HEADER,
    STEP_HEADER,
    TREE_HEADER,
    WEIGHT_HEADER,
    CsvSink,
    tree_rows,
    write_gaps,
    write_ledger,
    write_step_distribution,
    write_weights,
)
from .forward import GapSequence, run_forward
from .laws import GapLaw
from .parallel import map_replicas, resolve_threads
from .reverse import WeightSequence, run_reverse
from .rng import RngStream
from .verify import all_asserts_pass, run_verify

log = logging.getLogger("clusterflow")


def cmd_forward(cfg, out: Path) -> int:
    block = cfg.forward
    T = cfg.steps
    laws = [GapLaw.from_dict(d) for d in block.laws]
    curves = {}
    with CsvSink(out / "forward_cdf.csv", ["algorithm", "law", "t", "x", "cdf"]) as cdf_sink, \
            CsvSink(out / "forward_summary.csv",
                    ["algorithm", "law", "t", "gaps", "mean_gap", "var_gap", "mean_points"]) as summary:
        for alg in block.algorithms:
            for law in laws:
                label = law.name if law.name != "gamma" else f"gamma({law.shape})"
                base = RngStream.for_labels(cfg.seed, "forward", alg, label)

                def one(r):
                    rng = base.spawn(r)
                    g0 = GapSequence(law.sample(cfg.n_points, rng.spawn("gaps")), cfg.intensity_mode)
                    return run_forward(g0, T, alg, rng.spawn("dynamics"), checkpoints=block.checkpoints)

                runs = map_replicas(one, cfg.replicas, cfg.threads)
                for t in block.checkpoints:
                    pooled = np.concatenate([tr.gaps[t].gaps for tr in runs])
                    cdf = figures.cdf_on_grid(pooled)
                    curves.setdefault((alg, t), {})[label] = cdf
                    for x, c in zip(figures.CDF_GRID, cdf):
                        cdf_sink.row(alg, label, t, float(x), float(c))
                    summary.row(alg, label, t, pooled.size, float(pooled.mean()), float(pooled.var()),
                                float(np.mean([tr.counts[t] for tr in runs])))
                if block.export_gaps:
                    _export_forward(out, alg, label, runs, block.checkpoints)
    figures.gap_cdf_figure(curves, out / "gap_cdf.svg")
    return 0


def _export_forward(out, alg, label, runs, checkpoints):
    with CsvSink(out / f"forward_gaps_{alg}_{label}.csv", GAP_HEADER) as gs, \
            CsvSink(out / f"forward_points_{alg}_{label}.csv", POINT_HEADER) as ps:
        for r, tr in enumerate(runs):
            for t in checkpoints:
                g = tr.gaps[t].gaps
                write_gaps(gs, r, t, g)
                pos = np.concatenate([[0.0], np.cumsum(g[:-1])])
                for i, (x, m) in enumerate(zip(pos, tr.multiplicity[t])):
                    ps.row(r, t, i, float(x), int(m))


def cmd_tree(cfg, out: Path) -> int:
    n, T = cfg.tree.n_points, cfg.tree.steps
    rng = RngStream.for_labels(cfg.seed, "tree")
    g0 = GapSequence(cfg.law.sample(n, rng.spawn("gaps")), cfg.intensity_mode)
    tr = run_forward(g0, T, cfg.algorithm, rng.spawn("dynamics"), record_points=True, record_merges=True)
    total = int(tr.multiplicity[T].sum())
    if total != n:
        raise RuntimeError(f"multiplicity not conserved: {total} != {n}")
    rows = tree_rows(tr)
    with CsvSink(out / "tree.csv", TREE_HEADER) as sink:
        sink.rows(rows)
    figures.tree_figure(rows, out / "genealogy.svg")
    return 0


def cmd_reverse(cfg, out: Path) -> int:
    block = cfg.reverse
    base = RngStream.for_labels(cfg.seed, "reverse")
    eta0 = WeightSequence.unit(variant=block.variant)
    runs = map_replicas(lambda r: run_reverse(eta0, block.steps, base.spawn(r)), block.replicas, cfg.threads)
    with CsvSink(out / "reverse_ledger.csv", LEDGER_HEADER) as sink:
        for r, tr in enumerate(runs):
            write_ledger(sink, r, tr.ledger)
    M = np.array([[float(m) for m in tr.ledger.M] for tr in runs])
    with CsvSink(out / "reverse_mass_summary.csv", ["t", "mean_M", "se", "z"]) as sink:
        for t in range(block.steps + 1):
            m, se = mean_se(M[:, t])
            sink.row(t, m, se, 0.0 if se == 0 else (m - 1.0) / se)
    panels = runs[: block.panels]
    with CsvSink(out / "reverse_step_functions.csv", STEP_HEADER) as sink:
        for r, tr in enumerate(panels):
            for eta in tr.states:
                write_step_distribution(sink, r, eta)
    if block.export_weights:
        with CsvSink(out / "reverse_weights.csv", WEIGHT_HEADER) as sink:
            for r, tr in enumerate(runs):
                for eta in tr.states:
                    write_weights(sink, r, eta)
    times = [t for t in block.panel_times if t <= block.steps]
    figures.step_panels_figure(panels, times, out / "step_functions.svg")
    return 0


def cmd_duality(cfg, out: Path) -> int:
    block = cfg.duality
    with CsvSink(out / "duality.csv", ["eta0", "t", "lhs", "lhs_se", "rhs", "rhs_se", "replicas",
                                       "within_band"]) as sink:
        for idx in block.eta0:
            eta0 = WeightSequence.unit(idx)
            name = "+".join(f"e{i}" for i in idx)
            for t in block.times:
                rep = duality_check(eta0, cfg.law, t, block.replicas, cfg.seed, block.n_points, cfg.threads)
                sink.row(name, t, rep.lhs, rep.lhs_se, rep.rhs, rep.rhs_se, block.replicas, int(rep.passed))
    return 0


def cmd_verify(cfg, out: Path) -> int:
    verdicts = run_verify(cfg.seed, out, cfg.verify.scale, cfg.threads, cfg.verify.filter,
                          cfg.x_grid_points, cfg.s_grid, progress=lambda g: log.info("running %s", g))
    for v in verdicts:
        status = "PASS" if v.passed else ("FAIL" if v.kind == "assert" else "note")
        d = v.to_dict()
        print(f"{status:4s}  {v.kind:6s}  {v.check}  statistic={d['statistic']!r} threshold={d['threshold']!r}")
    return 0 if all_asserts_pass(verdicts) else 1


COMMANDS = {
    "forward": cmd_forward,
    "tree": cmd_tree,
    "reverse": cmd_reverse,
    "duality": cmd_duality,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment config")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", type=str, help="output directory (overrides the config)")
    common.add_argument("--threads", type=int, help="worker threads (default: $CLUSTERFLOW_THREADS or 1)")
    common.add_argument("--filter", type=str, help="verify: run only check groups containing NAME")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="clusterflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        cfg = with_overrides(cfg, seed=args.seed, out=args.out, threads=args.threads, filter=args.filter)
        cfg.threads = resolve_threads(cfg.threads)
        out = Path(cfg.out) / args.command
        cfg.write(out)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
