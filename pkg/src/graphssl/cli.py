"""Command line entry point: ``graphssl run | graph | eval``.

Exit status is 0 on success, 1 for configuration problems and 2 for data
problems.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .data import DataError, load_dataset, normalize
from .evaluation import accuracy
from .experiment import ConfigError, build_graph, load_config, run_experiment, sample_trial
from .graph import save_graph

log = logging.getLogger("graphssl")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


def _load(path: str, config):
    fmt = config.data_format
    if fmt == "auto":
        fmt = "dense-binary" if Path(path).suffix == ".npz" else "csv"
    try:
        return load_dataset(path, fmt)
    except OSError as exc:
        raise DataError(f"cannot read data: {exc}") from None


def cmd_run(args) -> int:
    config = load_config(args.config)
    dataset = _load(args.data, config)
    result = run_experiment(dataset, config)
    Path(args.out).write_text(result.to_csv())
    log.info("%s: mean AC %.4f over %d runs (%d failed)", config.algorithm,
             result.mean_ac, len(result.accuracies), result.failed)
    return EXIT_OK


def cmd_graph(args) -> int:
    """Affinity graph of the trial that run 0 of ``graphssl run`` would draw."""
    config = load_config(args.config)
    dataset = _load(args.data, config)
    if config.normalize:
        dataset = normalize(dataset)
    trial = sample_trial(dataset, config.k_clusters, config.labels_per_class,
                         config.master_seed)
    try:
        graph = build_graph(trial, config)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    save_graph(graph, args.out)
    return EXIT_OK


def _read_labels(path: str) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            cells = [c.strip() for row in csv.reader(fh)
                     if row and not row[0].startswith("#") for c in row]
    except OSError as exc:
        raise DataError(f"cannot read labels: {exc}") from None
    cells = [c for c in cells if c]
    if not cells:
        raise DataError(f"{path}: no labels")
    return np.array(cells)


def cmd_eval(args) -> int:
    pred, truth = _read_labels(args.pred), _read_labels(args.truth)
    try:
        report = accuracy(pred, truth)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    print(f"ac={report.ac!r}")
    print(f"matched={report.matched}/{pred.size}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphssl",
        description="Semi-supervised representation learning with learned affinity graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a clustering experiment, write per-run CSV")
    run.add_argument("--data", required=True)
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run)

    graph = sub.add_parser("graph", help="write the affinity graph as i,j,w triplets")
    graph.add_argument("--data", required=True)
    graph.add_argument("--config", required=True)
    graph.add_argument("--out", required=True)
    graph.set_defaults(func=cmd_graph)

    ev = sub.add_parser("eval", help="clustering accuracy of a prediction file")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--truth", required=True)
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
