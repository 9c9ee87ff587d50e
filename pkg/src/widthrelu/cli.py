"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import evaluation, experiments, network, training, universal, wide

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def read_samples_csv(path, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``x1, ..., xn, value``; a non-numeric first row is treated as a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no sample rows")
    width = len(rows[0])
    data = []
    for lineno, row in enumerate(rows, 1):
        if len(row) != width:
            raise ValueError(f"{path}: row {lineno} has {len(row)} fields, expected {width}")
        try:
            data.append([float(c) for c in row])
        except ValueError:
            raise ValueError(f"{path}: row {lineno}: non-numeric field") from None
    arr = np.array(data)
    if n is not None and arr.shape[1] != n + 1:
        raise ValueError(f"{path}: expected {n} coordinates plus a value, got {arr.shape[1]} columns")
    return arr[:, :-1], arr[:, -1]


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- commands --------------------------------------------------------------


def cmd_construct_universal(args) -> int:
    points, values = read_samples_csv(args.samples, args.n)
    lower, upper = [-args.N] * args.n, [args.N] * args.n
    grid = universal.grid_from_scattered(points, values, args.cells, lower, upper)
    net, plan = universal.approximate_function(grid, args.N, args.epsilon, args.cells)
    network.save(net, args.out_net)
    plan.save(args.out_plan)
    domain = evaluation.Domain(lower, upper)
    err = evaluation.l1_distance(values, net(points)[:, 0], domain, points)
    print(f"cubes {len(plan.cubes)}  delta {plan.delta:.6g}  width {net.width}  depth {net.depth}")
    print(f"measured L1 error {err:.6g} (epsilon {args.epsilon:g}, block bound {plan.error_bound():.6g})")
    return EXIT_OK


def cmd_construct_wide(args) -> int:
    a = wide.sample_E0(args.k, args.seed)
    net = wide.build_wide_target(args.k, a, args.n)
    network.save(net, args.out_net)
    wide.save_e0_csv(a, args.out_e0)
    err = wide.interpolation_error(net, args.k, a)
    print(f"width {net.width}  depth {net.depth}  grid points {a.size}")
    print(f"max relative interpolation error {err:.3e}")
    return EXIT_OK


def cmd_check_e0(args) -> int:
    a = wide.load_e0_csv(args.input)
    chk = wide.check_E0(a, args.k)
    if chk:
        print("in E0")
        return EXIT_OK
    print(f"not in E0: index {chk.index} ({chk.reason})")
    return EXIT_VALIDATION


def cmd_train(args) -> int:
    X, y = read_samples_csv(args.data)
    rng = np.random.default_rng(args.seed)
    if args.init:
        approx = network.load(args.init)
    else:
        approx = training.init_network(network.uniform_shape(X.shape[1], args.width, args.depth), rng)
    config = training.TrainConfig(
        learning_rate=args.lr, batch_size=args.batch_size, epochs=args.epochs, seed=args.seed
    )
    res = training.fit(approx, (X[::2], y[::2]), (X, y), config)
    network.save(res.network, args.out)
    if args.loss_curve:
        _write(args.loss_curve, "epoch,eval_mse\n" + "".join(
            f"{e},{v!r}\n" for e, v in enumerate(res.curve, 1)))
    print(f"best eval mse {res.best_mse:.6g} at epoch {res.best_epoch} (initial {res.initial_mse:.6g})")
    return EXIT_OK


def _table1_overrides(args) -> dict:
    return {
        "n": args.n, "k": args.k, "trials": args.trials, "seed": args.seed,
        "grid_size": args.grid_size, "epochs": args.epochs, "batch_size": args.batch_size,
    }


def cmd_reproduce_table1(args) -> int:
    doc = experiments.load_config(args.config) if args.config else {}
    overrides = _table1_overrides(args)
    if args.full:
        out_dir = Path(args.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for n, k in sorted(experiments.TABLE1):
            spec, config = experiments.build_experiment(
                doc, {**overrides, "n": n, "k": k, "grid_size": None, "epochs": None}
            )
            res = experiments.run_table1(spec, config, jobs=args.jobs)
            (out_dir / f"table1_n{n}_k{k}.csv").write_text(res.to_csv())
            print(res.summary(), flush=True)
        return EXIT_OK
    spec, config = experiments.build_experiment(doc, overrides)
    res = experiments.run_table1(spec, config, jobs=args.jobs)
    _write(args.out, res.to_csv())
    print(res.summary(), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_phase_probe(args) -> int:
    doc = experiments.load_config(args.config) if args.config else {}
    probe = dict(doc.get("probe", {}))
    train = dict(doc.get("train", {}))
    n = args.n or probe.get("n", 2)
    widths = args.widths or probe.get("widths", [1, 2, n + 4])
    depth = args.depth or probe.get("depth", 4)
    try:
        config = training.TrainConfig(**{"epochs": 50, **train})
    except TypeError as exc:
        raise experiments.ConfigError(str(exc)) from None
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.epochs is not None:
        config = replace(config, epochs=args.epochs)
    f = experiments.radial_bump(probe.get("radius", 0.8))
    rows = experiments.phase_transition_probe(
        n, f, list(widths), depth, config,
        points_per_axis=probe.get("points_per_axis", 100 if n <= 2 else 20),
        epsilon=probe.get("epsilon", 0.2),
        cells_per_axis=probe.get("cells_per_axis", 32 if n <= 2 else 8),
    )
    print(experiments.probe_report(rows))
    return EXIT_OK


def cmd_eval(args) -> int:
    net = network.load(args.net)
    n = net.input_dim
    if args.against.endswith(".json"):
        other = network.load(args.against)
        domain = evaluation.Domain([args.lower] * n, [args.upper] * n)
        points = evaluation.uniform_grid(domain, args.per_axis)
        target = other(points)[:, 0]
    else:
        points, target = read_samples_csv(args.against, n)
        domain = evaluation.Domain([args.lower] * n, [args.upper] * n)
    approx = net(points)[:, 0]
    if args.metric == "l1":
        value = evaluation.l1_distance(target, approx, domain, points)
    else:
        value = evaluation.mse(target, approx, points)
    if args.emit_csv:
        evaluation.emit_comparison_csv(target, approx, points, args.emit_csv)
    print(f"{args.metric} {value!r}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="widthrelu", description="Width-bounded ReLU network constructions and experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-trial progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("construct-universal", help="build a width-(n+4) approximator from samples")
    s.add_argument("--samples", required=True, help="CSV rows x1..xn,value")
    s.add_argument("--n", type=int, required=True, help="input dimension")
    s.add_argument("--N", type=float, required=True, help="half-width of the box [-N, N]^n")
    s.add_argument("--epsilon", type=float, required=True, help="target L1 accuracy")
    s.add_argument("--cells", type=int, required=True, help="grid cells per axis")
    s.add_argument("--out-net", default="universal_net.json")
    s.add_argument("--out-plan", default="universal_plan.json")
    s.set_defaults(func=cmd_construct_universal)

    s = sub.add_parser("construct-wide", help="build a width-2k^2 depth-3 interpolating target")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n", type=int, default=1, help="input dimension")
    s.add_argument("--out-net", default="wide_net.json")
    s.add_argument("--out-e0", default="wide_e0.csv")
    s.set_defaults(func=cmd_construct_wide)

    s = sub.add_parser("check-e0", help="test a value vector for E0 membership (exit 3 if not)")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--input", required=True, help="CSV with one value per line")
    s.set_defaults(func=cmd_check_e0)

    s = sub.add_parser("train", help="fit a ReLU net to CSV data with AdaDelta")
    s.add_argument("--data", required=True, help="CSV rows x1..xn,y")
    s.add_argument("--width", type=int, default=16)
    s.add_argument("--depth", type=int, default=5)
    s.add_argument("--init", help="start from this network file instead of a random one")
    s.add_argument("--epochs", type=int, default=100)
    s.add_argument("--batch-size", type=int, default=64)
    s.add_argument("--lr", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="trained_net.json")
    s.add_argument("--loss-curve", help="write per-epoch eval MSE to this CSV")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("reproduce-table1", help="narrow approximators fitted to random wide targets")
    s.add_argument("--config", help="JSON file with 'experiment' and 'train' sections")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--grid-size", type=int, help="total grid points (a perfect n-th power)")
    s.add_argument("--epochs", type=int)
    s.add_argument("--batch-size", type=int)
    s.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    s.add_argument("--out", help="result CSV (default stdout)")
    s.add_argument("--full", action="store_true", help="run all six configurations")
    s.add_argument("--out-dir", help="directory for --full result CSVs")
    s.set_defaults(func=cmd_reproduce_table1)

    s = sub.add_parser("phase-probe", help="trained narrow nets vs the constructed width-(n+4) net")
    s.add_argument("--config", help="JSON file with 'probe' and 'train' sections")
    s.add_argument("--n", type=int)
    s.add_argument("--widths", type=int, nargs="+")
    s.add_argument("--depth", type=int)
    s.add_argument("--epochs", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_phase_probe)

    s = sub.add_parser("eval", help="L1 or MSE of a network against a network or CSV samples")
    s.add_argument("--net", required=True)
    s.add_argument("--against", required=True, help="network .json or CSV rows x1..xn,value")
    s.add_argument("--metric", choices=["l1", "mse"], default="mse")
    s.add_argument("--lower", type=float, default=-1.0, help="domain lower bound per axis")
    s.add_argument("--upper", type=float, default=1.0, help="domain upper bound per axis")
    s.add_argument("--per-axis", type=int, default=200, help="lattice size when comparing two networks")
    s.add_argument("--emit-csv", help="write x..,target,approx rows here")
    s.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, MemoryError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
