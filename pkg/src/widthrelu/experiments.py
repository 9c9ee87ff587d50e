"""Narrow-approximates-wide experiments and the width phase-transition probe."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .evaluation import Domain, l1_distance, mse, uniform_grid
from .network import uniform_shape
from .training import TrainConfig, fit, init_network
from .universal import approximate_function
from .wide import narrow_width

log = logging.getLogger(__name__)

# (n, k) -> target width, target depth, approximator width, approximator depth,
#           worst-case MSE, average-case MSE as printed in the reference table
TABLE1 = {
    (1, 3): (18, 3, 16, 5, 0.002248, 0.000345),
    (1, 4): (36, 3, 24, 6, 0.003263, 0.000892),
    (1, 5): (50, 3, 34, 7, 0.005643, 0.001296),
    (2, 3): (18, 3, 16, 5, 0.008729, 0.001990),
    (2, 4): (36, 3, 24, 6, 0.018852, 0.006251),
    (2, 5): (50, 3, 34, 7, 0.030114, 0.007984),
}

DEFAULT_GRID = {1: 20000, 2: 40000}
DEFAULT_EPOCHS = {1: 100, 2: 200}


class ConfigError(ValueError):
    """Raised for unsupported or malformed experiment settings."""


@dataclass
class ExperimentSpec:
    n: int = 1
    k: int = 3
    trials: int = 50
    grid_size: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.grid_size is None:
            self.grid_size = DEFAULT_GRID.get(self.n, 0)
        if (self.n, self.k) not in TABLE1:
            raise ConfigError(f"unsupported configuration n={self.n}, k={self.k}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        per_axis = round(self.grid_size ** (1.0 / self.n))
        if per_axis < 2 or per_axis**self.n != self.grid_size:
            raise ConfigError(f"grid_size {self.grid_size} is not a perfect {self.n}-th power")

    @property
    def target_shape(self) -> list[int]:
        return uniform_shape(self.n, 2 * self.k**2, 3)

    @property
    def approximator_shape(self) -> list[int]:
        return uniform_shape(self.n, narrow_width(self.k), self.k + 2)

    @property
    def points_per_axis(self) -> int:
        return round(self.grid_size ** (1.0 / self.n))

    def grid(self) -> np.ndarray:
        return uniform_grid(Domain.cube(self.n), self.points_per_axis)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    best_mse: list[float] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def worst_case(self) -> float:
        return max(self.best_mse)

    @property
    def average_case(self) -> float:
        return float(np.mean(self.best_mse))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "best_mse"])
        for t, v in enumerate(self.best_mse):
            w.writerow([t, repr(v)])
        w.writerow(["worst", repr(self.worst_case)])
        w.writerow(["average", repr(self.average_case)])
        return buf.getvalue()

    def summary(self) -> str:
        s = self.spec
        ref = TABLE1[(s.n, s.k)]
        tw, td = s.target_shape[1], len(s.target_shape) - 1
        aw, ad = s.approximator_shape[1], len(s.approximator_shape) - 1
        return (
            f"n={s.n} k={s.k} trials={s.trials} target {tw}/{td} (table prints {ref[0]}/{ref[1]}) "
            f"approximator {aw}/{ad}\n"
            f"worst {self.worst_case:.6f} (table {ref[4]:.6f})  "
            f"average {self.average_case:.6f} (table {ref[5]:.6f})  "
            f"time {self.wall_time:.1f}s"
        )


def default_train_config(n: int, **overrides) -> TrainConfig:
    return TrainConfig(epochs=DEFAULT_EPOCHS.get(n, 100), **overrides)


def _trial_seeds(seed: int, trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(trials)


def run_trial(spec: ExperimentSpec, config: TrainConfig, seed_seq: np.random.SeedSequence) -> float:
    rng = np.random.default_rng(seed_seq)
    target = init_network(spec.target_shape, rng, target=True)
    X = spec.grid()
    Y = target(X)
    approx = init_network(spec.approximator_shape, rng)
    cfg = replace(config, seed=int(rng.integers(2**63)))
    result = fit(approx, (X[::2], Y[::2]), (X, Y), cfg)
    return result.best_mse


def _run_trial_args(args):
    return run_trial(*args)


def run_table1(spec: ExperimentSpec, config: TrainConfig, jobs: int = 1) -> ExperimentResult:
    """Sample targets, fit approximators on every other grid point, score on the whole grid."""
    start = time.perf_counter()
    tasks = [(spec, config, ss) for ss in _trial_seeds(spec.seed, spec.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_run_trial_args, tasks))
    else:
        scores = []
        for t, task in enumerate(tasks):
            scores.append(run_trial(*task))
            log.info("n=%d k=%d trial %d best mse %.3e", spec.n, spec.k, t, scores[-1])
    return ExperimentResult(spec, scores, time.perf_counter() - start)


# -- phase transition probe ------------------------------------------------


@dataclass(frozen=True)
class ProbeRow:
    label: str
    width: int
    depth: int
    mse: float
    l1: float
    epsilon: float | None = None


def radial_bump(radius: float = 0.8) -> Callable[[np.ndarray], np.ndarray]:
    def f(x):
        x = np.atleast_2d(x)
        return np.maximum(0.0, 1.0 - np.sum(x * x, axis=1) / radius**2)

    return f


def phase_transition_probe(
    n: int,
    f: Callable[[np.ndarray], np.ndarray],
    widths: list[int],
    depth: int,
    config: TrainConfig,
    points_per_axis: int = 100,
    epsilon: float = 0.2,
    cells_per_axis: int = 32,
    N: float = 1.0,
) -> list[ProbeRow]:
    """Best MSE of trained equal-depth nets per width, plus the constructed approximator.

    Training and scoring use a lattice on ``[-N, N)^n``; the constructed
    network's L1 error is measured on the same lattice.
    """
    domain = Domain.cube(n, -N, N)
    X = uniform_grid(domain, points_per_axis)
    Y = np.asarray(f(X), dtype=np.float64).reshape(-1, 1)
    rows = []
    for s, w in zip(_trial_seeds(config.seed, len(widths)), widths):
        rng = np.random.default_rng(s)
        net = init_network(uniform_shape(n, w, depth), rng)
        res = fit(net, (X[::2], Y[::2]), (X, Y), replace(config, seed=int(rng.integers(2**63))))
        pred = res.network(X)
        rows.append(ProbeRow(f"trained width {w}", w, depth, res.best_mse, l1_distance(Y, pred, domain, X)))

    net, plan = approximate_function(f, N, epsilon, cells_per_axis, n=n)
    pred = net(X)
    rows.append(
        ProbeRow(
            f"constructed width {n + 4}",
            net.width,
            net.depth,
            mse(Y, pred, X),
            l1_distance(Y, pred, domain, X),
            plan.epsilon,
        )
    )
    return rows


def probe_report(rows: list[ProbeRow]) -> str:
    lines = [f"{'network':<24} {'width':>5} {'depth':>6} {'mse':>12} {'l1':>12} {'epsilon':>8}"]
    for r in rows:
        eps = "" if r.epsilon is None else f"{r.epsilon:g}"
        lines.append(f"{r.label:<24} {r.width:>5} {r.depth:>6} {r.mse:>12.4e} {r.l1:>12.4e} {eps:>8}")
    return "\n".join(lines)


# -- configuration files ---------------------------------------------------


def load_config(path) -> dict:
    """Read a JSON config with optional ``experiment``, ``train`` and ``probe`` sections."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


def _known(cls, section: dict, name: str) -> dict:
    allowed = {f.name for f in fields(cls)}
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {', '.join(sorted(unknown))}")
    return section


def build_experiment(doc: dict, overrides: dict | None = None) -> tuple[ExperimentSpec, TrainConfig]:
    """Merge defaults < config file < overrides into a spec and training config."""
    overrides = overrides or {}
    exp = dict(_known(ExperimentSpec, doc.get("experiment", {}), "experiment"))
    train = dict(_known(TrainConfig, doc.get("train", {}), "train"))
    for key, value in overrides.items():
        if value is None:
            continue
        if key in {f.name for f in fields(ExperimentSpec)}:
            exp[key] = value
        elif key in {f.name for f in fields(TrainConfig)}:
            train[key] = value
        else:
            raise ConfigError(f"unknown override {key!r}")
    try:
        spec = ExperimentSpec(**exp)
        train.setdefault("epochs", DEFAULT_EPOCHS[spec.n])
        config = TrainConfig(**train)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return spec, config


def spec_dict(spec: ExperimentSpec, config: TrainConfig) -> dict:
    return {"experiment": asdict(spec), "train": asdict(config)}


def table1_configs() -> list[tuple[int, int]]:
    return sorted(TABLE1)


def reference_row(n: int, k: int) -> dict:
    tw, td, aw, ad, worst, avg = TABLE1[(n, k)]
    return {
        "target_width": tw, "target_depth": td,
        "approx_width": aw, "approx_depth": ad,
        "worst": worst, "average": avg,
    }

