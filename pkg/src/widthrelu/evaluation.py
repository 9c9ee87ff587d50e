"""Grid and Monte Carlo error estimates, and CSV dumps for function comparisons."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

MAX_GRID_POINTS = 50_000_000


@dataclass(frozen=True)
class Domain:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"invalid domain {lo} x {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, n: int, lo: float = -1.0, hi: float = 1.0) -> "Domain":
        return cls((lo,) * n, (hi,) * n)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lower, self.upper))


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float = 0.0


def uniform_grid(domain: Domain, count_per_axis: int | Sequence[int], cap: int = MAX_GRID_POINTS) -> np.ndarray:
    """Equally spaced lattice, lower end included and upper end excluded; shape (m, n)."""
    counts = np.broadcast_to(np.asarray(count_per_axis, dtype=int), (domain.dim,))
    if np.any(counts < 1):
        raise ValueError("need at least one point per axis")
    total = math.prod(int(c) for c in counts)
    if total > cap:
        raise MemoryError(f"grid of {total} points exceeds the cap of {cap}")
    axes = [a + (b - a) * np.arange(c) / c for a, b, c in zip(domain.lower, domain.upper, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def monte_carlo_points(domain: Domain, count: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(domain.lower, domain.upper, size=(count, domain.dim))


def _values(f, points: np.ndarray) -> np.ndarray:
    out = np.asarray(f(points) if callable(f) else f, dtype=np.float64)
    if out.ndim == 2 and out.shape[1] == 1:
        out = out[:, 0]
    return np.broadcast_to(out, (points.shape[0],))


def _diffs(f, g, points) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] == 0:
        raise ValueError("empty point set")
    return _values(f, points) - _values(g, points)


def l1_distance(f: Callable | np.ndarray, g: Callable | np.ndarray, domain: Domain, points) -> float:
    """Riemann estimate ``volume * mean |f - g|``; ``f``/``g`` are callables or value arrays."""
    return domain.volume * float(np.mean(np.abs(_diffs(f, g, points))))


def l1_monte_carlo(f, g, domain: Domain, count: int, seed=None) -> Estimate:
    pts = monte_carlo_points(domain, count, seed)
    d = np.abs(_diffs(f, g, pts))
    scale = domain.volume
    return Estimate(scale * float(d.mean()), scale * float(d.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0)


def mse(f, g, points) -> float:
    return float(np.mean(_diffs(f, g, points) ** 2))


def emit_comparison_csv(f, g, points, path) -> None:
    """Rows ``x1..xn, target, approx`` written with shortest round-trip floats."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    ft = _values(f, points)
    gt = _values(g, points)
    n = points.shape[1]
    header = ["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header + ["target", "approx"])
        for x, a, b in zip(points.tolist(), ft.tolist(), gt.tolist()):
            w.writerow([repr(v) for v in x] + [repr(a), repr(b)])


def read_comparison_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", skip_header=1, dtype=np.float64, ndmin=2)
    return data[:, :-2], data[:, -2], data[:, -1]


def summary_table(rows: dict[str, float]) -> str:
    width = max(len(k) for k in rows)
    return "\n".join(f"{k:<{width}}  {v:.6g}" for k, v in rows.items())
