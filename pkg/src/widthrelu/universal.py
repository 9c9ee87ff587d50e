"""Explicit width-(n+4) ReLU approximators built from weighted cubes.

Node layout of every hidden layer (0-based indices, ``n`` = input dimension):

* ``0 .. n-1``  carried coordinates ``(x_j + N)^+``
* ``n``         accumulator for positive cube weights
* ``n+1``       accumulator for negative cube weights (stored as magnitudes)
* ``n+2``       running chop value for the current cube
* ``n+3``       scratch node for the current ramp

A block for one cube chops each dimension with four layers: two for the
lower face and two for the upper face.  After dimension ``k`` the chop node
holds ``(L_{k-1} + T_k - 1)^+`` where ``T_k`` is the one-dimensional
trapezoid of the cube along axis ``k``.  A recording layer then moves the
weighted result into one of the accumulators and clears nodes ``n+2, n+3``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .network import IDENTITY, RELU, Layer, Network, ShapeError

LAYERS_PER_DIMENSION = 4


@dataclass(frozen=True)
class Cube:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    weight: float = 1.0

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ValueError(f"degenerate cube {lo} x {hi}")
        if not (all(map(math.isfinite, lo + hi)) and math.isfinite(self.weight)):
            raise ValueError("cube coordinates and weight must be finite")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lower, self.upper))

    def inside(self, N: float) -> bool:
        return all(-N <= a and b <= N for a, b in zip(self.lower, self.upper))

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.all((x >= self.lower) & (x <= self.upper), axis=1)


@dataclass
class ApproximationPlan:
    n: int
    N: float
    epsilon: float
    C: float
    delta: float
    cubes: list[Cube] = field(default_factory=list)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.C < 0:
            raise ValueError("C must be non-negative")
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        for cube in self.cubes:
            if cube.dim != self.n:
                raise ValueError(f"cube of dimension {cube.dim} in a plan for n={self.n}")
            if not cube.inside(self.N):
                raise ValueError(f"cube {cube.lower} x {cube.upper} leaves [-N, N]^n")

    def error_bound(self) -> float:
        """Bound on the L1 gap between the weighted-indicator sum and the network."""
        return sum(abs(c.weight) * l1_error_bound(c, self.delta) for c in self.cubes)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "epsilon": self.epsilon,
            "C": self.C,
            "delta": self.delta,
            "cubes": [
                {"lower": list(c.lower), "upper": list(c.upper), "weight": c.weight}
                for c in self.cubes
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ApproximationPlan":
        cubes = [Cube(tuple(c["lower"]), tuple(c["upper"]), c["weight"]) for c in doc["cubes"]]
        return cls(int(doc["n"]), float(doc["N"]), float(doc["epsilon"]), float(doc["C"]),
                   float(doc["delta"]), cubes)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "ApproximationPlan":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class BlockReport:
    cube: Cube
    depth: int
    bound: float


# -- decomposition ---------------------------------------------------------


def cell_centers(cells_per_axis: int, lower: Sequence[float], upper: Sequence[float]):
    """Cell edges per axis and the lattice of cell centers, shape (cells,)*n + (n,)."""
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    edges = [np.linspace(a, b, cells_per_axis + 1) for a, b in zip(lower, upper)]
    mids = [0.5 * (e[:-1] + e[1:]) for e in edges]
    centers = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
    return edges, centers


def decompose_grid(samples, cells_per_axis: int, lower, upper) -> list[Cube]:
    """Riemann cover of a function sampled at cell centers of a regular grid.

    ``samples`` is either a callable evaluated on an (m, n) array of cell
    centers or an array of shape ``(cells_per_axis,) * n`` already holding
    the centre values.  Cells whose value is zero are dropped; the sign of
    each weight decides which accumulator the cube ends up in.
    """
    if cells_per_axis < 1:
        raise ValueError("cells_per_axis must be >= 1")
    lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
    upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
    n = lower.size
    edges, centers = cell_centers(cells_per_axis, lower, upper)
    if callable(samples):
        values = np.asarray(samples(centers.reshape(-1, n)), dtype=np.float64)
        values = values.reshape((cells_per_axis,) * n)
    else:
        values = np.asarray(samples, dtype=np.float64)
        if values.shape != (cells_per_axis,) * n:
            raise ValueError(f"expected samples of shape {(cells_per_axis,) * n}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("samples must be finite")

    cubes = []
    for idx in itertools.product(range(cells_per_axis), repeat=n):
        w = values[idx]
        if w == 0.0:
            continue
        lo = tuple(edges[d][i] for d, i in enumerate(idx))
        hi = tuple(edges[d][i + 1] for d, i in enumerate(idx))
        cubes.append(Cube(lo, hi, float(w)))
    return cubes


def grid_from_scattered(points, values, cells_per_axis: int, lower, upper) -> np.ndarray:
    """Centre values from scattered samples: the sample nearest each cell centre.

    Only samples falling inside a cell are considered for it; empty cells get 0.
    """
    points = np.asarray(points, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if points.ndim == 1:
        points = points[:, None]
    lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
    upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
    n = lower.size
    if points.shape != (values.size, n):
        raise ValueError(f"points shape {points.shape} does not match {values.size} values in {n}-D")
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(values))):
        raise ValueError("samples must be finite")
    width = (upper - lower) / cells_per_axis
    rel = (points - lower) / width
    idx = np.floor(rel).astype(int)
    # samples on the upper boundary belong to the last cell
    idx = np.where(np.isclose(points, upper), cells_per_axis - 1, idx)
    keep = np.all((idx >= 0) & (idx < cells_per_axis), axis=1)
    idx, rel, vals = idx[keep], rel[keep], values[keep]
    dist = np.sum((rel - idx - 0.5) ** 2, axis=1)

    grid = np.zeros((cells_per_axis,) * n)
    best = np.full((cells_per_axis,) * n, np.inf)
    for cell, d, v in zip(map(tuple, idx), dist, vals):
        if d < best[cell]:
            best[cell] = d
            grid[cell] = v
    return grid


# -- analytic quantities ---------------------------------------------------


def select_delta(epsilon: float, C: float, n: int) -> float:
    """Ramp fraction so that each cube's L1 gap is at most eps/(4C+3eps) of its volume."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if C < 0:
        raise ValueError("C must be non-negative")
    if n < 1:
        raise ValueError("n must be positive")
    ratio = epsilon / (4.0 * C + 3.0 * epsilon)
    # 1 - (1 - r)^(1/n) without cancellation for tiny r
    return -0.5 * math.expm1(math.log1p(-ratio) / n)


def l1_error_bound(cube: Cube, delta: float) -> float:
    if not 0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    return -math.expm1(cube.dim * math.log1p(-2.0 * delta)) * cube.volume


def trapezoid_oracle(cube: Cube, delta: float, x) -> np.ndarray:
    """Reference hyper-trapezoid: 0 outside the cube, 1 on the delta-shrunk cube."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    a = np.asarray(cube.lower)
    b = np.asarray(cube.upper)
    ramp = delta * (b - a)
    t = np.clip(np.minimum((x - a) / ramp, (b - x) / ramp), 0.0, 1.0)
    out = np.maximum(0.0, t.sum(axis=1) - (cube.dim - 1))
    return out[0] if single else out


# -- network construction --------------------------------------------------


def _passthrough(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights keeping carried coordinates and both accumulators; compute nodes zeroed."""
    W = np.zeros((n + 4, n + 4))
    W[: n + 2, : n + 2] = np.eye(n + 2)
    return W, np.zeros(n + 4)


def entry_stage(n: int, N: float) -> Network:
    """First layer: ``(x_j + N)^+`` on the carried nodes, zero everywhere else."""
    W = np.zeros((n + 4, n))
    W[:n, :n] = np.eye(n)
    b = np.zeros(n + 4)
    b[:n] = N
    return Network(n, (Layer(W, b, RELU),))


def chop_layers(cube: Cube, delta: float, N: float, axis: int, first: bool) -> list[Layer]:
    """Four layers intersecting the chop node with the trapezoid along ``axis``."""
    n = cube.dim
    a, b = cube.lower[axis], cube.upper[axis]
    ramp = delta * (b - a)
    chop, scratch = n + 2, n + 3
    layers = []

    # scratch = (a + ramp - x_k)^+, with x_k = carried - N; chop = 1 on the first axis
    W, u = _passthrough(n)
    if first:
        u[chop] = 1.0
    else:
        W[chop, chop] = 1.0
    W[scratch, axis] = -1.0
    u[scratch] = a + ramp + N
    layers.append(Layer(W, u))

    # chop = (chop - scratch / ramp)^+
    W, u = _passthrough(n)
    W[chop, chop] = 1.0
    W[chop, scratch] = -1.0 / ramp
    layers.append(Layer(W, u))

    # scratch = (x_k - b + ramp)^+
    W, u = _passthrough(n)
    W[chop, chop] = 1.0
    W[scratch, axis] = 1.0
    u[scratch] = -N - b + ramp
    layers.append(Layer(W, u))

    W, u = _passthrough(n)
    W[chop, chop] = 1.0
    W[chop, scratch] = -1.0 / ramp
    layers.append(Layer(W, u))
    return layers


def build_block(cube: Cube, delta: float, N: float) -> Network:
    """Width-(n+4) chopping block; node ``n+2`` (0-based) ends at the trapezoid value."""
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    if not cube.inside(N):
        raise ValueError(f"cube {cube.lower} x {cube.upper} leaves [-{N}, {N}]^n")
    n = cube.dim
    layers = []
    for axis in range(n):
        layers.extend(chop_layers(cube, delta, N, axis, first=axis == 0))
    return Network(n + 4, tuple(layers))


def recording_layer(n: int, weight: float) -> Layer:
    """Add ``|weight| * chop`` to the matching accumulator and reset the compute nodes."""
    W, u = _passthrough(n)
    target = n if weight > 0 else n + 1
    W[target, n + 2] = abs(weight)
    return Layer(W, u)


def output_layer(n: int) -> Layer:
    W = np.zeros((1, n + 4))
    W[0, n] = 1.0
    W[0, n + 1] = -1.0
    return Layer(W, np.zeros(1), IDENTITY)


def block_report(cube: Cube, delta: float, N: float) -> BlockReport:
    depth = build_block(cube, delta, N).depth + 1  # plus the recording layer
    return BlockReport(cube, depth, l1_error_bound(cube, delta))


def build_universal(plan: ApproximationPlan, allow_empty: bool = False) -> Network:
    """Chain entry stage, one block plus recording layer per cube, and the output layer.

    With ``allow_empty`` an empty cube list gives the zero function (entry
    stage straight into the output layer); otherwise it is an error.
    """
    n, N = plan.n, plan.N
    if not plan.cubes and not allow_empty:
        raise ValueError("plan has no cubes")
    layers = list(entry_stage(n, N).layers)
    for cube in plan.cubes:
        if cube.dim != n:
            raise ShapeError(f"cube of dimension {cube.dim} in a plan for n={n}")
        layers.extend(build_block(cube, plan.delta, N).layers)
        layers.append(recording_layer(n, cube.weight))
    layers.append(output_layer(n))
    return Network(n, tuple(layers))


def approximate_function(
    samples: Callable | np.ndarray,
    N: float,
    epsilon: float,
    cells_per_axis: int,
    n: int | None = None,
) -> tuple[Network, ApproximationPlan]:
    """Decompose on ``[-N, N]^n``, pick the ramp fraction, and build the network.

    ``n`` is inferred from an array of centre samples; for a callable it must be given.
    """
    if n is None:
        if callable(samples):
            raise ValueError("n is required when samples is a callable")
        n = np.ndim(samples)
    lower, upper = [-N] * n, [N] * n
    cubes = decompose_grid(samples, cells_per_axis, lower, upper)
    C = sum(abs(c.weight) * c.volume for c in cubes)
    delta = select_delta(epsilon, C, n)
    plan = ApproximationPlan(n, N, epsilon, C, delta, cubes)
    return build_universal(plan, allow_empty=True), plan
