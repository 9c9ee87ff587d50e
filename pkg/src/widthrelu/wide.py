"""Depth-3, width-2k^2 networks interpolating prescribed values on 2k^4 grid points.

Grid points come in ``k^2`` groups of ``2k^2`` points; group ``j`` sits just
left of the odd integer ``2j+1`` with spacing ``1/(4k^2)``.  Any positive
value vector whose entries more than double along each group is realised
exactly by a wide network: second-layer node ``i`` is a ramp that vanishes
one grid step left of the ``i``-th point of every group, and the ReLU sum of
those ramps telescopes back to the prescribed values.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import IDENTITY, RELU, Layer, Network

log = logging.getLogger(__name__)

SAMPLE_RATIO_LOW = 2.05
SAMPLE_RATIO_HIGH = 2.5
# beyond this k the largest sampled entry exceeds ~1e30
_MAGNITUDE_WARN_K = 6


class E0Error(ValueError):
    """Raised when a value vector violates the per-group doubling chain."""


@dataclass(frozen=True)
class GridSpec:
    k: int
    points: np.ndarray

    @property
    def group_size(self) -> int:
        return 2 * self.k * self.k

    @property
    def groups(self) -> int:
        return self.k * self.k


@dataclass(frozen=True)
class E0Check:
    ok: bool
    index: int | None = None  # first offending 0-based position
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class WideVsNarrowSpec:
    k: int
    n: int = 1
    param_bound: float = 1.0

    @property
    def wide_width(self) -> int:
        return 2 * self.k**2

    wide_depth = 3

    @property
    def narrow_width(self) -> int:
        return narrow_width(self.k)

    @property
    def narrow_depth(self) -> int:
        return self.k + 2

    @property
    def separation_regime(self) -> bool:
        return self.k >= self.n + 4


def narrow_width(k: int) -> int:
    """``ceil(3 k^{3/2})``, computed in integers (16, 24, 34 for k = 3, 4, 5)."""
    # smallest w with w^2 >= 9 k^3
    target = 9 * k**3
    w = math.isqrt(target)
    return w if w * w == target else w + 1


def _check_k(k: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")


def grid_points(k: int) -> GridSpec:
    _check_k(k)
    m = 2 * k * k
    i = np.arange(1, m + 1)
    j = np.arange(k * k)[:, None]
    pts = (2 * j + 1) - (m - i) / (4.0 * k * k)
    return GridSpec(k, pts.reshape(-1))


def check_E0(a, k: int) -> E0Check:
    a = np.asarray(a, dtype=np.float64)
    m = 2 * k * k
    if a.shape != (m * k * k,):
        raise ValueError(f"expected {m * k * k} values for k={k}, got shape {a.shape}")
    bad = np.flatnonzero(~(a > 0))
    if bad.size:
        return E0Check(False, int(bad[0]), "non-positive entry")
    g = a.reshape(k * k, m)
    viol = ~(g[:, :-1] < 0.5 * g[:, 1:])
    if viol.any():
        j, i = np.argwhere(viol)[0]
        return E0Check(False, int(j * m + i), "entry not below half of its successor")
    return E0Check(True)


def sample_E0(k: int, seed=None) -> np.ndarray:
    """Random member of E0: group starts in [0.5, 1], ratios in [2.05, 2.5]."""
    _check_k(k)
    if k >= _MAGNITUDE_WARN_K:
        log.warning("k=%d: E0 entries reach %.1e", k, SAMPLE_RATIO_HIGH ** (2 * k * k - 1))
    rng = np.random.default_rng(seed)
    m = 2 * k * k
    start = rng.uniform(0.5, 1.0, size=(k * k, 1))
    # uniform on (low, high] via 1 - U with U in [0, 1)
    ratios = SAMPLE_RATIO_HIGH - (SAMPLE_RATIO_HIGH - SAMPLE_RATIO_LOW) * rng.random((k * k, m - 1))
    a = start * np.concatenate([np.ones((k * k, 1)), np.cumprod(ratios, axis=1)], axis=1)
    return a.reshape(-1)


def second_layer_values(a, k: int | None = None) -> np.ndarray:
    """Per-group second differences, with zeros padded before each group start."""
    a = np.asarray(a, dtype=np.float64)
    if k is None:
        k = round((a.size / 2) ** 0.25)
    chk = check_E0(a, k)
    if not chk:
        raise E0Error(f"not in E0 at index {chk.index}: {chk.reason}")
    g = a.reshape(k * k, 2 * k * k)
    padded = np.pad(g, ((0, 0), (2, 0)))
    v = padded[:, 2:] - 2 * padded[:, 1:-1] + padded[:, :-2]
    return v.reshape(-1)


def pwl_to_affine(values_at_integers, basis_size: int) -> tuple[np.ndarray, float]:
    """Coefficients over ``(x - m)^+``, m = 0..basis_size-1, plus a bias.

    The result matches ``values_at_integers`` at 0, 1, ..., len-1 and is
    linear between consecutive integers.  Coefficients past the last slope
    change are zero.
    """
    v = np.asarray(values_at_integers, dtype=np.float64)
    if v.size < 1:
        raise ValueError("need at least one value")
    if basis_size < v.size - 1:
        raise ValueError(f"basis of size {basis_size} cannot hold {v.size - 1} slopes")
    slopes = np.diff(v)
    coeffs = np.zeros(basis_size)
    coeffs[: slopes.size] = np.diff(slopes, prepend=0.0)
    return coeffs, float(v[0])


def layer2_integer_values(a, k: int) -> np.ndarray:
    """Values of each second-layer node at the integers 0..2k^2-1, shape (2k^2, 2k^2)."""
    m = 2 * k * k
    step = 1.0 / (4 * k * k)
    v = second_layer_values(a, k).reshape(k * k, m)  # [group j, node i]
    pts = grid_points(k).points.reshape(k * k, m)
    slope = v / step
    # line through (x_i - step, 0) and (x_i, v) on [2j, 2j+1]
    zero_at = pts - step
    j = np.arange(k * k)[:, None]
    left = slope * (2 * j - zero_at)
    right = slope * (2 * j + 1 - zero_at)
    out = np.empty((m, m))
    out[:, 0::2] = left.T
    out[:, 1::2] = right.T
    return out


def build_wide_target(k: int, a, n: int = 1) -> Network:
    """Width-2k^2, depth-3 network whose output at grid point m equals ``a[m]``.

    Only the first input coordinate is used; further coordinates get zero weight.
    """
    _check_k(k)
    if n < 1:
        raise ValueError("n must be positive")
    m = 2 * k * k
    vals = layer2_integer_values(a, k)

    W1 = np.zeros((m, n))
    W1[:, 0] = 1.0
    b1 = -np.arange(m, dtype=np.float64)

    W2 = np.empty((m, m))
    b2 = np.empty(m)
    for i in range(m):
        W2[i], b2[i] = pwl_to_affine(vals[i], m)

    W3 = np.ones((1, m))
    b3 = np.zeros(1)
    return Network(n, (Layer(W1, b1, RELU), Layer(W2, b2, RELU), Layer(W3, b3, IDENTITY)))


def grid_inputs(k: int, n: int = 1, fill: float = 0.0) -> np.ndarray:
    pts = grid_points(k).points
    out = np.full((pts.size, n), fill)
    out[:, 0] = pts
    return out


def interpolation_error(net: Network, k: int, a) -> float:
    """Largest relative deviation from ``a`` over the grid points."""
    a = np.asarray(a, dtype=np.float64)
    got = net(grid_inputs(k, net.input_dim))[:, 0]
    return float(np.max(np.abs(got - a) / a))


def save_e0_csv(a, path) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.asarray(a).reshape(-1)))


def load_e0_csv(path) -> np.ndarray:
    rows = [ln.strip() for ln in Path(path).read_text().splitlines()]
    values = []
    for lineno, row in enumerate(rows, 1):
        if not row:
            continue
        try:
            values.append(float(row))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: not a number: {row!r}") from None
    return np.array(values)
