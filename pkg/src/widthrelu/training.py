"""Backpropagation and mini-batch AdaDelta for fully-connected ReLU networks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .network import IDENTITY, RELU, Layer, Network, ShapeError

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    learning_rate: float = 1.0
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-6
    batch_size: int = 64
    epochs: int = 100
    seed: int = 0
    record_best: bool = True

    def __post_init__(self):
        if not 0 < self.adadelta_rho < 1:
            raise ValueError("adadelta_rho must lie in (0, 1)")
        if self.adadelta_eps <= 0:
            raise ValueError("adadelta_eps must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def init_network(widths, rng: np.random.Generator, target: bool = False) -> Network:
    """Random ReLU net with layer widths ``[input, hidden..., output]``.

    Approximators use He initialisation (N(0, 2/fan_in) weights, zero biases).
    With ``target=True`` weights are standard normal and biases uniform on [-1, 1).
    """
    widths = list(widths)
    if len(widths) < 2 or min(widths) < 1:
        raise ShapeError(f"invalid layer widths {widths}")
    layers = []
    for t, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        if target:
            W = rng.standard_normal((fan_out, fan_in))
            b = rng.uniform(-1.0, 1.0, fan_out)
        else:
            W = rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_out, fan_in))
            b = np.zeros(fan_out)
        act = IDENTITY if t == len(widths) - 2 else RELU
        layers.append(Layer(W, b, act))
    return Network(widths[0], tuple(layers))


class FlatParams:
    """All weights and biases of a network in one vector, with per-layer views."""

    def __init__(self, net: Network):
        self.input_dim = net.input_dim
        self.activations = [layer.activation for layer in net.layers]
        self.shapes = [layer.weights.shape for layer in net.layers]
        sizes = [r * c + r for r, c in self.shapes]
        self.theta = np.empty(sum(sizes))
        self.W, self.b = self._views(self.theta)
        for W, b, layer in zip(self.W, self.b, net.layers):
            W[...] = layer.weights
            b[...] = layer.biases

    def _views(self, flat: np.ndarray):
        Ws, bs, off = [], [], 0
        for r, c in self.shapes:
            Ws.append(flat[off : off + r * c].reshape(r, c))
            off += r * c
            bs.append(flat[off : off + r])
            off += r
        return Ws, bs

    def to_network(self, theta: np.ndarray | None = None) -> Network:
        Ws, bs = self._views(self.theta if theta is None else theta)
        layers = tuple(Layer(W.copy(), b.copy(), a) for W, b, a in zip(Ws, bs, self.activations))
        return Network(self.input_dim, layers)

    def predict(self, X: np.ndarray) -> np.ndarray:
        h = X
        for W, b, act in zip(self.W, self.b, self.activations):
            h = h @ W.T + b
            if act == RELU:
                np.maximum(h, 0.0, out=h)
        return h

    def loss_and_grad(self, X: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
        """MSE over the batch and its gradient as a flat vector aligned with ``theta``."""
        hs = [X]
        for W, b, act in zip(self.W, self.b, self.activations):
            z = hs[-1] @ W.T + b
            if act == RELU:
                z = np.maximum(z, 0.0)
            hs.append(z)
        resid = hs[-1] - Y
        loss = float(np.mean(resid**2))

        grad = np.empty_like(self.theta)
        gW, gb = self._views(grad)
        # mean over batch and output components
        delta = (2.0 / resid.size) * resid
        for t in range(len(self.W) - 1, -1, -1):
            if self.activations[t] == RELU:
                delta = delta * (hs[t + 1] > 0)  # subgradient 0 at the kink
            gW[t][...] = delta.T @ hs[t]
            gb[t][...] = delta.sum(axis=0)
            if t:
                delta = delta @ self.W[t]
        return loss, grad


def _batch(net: Network, inputs, targets) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(inputs, dtype=np.float64)
    Y = np.asarray(targets, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, net.input_dim)
    if Y.ndim == 1:
        Y = Y.reshape(X.shape[0], -1)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    if X.shape[1] != net.input_dim or Y.shape != (X.shape[0], net.output_dim):
        raise ShapeError(f"inputs {X.shape} / targets {Y.shape} do not fit the network")
    return X, Y


def loss_and_gradients(net: Network, inputs, targets):
    """MSE and its exact gradients, one ``(dW, db)`` pair per layer."""
    X, Y = _batch(net, inputs, targets)
    params = FlatParams(net)
    loss, grad = params.loss_and_grad(X, Y)
    gW, gb = params._views(grad)
    return loss, list(zip(gW, gb))


@dataclass
class AdaDeltaState:
    sq_grad: np.ndarray
    sq_update: np.ndarray

    @classmethod
    def zeros(cls, size: int) -> "AdaDeltaState":
        return cls(np.zeros(size), np.zeros(size))


def adadelta_step(state: AdaDeltaState, grad: np.ndarray, config: TrainConfig) -> np.ndarray:
    """Advance the running averages in place and return the parameter update."""
    if grad.shape != state.sq_grad.shape:
        raise ShapeError(f"gradient shape {grad.shape} does not match state {state.sq_grad.shape}")
    rho, eps = config.adadelta_rho, config.adadelta_eps
    state.sq_grad *= rho
    state.sq_grad += (1.0 - rho) * grad * grad
    update = -config.learning_rate * np.sqrt(state.sq_update + eps) / np.sqrt(state.sq_grad + eps) * grad
    state.sq_update *= rho
    state.sq_update += (1.0 - rho) * update * update
    return update


@dataclass
class FitResult:
    network: Network
    best_mse: float
    initial_mse: float
    curve: list[float] = field(default_factory=list)
    best_epoch: int = 0  # 0 means the initial parameters were never beaten


def fit(approx: Network, train_set, eval_set, config: TrainConfig) -> FitResult:
    """Mini-batch AdaDelta; keeps the parameters with the lowest eval-set MSE.

    ``train_set`` and ``eval_set`` are ``(inputs, targets)`` pairs.  The
    curve holds the eval MSE after every epoch.
    """
    Xtr, Ytr = _batch(approx, *train_set)
    Xev, Yev = _batch(approx, *eval_set)
    params = FlatParams(approx)
    state = AdaDeltaState.zeros(params.theta.size)
    rng = np.random.default_rng(config.seed)

    def eval_mse() -> float:
        return float(np.mean((params.predict(Xev) - Yev) ** 2))

    initial = eval_mse()
    best, best_theta, best_epoch = initial, params.theta.copy(), 0
    curve = []
    m = Xtr.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(m)
        for start in range(0, m, config.batch_size):
            idx = order[start : start + config.batch_size]
            _, grad = params.loss_and_grad(Xtr[idx], Ytr[idx])
            params.theta += adadelta_step(state, grad, config)
        cur = eval_mse()
        curve.append(cur)
        if not np.isfinite(cur):
            log.warning("eval MSE diverged at epoch %d", epoch)
            break
        if cur < best or not config.record_best:
            best, best_theta, best_epoch = cur, params.theta.copy(), epoch
        log.debug("epoch %d eval mse %.3e", epoch, cur)
    return FitResult(params.to_network(best_theta), best, initial, curve, best_epoch)
