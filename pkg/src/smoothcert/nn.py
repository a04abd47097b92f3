"""Dense ReLU multi-layer perceptron: forward, reverse-mode gradients, SGD.

All arrays are 64-bit floats.  A model is an immutable stack of weight
matrices; layer ``i`` maps ``dims[i] -> dims[i+1]`` and every layer except
the last is followed by ReLU.  Biases are not separate parameters: callers
that want them append a constant-1 coordinate to their inputs (see
``data.augment``) so the bias column lives inside the first weight matrix.

The ReLU derivative at exactly 0 is taken to be 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng

Matrix = np.ndarray


def _as_f64(a) -> np.ndarray:
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {out.shape}")
    return out


@dataclass(frozen=True)
class MlpModel:
    """Immutable stack of float64 weight matrices, each shaped (out, in)."""

    layers: tuple[Matrix, ...]

    def __post_init__(self) -> None:
        if len(self.layers) < 1:
            raise ValueError("model needs at least one layer")
        prepared = []
        for i, w in enumerate(self.layers):
            w = _as_f64(w).copy()
            if w.shape[0] < 1 or w.shape[1] < 1:
                raise ValueError(f"layer {i} has empty shape {w.shape}")
            if prepared and w.shape[1] != prepared[-1].shape[0]:
                raise ValueError(
                    f"layer {i} input dim {w.shape[1]} != layer {i-1} output dim "
                    f"{prepared[-1].shape[0]}"
                )
            w.flags.writeable = False
            prepared.append(w)
        object.__setattr__(self, "layers", tuple(prepared))

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.layers[0].shape[1],) + tuple(w.shape[0] for w in self.layers)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].shape[0]

    def with_layers(self, layers: Sequence[Matrix]) -> "MlpModel":
        return MlpModel(tuple(layers))


@dataclass(frozen=True)
class Gradients:
    """Per-layer gradient arrays, shapes matching the model's layers."""

    layers: tuple[Matrix, ...]


@dataclass
class ForwardCache:
    """Intermediate values kept by a cached forward pass for backward."""

    inputs: tuple[Matrix, ...]    # layer inputs z_0 .. z_{n-1}
    preacts: tuple[Matrix, ...]   # pre-activations a_1 .. a_n


@dataclass
class SgdState:
    """Momentum velocity buffers, one per layer (mutated in place)."""

    velocities: list[Matrix]

    @classmethod
    def zeros_like(cls, model: MlpModel) -> "SgdState":
        return cls([np.zeros_like(w) for w in model.layers])


def init_model(dims: Sequence[int], seed: int = 0) -> MlpModel:
    """He-style Gaussian init: entries ~ N(0, 2/fan_in), one stream per layer."""
    dims = [int(d) for d in dims]
    if len(dims) < 2:
        raise ValueError("need at least an input and an output dim")
    layers = []
    for i in range(len(dims) - 1):
        g = rng.stream(seed, rng.PHASE_INIT, i)
        scale = np.sqrt(2.0 / dims[i])
        layers.append(g.standard_normal((dims[i + 1], dims[i])) * scale)
    return MlpModel(tuple(layers))


def _check_input(model: MlpModel, x: np.ndarray, batched: bool) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    want = 2 if batched else 1
    if x.ndim != want or x.shape[-1] != model.in_dim:
        raise ValueError(
            f"input shape {x.shape} incompatible with model input dim {model.in_dim}"
        )
    return x


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Logits for a single input vector."""
    z = _check_input(model, x, batched=False)
    last = model.n_layers - 1
    for i, w in enumerate(model.layers):
        z = w @ z
        if i != last:
            z = np.maximum(z, 0.0)
    return z


def forward_with_cache(model: MlpModel, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Logits plus the cache backward() needs, for a single input vector."""
    z = _check_input(model, x, batched=False)
    inputs, preacts = [], []
    last = model.n_layers - 1
    for i, w in enumerate(model.layers):
        inputs.append(z)
        a = w @ z
        preacts.append(a)
        z = np.maximum(a, 0.0) if i != last else a
    return z, ForwardCache(tuple(inputs), tuple(preacts))


def forward_batch(model: MlpModel, X: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Logits (m, k) plus cache for a batch of row-vector inputs (m, d)."""
    Z = _check_input(model, X, batched=True)
    inputs, preacts = [], []
    last = model.n_layers - 1
    for i, w in enumerate(model.layers):
        inputs.append(Z)
        A = Z @ w.T
        preacts.append(A)
        Z = np.maximum(A, 0.0) if i != last else A
    return Z, ForwardCache(tuple(inputs), tuple(preacts))


def _check_cache(model: MlpModel, cache: ForwardCache) -> None:
    if not isinstance(cache, ForwardCache):
        raise ValueError("backward requires the ForwardCache from a cached forward pass")
    if len(cache.inputs) != model.n_layers or len(cache.preacts) != model.n_layers:
        raise ValueError("forward cache does not match the model's layer count")


def backward(model: MlpModel, cache: ForwardCache, upstream: np.ndarray) -> Gradients:
    """Gradients of <upstream, logits> w.r.t. every weight matrix (single input)."""
    _check_cache(model, cache)
    delta = np.asarray(upstream, dtype=np.float64)
    if delta.shape != (model.out_dim,):
        raise ValueError(f"upstream shape {delta.shape} != ({model.out_dim},)")
    grads: list[Matrix] = [None] * model.n_layers  # type: ignore[list-item]
    for i in range(model.n_layers - 1, -1, -1):
        grads[i] = np.outer(delta, cache.inputs[i])
        if i > 0:
            delta = (model.layers[i].T @ delta) * (cache.preacts[i - 1] > 0.0)
    return Gradients(tuple(grads))


def backward_batch(model: MlpModel, cache: ForwardCache, upstream: np.ndarray) -> Gradients:
    """Gradients of sum_r <upstream[r], logits[r]> over a batch (summed)."""
    _check_cache(model, cache)
    delta = np.asarray(upstream, dtype=np.float64)
    if delta.ndim != 2 or delta.shape[1] != model.out_dim:
        raise ValueError(f"upstream shape {delta.shape} incompatible with batch backward")
    grads: list[Matrix] = [None] * model.n_layers  # type: ignore[list-item]
    for i in range(model.n_layers - 1, -1, -1):
        grads[i] = delta.T @ cache.inputs[i]
        if i > 0:
            delta = (delta @ model.layers[i]) * (cache.preacts[i - 1] > 0.0)
    return Gradients(tuple(grads))


def cross_entropy_loss(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Softmax cross-entropy and its logit gradient for one example.

    Computed via a max-shifted log-sum-exp, so the result is finite for any
    finite logits.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError("logits must be a vector")
    if not 0 <= label < z.shape[0]:
        raise ValueError(f"label {label} out of range for {z.shape[0]} classes")
    m = z.max()
    exps = np.exp(z - m)
    total = exps.sum()
    loss = float(np.log(total) + m - z[label])
    grad = exps / total
    grad[label] -= 1.0
    return loss, grad


def cross_entropy_batch(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over a batch and the logit gradient of the mean."""
    Z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels)
    if Z.ndim != 2 or y.shape != (Z.shape[0],):
        raise ValueError("logits must be (m, k) with matching (m,) labels")
    if y.size and (y.min() < 0 or y.max() >= Z.shape[1]):
        raise ValueError("label out of range")
    with np.errstate(invalid="ignore", over="ignore"):
        m = Z.max(axis=1, keepdims=True)
        exps = np.exp(Z - m)
        total = exps.sum(axis=1, keepdims=True)
        rows = np.arange(Z.shape[0])
        losses = np.log(total[:, 0]) + m[:, 0] - Z[rows, y]
        grad = exps / total
        grad[rows, y] -= 1.0
        return float(losses.mean()), grad / Z.shape[0]


def sgd_step(
    model: MlpModel,
    grads: Gradients,
    state: SgdState,
    lr: float,
    momentum: float = 0.0,
    weight_decay: float = 0.0,
) -> MlpModel:
    """One classic momentum-SGD update; returns the updated model.

    v <- momentum*v + g + weight_decay*w ;  w <- w - lr*v.
    Velocity buffers in ``state`` are updated in place.  Non-finite gradients
    abort with FloatingPointError.
    """
    if len(grads.layers) != model.n_layers or len(state.velocities) != model.n_layers:
        raise ValueError("gradient/state layer count does not match the model")
    new_layers = []
    for i, (w, g, v) in enumerate(zip(model.layers, grads.layers, state.velocities)):
        if g.shape != w.shape:
            raise ValueError(f"gradient shape {g.shape} != layer shape {w.shape} at layer {i}")
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient in layer {i}")
        eff = g if weight_decay == 0.0 else g + weight_decay * w
        v *= momentum
        v += eff
        new_layers.append(w - lr * v)
    return MlpModel(tuple(new_layers))


def plain_step(model: MlpModel, grads: Gradients, step_size: float) -> MlpModel:
    """w <- w - step_size * g for every layer (no momentum, no decay)."""
    if len(grads.layers) != model.n_layers:
        raise ValueError("gradient layer count does not match the model")
    for i, g in enumerate(grads.layers):
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient in layer {i}")
    return MlpModel(tuple(w - step_size * g for w, g in zip(model.layers, grads.layers)))
