"""Spectral diagnostics and the row-decorrelation regularizer.

The central objects: the collapsed weight matrix (the product of all layer
matrices, i.e. the linear map the network computes when every ReLU is
dropped), the matrix of cosine similarities between its rows -- which equals
the Pearson correlation matrix of the collapsed map's outputs under any
spherical Gaussian input -- and the entrywise L1 norm of that cosine matrix,
used as a training regularizer.  An upper bound on the squared spectral norm
comes from the infinity norm of the Gram matrix (a Gershgorin-style bound).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import rng
from .nn import Gradients, Matrix, MlpModel, _as_f64

logger = logging.getLogger(__name__)


def spectral_norm(m: Matrix, tol: float = 1e-10, max_iters: int = 10000, seed: int = 0) -> float:
    """Largest singular value via power iteration on m^T m.

    Deterministic given ``seed`` (the start vector is drawn from a derived
    stream).  Stops when the estimate's relative change is <= ``tol``; if
    ``max_iters`` is exhausted first, the best estimate is returned and a
    warning is logged.
    """
    m = _as_f64(m)
    if not np.any(m):
        raise ValueError("spectral_norm of an all-zero matrix")
    g = rng.stream(seed, rng.PHASE_POWER)
    v = g.standard_normal(m.shape[1])
    for _ in range(8):
        mv = m @ v
        if np.linalg.norm(mv) > 0.0:
            break
        v = g.standard_normal(m.shape[1])  # start vector was in the null space
    sigma = np.linalg.norm(mv)
    for _ in range(max_iters):
        w = m.T @ mv
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return float(sigma)
        v = w / nw
        mv = m @ v
        new_sigma = np.linalg.norm(mv)
        if abs(new_sigma - sigma) <= tol * max(new_sigma, np.finfo(np.float64).tiny):
            return float(new_sigma)
        sigma = new_sigma
    logger.warning("power iteration did not converge in %d iterations", max_iters)
    return float(sigma)


def collapsed_weight(model: MlpModel) -> Matrix:
    """Product of all layer matrices, last-to-first: shape (out_dim, in_dim)."""
    return reduce(lambda acc, w: w @ acc, model.layers[1:], model.layers[0])


def gershgorin_bound(m: Matrix) -> float:
    """Infinity norm of m m^T: max over rows i of sum_j |<w_i, w_j>|.

    Always >= the squared spectral norm of ``m``.
    """
    m = _as_f64(m)
    if not np.any(m):
        raise ValueError("gershgorin_bound of an all-zero matrix")
    gram = m @ m.T
    return float(np.abs(gram).sum(axis=1).max())


def _row_cosines(m: Matrix) -> tuple[Matrix, np.ndarray, Matrix, np.ndarray]:
    """Cosine matrix plus (row norms, unit rows, zero-row indices)."""
    norms = np.linalg.norm(m, axis=1)
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    units = m / safe[:, None]
    cos = units @ units.T
    np.clip(cos, -1.0, 1.0, out=cos)
    np.fill_diagonal(cos, 1.0)
    if zero.any():
        cos[zero, :] = 0.0
        cos[:, zero] = 0.0
        cos[zero, zero] = 1.0
    return cos, norms, units, np.flatnonzero(zero)


def correlation_matrix(m: Matrix, return_zero_rows: bool = False):
    """Cosine similarities between the rows of ``m``.

    Equals the Pearson correlation matrix of the outputs of the linear map
    ``x -> m x`` when ``x`` carries spherical Gaussian noise.  All-zero rows
    (whose output is constant, so correlation is undefined) get 1 on the
    diagonal and 0 elsewhere; pass ``return_zero_rows=True`` to also receive
    their indices.
    """
    m = _as_f64(m)
    cos, _, _, zero_rows = _row_cosines(m)
    if return_zero_rows:
        return cos, tuple(int(i) for i in zero_rows)
    return cos


def l11_norm(m: Matrix) -> float:
    """Sum of the absolute values of all entries."""
    return float(np.abs(np.asarray(m, dtype=np.float64)).sum())


def regularizer_and_gradient(model: MlpModel) -> tuple[float, Gradients]:
    """Entrywise L1 norm of the collapsed-weight cosine matrix, with gradients.

    Value: sum_{i,j} |cos(w_i, w_j)| over rows of the collapsed matrix (the
    diagonal contributes exactly k and carries no gradient).  Gradients are
    chained through the absolute value (subgradient 0 at 0), the cosine
    normalization, the Gram matrix, and the layer product, using cached
    left/right partial products.  Zero rows are excluded from the gradient,
    mirroring correlation_matrix's handling.
    """
    W = collapsed_weight(model)
    cos, norms, units, zero_rows = _row_cosines(W)
    value = float(np.abs(cos).sum())

    sign = np.sign(cos)
    np.fill_diagonal(sign, 0.0)
    if zero_rows.size:
        sign[zero_rows, :] = 0.0
        sign[:, zero_rows] = 0.0

    # d(value)/d(unit rows) = 2 * sign @ units, then project each row onto the
    # tangent space of its unit sphere and divide by the row norm.
    dU = 2.0 * (sign @ units)
    rowdot = np.einsum("ij,ij->i", dU, units)
    safe = np.where(norms == 0.0, 1.0, norms)
    dW = (dU - units * rowdot[:, None]) / safe[:, None]
    if zero_rows.size:
        dW[zero_rows, :] = 0.0

    # Chain through the product W = L_i @ layer_i @ R_i via cached partials.
    n = model.n_layers
    rights: list[Matrix] = [None] * n  # type: ignore[list-item]
    acc = None
    for i in range(n):  # rights[i] = W_{i-1} ... W_0, identity for i == 0
        rights[i] = acc
        acc = model.layers[i] if acc is None else model.layers[i] @ acc
    lefts: list[Matrix] = [None] * n  # type: ignore[list-item]
    acc = None
    for i in range(n - 1, -1, -1):  # lefts[i] = W_{n-1} ... W_{i+1}
        lefts[i] = acc
        acc = model.layers[i] if acc is None else acc @ model.layers[i]

    grads = []
    for i in range(n):
        g = dW if lefts[i] is None else lefts[i].T @ dW
        if rights[i] is not None:
            g = g @ rights[i].T
        grads.append(g)
    return value, Gradients(tuple(grads))


@dataclass(frozen=True)
class SpectralReport:
    """Spectral diagnostics of a model, JSON-serializable."""

    per_layer_spectral: tuple[float, ...]
    per_layer_frobenius: tuple[float, ...]
    product_spectral: float
    collapsed_spectral: float
    gershgorin: float
    cosine_matrix: tuple[tuple[float, ...], ...]
    degenerate_rows: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "per_layer_spectral": list(self.per_layer_spectral),
            "per_layer_frobenius": list(self.per_layer_frobenius),
            "product_spectral": self.product_spectral,
            "collapsed_spectral": self.collapsed_spectral,
            "gershgorin": self.gershgorin,
            "cosine_matrix": [list(row) for row in self.cosine_matrix],
            "degenerate_rows": list(self.degenerate_rows),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)

    @property
    def mean_abs_offdiag_cosine(self) -> float:
        c = np.asarray(self.cosine_matrix)
        k = c.shape[0]
        if k < 2:
            return 0.0
        off = ~np.eye(k, dtype=bool)
        return float(np.abs(c[off]).mean())


def spectral_report(model: MlpModel, tol: float = 1e-10, seed: int = 0) -> SpectralReport:
    """Assemble the full spectral diagnostics for a model."""

    def _norm(m: Matrix) -> float:  # all-zero matrices report norm 0 here
        return spectral_norm(m, tol=tol, seed=seed) if np.any(m) else 0.0

    per_spec = tuple(_norm(w) for w in model.layers)
    per_frob = tuple(float(np.linalg.norm(w)) for w in model.layers)
    W = collapsed_weight(model)
    cos, zero_rows = correlation_matrix(W, return_zero_rows=True)
    return SpectralReport(
        per_layer_spectral=per_spec,
        per_layer_frobenius=per_frob,
        product_spectral=float(np.prod(per_spec)),
        collapsed_spectral=_norm(W),
        gershgorin=gershgorin_bound(W) if np.any(W) else 0.0,
        cosine_matrix=tuple(tuple(float(v) for v in row) for row in cos),
        degenerate_rows=zero_rows,
    )
