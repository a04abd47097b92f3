"""Monte-Carlo vote sampling under joint weight+input noise, and certification.

A smoothed classifier votes by drawing, per vote, fresh Gaussian noise ``u``
on every weight entry (std ``sigma_weight``) and fresh Gaussian noise ``v``
on the input (std ``sigma_input``), then taking the argmax of the perturbed
network at the perturbed input.  ``certify`` estimates the top class with a
small selection round, lower-bounds its vote probability with an exact
one-sided Clopper-Pearson bound from a large estimation round, and converts
that bound into an L2 radius; if the lower bound does not clear 1/2 it
abstains.

Weight-noise sampling modes (NoiseConfig.weight_mode):

* ``projected`` (default) -- per layer, add ``sigma_weight * ||z|| * e`` with
  ``e ~ N(0, I)`` to the layer's output.  Because each weight matrix acts on
  exactly one vector per forward pass and ``U z | z ~ N(0, sigma^2 ||z||^2 I)``
  for an i.i.d. Gaussian matrix ``U``, this draws from exactly the same
  output distribution as materializing a fresh full weight-noise matrix,
  at a fraction of the random numbers.
* ``matrix`` -- literally materialize a fresh Gaussian matrix per vote.
* ``cache`` -- approximation: pre-draw ``cache_size`` weight-noise sets and
  resample them with replacement per vote.  Off by default; vote
  probabilities are then only as diverse as the cache.

All modes share the input-noise handling and are deterministic given the
model, input, and stream: identical seeds reproduce identical votes
bit-for-bit.  Ties in the vote argmax always break to the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from . import rng
from .bounds import vote_probability_gap
from .nn import MlpModel

ABSTAIN = -1

_CHUNK = 4096
_MATRIX_CHUNK_BUDGET = 1 << 22  # doubles of weight noise materialized per chunk


@dataclass(frozen=True)
class NoiseConfig:
    """Noise levels, base seed and weight-noise sampling mode.

    ``sigma_weight=None`` means "same as sigma_input".  ``base_seed`` roots
    the per-sample streams: sample ``i`` in phase ``p`` draws from
    ``stream(base_seed, i, p)``, so results never depend on evaluation order.
    """

    sigma_input: float
    sigma_weight: float | None = None
    base_seed: int = 0
    weight_mode: str = "projected"
    cache_size: int = 0

    def __post_init__(self) -> None:
        for name in ("sigma_input", "sigma_weight"):
            v = getattr(self, name)
            if v is None:
                continue
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.weight_mode not in ("projected", "matrix", "cache"):
            raise ValueError(f"unknown weight_mode {self.weight_mode!r}")
        if self.weight_mode == "cache" and self.cache_size < 1:
            raise ValueError("cache mode needs cache_size >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")

    @property
    def resolved_sigma_weight(self) -> float:
        return self.sigma_input if self.sigma_weight is None else self.sigma_weight


@dataclass(frozen=True)
class VoteCounts:
    """Vote tally over the classes; counts always sum to draws."""

    counts: tuple[int, ...]
    draws: int

    def top(self) -> int:
        """Most-voted class, ties to the lowest index."""
        return self.counts.index(max(self.counts))


@dataclass(frozen=True)
class CertifyResult:
    predicted: int  # class index, or ABSTAIN
    pa_lower: float
    radius: float
    alpha: float
    selection: VoteCounts
    estimation: VoteCounts

    @property
    def abstained(self) -> bool:
        return self.predicted == ABSTAIN


def _chunk_size(model: MlpModel, mode: str) -> int:
    if mode != "matrix":
        return _CHUNK
    largest = max(w.size for w in model.layers)
    return max(1, min(_CHUNK, _MATRIX_CHUNK_BUDGET // largest))


def _noisy_logits(model, x, noise: NoiseConfig, num: int, g: np.random.Generator):
    """Yield chunks of logits of the jointly-perturbed network at x.

    Draw order per chunk is fixed (input noise, then each layer's weight
    noise in order) so identical streams reproduce identical logits.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.in_dim:
        raise ValueError(f"input shape {x.shape} incompatible with model input dim {model.in_dim}")
    if num < 1:
        raise ValueError("need at least one draw")
    si = float(noise.sigma_input)
    sw = float(noise.resolved_sigma_weight)
    mode = noise.weight_mode
    chunk = _chunk_size(model, mode)
    last = model.n_layers - 1

    cache = None
    if mode == "cache" and sw > 0.0:
        cache = [
            [sw * g.standard_normal(w.shape) for w in model.layers]
            for _ in range(noise.cache_size)
        ]

    done = 0
    while done < num:
        b = min(chunk, num - done)
        done += b
        if si > 0.0:
            Z = x[None, :] + si * g.standard_normal((b, x.shape[0]))
        else:
            Z = np.broadcast_to(x, (b, x.shape[0]))
        if mode == "cache" and sw > 0.0:
            idx = g.integers(0, noise.cache_size, size=b)
            for i, w in enumerate(model.layers):
                A = Z @ w.T
                for ui in np.unique(idx):
                    sel = idx == ui
                    A[sel] += Z[sel] @ cache[ui][i].T
                Z = np.maximum(A, 0.0) if i != last else A
        elif mode == "matrix" and sw > 0.0:
            for i, w in enumerate(model.layers):
                U = sw * g.standard_normal((b,) + w.shape)
                A = Z @ w.T + np.einsum("boi,bi->bo", U, Z)
                Z = np.maximum(A, 0.0) if i != last else A
        else:  # projected, or no weight noise at all
            for i, w in enumerate(model.layers):
                A = Z @ w.T
                if sw > 0.0:
                    A += sw * np.linalg.norm(Z, axis=1)[:, None] * g.standard_normal((b, w.shape[0]))
                Z = np.maximum(A, 0.0) if i != last else A
        yield Z


def _as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return rng.stream(int(stream))


def sample_under_noise(
    model: MlpModel, x, num: int, noise: NoiseConfig, stream
) -> VoteCounts:
    """Tally argmax votes of the jointly-perturbed network over ``num`` draws.

    ``stream`` is either an integer seed or a ready ``np.random.Generator``.
    """
    g = _as_generator(stream)
    k = model.out_dim
    counts = np.zeros(k, dtype=np.int64)
    for Z in _noisy_logits(model, x, noise, num, g):
        counts += np.bincount(np.argmax(Z, axis=1), minlength=k)
    return VoteCounts(counts=tuple(int(c) for c in counts), draws=num)


def majority_vote_predict(model: MlpModel, x, num: int, noise: NoiseConfig, stream) -> int:
    """Most-voted class over ``num`` draws (ties to the lowest index)."""
    return sample_under_noise(model, x, num, noise, stream).top()


def lower_conf_bound(successes: int, draws: int, confidence: float) -> float:
    """One-sided Clopper-Pearson lower confidence bound on a binomial p.

    The largest p with P[Bin(draws, p) >= successes] <= 1 - confidence,
    i.e. the (1-confidence) quantile of Beta(successes, draws-successes+1),
    found by bisection on the regularized incomplete beta to 1e-12.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    if not 0 <= successes <= draws:
        raise ValueError(f"successes must lie in [0, {draws}]")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    if successes == 0:
        return 0.0
    alpha = 1.0 - confidence
    a = float(successes)
    b = float(draws - successes + 1)
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if betainc(a, b, mid) > alpha:
            hi = mid
        else:
            lo = mid
    return lo


def certified_radius(pa: float, pb: float, sigma: float) -> float:
    """L2 radius sqrt(-2 sigma^2 ln(1 - (sqrt(pa) - sqrt(pb))^2)).

    ``pa`` is a lower bound on the top class's vote probability, ``pb`` an
    upper bound on the runner-up's; pa is clamped to 1 - 1e-12 so the result
    is always finite.  Zero when pa == pb.
    """
    if not np.isfinite(sigma) or sigma < 0.0:
        raise ValueError("sigma must be finite and >= 0")
    return float(sigma * np.sqrt(2.0 * vote_probability_gap(pa, pb)))


def certify(
    model: MlpModel,
    x,
    noise: NoiseConfig,
    n_selection: int = 100,
    n_estimation: int = 100_000,
    alpha: float = 0.001,
    sample_index: int = 0,
) -> CertifyResult:
    """Certify one input: select the top class, bound its vote probability,
    convert to a radius, abstain if the bound does not clear 1/2.

    Selection and estimation use disjoint streams derived from
    (noise.base_seed, sample_index, phase), so results are reproducible and
    independent of processing order.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    sel = sample_under_noise(
        model, x, n_selection, noise, rng.stream(noise.base_seed, sample_index, rng.PHASE_SELECTION)
    )
    guess = sel.top()
    est = sample_under_noise(
        model, x, n_estimation, noise, rng.stream(noise.base_seed, sample_index, rng.PHASE_ESTIMATION)
    )
    pa_lower = lower_conf_bound(est.counts[guess], n_estimation, 1.0 - alpha)
    if pa_lower <= 0.5:
        return CertifyResult(ABSTAIN, pa_lower, 0.0, alpha, sel, est)
    radius = certified_radius(pa_lower, 1.0 - pa_lower, noise.sigma_input)
    return CertifyResult(guess, pa_lower, radius, alpha, sel, est)


def empirical_margin_loss(
    model: MlpModel, inputs, labels, gamma: float, noise: NoiseConfig, num: int
) -> float:
    """Fraction of examples misvoted by the gamma-margin smoothed classifier.

    Per draw, the label class scores a vote only when it beats every other
    logit by more than ``gamma``; every other class gets a ``gamma`` head
    start against its own competitors.  The class with the most votes wins
    (ties to the lowest index); an example counts as a loss when the winner
    is not its label.  gamma = 0 with zero noise reduces to the plain 0-1
    error.  Monotone non-decreasing in gamma at fixed seeds.
    """
    X = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("inputs must be (m, d) with matching (m,) labels")
    if gamma < 0.0 or not np.isfinite(gamma):
        raise ValueError("gamma must be finite and >= 0")
    k = model.out_dim
    if k == 1:
        return 0.0
    cols = np.arange(k)
    wrong = 0
    for i in range(X.shape[0]):
        g = rng.stream(noise.base_seed, i, rng.PHASE_MARGIN)
        counts = np.zeros(k, dtype=np.int64)
        for Z in _noisy_logits(model, X[i], noise, num, g):
            part = np.partition(Z, -2, axis=1)
            top, second = part[:, -1], part[:, -2]
            am = np.argmax(Z, axis=1)
            max_others = np.where(cols[None, :] == am[:, None], second[:, None], top[:, None])
            ind = Z + gamma > max_others
            ind[:, y[i]] = Z[:, y[i]] > max_others[:, y[i]] + gamma
            counts += ind.sum(axis=0)
        if int(np.argmax(counts)) != y[i]:
            wrong += 1
    return wrong / X.shape[0]


def smoothed_accuracy(model: MlpModel, inputs, labels, noise: NoiseConfig, num: int) -> float:
    """Majority-vote accuracy over a dataset, ``num`` votes per example."""
    X = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels)
    hits = 0
    for i in range(X.shape[0]):
        g = rng.stream(noise.base_seed, i, rng.PHASE_EVAL)
        hits += majority_vote_predict(model, X[i], num, noise, g) == y[i]
    return hits / X.shape[0]


def certified_accuracy_curve(results, labels, radii) -> np.ndarray:
    """Fraction of examples both correct and certified at radius >= r, per r.

    Abstentions count as incorrect at every radius, so the curve at r = 0 is
    the certified (non-abstaining) accuracy.  Non-increasing in r.
    """
    rs = np.asarray(radii, dtype=np.float64)
    y = np.asarray(labels)
    if len(results) != y.shape[0]:
        raise ValueError("results and labels must have equal length")
    if len(results) == 0:
        raise ValueError("need at least one certification result")
    pred = np.array([r.predicted for r in results])
    rad = np.array([r.radius for r in results])
    correct = pred == y
    return np.array([np.mean(correct & (rad >= r)) for r in rs])
