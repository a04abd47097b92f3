"""Independent checking machinery: slow, simple implementations used to
validate the fast paths, plus an empirical attack on certified radii.

Nothing here shares numeric kernels with the modules it checks beyond the
plain float64 array type: eigenvalues come from classical Jacobi rotations
(not power iteration), binomial tails from exact extended-precision
summation (not the incomplete beta), output correlations from Monte-Carlo
sampling (not the analytic cosine identity), and certified radii are probed
by exhaustively re-voting on a perturbation grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from . import rng
from .nn import MlpModel, Matrix, _as_f64
from .smoothing import NoiseConfig, majority_vote_predict


def jacobi_eigs(sym: Matrix, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by classical Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below ``tol`` scaled
    by the matrix magnitude (floored at ``tol`` itself for unit-scale
    input).  Returns eigenvalues in ascending order; asymmetric input is an
    error.
    """
    A = _as_f64(sym).copy()
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    A = (A + A.T) / 2.0
    threshold = tol * max(1.0, float(np.linalg.norm(A)))

    def off(M: np.ndarray) -> float:
        od = M.copy()
        np.fill_diagonal(od, 0.0)
        return float(np.linalg.norm(od))

    for _ in range(max_sweeps):
        if off(A) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
    return np.sort(np.diag(A))


def binomial_tail(k: int, n: int, p: float) -> float:
    """P[Bin(n, p) >= k] by exact extended-precision summation (n <= 1000)."""
    if n < 1 or n > 1000:
        raise ValueError("n must lie in [1, 1000] for exact summation")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}]")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if k == 0:
        return 1.0
    with mp.workdps(50):
        pp = mp.mpf(p)
        total = mp.mpf(0)
        for i in range(k, n + 1):
            total += mp.binomial(n, i) * pp**i * (1 - pp) ** (n - i)
        return float(total)


def mc_correlation(
    model: MlpModel, n_draws: int, sigma: float, seed: int = 0, x=None
) -> Matrix:
    """Sample Pearson correlation of the LINEARIZED network's outputs under
    input noise ``v ~ N(0, sigma^2 I)``.

    The linearized network applies the layer matrices in sequence with every
    ReLU dropped.  Accumulates first/second moments in chunks, so memory
    stays bounded; deterministic given the seed.
    """
    if n_draws < 2:
        raise ValueError("need at least 2 draws")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    d, k = model.in_dim, model.out_dim
    base = np.zeros(d) if x is None else np.asarray(x, dtype=np.float64)
    if base.shape != (d,):
        raise ValueError(f"x must have shape ({d},)")
    g = rng.stream(seed, rng.PHASE_CORR)
    s1 = np.zeros(k)
    s2 = np.zeros((k, k))
    done = 0
    while done < n_draws:
        b = min(65536, n_draws - done)
        done += b
        Z = base[None, :] + sigma * g.standard_normal((b, d))
        for w in model.layers:
            Z = Z @ w.T
        s1 += Z.sum(axis=0)
        s2 += Z.T @ Z
    mean = s1 / n_draws
    cov = s2 / n_draws - np.outer(mean, mean)
    sd = np.sqrt(np.diag(cov))
    sd = np.where(sd == 0.0, 1.0, sd)
    corr = cov / np.outer(sd, sd)
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return corr


@dataclass(frozen=True)
class AttackReport:
    """Outcome of a grid attack against one certified input."""

    sample_index: int
    certified_class: int
    certified_radius: float
    budget: float
    grid_density: int
    votes_per_probe: int
    n_probes: int
    n_flips: int
    min_flip_norm: float | None
    worst_perturbation: tuple[float, ...] | None

    def as_dict(self) -> dict:
        return {
            "sample_index": self.sample_index,
            "certified_class": self.certified_class,
            "certified_radius": self.certified_radius,
            "budget": self.budget,
            "grid_density": self.grid_density,
            "votes_per_probe": self.votes_per_probe,
            "n_probes": self.n_probes,
            "n_flips": self.n_flips,
            "min_flip_norm": self.min_flip_norm,
            "worst_perturbation": (
                None if self.worst_perturbation is None else list(self.worst_perturbation)
            ),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


def grid_attack(
    model: MlpModel,
    x,
    certified_class: int,
    certified_radius: float,
    budget: float,
    noise: NoiseConfig,
    grid_density: int = 50,
    votes_per_probe: int = 10_000,
    sample_index: int = 0,
) -> AttackReport:
    """Probe every grid perturbation of norm <= budget and re-vote.

    Exhaustive per-axis grids are only tractable at tiny dimension, so the
    model input dim must be <= 3.  A flip is a probe whose majority vote
    differs from the certified class; the reported worst perturbation is the
    smallest-norm flip (None when the certificate held everywhere).
    """
    x = np.asarray(x, dtype=np.float64)
    d = model.in_dim
    if d > 3:
        raise ValueError("grid_attack is exhaustive; input dim must be <= 3")
    if x.shape != (d,):
        raise ValueError(f"x must have shape ({d},)")
    if budget < 0.0:
        raise ValueError("budget must be >= 0")
    if grid_density < 2:
        raise ValueError("grid_density must be >= 2")
    if votes_per_probe < 1:
        raise ValueError("votes_per_probe must be >= 1")
    if certified_class < 0:
        raise ValueError("certified_class must be a real class index (not ABSTAIN)")
    if budget == 0.0:
        # nothing to probe: a zero-radius certificate is vacuously clean
        return AttackReport(
            sample_index=sample_index,
            certified_class=certified_class,
            certified_radius=float(certified_radius),
            budget=0.0,
            grid_density=grid_density,
            votes_per_probe=votes_per_probe,
            n_probes=0,
            n_flips=0,
            min_flip_norm=None,
            worst_perturbation=None,
        )

    axis = np.linspace(-budget, budget, grid_density)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    probes = np.stack([a.ravel() for a in grids], axis=1)
    norms = np.linalg.norm(probes, axis=1)
    keep = norms <= budget + 1e-12
    probes, norms = probes[keep], norms[keep]

    n_flips = 0
    min_norm: float | None = None
    worst: tuple[float, ...] | None = None
    for j in range(probes.shape[0]):
        g = rng.stream(noise.base_seed, sample_index, rng.PHASE_ATTACK, j)
        vote = majority_vote_predict(model, x + probes[j], votes_per_probe, noise, g)
        if vote != certified_class:
            n_flips += 1
            nj = float(norms[j])
            if min_norm is None or nj < min_norm:
                min_norm = nj
                worst = tuple(float(v) for v in probes[j])
    return AttackReport(
        sample_index=sample_index,
        certified_class=certified_class,
        certified_radius=float(certified_radius),
        budget=float(budget),
        grid_density=grid_density,
        votes_per_probe=votes_per_probe,
        n_probes=int(probes.shape[0]),
        n_flips=n_flips,
        min_flip_norm=min_norm,
        worst_perturbation=worst,
    )
