"""smoothcert: train, certify, and bound noise-smoothed majority-vote MLPs.

The package trains ReLU MLPs under input noise with an optional
row-decorrelation spectral regularizer, certifies per-example L2 robustness
radii by Monte-Carlo voting under joint weight+input Gaussian noise, and
evaluates closed-form generalization bounds from per-layer weight norms.
"""

from .bounds import (
    BoundInputs,
    BoundReport,
    chi2_cdf,
    eps_x,
    evaluate_bound,
    generalization_bound,
    kl_term,
    phi,
    psi,
    tau_solve,
    vote_probability_gap,
)
from .data import (
    Dataset,
    augment,
    load_checkpoint,
    load_idx,
    save_checkpoint,
    synth_blobs,
    synth_digits,
)
from .nn import Gradients, MlpModel, SgdState, forward, init_model
from .oracles import AttackReport, binomial_tail, grid_attack, jacobi_eigs, mc_correlation
from .rng import stream
from .sigma_select import SigmaSearchConfig, SigmaSearchResult, select_sigma
from .smoothing import (
    ABSTAIN,
    CertifyResult,
    NoiseConfig,
    VoteCounts,
    certified_accuracy_curve,
    certified_radius,
    certify,
    empirical_margin_loss,
    lower_conf_bound,
    majority_vote_predict,
    sample_under_noise,
    smoothed_accuracy,
)
from .spectral import (
    SpectralReport,
    collapsed_weight,
    correlation_matrix,
    gershgorin_bound,
    l11_norm,
    regularizer_and_gradient,
    spectral_norm,
    spectral_report,
)
from .train import EpochMetrics, TrainConfig, TrainingDiverged, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN",
    "AttackReport",
    "BoundInputs",
    "BoundReport",
    "CertifyResult",
    "Dataset",
    "EpochMetrics",
    "Gradients",
    "MlpModel",
    "NoiseConfig",
    "SgdState",
    "SigmaSearchConfig",
    "SigmaSearchResult",
    "SpectralReport",
    "TrainConfig",
    "TrainingDiverged",
    "VoteCounts",
    "augment",
    "binomial_tail",
    "certified_accuracy_curve",
    "certified_radius",
    "certify",
    "chi2_cdf",
    "collapsed_weight",
    "correlation_matrix",
    "empirical_margin_loss",
    "eps_x",
    "evaluate",
    "evaluate_bound",
    "forward",
    "generalization_bound",
    "gershgorin_bound",
    "grid_attack",
    "init_model",
    "jacobi_eigs",
    "kl_term",
    "l11_norm",
    "load_checkpoint",
    "load_idx",
    "lower_conf_bound",
    "majority_vote_predict",
    "mc_correlation",
    "phi",
    "psi",
    "regularizer_and_gradient",
    "sample_under_noise",
    "save_checkpoint",
    "select_sigma",
    "smoothed_accuracy",
    "spectral_norm",
    "spectral_report",
    "stream",
    "synth_blobs",
    "synth_digits",
    "tau_solve",
    "train",
    "vote_probability_gap",
]
