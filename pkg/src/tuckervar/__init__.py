"""Bayesian Tucker-factorized vector autoregression with Granger-network inference."""

__version__ = "0.1.0"

from .granger import (  # noqa: F401
    DecisionConfig,
    GcNetwork,
    MetricsReport,
    decide_network,
    expected_loss,
    inclusion_probabilities,
    r_squared,
    roc_sweep,
    score_network,
)
from .sampler import (  # noqa: F401
    GibbsSampler,
    PanelState,
    PosteriorDraws,
    SamplerConfig,
    build_h_matrix,
    fit,
    gibbs_sweep,
    prune_ranks,
    select_lags,
)
from .tensor import (  # noqa: F401
    TuckerFactors,
    kronecker,
    mode_n_matricize,
    mode_n_product,
    outer3,
    tucker_reconstruct,
)
from .var import (  # noqa: F401
    GcTruth,
    NotComputable,
    PanelData,
    PanelParams,
    VarParams,
    companion_matrix,
    fit_ols,
    is_stable,
    make_block_diagonal_truth,
    make_modular_truth,
    simulate,
    simulate_panel,
    stationary_mean,
)
