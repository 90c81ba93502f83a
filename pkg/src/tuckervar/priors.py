"""Global-local shrinkage machinery: horseshoe scale hierarchy with multiplicative
gamma column shrinkage for factor matrices, and elementwise horseshoe scales for
the core tensor and the intercept.

Half-Cauchy scales are handled through the two-level inverse-gamma auxiliary
decomposition, which keeps every conditional in the sampler conjugate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCALE_FLOOR = 1e-12  # keeps later Gaussian conditionals away from degenerate precisions


def inv_gamma(rng: np.random.Generator, shape, scale, size=None) -> np.ndarray:
    """Draw from InvGamma(shape, scale) with density proportional to x^{-shape-1} e^{-scale/x}."""
    draw = np.asarray(scale) / rng.gamma(np.asarray(shape), 1.0, size=size)
    return np.maximum(draw, SCALE_FLOOR)


def sample_half_cauchy_sq(scale_target: float, rng: np.random.Generator, size=None):
    """Sample ``x^2`` with ``x ~ HalfCauchy(0, scale_target)`` via the auxiliary hierarchy.

    Draws ``aux ~ InvGamma(1/2, 1/scale_target^2)`` and ``x^2 | aux ~
    InvGamma(1/2, 1/aux)``; returns ``(x2, aux)`` so the auxiliary can seed
    later conditional updates.
    """
    if scale_target <= 0:
        raise ValueError("scale_target must be positive")
    aux = inv_gamma(rng, 0.5, 1.0 / scale_target**2, size=size)
    x2 = inv_gamma(rng, 0.5, 1.0 / aux, size=size)
    return x2, aux


def mgps_psi(delta) -> np.ndarray:
    """Column shrinkage weights: cumulative products of the gamma increments."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise ValueError("multiplicative gamma increments must be positive")
    return np.cumprod(delta)


def kappa(sigma2_beta) -> np.ndarray:
    """Shrinkage coefficient ``1 / (1 + prior variance)``; 0 = signal, 1 = full shrinkage."""
    sigma2_beta = np.asarray(sigma2_beta, dtype=float)
    if np.any(sigma2_beta < 0):
        raise ValueError("prior variance must be nonnegative")
    return 1.0 / (1.0 + sigma2_beta)


@dataclass
class FactorHyper:
    """Shrinkage state for one factor matrix (or a stack of same-shaped blocks).

    ``tau2``/``phi`` have shape ``(n_blocks, P, R)``: a single block for shared
    factors, one block for the shared part plus one per subject for the
    row-factor in panel fits. ``lambda2`` and the increment vector ``delta``
    are common to all blocks.
    """

    tau2: np.ndarray
    phi: np.ndarray
    lambda2: float
    delta: np.ndarray

    def __post_init__(self):
        self.tau2 = np.atleast_3d(np.asarray(self.tau2, dtype=float))
        self.phi = np.atleast_3d(np.asarray(self.phi, dtype=float))
        self.delta = np.asarray(self.delta, dtype=float).reshape(-1)
        if self.tau2.shape != self.phi.shape:
            raise ValueError("tau2 and phi must share a shape")
        if self.delta.shape[0] != self.tau2.shape[2]:
            raise ValueError("one increment per factor column required")
        self._check_positive()

    def _check_positive(self):
        if np.any(self.tau2 <= 0) or np.any(self.phi <= 0):
            raise ValueError("local scales must be strictly positive")
        if self.lambda2 <= 0:
            raise ValueError("global scale must be strictly positive")
        if np.any(self.delta <= 0):
            raise ValueError("increments must be strictly positive")

    @property
    def psi(self) -> np.ndarray:
        return mgps_psi(self.delta)

    @property
    def n_columns(self) -> int:
        return self.tau2.shape[2]

    def drop_column(self, r: int) -> "FactorHyper":
        keep = [c for c in range(self.n_columns) if c != r]
        return FactorHyper(
            tau2=self.tau2[:, :, keep],
            phi=self.phi[:, :, keep],
            lambda2=self.lambda2,
            delta=self.delta[keep],
        )


@dataclass
class ElementHyper:
    """Elementwise horseshoe scales (core tensor entries or intercept entries)."""

    tau2: np.ndarray
    phi: np.ndarray
    lambda2: float

    def __post_init__(self):
        self.tau2 = np.asarray(self.tau2, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.tau2.shape != self.phi.shape:
            raise ValueError("tau2 and phi must share a shape")
        if np.any(self.tau2 <= 0) or np.any(self.phi <= 0) or self.lambda2 <= 0:
            raise ValueError("scales must be strictly positive")


@dataclass
class HyperState:
    """All shrinkage hyperparameters owned by one sampler chain."""

    factors: list  # three FactorHyper, indexed by factor 0..2
    core: ElementHyper
    intercept: ElementHyper
    xi: float
    sigma2: float
    alpha_var: float = 1.0  # random-intercept variance (panel only)
    alpha_phi: float = 1.0
    a1: float = 2.1
    a2: float = 3.1
    a_sigma: float = 1.0
    b_sigma: float = 1.0

    def __post_init__(self):
        if len(self.factors) != 3:
            raise ValueError("expected shrinkage state for exactly three factor matrices")
        if self.xi <= 0 or self.sigma2 <= 0 or self.alpha_var <= 0 or self.alpha_phi <= 0:
            raise ValueError("scalar scales must be strictly positive")

    def beta_prior_var(self, j: int) -> np.ndarray:
        """Prior variances for every entry of factor ``j`` (all blocks), shape like ``tau2``."""
        fac = self.factors[j]
        return fac.tau2 * fac.lambda2 * self.sigma2 / fac.psi[None, None, :]


def init_hyper(
    n_series: int,
    n_lags: int,
    ranks: tuple,
    n_beta1_blocks: int = 1,
    a1: float = 2.1,
    a2: float = 3.1,
    a_sigma: float = 1.0,
    b_sigma: float = 1.0,
) -> HyperState:
    """All-ones starting point for the shrinkage hierarchy."""
    r1, r2, r3 = ranks
    dims = [(n_beta1_blocks, n_series, r1), (1, n_series, r2), (1, n_lags, r3)]
    factors = [
        FactorHyper(tau2=np.ones(d), phi=np.ones(d), lambda2=1.0, delta=np.ones(d[2]))
        for d in dims
    ]
    return HyperState(
        factors=factors,
        core=ElementHyper(tau2=np.ones(ranks), phi=np.ones(ranks), lambda2=1.0),
        intercept=ElementHyper(tau2=np.ones(n_series), phi=np.ones(n_series), lambda2=1.0),
        xi=1.0,
        sigma2=1.0,
        a1=a1,
        a2=a2,
        a_sigma=a_sigma,
        b_sigma=b_sigma,
    )


def sample_hyper_from_prior(
    n_series: int,
    n_lags: int,
    ranks: tuple,
    rng: np.random.Generator,
    n_beta1_blocks: int = 1,
    a1: float = 2.1,
    a2: float = 3.1,
    a_sigma: float = 1.0,
    b_sigma: float = 1.0,
) -> HyperState:
    """Draw a full hyperparameter state from the prior hierarchy."""
    r1, r2, r3 = ranks
    xi = inv_gamma(rng, 0.5, 1.0)
    factors = []
    for p_j, r_j in ((n_series, r1), (n_series, r2), (n_lags, r3)):
        blocks = n_beta1_blocks if len(factors) == 0 else 1
        tau2, phi = sample_half_cauchy_sq(1.0, rng, size=(blocks, p_j, r_j))
        lam2 = float(inv_gamma(rng, 0.5, 1.0 / xi))
        delta = np.empty(r_j)
        delta[0] = rng.gamma(a1, 1.0)
        if r_j > 1:
            delta[1:] = rng.gamma(a2, 1.0, size=r_j - 1)
        delta = np.maximum(delta, SCALE_FLOOR)
        factors.append(FactorHyper(tau2=tau2, phi=phi, lambda2=lam2, delta=delta))
    core_tau2, core_phi = sample_half_cauchy_sq(1.0, rng, size=ranks)
    nu_tau2, nu_phi = sample_half_cauchy_sq(1.0, rng, size=n_series)
    alpha_phi = float(inv_gamma(rng, 0.5, 1.0))
    return HyperState(
        factors=factors,
        core=ElementHyper(tau2=core_tau2, phi=core_phi, lambda2=float(inv_gamma(rng, 0.5, 1.0 / xi))),
        intercept=ElementHyper(tau2=nu_tau2, phi=nu_phi, lambda2=float(inv_gamma(rng, 0.5, 1.0 / xi))),
        xi=float(xi),
        sigma2=float(inv_gamma(rng, a_sigma, b_sigma)),
        alpha_var=float(inv_gamma(rng, 0.5, 1.0 / alpha_phi)),
        alpha_phi=alpha_phi,
        a1=a1,
        a2=a2,
        a_sigma=a_sigma,
        b_sigma=b_sigma,
    )


def draw_prior_beta_entry(
    hyper: HyperState, j: int, k: int, r: int, rng: np.random.Generator, block: int = 0
) -> float:
    """One prior draw of a factor entry: Normal(0, tau2 * lambda2 * sigma2 / psi_r)."""
    fac = hyper.factors[j]
    var = fac.tau2[block, k, r] * fac.lambda2 * hyper.sigma2 / fac.psi[r]
    return float(rng.normal(0.0, np.sqrt(var)))
