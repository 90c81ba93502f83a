"""VAR(L) process mechanics: companion form, stability, simulation, OLS baseline.

Transition coefficients are stored as the ``K x KL`` matrix ``[A_1 ... A_L]``
acting on the stacked lag vector ``x_t = (y_{t-1}, ..., y_{t-L})``. Panel
generators plant known Granger-causal supports so that network recovery can be
scored against ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def _as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class VarParams:
    """Parameters of a stationary-noise VAR(L): coefficients, intercept, noise variance."""

    coeffs: np.ndarray  # K x (K*L), [A_1 ... A_L]
    intercept: np.ndarray  # K
    noise_var: float = 1.0

    def __post_init__(self):
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        intercept = np.asarray(self.intercept, dtype=float).reshape(-1)
        k = coeffs.shape[0]
        if coeffs.shape[1] % k != 0 or coeffs.shape[1] == 0:
            raise ValueError(f"coefficient matrix must be K x K*L, got {coeffs.shape}")
        if intercept.shape[0] != k:
            raise ValueError(f"intercept length {intercept.shape[0]} != K={k}")
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "intercept", intercept)

    @property
    def n_series(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_lags(self) -> int:
        return self.coeffs.shape[1] // self.coeffs.shape[0]

    def lag_matrix(self, lag: int) -> np.ndarray:
        """The K x K coefficient block for ``lag`` (1-based)."""
        if not 1 <= lag <= self.n_lags:
            raise ValueError(f"lag must be in 1..{self.n_lags}")
        k = self.n_series
        return self.coeffs[:, (lag - 1) * k : lag * k]

    def coeff_tensor(self) -> np.ndarray:
        """Coefficients as a ``K x K x L`` array with frontal slices ``A_l``."""
        k, el = self.n_series, self.n_lags
        return self.coeffs.reshape(k, k, el, order="F")


@dataclass(frozen=True)
class PanelParams:
    """Shared dynamics plus per-subject coefficient and intercept deviations."""

    shared: VarParams
    coeff_deviations: list  # N matrices K x KL (additive, may be zero)
    intercepts: list  # N vectors K (subject random intercepts alpha_i)

    def __post_init__(self):
        if len(self.coeff_deviations) != len(self.intercepts) or not self.coeff_deviations:
            raise ValueError("need one coefficient deviation and intercept per subject")
        for dev, alpha in zip(self.coeff_deviations, self.intercepts):
            if np.shape(dev) != self.shared.coeffs.shape:
                raise ValueError("per-subject deviation shape mismatch")
            if np.shape(alpha) != self.shared.intercept.shape:
                raise ValueError("per-subject intercept shape mismatch")

    @property
    def n_subjects(self) -> int:
        return len(self.coeff_deviations)

    def subject_params(self, i: int) -> VarParams:
        return VarParams(
            coeffs=self.shared.coeffs + self.coeff_deviations[i],
            intercept=self.shared.intercept,
            noise_var=self.shared.noise_var,
        )


@dataclass
class PanelData:
    """N subjects x T time points x K series, with trailing holdout for evaluation."""

    y: np.ndarray  # (N, T, K)
    holdout: int = 0
    series_names: Optional[list] = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim == 2:
            self.y = self.y[None, :, :]
        if self.y.ndim != 3:
            raise ValueError(f"panel data must be (N, T, K), got shape {self.y.shape}")
        if not np.all(np.isfinite(self.y)):
            raise ValueError("panel data contains non-finite values")
        if not 0 <= self.holdout < self.y.shape[1]:
            raise ValueError("holdout must be in [0, T)")

    @property
    def n_subjects(self) -> int:
        return self.y.shape[0]

    @property
    def n_times(self) -> int:
        return self.y.shape[1]

    @property
    def n_series(self) -> int:
        return self.y.shape[2]

    def train(self) -> np.ndarray:
        """Training slice (holdout removed from the end of every subject)."""
        t = self.n_times - self.holdout
        return self.y[:, :t, :]


@dataclass(frozen=True)
class GcTruth:
    """Planted Granger-causal support: ``active[l, j, k]`` marks a nonzero lag-(l+1) effect of series k on series j."""

    active: np.ndarray  # (L, K, K) bool, shared/fixed support
    subject_active: Optional[list] = None  # per-subject supports for panels

    def __post_init__(self):
        object.__setattr__(self, "active", np.asarray(self.active, dtype=bool))
        if self.active.ndim != 3 or self.active.shape[1] != self.active.shape[2]:
            raise ValueError("truth support must have shape (L, K, K)")

    @classmethod
    def from_params(cls, params: VarParams) -> "GcTruth":
        return cls(active=_support(params))


def _support(params: VarParams) -> np.ndarray:
    k, el = params.n_series, params.n_lags
    out = np.empty((el, k, k), dtype=bool)
    for lag in range(1, el + 1):
        out[lag - 1] = params.lag_matrix(lag) != 0.0
    return out


class Stability(NamedTuple):
    stable: bool
    spectral_radius: float


@dataclass(frozen=True)
class NotComputable:
    """Marker result for estimators that cannot produce estimates (singular design)."""

    reason: str

    def __bool__(self) -> bool:
        return False


def companion_matrix(params: VarParams) -> np.ndarray:
    """KL x KL companion form: coefficient blocks on the first block row, identity subdiagonal."""
    k, el = params.n_series, params.n_lags
    comp = np.zeros((k * el, k * el))
    comp[:k, :] = params.coeffs
    if el > 1:
        comp[k:, :-k] = np.eye(k * (el - 1))
    return comp


def is_stable(params: VarParams) -> Stability:
    """Whether all companion eigenvalues lie strictly inside the unit circle."""
    try:
        eig = np.linalg.eigvals(companion_matrix(params))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigenvalue computation failed: {exc}") from exc
    radius = float(np.max(np.abs(eig))) if eig.size else 0.0
    return Stability(stable=radius < 1.0, spectral_radius=radius)


def stationary_mean(params: VarParams, alpha=None) -> np.ndarray:
    """Limit mean of the centered recursion: companion-projected ``(I - A)^{-1} V`` plus ``alpha``."""
    stab = is_stable(params)
    if not stab.stable:
        raise ValueError(
            f"process is not stable (spectral radius {stab.spectral_radius:.4f}); mean undefined"
        )
    k, el = params.n_series, params.n_lags
    comp = companion_matrix(params)
    v = np.zeros(k * el)
    v[:k] = params.intercept
    base = np.linalg.solve(np.eye(k * el) - comp, v)[:k]
    if alpha is None:
        return base
    return base + np.asarray(alpha, dtype=float).reshape(-1)


def lag_stack(y: np.ndarray, n_lags: int) -> tuple[np.ndarray, np.ndarray]:
    """Build the regression pair (responses, stacked lags) from a T x K series.

    Row ``s`` of the second output is ``(y_{t-1}, ..., y_{t-L})`` for response
    ``y_t`` with ``t = L + s``.
    """
    y = np.asarray(y, dtype=float)
    t_len, k = y.shape
    if t_len <= n_lags:
        raise ValueError(f"need T > L, got T={t_len}, L={n_lags}")
    blocks = [y[n_lags - lag : t_len - lag] for lag in range(1, n_lags + 1)]
    return y[n_lags:], np.concatenate(blocks, axis=1)


def simulate(
    params: VarParams,
    alpha=None,
    n_times: int = 100,
    burn_in: int = 200,
    seed: SeedLike = 0,
) -> np.ndarray:
    """Simulate ``n_times`` observations of the (optionally alpha-centered) recursion.

    The path starts from zero history; ``burn_in`` leading samples are discarded.
    Deterministic given the seed.
    """
    stab = is_stable(params)
    if not stab.stable:
        raise ValueError(f"refusing to simulate unstable process (radius {stab.spectral_radius:.4f})")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    rng = _as_rng(seed)
    k, el = params.n_series, params.n_lags
    alpha = np.zeros(k) if alpha is None else np.asarray(alpha, dtype=float).reshape(-1)
    # y_t = nu + alpha + B (x_t - alpha_stacked): precompute the alpha offset.
    lag_sum = sum(params.lag_matrix(lag) for lag in range(1, el + 1))
    offset = params.intercept + alpha - lag_sum @ alpha
    sd = float(np.sqrt(params.noise_var))
    lagbuf = np.zeros((el, k))  # row l-1 holds y_{t-l}
    out = np.empty((burn_in + n_times, k))
    for t in range(burn_in + n_times):
        mean = offset + params.coeffs @ lagbuf.reshape(-1)
        out[t] = mean + sd * rng.standard_normal(k) if sd > 0 else mean
        if el > 1:
            lagbuf[1:] = lagbuf[:-1]
        lagbuf[0] = out[t]
    return out[burn_in:]


def subject_seed(seed: int, subject: int) -> np.random.SeedSequence:
    """Deterministic per-subject noise stream for panel simulation."""
    return np.random.SeedSequence([int(seed), 1000 + int(subject)])


def simulate_panel(
    shared: VarParams,
    random_scale: float = 0.0,
    alpha_scale: float = 0.0,
    n_subjects: int = 1,
    n_times: int = 150,
    seed: int = 0,
    burn_in: int = 200,
    holdout: int = 0,
    max_retries: int = 100,
) -> tuple[PanelData, PanelParams, GcTruth]:
    """Simulate a panel with shared dynamics plus per-subject random effects.

    Coefficient deviations are i.i.d. Gaussian with standard deviation
    ``random_scale`` times the RMS of the shared coefficients; each perturbed
    system is re-checked for stability and resampled until stable (bounded
    retries). Intercept deviations are i.i.d. ``Normal(0, alpha_scale^2)``.
    """
    stab = is_stable(shared)
    if not stab.stable:
        raise ValueError("shared process must be stable")
    param_rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    k = shared.n_series
    rms = float(np.sqrt(np.mean(shared.coeffs**2)))
    sd_dev = random_scale * rms

    deviations, alphas, subj_support = [], [], []
    for i in range(n_subjects):
        if sd_dev > 0:
            for _ in range(max_retries):
                dev = param_rng.normal(0.0, sd_dev, size=shared.coeffs.shape)
                candidate = VarParams(shared.coeffs + dev, shared.intercept, shared.noise_var)
                if is_stable(candidate).stable:
                    break
            else:
                raise RuntimeError(
                    f"could not find a stable perturbation for subject {i} in "
                    f"{max_retries} tries; reduce random_scale"
                )
        else:
            dev = np.zeros_like(shared.coeffs)
            candidate = shared
        alpha_i = (
            param_rng.normal(0.0, alpha_scale, size=k) if alpha_scale > 0 else np.zeros(k)
        )
        deviations.append(dev)
        alphas.append(alpha_i)
        subj_support.append(_support(candidate))

    params = PanelParams(shared=shared, coeff_deviations=deviations, intercepts=alphas)
    series = np.empty((n_subjects, n_times, k))
    for i in range(n_subjects):
        series[i] = simulate(
            params.subject_params(i),
            alpha=alphas[i],
            n_times=n_times,
            burn_in=burn_in,
            seed=subject_seed(seed, i),
        )
    truth = GcTruth(active=_support(shared), subject_active=subj_support)
    return PanelData(y=series, holdout=holdout), params, truth


def _stabilize(coeffs: np.ndarray, intercept: np.ndarray, target: float = 0.9) -> np.ndarray:
    """Uniformly rescale coefficients until the companion radius drops below 1 (aiming at ``target``)."""
    out = coeffs.copy()
    for _ in range(200):
        stab = is_stable(VarParams(out, intercept, 1.0))
        if stab.spectral_radius < 1.0 and stab.spectral_radius <= target + 0.05:
            return out
        out = out * (target / stab.spectral_radius)
    raise RuntimeError("rescaling failed to stabilize coefficients")


def variance_amplification(params: VarParams) -> float:
    """Mean stationary variance per unit noise variance (solves the companion Lyapunov equation)."""
    from scipy.linalg import solve_discrete_lyapunov

    stab = is_stable(params)
    if not stab.stable:
        raise ValueError("amplification undefined for unstable processes")
    k, el = params.n_series, params.n_lags
    comp = companion_matrix(params)
    noise_cov = np.zeros((k * el, k * el))
    noise_cov[:k, :k] = np.eye(k)
    gamma0 = solve_discrete_lyapunov(comp, noise_cov)
    return float(np.mean(np.diag(gamma0)[:k]))


def _boost_amplification(
    coeffs: np.ndarray,
    intercept: np.ndarray,
    target_amp: float,
    max_radius: float = 0.99,
) -> np.ndarray:
    """Scale coefficients up until the stationary variance per unit noise reaches ``target_amp``.

    The implied population one-step R-squared is roughly ``1 - 1/target_amp``.
    """
    out = coeffs.copy()
    for _ in range(400):
        p = VarParams(out, intercept, 1.0)
        if variance_amplification(p) >= target_amp:
            return out
        if is_stable(p).spectral_radius * 1.02 >= max_radius:
            return out
        out = out * 1.02
    return out


def make_block_diagonal_truth(
    n_series: int,
    n_lags_true: int,
    seed: int = 0,
    noise_var: float = 1.0,
    target_amplification: float = 10.0,
) -> tuple[VarParams, GcTruth]:
    """A stable VAR whose lag matrices all have an exactly-zero lower-right quadrant.

    Coefficient magnitudes are drawn bounded away from zero so every planted
    edge stays detectable after the stability rescaling; a positive diagonal on
    the first lag plus the amplification boost keeps the process strongly
    predictable (population one-step R-squared near ``1 - 1/target_amplification``).
    """
    if n_series % 2 != 0:
        raise ValueError("n_series must be even for the quadrant structure")
    if n_lags_true < 1:
        raise ValueError("need at least one lag")
    rng = np.random.default_rng(seed)
    half = n_series // 2
    coeffs = _draw_persistent_coeffs(rng, n_series, n_lags_true)
    for lag in range(n_lags_true):
        coeffs[half:, lag * n_series + half : (lag + 1) * n_series] = 0.0
    intercept = rng.uniform(-0.5, 0.5, size=n_series)
    coeffs = _stabilize(coeffs, intercept)
    coeffs = _boost_amplification(coeffs, intercept, target_amplification)
    intercept = _temper_intercept(coeffs, intercept, noise_var)
    params = VarParams(coeffs=coeffs, intercept=intercept, noise_var=noise_var)
    return params, GcTruth.from_params(params)


def _temper_intercept(coeffs: np.ndarray, intercept: np.ndarray, noise_var: float) -> np.ndarray:
    """Rescale the intercept so the stationary mean stays O(1) despite amplification."""
    p = VarParams(coeffs, intercept, max(noise_var, 1e-12))
    peak = float(np.max(np.abs(stationary_mean(p))))
    if peak > 1.0:
        return intercept / peak
    return intercept


def _draw_persistent_coeffs(rng, n_series: int, n_lags: int) -> np.ndarray:
    """Random coefficients with a persistent own-lag diagonal and decaying cross terms.

    Diagonal dominance keeps the noise input aligned with the slow eigenmodes,
    so the stationary variance per unit noise stays high at moderate radii.
    """
    coeffs = np.empty((n_series, n_series * n_lags))
    for lag in range(n_lags):
        scale = 0.6**lag
        block = rng.uniform(0.2, 0.6, size=(n_series, n_series)) * scale
        block *= rng.choice([-1.0, 1.0], size=block.shape)
        if lag == 0:
            np.fill_diagonal(block, rng.uniform(0.9, 1.3, size=n_series))
        coeffs[:, lag * n_series : (lag + 1) * n_series] = block
    return coeffs


def make_modular_truth(
    n_series: int,
    n_lags_true: int,
    seed: int = 0,
    noise_var: float = 1.0,
    n_groups: int = 5,
    cross_fraction: float = 0.15,
    target_amplification: float = 8.0,
) -> tuple[VarParams, GcTruth]:
    """A stable VAR with a group-structured, exactly low-rank coefficient tensor.

    Each group contributes two shared dynamic modes (outer products over its
    members, the first with a persistent positive overlap); a sparse set of
    directed group pairs adds cross couplings that reuse the group modes, so
    the stacked tensor has Tucker ranks at most ``(2 * n_groups, 2 * n_groups,
    n_lags_true)``. The result looks like a functional-connectivity map:
    dense within communities, sparse between them.
    """
    if n_lags_true < 1:
        raise ValueError("need at least one lag")
    rng = np.random.default_rng(seed)
    sizes = np.full(n_groups, n_series // n_groups)
    sizes[: n_series % n_groups] += 1
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    members = [np.arange(bounds[g], bounds[g + 1]) for g in range(n_groups)]

    # two shared modes per group, both with positive mode overlap so every
    # group carries persistent dynamics
    u1, v1, u2, v2 = [], [], [], []
    for g in range(n_groups):
        m = sizes[g]
        u1.append(rng.uniform(0.6, 1.4, m) * rng.choice([-1.0, 1.0], m))
        v1.append(u1[g] * rng.uniform(0.6, 1.0) + rng.uniform(-0.15, 0.15, m))
        u2.append(rng.uniform(0.6, 1.4, m) * rng.choice([-1.0, 1.0], m))
        v2.append(u2[g] * rng.uniform(0.6, 1.0) + rng.uniform(-0.15, 0.15, m))

    pairs = [(p, q) for p in range(n_groups) for q in range(n_groups) if p != q]
    n_cross = max(1, int(round(cross_fraction * len(pairs))))
    chosen = [pairs[i] for i in rng.choice(len(pairs), size=n_cross, replace=False)]

    coeffs = np.zeros((n_series, n_series * n_lags_true))
    for lag in range(n_lags_true):
        scale = 0.6**lag
        block = np.zeros((n_series, n_series))
        for g in range(n_groups):
            w1 = rng.uniform(0.8, 1.2) * scale
            w2 = rng.uniform(0.35, 0.55) * scale
            block[np.ix_(members[g], members[g])] = (
                w1 * np.outer(u1[g], v1[g]) + w2 * np.outer(u2[g], v2[g])
            )
        for p, q in chosen:
            w = rng.uniform(0.3, 0.8) * rng.choice([-1.0, 1.0]) * scale
            # rows in group p driven by group q's persistent mode: reuses the
            # existing row/column spaces, so the Tucker ranks do not grow
            block[np.ix_(members[p], members[q])] = w * np.outer(u1[p], v1[q])
        coeffs[:, lag * n_series : (lag + 1) * n_series] = block
    # entries cancelled into the practical-zero neighborhood at any lag become
    # exact zeros at every lag: they are undetectable by construction and would
    # poison the planted support; the perturbation leaves the tensor
    # essentially low rank and the support identical across lags
    blocks = coeffs.reshape(n_series, n_lags_true, n_series).transpose(1, 0, 2)
    weak = np.zeros((n_series, n_series), dtype=bool)
    for lag in range(n_lags_true):
        live = np.abs(blocks[lag][blocks[lag] != 0.0])
        weak |= np.abs(blocks[lag]) < 0.4 * np.median(live)
    for lag in range(n_lags_true):
        coeffs[:, lag * n_series : (lag + 1) * n_series][weak] = 0.0
    intercept = rng.uniform(-0.5, 0.5, size=n_series)
    coeffs = _stabilize(coeffs, intercept)
    coeffs = _boost_amplification(coeffs, intercept, target_amplification)
    intercept = _temper_intercept(coeffs, intercept, noise_var)
    params = VarParams(coeffs=coeffs, intercept=intercept, noise_var=noise_var)
    return params, GcTruth.from_params(params)


def fit_ols(data: np.ndarray, n_lags: int) -> Union[VarParams, NotComputable]:
    """Per-equation least squares of ``y_t`` on an intercept and the stacked lags.

    Returns :class:`NotComputable` instead of raising when the design matrix is
    rank-deficient (too few rows or degenerate series).
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError("fit_ols expects a single-subject T x K series")
    t_len, k = data.shape
    if t_len <= n_lags:
        return NotComputable(f"T={t_len} <= L={n_lags}: no usable rows")
    responses, lags = lag_stack(data, n_lags)
    design = np.column_stack([np.ones(lags.shape[0]), lags])
    if design.shape[0] < design.shape[1]:
        return NotComputable(
            f"{design.shape[0]} rows < {design.shape[1]} regressors: design is singular"
        )
    if np.linalg.matrix_rank(design) < design.shape[1]:
        return NotComputable("design matrix is rank deficient")
    coef, _, _, _ = np.linalg.lstsq(design, responses, rcond=None)
    resid = responses - design @ coef
    dof = max(design.shape[0] - design.shape[1], 1)
    sigma2 = float(np.sum(resid**2) / (dof * k))
    return VarParams(coeffs=coef[1:].T, intercept=coef[0], noise_var=max(sigma2, 0.0))
