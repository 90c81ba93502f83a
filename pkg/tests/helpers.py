"""Shared test utilities: prior simulation, the getting-it-right harness, and
grid-based distribution checks for isolated conditional updates."""

import numpy as np

from tuckervar.priors import sample_hyper_from_prior
from tuckervar.sampler import (
    PanelState,
    SamplerConfig,
    gibbs_sweep,
    reconstruct_fixed,
    reconstruct_subject,
)
from tuckervar.var import PanelData


def draw_state_from_prior(
    n_subjects: int, n_series: int, cfg: SamplerConfig, rng: np.random.Generator
) -> PanelState:
    """Draw every model parameter from its prior."""
    k, el = n_series, cfg.n_lags
    r1, r2, r3 = cfg.ranks
    n_blocks = 1 if n_subjects == 1 else n_subjects + 1
    hyper = sample_hyper_from_prior(
        k, el, cfg.ranks, rng, n_beta1_blocks=n_blocks,
        a1=cfg.a1, a2=cfg.a2, a_sigma=cfg.a_sigma, b_sigma=cfg.b_sigma,
    )
    sigma2 = hyper.sigma2

    def beta_block(j, block):
        fac = hyper.factors[j]
        sd = np.sqrt(fac.tau2[block] * fac.lambda2 * sigma2 / fac.psi[None, :])
        return sd * rng.standard_normal(sd.shape)

    beta1_fixed = beta_block(0, 0)
    if n_subjects > 1:
        beta1_dev = np.stack([beta_block(0, i + 1) for i in range(n_subjects)])
        alpha = np.sqrt(hyper.alpha_var) * rng.standard_normal((n_subjects, k))
    else:
        beta1_dev = np.zeros((1, k, r1))
        alpha = np.zeros((1, k))
    core_sd = np.sqrt(hyper.core.tau2 * hyper.core.lambda2 * sigma2)
    nu_sd = np.sqrt(hyper.intercept.tau2 * hyper.intercept.lambda2 * sigma2)
    return PanelState(
        beta1_fixed=beta1_fixed,
        beta1_dev=beta1_dev,
        beta2=beta_block(1, 0),
        beta3=beta_block(2, 0),
        core=core_sd * rng.standard_normal((r1, r2, r3)),
        nu=nu_sd * rng.standard_normal(k),
        alpha=alpha,
        hyper=hyper,
    )


def simulate_data_given_state(
    state: PanelState, history: np.ndarray, n_times: int, rng: np.random.Generator
) -> np.ndarray:
    """Regenerate observations from the model recursion, conditioning on a fixed
    initial lag window (the likelihood the sampler targets is conditional on it)."""
    n, k, el = state.n_subjects, state.n_series, state.n_lags
    sd = np.sqrt(state.hyper.sigma2)
    out = np.empty((n, n_times, k))
    for i in range(n):
        b_i = reconstruct_subject(state, i)
        lagbuf = history[i, ::-1].copy()  # row l-1 = y_{t-l}
        alpha_stack = np.tile(state.alpha[i], el)
        for t in range(n_times):
            mean = state.nu + state.alpha[i] + b_i @ (lagbuf.reshape(-1) - alpha_stack)
            y_t = mean + sd * rng.standard_normal(k)
            out[i, t] = y_t
            if el > 1:
                lagbuf[1:] = lagbuf[:-1]
            lagbuf[0] = y_t
    return out


def monitored_moments(state: PanelState, y_new: np.ndarray) -> np.ndarray:
    """Bounded transforms of parameters and data whose means the two simulators share."""
    b_fixed = reconstruct_fixed(state)
    vals = [
        state.hyper.sigma2,
        state.hyper.factors[0].lambda2,
        state.hyper.factors[2].delta[0],
        state.hyper.core.lambda2,
        state.beta1_fixed[0, 0],
        state.beta2[0, 0],
        state.beta3[0, 0],
        state.core[0, 0, 0],
        state.nu[0],
        state.alpha[0, 0],
        b_fixed[0, 0],
        y_new[0, -1, 0],
        y_new[-1, 0, -1],
    ]
    arct = np.arctan(np.array(vals, dtype=float))
    return np.concatenate([arct, arct[[0, 4, 8, 10, 11]] ** 2])


def run_marginal_conditional(n_draws, n_subjects, n_series, cfg, history, n_times, seed):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_draws):
        state = draw_state_from_prior(n_subjects, n_series, cfg, rng)
        y = simulate_data_given_state(state, history, n_times, rng)
        rows.append(monitored_moments(state, y))
    return np.array(rows)


def run_successive_conditional(
    n_draws, n_subjects, n_series, cfg, history, n_times, seed, n_steps: int = 6
):
    """Many short replicated chains: each starts at its own prior draw (already
    stationary), alternates Gibbs sweeps with data regeneration, and records the
    end state. Keeps replicates independent, so near-absorbing explosive states
    the unbounded prior legitimately produces cannot ratchet a single long chain.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_draws):
        state = draw_state_from_prior(n_subjects, n_series, cfg, rng)
        y = simulate_data_given_state(state, history, n_times, rng)
        for _ in range(n_steps):
            full = np.concatenate([history, y], axis=1)
            state = gibbs_sweep(state, PanelData(y=full), cfg, rng)
            y = simulate_data_given_state(state, history, n_times, rng)
        rows.append(monitored_moments(state, y))
    return np.array(rows)


def geweke_zscores(mc: np.ndarray, sc: np.ndarray) -> np.ndarray:
    """Two-sample z statistics per monitored moment; both samples are i.i.d."""
    se_mc = mc.std(axis=0, ddof=1) / np.sqrt(mc.shape[0])
    se_sc = sc.std(axis=0, ddof=1) / np.sqrt(sc.shape[0])
    return (mc.mean(axis=0) - sc.mean(axis=0)) / np.sqrt(se_mc**2 + se_sc**2)


# ---------------------------------------------------------------------------
# grid-based distribution checks


def ks_against_log_density(draws: np.ndarray, log_density, lo: float, hi: float,
                           n_grid: int = 20001) -> float:
    """KS distance between samples and the normalized density on a grid."""
    grid = np.linspace(lo, hi, n_grid)
    logd = np.array([log_density(x) for x in grid])
    logd -= logd.max()
    dens = np.exp(logd)
    cdf = np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))
    cdf = np.concatenate([[0.0], cdf])
    cdf /= cdf[-1]
    draws = np.sort(np.asarray(draws, dtype=float))
    inside = (draws >= lo) & (draws <= hi)
    if inside.mean() < 0.99:
        raise AssertionError(f"{(~inside).mean():.1%} of draws fall outside the grid")
    cdf_at = np.interp(draws, grid, cdf)
    n = draws.size
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(cdf_at - ecdf_hi), np.abs(cdf_at - ecdf_lo))))
