"""Gibbs sampler for the Tucker-factorized VAR, single-subject and panel.

One sweep cycles through: noise variance, local scales, global scales,
multiplicative-gamma increments, factor-matrix columns, core-tensor entries,
intercept, (panel) random intercepts, then the auxiliary scale variables.
Factor columns are updated as blocks through the linear coefficient matrices
``H_t`` that express the conditional mean as a linear function of the column
under update.

The engine keeps the per-subject residuals incrementally consistent during a
sweep and rebuilds them from scratch at every sweep start, so numerical drift
cannot accumulate across iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .granger import DecisionConfig, decide_network, inclusion_probabilities, lag_coefficient_draws
from .priors import ElementHyper, FactorHyper, HyperState, init_hyper, inv_gamma
from .tensor import TuckerFactors, kronecker, mode_n_matricize
from .var import PanelData, VarParams, is_stable, lag_stack


class SamplerError(RuntimeError):
    """Raised when a conditional update produces non-finite values."""


@dataclass
class SamplerConfig:
    """Chain configuration: experimental lag, starting ranks, schedule, pruning."""

    n_lags: int
    ranks: tuple  # (R1, R2, R3)
    iterations: int = 5000
    burn_in: int = 2500
    thin: int = 5
    seed: int = 0
    prune_enabled: bool = True
    prune_threshold: float = 1e-3  # relative to the largest windowed column norm
    prune_window: int = 50
    a1: float = 2.1
    a2: float = 3.1
    a_sigma: float = 1.0
    b_sigma: float = 1.0
    init: str = "spectral"  # "spectral" (ridge + unfolding SVD) or "random"
    store_subject_draws: bool = True
    check_consistency: bool = False

    def __post_init__(self):
        if self.n_lags < 1:
            raise ValueError("need at least one lag")
        r1, r2, r3 = self.ranks
        if min(r1, r2, r3) < 1:
            raise ValueError("ranks must be positive")
        if r3 > self.n_lags:
            raise ValueError("R3 cannot exceed the experimental lag count")
        if self.iterations <= self.burn_in:
            raise ValueError("iterations must exceed burn_in")
        if self.thin < 1 or self.prune_window < 1:
            raise ValueError("thin and prune_window must be positive")


@dataclass
class PanelState:
    """Full sampler state: shared factors, per-subject deviations, shrinkage scales."""

    beta1_fixed: np.ndarray  # (K, R1)
    beta1_dev: np.ndarray  # (N, K, R1); identically zero when N == 1
    beta2: np.ndarray  # (K, R2)
    beta3: np.ndarray  # (L, R3)
    core: np.ndarray  # (R1, R2, R3)
    nu: np.ndarray  # (K,)
    alpha: np.ndarray  # (N, K); identically zero when N == 1
    hyper: HyperState

    @property
    def n_subjects(self) -> int:
        return self.alpha.shape[0]

    @property
    def n_series(self) -> int:
        return self.beta1_fixed.shape[0]

    @property
    def n_lags(self) -> int:
        return self.beta3.shape[0]

    @property
    def ranks(self) -> tuple:
        return self.core.shape

    @property
    def is_panel(self) -> bool:
        return self.n_subjects > 1

    def beta1_total(self, subject: int) -> np.ndarray:
        return self.beta1_fixed + self.beta1_dev[subject]

    def factors_for(self, subject: Optional[int] = None) -> TuckerFactors:
        b1 = self.beta1_fixed if subject is None else self.beta1_total(subject)
        return TuckerFactors(core=self.core, beta1=b1, beta2=self.beta2, beta3=self.beta3)


def reconstruct_fixed(state: PanelState) -> np.ndarray:
    """Shared K x KL transition matrix implied by the current factors."""
    return state.beta1_fixed @ _core_matrix(state)


def reconstruct_subject(state: PanelState, subject: int) -> np.ndarray:
    return state.beta1_total(subject) @ _core_matrix(state)


def _core_matrix(state: PanelState) -> np.ndarray:
    return mode_n_matricize(state.core, 1) @ kronecker(state.beta3, state.beta2).T


@dataclass
class PosteriorDraws:
    """Thinned post-burn-in draws of the quantities downstream analysis needs."""

    b_fixed: np.ndarray  # (n_draws, K, K*L)
    nu: np.ndarray  # (n_draws, K)
    sigma2: np.ndarray  # (n_draws,)
    beta3_row_norms: np.ndarray  # (n_draws, L)
    ranks: np.ndarray  # (n_draws, 3)
    unstable: np.ndarray  # (n_draws,) bool: fixed-effects draw outside the unit circle
    b_subject: Optional[np.ndarray] = None  # (n_draws, N, K, K*L)
    alpha: Optional[np.ndarray] = None  # (n_draws, N, K)

    @property
    def n_draws(self) -> int:
        return self.b_fixed.shape[0]

    @property
    def n_series(self) -> int:
        return self.b_fixed.shape[1]

    @property
    def n_lags(self) -> int:
        return self.b_fixed.shape[2] // self.b_fixed.shape[1]


@dataclass
class LagReport:
    """Active-lag decision plus posterior summaries of the lag-factor row norms."""

    active: list  # 1-based lags with at least one included edge
    row_norm_mean: np.ndarray  # (L,)
    row_norm_sd: np.ndarray  # (L,)
    edges_per_lag: np.ndarray  # (L,) included-edge counts


@dataclass
class RankReport:
    pruned: dict  # factor index (0..2) -> list of dropped column indices
    ranks: tuple


# ---------------------------------------------------------------------------
# state initialization


def init_state(data: PanelData, cfg: SamplerConfig, rng: np.random.Generator) -> PanelState:
    """Starting point: data-aligned factors (default) or small random factors.

    The spectral start pools a ridge estimate of the transition matrix and
    seeds the factors with the singular vectors of its unfoldings; chains
    started at random struggle to find the aligned factorization at desk
    scale, which stalls rank and lag shrinkage.
    """
    train = data.train()
    n, t_len, k = train.shape
    r1, r2, r3 = cfg.ranks
    if r1 > k or r2 > k:
        raise ValueError(f"ranks {cfg.ranks} exceed the series count {k}")
    if t_len <= cfg.n_lags:
        raise ValueError(f"need T > L, got T={t_len}, L={cfg.n_lags}")
    n_blocks = 1 if n == 1 else n + 1
    hyper = init_hyper(
        k, cfg.n_lags, cfg.ranks, n_beta1_blocks=n_blocks,
        a1=cfg.a1, a2=cfg.a2, a_sigma=cfg.a_sigma, b_sigma=cfg.b_sigma,
    )
    sd0 = 0.1
    nu0 = np.mean(np.diff(train, axis=1), axis=(0, 1))
    subject_means = train.mean(axis=1)
    alpha0 = subject_means - subject_means.mean(axis=0) if n > 1 else np.zeros((1, k))
    state = PanelState(
        beta1_fixed=sd0 * rng.standard_normal((k, r1)),
        beta1_dev=(
            sd0 * 0.1 * rng.standard_normal((n, k, r1)) if n > 1 else np.zeros((1, k, r1))
        ),
        beta2=sd0 * rng.standard_normal((k, r2)),
        beta3=sd0 * rng.standard_normal((cfg.n_lags, r3)),
        core=sd0 * rng.standard_normal((r1, r2, r3)),
        nu=nu0,
        alpha=alpha0,
        hyper=hyper,
    )
    if cfg.init == "spectral":
        _spectral_start(state, train, cfg)
    elif cfg.init != "random":
        raise ValueError(f"unknown init '{cfg.init}'")
    return state


def _spectral_start(state: PanelState, train: np.ndarray, cfg: SamplerConfig):
    """Seed factors from the unfolding SVDs of a pooled ridge transition estimate."""
    from .tensor import mode_n_matricize, mode_n_product
    from .var import lag_stack

    n, _, k = train.shape
    el = cfg.n_lags
    r1, r2, r3 = cfg.ranks
    rows, targets = [], []
    for i in range(n):
        resp, stacked = lag_stack(train[i], el)
        rows.append(np.column_stack([np.ones(stacked.shape[0]), stacked]))
        targets.append(resp)
    design = np.concatenate(rows)
    target = np.concatenate(targets)
    gram = design.T @ design
    ridge = 1e-3 * float(np.trace(gram)) / gram.shape[0]
    gram[np.diag_indices_from(gram)] += ridge
    coef = np.linalg.solve(gram, design.T @ target)
    nu_hat, b_hat = coef[0], coef[1:].T  # b_hat: K x KL
    tensor_b = b_hat.reshape(k, el, k).transpose(0, 2, 1)  # (K, K, L) frontal slices A_l
    b1 = np.linalg.svd(mode_n_matricize(tensor_b, 1), full_matrices=False)[0][:, :r1]
    b2 = np.linalg.svd(mode_n_matricize(tensor_b, 2), full_matrices=False)[0][:, :r2]
    b3 = np.linalg.svd(mode_n_matricize(tensor_b, 3), full_matrices=False)[0][:, :r3]
    core = mode_n_product(mode_n_product(mode_n_product(tensor_b, b1.T, 1), b2.T, 2), b3.T, 3)
    state.beta1_fixed = b1.copy()
    state.beta2 = b2.copy()
    state.beta3 = b3.copy()
    state.core = core
    state.nu = nu_hat.copy()


# ---------------------------------------------------------------------------
# the sweep engine


class _Engine:
    """Owns prepared data plus per-sweep caches; mutates a PanelState in place."""

    def __init__(self, state: PanelState, responses: np.ndarray, lags: np.ndarray,
                 cfg: SamplerConfig, rng: np.random.Generator):
        self.state = state
        self.cfg = cfg
        self.rng = rng
        self.responses = responses  # (N, T_eff, K)
        self.lags = lags  # (N, T_eff, K*L)
        self.n_subjects, self.t_eff, self.n_series = responses.shape

    # -- cache handling ------------------------------------------------------

    def _refresh(self):
        st = self.state
        n, t, k = self.n_subjects, self.t_eff, self.n_series
        el = st.n_lags
        self.b1tot = st.beta1_fixed[None, :, :] + st.beta1_dev  # (N, K, R1)
        self.xc = self.lags - np.tile(st.alpha, (1, el))[:, None, :]  # (N, T, KL)
        self.xmat = self.xc.reshape(n, t, el, k).transpose(0, 1, 3, 2)  # (N, T, K, L)
        core_mat = _core_matrix(st)  # (R1, KL)
        b_all = np.einsum("nkr,rm->nkm", self.b1tot, core_mat)  # (N, K, KL)
        mean = np.einsum("ntm,nkm->ntk", self.xc, b_all)
        self.resid = self.responses - st.nu[None, None, :] - st.alpha[:, None, :] - mean

    def _guard(self, step: str, *arrays):
        for arr in arrays:
            if not np.all(np.isfinite(arr)):
                raise SamplerError(f"non-finite values produced in step '{step}'")

    def _beta_blocks(self, j: int) -> np.ndarray:
        st = self.state
        if j == 0:
            if st.is_panel:
                return np.concatenate([st.beta1_fixed[None], st.beta1_dev], axis=0)
            return st.beta1_fixed[None]
        if j == 1:
            return st.beta2[None]
        return st.beta3[None]

    # -- step 1: noise variance ----------------------------------------------

    def _step_sigma2(self):
        st, hyper = self.state, self.state.hyper
        n, t, k = self.n_subjects, self.t_eff, self.n_series
        el = st.n_lags
        r1, r2, r3 = st.ranks
        n_blocks = 1 if not st.is_panel else n + 1
        a_star = (
            hyper.a_sigma
            + 0.5 * n * t * k
            + 0.5 * (n_blocks * k * r1 + k * r2 + el * r3)
            + 0.5 * r1 * r2 * r3
            + 0.5 * k
        )
        b_star = hyper.b_sigma + 0.5 * float(np.sum(self.resid**2))
        for j in range(3):
            fac = hyper.factors[j]
            blocks = self._beta_blocks(j)
            b_star += 0.5 * float(
                np.sum(fac.psi[None, None, :] * blocks**2 / fac.tau2) / fac.lambda2
            )
        b_star += 0.5 * float(np.sum(st.core**2 / hyper.core.tau2) / hyper.core.lambda2)
        b_star += 0.5 * float(np.sum(st.nu**2 / hyper.intercept.tau2) / hyper.intercept.lambda2)
        hyper.sigma2 = float(inv_gamma(self.rng, a_star, b_star))
        self._guard("sigma2", [hyper.sigma2])

    # -- step 2: local scales --------------------------------------------------

    def _step_local_scales(self):
        hyper = self.state.hyper
        sigma2 = hyper.sigma2
        for j in range(3):
            fac = hyper.factors[j]
            blocks = self._beta_blocks(j)
            rate = 1.0 / fac.phi + fac.psi[None, None, :] * blocks**2 / (
                2.0 * fac.lambda2 * sigma2
            )
            fac.tau2 = inv_gamma(self.rng, 1.0, rate, size=rate.shape)
        core_rate = 1.0 / hyper.core.phi + self.state.core**2 / (
            2.0 * hyper.core.lambda2 * sigma2
        )
        hyper.core.tau2 = inv_gamma(self.rng, 1.0, core_rate, size=core_rate.shape)
        nu_rate = 1.0 / hyper.intercept.phi + self.state.nu**2 / (
            2.0 * hyper.intercept.lambda2 * sigma2
        )
        hyper.intercept.tau2 = inv_gamma(self.rng, 1.0, nu_rate, size=nu_rate.shape)
        self._guard("local scales", *(f.tau2 for f in hyper.factors),
                    hyper.core.tau2, hyper.intercept.tau2)

    # -- step 3: global scales --------------------------------------------------

    def _step_global_scales(self):
        hyper = self.state.hyper
        sigma2 = hyper.sigma2
        for j in range(3):
            fac = hyper.factors[j]
            blocks = self._beta_blocks(j)
            count = blocks.size
            rate = 1.0 / hyper.xi + 0.5 * float(
                np.sum(fac.psi[None, None, :] * blocks**2 / fac.tau2)
            ) / sigma2
            fac.lambda2 = float(inv_gamma(self.rng, 0.5 * (1 + count), rate))
        core_rate = 1.0 / hyper.xi + 0.5 * float(
            np.sum(self.state.core**2 / hyper.core.tau2)
        ) / sigma2
        hyper.core.lambda2 = float(
            inv_gamma(self.rng, 0.5 * (1 + self.state.core.size), core_rate)
        )
        nu_rate = 1.0 / hyper.xi + 0.5 * float(
            np.sum(self.state.nu**2 / hyper.intercept.tau2)
        ) / sigma2
        hyper.intercept.lambda2 = float(
            inv_gamma(self.rng, 0.5 * (1 + self.state.nu.size), nu_rate)
        )
        self._guard("global scales", [f.lambda2 for f in hyper.factors],
                    [hyper.core.lambda2, hyper.intercept.lambda2])

    # -- step 4: multiplicative gamma increments --------------------------------

    def _step_mgps(self):
        hyper = self.state.hyper
        sigma2 = hyper.sigma2
        for j in range(3):
            fac = hyper.factors[j]
            blocks = self._beta_blocks(j)
            n_blocks, p_j, r_j = blocks.shape
            # quadratic form of each column across blocks, scaled by its variances
            theta = np.sum(blocks**2 / fac.tau2, axis=(0, 1)) / (fac.lambda2 * sigma2)
            delta = fac.delta.copy()
            for ell in range(r_j):
                others = delta.copy()
                others[ell] = 1.0
                partial = np.cumprod(others)
                rate = 1.0 + 0.5 * float(np.sum(partial[ell:] * theta[ell:]))
                shape = (hyper.a1 if ell == 0 else hyper.a2) + 0.5 * n_blocks * p_j * (r_j - ell)
                delta[ell] = max(self.rng.gamma(shape, 1.0 / rate), 1e-12)
            fac.delta = delta
        self._guard("mgps increments", *(f.delta for f in hyper.factors))

    # -- step 6: factor matrices -------------------------------------------------

    def _step_factors(self):
        self._update_beta1()
        self._update_beta2()
        self._update_beta3()
        self._guard("factor matrices", self.state.beta1_fixed, self.state.beta1_dev,
                    self.state.beta2, self.state.beta3, self.resid)

    def _update_beta1(self):
        st, hyper = self.state, self.state.hyper
        rng = self.rng
        sigma2 = hyper.sigma2
        fac = hyper.factors[0]
        psi = fac.psi
        # scalar coefficients of each beta1 column in the conditional mean
        w = np.einsum("ntkl,kb,lc->ntbc", self.xmat, st.beta2, st.beta3)
        c = np.einsum("abc,ntbc->nta", st.core, w)  # (N, T, R1)
        r1 = st.ranks[0]
        for r in range(r1):
            c_r = c[:, :, r]  # (N, T)
            c2_total = float(np.sum(c_r**2))
            prec = c2_total / sigma2 + psi[r] / (fac.lambda2 * sigma2 * fac.tau2[0, :, r])
            lin = (
                np.einsum("nt,ntk->k", c_r, self.resid) + c2_total * st.beta1_fixed[:, r]
            ) / sigma2
            new = lin / prec + rng.standard_normal(self.n_series) / np.sqrt(prec)
            delta_col = new - st.beta1_fixed[:, r]
            st.beta1_fixed[:, r] = new
            self.resid -= c_r[:, :, None] * delta_col[None, None, :]
            if st.is_panel:
                for i in range(self.n_subjects):
                    c_ir = c[i, :, r]
                    c2 = float(np.sum(c_ir**2))
                    tau2_i = fac.tau2[i + 1, :, r]
                    prec_i = c2 / sigma2 + psi[r] / (fac.lambda2 * sigma2 * tau2_i)
                    lin_i = (
                        c_ir @ self.resid[i] + c2 * st.beta1_dev[i, :, r]
                    ) / sigma2
                    new_i = lin_i / prec_i + rng.standard_normal(self.n_series) / np.sqrt(prec_i)
                    delta_i = new_i - st.beta1_dev[i, :, r]
                    st.beta1_dev[i, :, r] = new_i
                    self.resid[i] -= np.outer(c_ir, delta_i)
        self.b1tot = st.beta1_fixed[None, :, :] + st.beta1_dev

    def _update_beta2(self):
        st, hyper = self.state, self.state.hyper
        rng = self.rng
        sigma2 = hyper.sigma2
        fac = hyper.factors[1]
        psi = fac.psi
        v = np.einsum("ntkl,lc->ntkc", self.xmat, st.beta3)  # (N, T, K, R3)
        for s in range(st.ranks[1]):
            a_mats = np.einsum("nkr,rc->nkc", self.b1tot, st.core[:, s, :])  # (N, K, R3)
            # contribution of the current column to every conditional mean
            v_dot = np.einsum("ntkc,k->ntc", v, st.beta2[:, s])  # (N, T, R3)
            contrib = np.einsum("ntc,nkc->ntk", v_dot, a_mats)
            target = self.resid + contrib
            ata = np.einsum("nkc,nkd->ncd", a_mats, a_mats)  # (N, R3, R3)
            inner = np.einsum("ntkc,ncd->ntkd", v, ata)
            prec = np.einsum("ntkd,ntjd->kj", inner, v) / sigma2
            prec[np.diag_indices_from(prec)] += psi[s] / (fac.lambda2 * sigma2 * fac.tau2[0, :, s])
            proj = np.einsum("ntk,nkc->ntc", target, a_mats)  # A^T y-tilde
            lin = np.einsum("ntkc,ntc->k", v, proj) / sigma2
            new = _draw_mvn(prec, lin, rng, "beta2")
            st.beta2[:, s] = new
            new_dot = np.einsum("ntkc,k->ntc", v, new)
            self.resid = target - np.einsum("ntc,nkc->ntk", new_dot, a_mats)

    def _update_beta3(self):
        st, hyper = self.state, self.state.hyper
        rng = self.rng
        sigma2 = hyper.sigma2
        fac = hyper.factors[2]
        psi = fac.psi
        u = np.einsum("ntkl,kb->ntlb", self.xmat, st.beta2)  # (N, T, L, R2)
        for s in range(st.ranks[2]):
            a_mats = np.einsum("nkr,rb->nkb", self.b1tot, st.core[:, :, s])  # (N, K, R2)
            u_dot = np.einsum("ntlb,l->ntb", u, st.beta3[:, s])  # (N, T, R2)
            contrib = np.einsum("ntb,nkb->ntk", u_dot, a_mats)
            target = self.resid + contrib
            ata = np.einsum("nkb,nkd->nbd", a_mats, a_mats)
            inner = np.einsum("ntlb,nbd->ntld", u, ata)
            prec = np.einsum("ntld,ntmd->lm", inner, u) / sigma2
            prec[np.diag_indices_from(prec)] += psi[s] / (fac.lambda2 * sigma2 * fac.tau2[0, :, s])
            proj = np.einsum("ntk,nkb->ntb", target, a_mats)
            lin = np.einsum("ntlb,ntb->l", u, proj) / sigma2
            new = _draw_mvn(prec, lin, rng, "beta3")
            st.beta3[:, s] = new
            new_dot = np.einsum("ntlb,l->ntb", u, new)
            self.resid = target - np.einsum("ntb,nkb->ntk", new_dot, a_mats)

    # -- step 7: core tensor -----------------------------------------------------

    def _step_core(self):
        st, hyper = self.state, self.state.hyper
        rng = self.rng
        sigma2 = hyper.sigma2
        r1, r2, r3 = st.ranks
        w = np.einsum("ntkl,kb,lc->ntbc", self.xmat, st.beta2, st.beta3)  # (N, T, R2, R3)
        w_sq = np.einsum("ntbc,ntbc->nbc", w, w)  # (N, R2, R3)
        col_sq = np.einsum("nkr,nkr->nr", self.b1tot, self.b1tot)  # (N, R1)
        prior_prec = 1.0 / (hyper.core.lambda2 * hyper.core.tau2)  # (R1, R2, R3)
        for b in range(r2):
            for cdx in range(r3):
                w_bc = w[:, :, b, cdx]  # (N, T)
                swsq = w_sq[:, b, cdx]  # (N,)
                u = np.einsum("nt,ntk->nk", w_bc, self.resid)  # (N, K)
                delta_vec = np.zeros(r1)
                for a in range(r1):
                    g_old = st.core[a, b, cdx]
                    denom = float(np.sum(col_sq[:, a] * swsq)) + prior_prec[a, b, cdx]
                    var_g = sigma2 / denom
                    num = float(
                        np.sum(np.einsum("nk,nk->n", self.b1tot[:, :, a], u))
                        + g_old * np.sum(col_sq[:, a] * swsq)
                    )
                    g_new = var_g * num / sigma2 + math.sqrt(var_g) * rng.standard_normal()
                    step = g_new - g_old
                    st.core[a, b, cdx] = g_new
                    delta_vec[a] = step
                    # keep the block numerators consistent without touching resid
                    u -= step * swsq[:, None] * self.b1tot[:, :, a]
                shift = np.einsum("nkr,r->nk", self.b1tot, delta_vec)  # (N, K)
                self.resid -= w_bc[:, :, None] * shift[:, None, :]
        self._guard("core tensor", st.core, self.resid)

    # -- step 8: intercepts --------------------------------------------------------

    def _step_intercept(self):
        st, hyper = self.state, self.state.hyper
        sigma2 = hyper.sigma2
        total_t = self.n_subjects * self.t_eff
        prec = total_t / sigma2 + 1.0 / (hyper.intercept.lambda2 * sigma2 * hyper.intercept.tau2)
        lin = (np.sum(self.resid, axis=(0, 1)) + total_t * st.nu) / sigma2
        new = lin / prec + self.rng.standard_normal(self.n_series) / np.sqrt(prec)
        self.resid += (st.nu - new)[None, None, :]
        st.nu = new
        self._guard("intercept", st.nu, self.resid)

    def _step_alpha(self):
        st, hyper = self.state, self.state.hyper
        sigma2 = hyper.sigma2
        k, el = self.n_series, st.n_lags
        core_mat = _core_matrix(st)
        eye = np.eye(k)
        for i in range(self.n_subjects):
            b_i = st.beta1_total(i) @ core_mat
            lag_sum = b_i.reshape(k, el, k).sum(axis=1)
            m_alpha = eye - lag_sum
            # sum_t (y_t - nu - B_i x_t) where x is the uncentered lag stack
            rhs = self.resid[i].sum(axis=0) + self.t_eff * (m_alpha @ st.alpha[i])
            prec = self.t_eff * (m_alpha.T @ m_alpha) / sigma2 + eye / hyper.alpha_var
            lin = m_alpha.T @ rhs / sigma2
            new = _draw_mvn(prec, lin, self.rng, "alpha")
            st.alpha[i] = new
        # random-intercept variance and its auxiliary
        total = float(np.sum(st.alpha**2))
        count = st.alpha.size
        hyper.alpha_var = float(
            inv_gamma(self.rng, 0.5 * (1 + count), 1.0 / hyper.alpha_phi + 0.5 * total)
        )
        hyper.alpha_phi = float(inv_gamma(self.rng, 1.0, 1.0 + 1.0 / hyper.alpha_var))
        self._guard("random intercepts", st.alpha, [hyper.alpha_var, hyper.alpha_phi])
        # alpha enters the lag centering, so every cache is stale from here on;
        # the next sweep's refresh rebuilds them.

    # -- steps 9-10: auxiliaries ------------------------------------------------------

    def _step_phi(self):
        hyper = self.state.hyper
        for fac in hyper.factors:
            fac.phi = inv_gamma(self.rng, 1.0, 1.0 + 1.0 / fac.tau2, size=fac.tau2.shape)
        hyper.core.phi = inv_gamma(
            self.rng, 1.0, 1.0 + 1.0 / hyper.core.tau2, size=hyper.core.tau2.shape
        )
        hyper.intercept.phi = inv_gamma(
            self.rng, 1.0, 1.0 + 1.0 / hyper.intercept.tau2, size=hyper.intercept.tau2.shape
        )
        self._guard("phi auxiliaries", *(f.phi for f in hyper.factors),
                    hyper.core.phi, hyper.intercept.phi)

    def _step_xi(self):
        hyper = self.state.hyper
        inv_sum = sum(1.0 / f.lambda2 for f in hyper.factors)
        inv_sum += 1.0 / hyper.core.lambda2 + 1.0 / hyper.intercept.lambda2
        hyper.xi = float(inv_gamma(self.rng, 3.0, 1.0 + inv_sum))
        self._guard("xi auxiliary", [hyper.xi])

    # -- one sweep -----------------------------------------------------------------

    def sweep(self):
        self._refresh()
        self._step_sigma2()
        self._step_local_scales()
        self._step_global_scales()
        self._step_mgps()
        self._step_factors()
        self._step_core()
        self._step_intercept()
        if self.cfg.check_consistency:
            # alpha has not moved since the refresh, so the centered caches are
            # still valid here; the check covers all incremental factor algebra.
            self._assert_consistent()
        if self.state.is_panel:
            self._step_alpha()
        self._step_phi()
        self._step_xi()

    def _assert_consistent(self):
        """Incrementally maintained residuals must match a fresh model-mean reconstruction."""
        st = self.state
        core_mat = _core_matrix(st)
        for i in range(self.n_subjects):
            b_i = st.beta1_total(i) @ core_mat
            fresh = (
                self.responses[i] - st.nu[None, :] - st.alpha[i][None, :] - self.xc[i] @ b_i.T
            )
            err = float(np.max(np.abs(fresh - self.resid[i])))
            scale = max(1.0, float(np.max(np.abs(fresh))))
            if err > 1e-10 * scale:
                raise SamplerError(f"residual cache drifted by {err:.3e} (subject {i})")


def _draw_mvn(prec: np.ndarray, lin: np.ndarray, rng: np.random.Generator, step: str) -> np.ndarray:
    """Draw from N(prec^{-1} lin, prec^{-1}) via a Cholesky factor of the precision."""
    cho = None
    scale = float(np.mean(np.diag(prec)))
    for jitter in (0.0, 1e-12, 1e-8, 1e-4):
        try:
            bumped = prec if jitter == 0.0 else prec + jitter * scale * np.eye(prec.shape[0])
            cho = cho_factor(bumped, lower=True)
            break
        except np.linalg.LinAlgError:
            continue
    if cho is None:
        raise SamplerError(f"precision matrix not positive definite in step '{step}'")
    mean = cho_solve(cho, lin)
    z = rng.standard_normal(lin.shape[0])
    dev = solve_triangular(cho[0].T, z, lower=False)
    out = mean + dev
    if not np.all(np.isfinite(out)):
        raise SamplerError(f"non-finite draw in step '{step}'")
    return out


# ---------------------------------------------------------------------------
# public operations


def build_h_matrix(
    state: PanelState, x_t: np.ndarray, factor: int, column: int, subject: int = 0
) -> np.ndarray:
    """Coefficient matrix of one factor column in the conditional mean at time t.

    ``x_t`` is the raw stacked lag vector ``(y_{t-1}, ..., y_{t-L})``; it is
    centered by the subject's random intercept internally, matching the model
    mean. The returned ``K x P_j`` matrix ``H`` satisfies
    ``mean = (other terms) + H @ column``.
    """
    if factor not in (1, 2, 3):
        raise ValueError("factor must be 1, 2 or 3")
    k, el = state.n_series, state.n_lags
    r1, r2, r3 = state.ranks
    limits = {1: r1, 2: r2, 3: r3}
    if not 0 <= column < limits[factor]:
        raise IndexError(f"column {column} out of range for factor {factor}")
    x_t = np.asarray(x_t, dtype=float).reshape(-1)
    if x_t.shape[0] != k * el:
        raise ValueError(f"lag vector must have length {k * el}")
    x_t = x_t - np.tile(state.alpha[subject], el)
    xm = x_t.reshape(el, k).T  # (K, L): column l holds y_{t-l-1}
    b1 = state.beta1_total(subject)
    if factor == 1:
        w = state.beta2.T @ xm @ state.beta3  # (R2, R3)
        scalar = float(np.sum(state.core[column] * w))
        return scalar * np.eye(k)
    if factor == 2:
        a = b1 @ state.core[:, column, :]  # (K, R3)
        v = xm @ state.beta3  # (K, R3)
        return a @ v.T
    a = b1 @ state.core[:, :, column]  # (K, R2)
    u = xm.T @ state.beta2  # (L, R2)
    return a @ u.T


def gibbs_sweep(
    state: PanelState, data: PanelData, cfg: SamplerConfig, rng: np.random.Generator
) -> PanelState:
    """Run one full sweep of conditional updates on ``state`` (mutated and returned)."""
    responses, lags = _prepare_arrays(data, cfg.n_lags)
    if responses.shape[0] != state.n_subjects or responses.shape[2] != state.n_series:
        raise ValueError("state and data are dimensionally inconsistent")
    engine = _Engine(state, responses, lags, cfg, rng)
    engine.sweep()
    return state


def _prepare_arrays(data: PanelData, n_lags: int) -> tuple:
    train = data.train()
    responses, lag_rows = [], []
    for i in range(train.shape[0]):
        resp, stacked = lag_stack(train[i], n_lags)
        responses.append(resp)
        lag_rows.append(stacked)
    return np.array(responses), np.array(lag_rows)


def prune_ranks(
    state: PanelState, window_norms: dict, threshold: float
) -> tuple[PanelState, RankReport]:
    """Drop factor columns whose windowed mean norms sit in the zero neighborhood.

    ``window_norms[j]`` holds per-iteration column norms with shape
    ``(window, n_blocks_j, R_j)``; for the row factor in panels every block
    (fixed and each subject) must be below threshold before a column is
    dropped. Never prunes a factor to rank zero.
    """
    pruned: dict = {}
    for j in (0, 1, 2):
        norms = np.asarray(window_norms[j], dtype=float)
        mean_norms = norms.mean(axis=0)  # (n_blocks, R_j)
        ref = float(mean_norms.max())
        if ref <= 0.0:
            continue
        below = np.all(mean_norms < threshold * ref, axis=0)  # (R_j,)
        drop = [int(r) for r in np.flatnonzero(below)]
        n_cols = mean_norms.shape[1]
        if len(drop) >= n_cols:  # refuse to prune a factor away entirely
            keep_one = int(np.argmax(mean_norms.max(axis=0)))
            drop = [r for r in drop if r != keep_one]
        if drop:
            pruned[j] = drop
            _drop_columns(state, j, drop)
    return state, RankReport(pruned=pruned, ranks=state.ranks)


def _drop_columns(state: PanelState, j: int, columns: list):
    keep = [r for r in range(state.ranks[j]) if r not in columns]
    if j == 0:
        state.beta1_fixed = state.beta1_fixed[:, keep]
        state.beta1_dev = state.beta1_dev[:, :, keep]
        state.core = state.core[keep, :, :]
    elif j == 1:
        state.beta2 = state.beta2[:, keep]
        state.core = state.core[:, keep, :]
    else:
        state.beta3 = state.beta3[:, keep]
        state.core = state.core[:, :, keep]
    fac = state.hyper.factors[j]
    state.hyper.factors[j] = FactorHyper(
        tau2=fac.tau2[:, :, keep], phi=fac.phi[:, :, keep],
        lambda2=fac.lambda2, delta=fac.delta[keep],
    )
    core_hyper = state.hyper.core
    idx = [slice(None)] * 3
    idx[j] = keep
    core_hyper.tau2 = core_hyper.tau2[tuple(idx)]
    core_hyper.phi = core_hyper.phi[tuple(idx)]


def column_norms(state: PanelState) -> dict:
    """Current column norms per factor, shaped (n_blocks, R_j) each."""
    out = {}
    if state.is_panel:
        blocks = np.concatenate(
            [state.beta1_fixed[None], state.beta1_fixed[None] + state.beta1_dev], axis=0
        )
    else:
        blocks = state.beta1_fixed[None]
    out[0] = np.linalg.norm(blocks, axis=1)
    out[1] = np.linalg.norm(state.beta2[None], axis=1)
    out[2] = np.linalg.norm(state.beta3[None], axis=1)
    return out


def select_lags(draws: PosteriorDraws, cfg: Optional[DecisionConfig] = None) -> LagReport:
    """Mark a lag active when at least one of its edges survives the decision rule."""
    if draws.n_draws == 0:
        raise ValueError("need at least one posterior draw")
    cfg = cfg or DecisionConfig()
    coeff = lag_coefficient_draws(draws.b_fixed, draws.n_series)
    network = decide_network(inclusion_probabilities(coeff, cfg.delta), cfg)
    edges = network.decisions.sum(axis=(1, 2))
    return LagReport(
        active=network.active_lags(),
        row_norm_mean=draws.beta3_row_norms.mean(axis=0),
        row_norm_sd=draws.beta3_row_norms.std(axis=0),
        edges_per_lag=edges,
    )


# ---------------------------------------------------------------------------
# the resumable chain driver


class GibbsSampler:
    """Drives a chain over a fixed dataset; supports snapshot/restore for resume."""

    def __init__(self, data: PanelData, cfg: SamplerConfig):
        responses, lags = _prepare_arrays(data, cfg.n_lags)
        self.cfg = cfg
        self.rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        self.state = init_state(data, cfg, self.rng)
        self.engine = _Engine(self.state, responses, lags, cfg, self.rng)
        self.iteration = 0
        n_draws = (cfg.iterations - cfg.burn_in) // cfg.thin
        n, k = self.state.n_subjects, self.state.n_series
        kl = k * cfg.n_lags
        self._draw_index = 0
        self._b_fixed = np.empty((n_draws, k, kl))
        self._nu = np.empty((n_draws, k))
        self._sigma2 = np.empty(n_draws)
        self._row_norms = np.empty((n_draws, cfg.n_lags))
        self._ranks = np.empty((n_draws, 3), dtype=int)
        self._unstable = np.zeros(n_draws, dtype=bool)
        panelish = self.state.is_panel and cfg.store_subject_draws
        self._b_subject = np.empty((n_draws, n, k, kl)) if panelish else None
        self._alpha = np.empty((n_draws, n, k)) if self.state.is_panel else None
        self._norm_window: list = []

    def run(self) -> PosteriorDraws:
        while self.iteration < self.cfg.iterations:
            self.step()
        return self.draws()

    def step(self):
        self.engine.sweep()
        self.iteration += 1
        self._maybe_prune()
        self._maybe_record()

    def _maybe_prune(self):
        cfg = self.cfg
        if not cfg.prune_enabled:
            return
        # prune only while the chain settles: second half of warmup
        if not (cfg.burn_in // 2 <= self.iteration <= cfg.burn_in):
            return
        self._norm_window.append(column_norms(self.state))
        if len(self._norm_window) < cfg.prune_window:
            return
        if self.iteration % cfg.prune_window != 0:
            return
        window = {
            j: np.stack([w[j] for w in self._norm_window[-cfg.prune_window:]])
            for j in (0, 1, 2)
        }
        _, report = prune_ranks(self.state, window, cfg.prune_threshold)
        if report.pruned:
            self._norm_window.clear()  # shapes changed; restart the window

    def _maybe_record(self):
        cfg = self.cfg
        if self.iteration <= cfg.burn_in:
            return
        if (self.iteration - cfg.burn_in) % cfg.thin != 0:
            return
        idx = self._draw_index
        if idx >= self._b_fixed.shape[0]:
            return
        st = self.state
        b_fixed = reconstruct_fixed(st)
        self._b_fixed[idx] = b_fixed
        self._nu[idx] = st.nu
        self._sigma2[idx] = st.hyper.sigma2
        self._row_norms[idx] = np.linalg.norm(st.beta3, axis=1)
        self._ranks[idx] = st.ranks
        stab = is_stable(VarParams(b_fixed, st.nu, max(st.hyper.sigma2, 1e-300)))
        self._unstable[idx] = not stab.stable
        if self._b_subject is not None:
            core_mat = _core_matrix(st)
            for i in range(st.n_subjects):
                self._b_subject[idx, i] = st.beta1_total(i) @ core_mat
        if self._alpha is not None:
            self._alpha[idx] = st.alpha
        self._draw_index = idx + 1

    def draws(self) -> PosteriorDraws:
        n = self._draw_index
        return PosteriorDraws(
            b_fixed=self._b_fixed[:n].copy(),
            nu=self._nu[:n].copy(),
            sigma2=self._sigma2[:n].copy(),
            beta3_row_norms=self._row_norms[:n].copy(),
            ranks=self._ranks[:n].copy(),
            unstable=self._unstable[:n].copy(),
            b_subject=self._b_subject[:n].copy() if self._b_subject is not None else None,
            alpha=self._alpha[:n].copy() if self._alpha is not None else None,
        )

    # -- checkpointing ---------------------------------------------------------

    def snapshot(self) -> dict:
        """Flat array mapping capturing everything needed to resume bit-exactly."""
        st = self.state
        hyper = st.hyper
        out = {
            "iteration": np.array([self.iteration, self._draw_index], dtype=np.int64),
            "rng_state": _pack_rng_state(self.rng),
            "beta1_fixed": st.beta1_fixed,
            "beta1_dev": st.beta1_dev,
            "beta2": st.beta2,
            "beta3": st.beta3,
            "core": st.core,
            "nu": st.nu,
            "alpha": st.alpha,
            "hyper_scalars": np.array(
                [hyper.xi, hyper.sigma2, hyper.alpha_var, hyper.alpha_phi,
                 hyper.a1, hyper.a2, hyper.a_sigma, hyper.b_sigma]
            ),
            "core_tau2": hyper.core.tau2,
            "core_phi": hyper.core.phi,
            "nu_tau2": hyper.intercept.tau2,
            "nu_phi": hyper.intercept.phi,
            "elem_lambda2": np.array([hyper.core.lambda2, hyper.intercept.lambda2]),
        }
        for j, fac in enumerate(hyper.factors):
            out[f"fac{j}_tau2"] = fac.tau2
            out[f"fac{j}_phi"] = fac.phi
            out[f"fac{j}_delta"] = fac.delta
            out[f"fac{j}_lambda2"] = np.array([fac.lambda2])
        n = self._draw_index
        out["draw_b_fixed"] = self._b_fixed[:n]
        out["draw_nu"] = self._nu[:n]
        out["draw_sigma2"] = self._sigma2[:n]
        out["draw_row_norms"] = self._row_norms[:n]
        out["draw_ranks"] = self._ranks[:n]
        out["draw_unstable"] = self._unstable[:n]
        if self._b_subject is not None:
            out["draw_b_subject"] = self._b_subject[:n]
        if self._alpha is not None:
            out["draw_alpha"] = self._alpha[:n]
        for j in (0, 1, 2):
            stacked = (
                np.stack([w[j] for w in self._norm_window])
                if self._norm_window
                else np.zeros((0, 1, st.ranks[j]))
            )
            out[f"norm_window_{j}"] = stacked
        return out

    @classmethod
    def restore(cls, data: PanelData, cfg: SamplerConfig, payload: dict) -> "GibbsSampler":
        """Rebuild a sampler mid-run from a snapshot mapping."""
        chain = cls(data, cfg)
        scalars = payload["hyper_scalars"]
        factors = []
        for j in range(3):
            factors.append(FactorHyper(
                tau2=payload[f"fac{j}_tau2"], phi=payload[f"fac{j}_phi"],
                lambda2=float(payload[f"fac{j}_lambda2"][0]), delta=payload[f"fac{j}_delta"],
            ))
        hyper = HyperState(
            factors=factors,
            core=ElementHyper(tau2=payload["core_tau2"], phi=payload["core_phi"],
                              lambda2=float(payload["elem_lambda2"][0])),
            intercept=ElementHyper(tau2=payload["nu_tau2"], phi=payload["nu_phi"],
                                   lambda2=float(payload["elem_lambda2"][1])),
            xi=float(scalars[0]), sigma2=float(scalars[1]),
            alpha_var=float(scalars[2]), alpha_phi=float(scalars[3]),
            a1=float(scalars[4]), a2=float(scalars[5]),
            a_sigma=float(scalars[6]), b_sigma=float(scalars[7]),
        )
        state = PanelState(
            beta1_fixed=payload["beta1_fixed"].copy(),
            beta1_dev=payload["beta1_dev"].copy(),
            beta2=payload["beta2"].copy(),
            beta3=payload["beta3"].copy(),
            core=payload["core"].copy(),
            nu=payload["nu"].copy(),
            alpha=payload["alpha"].copy(),
            hyper=hyper,
        )
        chain.state = state
        chain.engine = _Engine(state, chain.engine.responses, chain.engine.lags, cfg, chain.rng)
        _unpack_rng_state(chain.rng, payload["rng_state"])
        chain.iteration = int(payload["iteration"][0])
        chain._draw_index = int(payload["iteration"][1])
        n = chain._draw_index
        chain._b_fixed[:n] = payload["draw_b_fixed"]
        chain._nu[:n] = payload["draw_nu"]
        chain._sigma2[:n] = payload["draw_sigma2"]
        chain._row_norms[:n] = payload["draw_row_norms"]
        chain._ranks[:n] = payload["draw_ranks"]
        chain._unstable[:n] = payload["draw_unstable"]
        if chain._b_subject is not None and "draw_b_subject" in payload:
            chain._b_subject[:n] = payload["draw_b_subject"]
        if chain._alpha is not None and "draw_alpha" in payload:
            chain._alpha[:n] = payload["draw_alpha"]
        chain._norm_window = []
        for w_idx in range(payload["norm_window_0"].shape[0]):
            chain._norm_window.append(
                {j: payload[f"norm_window_{j}"][w_idx] for j in (0, 1, 2)}
            )
        return chain


def _pack_rng_state(rng: np.random.Generator) -> np.ndarray:
    """PCG64 state as six unsigned 64-bit words (state, inc as lo/hi pairs, caches)."""
    raw = rng.bit_generator.state
    if raw["bit_generator"] != "PCG64":
        raise ValueError("only PCG64 generators are checkpointable")
    mask = (1 << 64) - 1
    s, inc = raw["state"]["state"], raw["state"]["inc"]
    return np.array(
        [s & mask, (s >> 64) & mask, inc & mask, (inc >> 64) & mask,
         raw["has_uint32"], raw["uinteger"]],
        dtype=np.uint64,
    )


def _unpack_rng_state(rng: np.random.Generator, packed: np.ndarray):
    words = [int(x) for x in packed]
    rng.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {"state": words[0] | (words[1] << 64), "inc": words[2] | (words[3] << 64)},
        "has_uint32": words[4],
        "uinteger": words[5],
    }


def fit(data: PanelData, cfg: SamplerConfig) -> PosteriorDraws:
    """Initialize, run the configured number of sweeps, and return thinned draws."""
    return GibbsSampler(data, cfg).run()
