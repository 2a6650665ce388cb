"""Simulated-field classification EM for the spatially coupled mixture.

Each iteration (1) redraws the hidden label field with one or more
single-site Gibbs sweeps under the current prior parameters, (2) computes
responsibilities from the conditional prior evaluated on that field times
the multinomial densities, (3) hardens them to labels, and (4) updates the
category probabilities in closed form and the prior parameters numerically.
With ``spatial`` off the interaction terms are pinned to zero, the field
becomes irrelevant, and the loop reduces to the ordinary mixture EM.

Because the simulated field makes the likelihood trace stochastic, the fit
keeps the best parameter snapshot seen so far and stops once no larger
approximated observed log-likelihood has appeared for ``patience``
successive iterations.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError
from .gibbs import GibbsParams, fit_gibbs_params, gibbs_sweep, log_conditional_prior_field
from .multinomial import check_identifiability, floor_simplex, log_pmf_matrix
from .selection import bic as bic_value, free_params

# Sub-stream tags for deriving independent generators from one seed.  The
# initialization stream is kept separate from the field stream so that runs
# differing only in whether fields are simulated share identical starts.
_STREAM_INIT = 0
_STREAM_FIELD = 1
_STREAM_AUX = 2

# Responsibility column mass below which a component counts as empty.
EMPTY_COMPONENT_TOL = 1e-8


@dataclass
class MixtureParams:
    """Component category probabilities plus label-prior parameters."""

    lam: np.ndarray
    gibbs: GibbsParams

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        if lam.shape[0] != self.gibbs.K:
            raise ValueError("one probability row per component is required")
        if np.any(lam <= 0) or not np.allclose(lam.sum(axis=1), 1.0, atol=1e-8):
            raise ValueError("each probability row must be a strictly positive simplex vector")
        self.lam = lam

    @property
    def K(self):
        return self.lam.shape[0]


@dataclass
class FitConfig:
    """Settings for one fit.

    ``n_starts`` short runs of ``short_run_iter`` iterations pick the
    initialization; the main loop then runs to ``max_iter`` with the
    ``patience`` stopping rule.  ``fix_beta_zero`` keeps the spatial loop
    but pins all interaction strengths at zero (diagnostic: the result must
    match ``spatial=False`` exactly).
    """

    K: int
    spatial: bool = True
    max_iter: int = 300
    patience: int = 50
    n_starts: int = 20
    short_run_iter: int = 10
    field_sweeps: int = 1
    gibbs_method: str = "newton"
    seed: int = 0
    fix_beta_zero: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.max_iter < self.patience:
            raise ValueError("max_iter must be at least patience")
        if self.n_starts < 1 or self.short_run_iter < 1:
            raise ValueError("n_starts and short_run_iter must be at least 1")
        if self.field_sweeps < 1:
            raise ValueError("field_sweeps must be at least 1")
        if self.gibbs_method not in ("newton", "anneal"):
            raise ValueError(f"unknown gibbs_method {self.gibbs_method!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class FitResult:
    """Best snapshot of a fit plus its trace and selection statistics."""

    params: MixtureParams
    labels: np.ndarray
    w: np.ndarray
    loglik_trace: np.ndarray
    best_loglik: float
    bic: float
    d: int
    iterations: int
    seed: int
    converged: bool
    spatial: bool
    identifiability_ok: bool

    @property
    def K(self):
        return self.params.K

    def component_sizes(self):
        return np.bincount(self.labels, minlength=self.K)


def e_step(data, field, graph, params):
    """Responsibilities w_ik from the field-conditioned prior and the densities."""
    logt = log_conditional_prior_field(field, graph, params.gibbs)
    logf = log_pmf_matrix(data, params.lam, include_coefficient=False)
    score = logt + logf
    norm = logsumexp(score, axis=1, keepdims=True)
    if not np.all(np.isfinite(norm)):
        raise NumericError("all components have vanishing density for some region")
    return np.exp(score - norm)


def c_step(w):
    """Hard assignment: row argmax, ties broken toward the lowest index."""
    return np.argmax(w, axis=1)


def m_step_lambda(data, w, rng=None):
    """Weighted category proportions, floored and renormalized per component.

    A component whose responsibility column has (numerically) no mass gets
    re-seeded at the pooled proportions, perturbed by up to +/-5% when a
    generator is supplied, so a sweep over K never aborts mid-run.
    """
    w = np.asarray(w, dtype=float)
    colsum = w.sum(axis=0)
    num = w.T @ data.y
    den = w.T @ data.m
    lam = np.empty((w.shape[1], data.J))
    pooled = data.y.sum(axis=0) / data.m.sum()
    for k in range(w.shape[1]):
        if colsum[k] < EMPTY_COMPONENT_TOL:
            warnings.warn(
                f"component {k} lost all responsibility mass; re-seeding it at "
                "the pooled proportions",
                stacklevel=2,
            )
            row = pooled.copy()
            if rng is not None:
                row = row * (1.0 + rng.uniform(-0.05, 0.05, row.size))
            lam[k] = row / row.sum()
        else:
            lam[k] = num[k] / den[k]
    return floor_simplex(lam)


def q_value(data, w, field, graph, params):
    """Field-approximated expected complete log-likelihood (no coefficient)."""
    logt = log_conditional_prior_field(field, graph, params.gibbs)
    loglam_term = data.y @ np.log(params.lam).T
    return float(np.sum(w * (logt + loglam_term)))


def observed_loglik_approx(data, field, graph, params):
    """Approximated observed log-likelihood: sum_i log sum_k t_ik f(y_i|lam_k)."""
    logt = log_conditional_prior_field(field, graph, params.gibbs)
    logf = log_pmf_matrix(data, params.lam, include_coefficient=True)
    return float(logsumexp(logt + logf, axis=1).sum())


@dataclass
class _State:
    params: MixtureParams
    field: np.ndarray
    w: np.ndarray
    labels: np.ndarray
    loglik: float


def _evaluate(data, graph, params, field):
    w = e_step(data, field, graph, params)
    return _State(
        params=params,
        field=field,
        w=w,
        labels=c_step(w),
        loglik=observed_loglik_approx(data, field, graph, params),
    )


def _iterate(data, graph, cfg, state, rng_field, rng_aux):
    field = state.field
    if cfg.spatial:
        for _ in range(cfg.field_sweeps):
            field = gibbs_sweep(field, graph, state.params.gibbs, rng_field)
    w = e_step(data, field, graph, state.params)
    labels = c_step(w)
    lam = m_step_lambda(data, w, rng=rng_aux)
    fix_beta = (not cfg.spatial) or cfg.fix_beta_zero
    gibbs = fit_gibbs_params(
        w, field, graph, state.params.gibbs,
        method=cfg.gibbs_method, fix_beta=fix_beta, rng=rng_aux,
    )
    params = MixtureParams(lam=lam, gibbs=gibbs)
    loglik = observed_loglik_approx(data, field, graph, params)
    return _State(params=params, field=field, w=w, labels=labels, loglik=loglik)


def _run_loop(data, graph, cfg, start, rng_field, rng_aux, n_iter, patience=None):
    """Iterate from an evaluated state, tracking the best-so-far snapshot."""
    best = start
    trace = [start.loglik]
    state = start
    stall = 0
    iterations = 0
    for _ in range(n_iter):
        state = _iterate(data, graph, cfg, state, rng_field, rng_aux)
        trace.append(state.loglik)
        iterations += 1
        if state.loglik > best.loglik:
            best = state
            stall = 0
        else:
            stall += 1
            if patience is not None and stall >= patience:
                break
    converged = patience is not None and stall >= patience
    return best, np.array(trace), iterations, converged


def _random_start(data, graph, cfg, rng_init):
    lam = rng_init.uniform(size=(cfg.K, data.J))
    lam = floor_simplex(lam)
    params = MixtureParams(lam=lam, gibbs=GibbsParams.null(cfg.K))
    field = rng_init.integers(0, cfg.K, size=graph.n)
    return _evaluate(data, graph, params, field)


def fit(data, graph, cfg, init_params=None, init_field=None):
    """Run the full estimation: multi-start selection, then the main loop.

    Starts draw each component's probability row uniformly (normalized),
    zero prior parameters, and one uniform label field; the start with the
    best short-run log-likelihood continues into the main loop.  Passing
    ``init_params`` and ``init_field`` skips the multi-start phase.
    Deterministic for a fixed config and seed.
    """
    if data.n != graph.n:
        raise ValueError(f"count matrix has {data.n} regions but graph has {graph.n} nodes")
    identifiability_ok = check_identifiability(data, cfg.K)
    seed = cfg.seed

    if (init_params is None) != (init_field is None):
        raise ValueError("init_params and init_field must be given together")

    if init_params is not None:
        init_field = np.asarray(init_field)
        if init_field.shape != (graph.n,):
            raise ValueError(f"init_field must have shape ({graph.n},)")
        if init_params.K != cfg.K:
            raise ValueError("init_params component count must match cfg.K")
        selected = _evaluate(data, graph, init_params, init_field)
    else:
        selected = None
        for s in range(cfg.n_starts):
            rng_init = np.random.default_rng([seed, _STREAM_INIT, s])
            rng_field = np.random.default_rng([seed, _STREAM_FIELD, s])
            rng_aux = np.random.default_rng([seed, _STREAM_AUX, s])
            start = _random_start(data, graph, cfg, rng_init)
            snap, _, _, _ = _run_loop(
                data, graph, cfg, start, rng_field, rng_aux, cfg.short_run_iter
            )
            if selected is None or snap.loglik > selected.loglik:
                selected = snap

    rng_field = np.random.default_rng([seed, _STREAM_FIELD, cfg.n_starts])
    rng_aux = np.random.default_rng([seed, _STREAM_AUX, cfg.n_starts])
    best, trace, iterations, converged = _run_loop(
        data, graph, cfg, selected, rng_field, rng_aux, cfg.max_iter, patience=cfg.patience
    )

    d = free_params(cfg.K, data.J, cfg.spatial and not cfg.fix_beta_zero)
    return FitResult(
        params=best.params,
        labels=best.labels,
        w=best.w,
        loglik_trace=trace,
        best_loglik=best.loglik,
        bic=bic_value(best.loglik, d, data.n),
        d=d,
        iterations=iterations,
        seed=seed,
        converged=converged,
        spatial=cfg.spatial,
        identifiability_ok=identifiability_ok,
    )


def fit_with_warm_start(data, graph, cfg, previous):
    """Fit K components starting from a (K-1)-component solution.

    The previous probability rows are kept, one uniformly drawn row is
    appended, the prior parameter vectors are extended with a zero, and the
    previous hard labels seed the field.
    """
    if cfg.K != previous.K + 1:
        raise ValueError(
            f"warm start needs cfg.K = previous.K + 1, got {cfg.K} vs {previous.K}"
        )
    rng_init = np.random.default_rng([cfg.seed, _STREAM_INIT, 0])
    new_row = floor_simplex(rng_init.uniform(size=(1, data.J)))
    lam = np.vstack([previous.params.lam, new_row])
    gibbs = GibbsParams(
        alpha=np.append(previous.params.gibbs.alpha, 0.0),
        beta=np.append(previous.params.gibbs.beta, 0.0),
    )
    params = MixtureParams(lam=lam, gibbs=gibbs)
    return fit(data, graph, cfg, init_params=params, init_field=previous.labels.copy())
