"""Gibbs-distributed label prior on a region graph and its parameter fitting.

The conditional prior of node i is a multinomial logit over components,

    t_ik = softmax_k( alpha_k + beta_k * (n_ik - n_ik^c) ),

where n_ik / n_ik^c count neighbors of i inside / outside component k.
Component 1 is the reference: alpha_1 = beta_1 = 0.  The per-edge potential
is -1 for agreeing neighbor labels and +1 otherwise, which makes the
interaction statistic exactly n_ik - n_ik^c.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .graph import neighbor_counts

# Optimization box for (alpha_k, beta_k); prevents softmax saturation overflow.
PARAM_BOX = 15.0


@dataclass
class GibbsParams:
    """Intercepts and interaction strengths of the label prior."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if alpha.ndim != 1 or alpha.shape != beta.shape:
            raise ValueError("alpha and beta must be 1-d vectors of equal length")
        if alpha.size < 1:
            raise ValueError("need at least one component")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
            raise ValueError("parameters must be finite")
        if alpha[0] != 0.0 or beta[0] != 0.0:
            raise ValueError("reference component must have alpha[0] = beta[0] = 0")
        self.alpha = alpha
        self.beta = beta

    @property
    def K(self):
        return self.alpha.size

    @classmethod
    def null(cls, K):
        """All-zero parameters: a uniform, field-independent prior."""
        return cls(alpha=np.zeros(K), beta=np.zeros(K))


def potential(z_ik, z_jk):
    """Edge potential: -1 when both indicators are 1, +1 otherwise."""
    z_ik = np.asarray(z_ik)
    z_jk = np.asarray(z_jk)
    if not (np.isin(z_ik, (0, 1)).all() and np.isin(z_jk, (0, 1)).all()):
        raise ValueError("potential takes 0/1 indicators")
    out = np.where(z_ik * z_jk == 1, -1, 1)
    return int(out) if out.ndim == 0 else out


def _logits_field(labels, graph, params):
    """(n, K) logit matrix alpha_k + beta_k * (n_ik - n_ik^c) for a labeling."""
    counts = neighbor_counts(graph, labels, params.K)
    return params.alpha[None, :] + params.beta[None, :] * counts.difference


def log_conditional_prior_field(labels, graph, params):
    """Log of the conditional prior t for every node at once."""
    eta = _logits_field(labels, graph, params)
    return eta - logsumexp(eta, axis=1, keepdims=True)


def conditional_prior_field(labels, graph, params):
    """Conditional prior t_ik for every node; rows sum to 1."""
    return np.exp(log_conditional_prior_field(labels, graph, params))


def conditional_prior(i, labels, graph, params):
    """Conditional prior of node i given its neighbors' current labels."""
    labels = np.asarray(labels)
    nb = graph.neighbors(i)
    cnt = np.bincount(labels[nb], minlength=params.K)
    eta = params.alpha + params.beta * (2 * cnt - nb.size)
    eta = eta - eta.max()
    p = np.exp(eta)
    return p / p.sum()


def gibbs_sweep(labels, graph, params, rng):
    """One systematic sweep of single-site draws from the conditional prior.

    Nodes are visited in ascending index order and each draw conditions on
    the partially updated field.  Returns a new label array; the input is
    not modified.  Deterministic for a fixed generator state.
    """
    z = np.array(labels, dtype=np.int64, copy=True)
    if z.shape != (graph.n,):
        raise ValueError(f"labels must have shape ({graph.n},)")
    K = params.K
    if z.size and (z.min() < 0 or z.max() >= K):
        raise ValueError(f"labels must lie in [0, {K})")
    alpha = params.alpha.tolist()
    beta = params.beta.tolist()
    nbrs = graph.neighbor_lists()
    u = rng.random(graph.n)
    zl = z.tolist()
    exp = math.exp
    for i in range(graph.n):
        nb = nbrs[i]
        cnt = [0] * K
        for j in nb:
            cnt[zl[j]] += 1
        deg = len(nb)
        eta = [alpha[k] + beta[k] * (2 * cnt[k] - deg) for k in range(K)]
        mx = max(eta)
        p = [exp(e - mx) for e in eta]
        r = u[i] * sum(p)
        acc = 0.0
        pick = K - 1
        for k in range(K):
            acc += p[k]
            if r < acc:
                pick = k
                break
        zl[i] = pick
    return np.array(zl, dtype=np.int64)


def gibbs_objective(weights, field, graph, params):
    """M-step objective for the prior parameters: sum_ik w_ik log t_ik(field)."""
    logt = log_conditional_prior_field(field, graph, params)
    return float(np.sum(np.asarray(weights) * logt))


def _pack(alpha, beta, fix_beta):
    if fix_beta:
        return alpha[1:].copy()
    return np.concatenate([alpha[1:], beta[1:]])


def _unpack(vec, K, beta_init, fix_beta):
    alpha = np.zeros(K)
    beta = beta_init.copy()
    if fix_beta:
        alpha[1:] = vec
    else:
        alpha[1:] = vec[: K - 1]
        beta[1:] = vec[K - 1:]
    return alpha, beta


def _log_softmax(eta):
    mx = eta.max(axis=1, keepdims=True)
    shifted = eta - mx
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _objective_only(w, d, vec, K, beta_init, fix_beta):
    alpha, beta = _unpack(vec, K, beta_init, fix_beta)
    eta = alpha[None, :] + beta[None, :] * d
    return float(np.sum(w * _log_softmax(eta)))


def _objective_grad_hess(w, d, vec, K, beta_init, fix_beta):
    """Objective, gradient and Hessian in the free-parameter vector.

    ``d`` is the (n, K) interaction statistic of the conditioning field.
    The model is a softmax that is linear in its free parameters, so the
    objective is concave and the Hessian exact.
    """
    alpha, beta = _unpack(vec, K, beta_init, fix_beta)
    eta = alpha[None, :] + beta[None, :] * d
    logt = _log_softmax(eta)
    t = np.exp(logt)
    obj = float(np.sum(w * logt))

    resid = w - t  # rows of w and t both sum to 1
    g_alpha = resid[:, 1:].sum(axis=0)
    if fix_beta:
        grad = g_alpha
    else:
        g_beta = (resid[:, 1:] * d[:, 1:]).sum(axis=0)
        grad = np.concatenate([g_alpha, g_beta])

    p = K - 1
    dim = p if fix_beta else 2 * p
    hess = np.zeros((dim, dim))
    for k in range(p):
        tk = t[:, k + 1]
        for l in range(p):
            s = tk * ((1.0 if k == l else 0.0) - t[:, l + 1])
            hess[k, l] -= s.sum()
            if not fix_beta:
                hess[k, p + l] -= (s * d[:, l + 1]).sum()
                hess[p + k, l] -= (s * d[:, k + 1]).sum()
                hess[p + k, p + l] -= (s * d[:, k + 1] * d[:, l + 1]).sum()
    return obj, grad, hess


def _newton_ascent(w, d, vec0, K, beta_init, fix_beta, max_iter=100, grad_tol=1e-9):
    vec = np.clip(vec0, -PARAM_BOX, PARAM_BOX)
    obj, grad, hess = _objective_grad_hess(w, d, vec, K, beta_init, fix_beta)
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < grad_tol:
            break
        try:
            step = np.linalg.solve(-hess + 1e-10 * np.eye(hess.shape[0]), grad)
        except np.linalg.LinAlgError:
            step = grad
        improved = False
        scale = 1.0
        for _ in range(40):
            cand = np.clip(vec + scale * step, -PARAM_BOX, PARAM_BOX)
            cand_obj = _objective_only(w, d, cand, K, beta_init, fix_beta)
            if cand_obj > obj:
                vec = cand
                obj, grad, hess = _objective_grad_hess(w, d, cand, K, beta_init, fix_beta)
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    return vec, obj


def fit_gibbs_params(
    weights,
    field,
    graph,
    init,
    method="newton",
    fix_beta=False,
    rng=None,
    anneal_epochs=200,
    anneal_temp=1.0,
    anneal_cooling=0.95,
    anneal_sigma=0.25,
):
    """Maximize sum_ik w_ik log t_ik(field) over the free (alpha_k, beta_k).

    ``newton`` runs damped Newton-Raphson with step halving on the concave
    softmax objective; ``anneal`` runs simulated annealing with geometric
    cooling and finishes with the same Newton polish.  The reference
    component stays pinned at zero, and with ``fix_beta`` only the
    intercepts move (the beta of ``init`` is kept).  Never returns
    parameters with a lower objective than ``init``.
    """
    w = np.asarray(weights, dtype=float)
    field = np.asarray(field)
    K = init.K
    if w.shape != (graph.n, K):
        raise ValueError(f"weights must have shape ({graph.n}, {K})")
    rowsums = w.sum(axis=1)
    if not (np.all(np.isfinite(rowsums)) and np.max(np.abs(rowsums - 1.0)) < 1e-6):
        raise ValueError("weights must be row-stochastic (hard labels one-hot, or soft rows summing to 1)")
    if K == 1:
        return GibbsParams(alpha=np.zeros(1), beta=np.zeros(1))

    d = neighbor_counts(graph, field, K).difference.astype(float)
    vec0 = _pack(init.alpha, init.beta, fix_beta)
    obj0 = _objective_only(w, d, vec0, K, init.beta, fix_beta)
    if not math.isfinite(obj0):
        raise ValueError("objective is not finite at the initial parameters")

    if method == "newton":
        vec, obj = _newton_ascent(w, d, vec0, K, init.beta, fix_beta)
    elif method == "anneal":
        if rng is None:
            rng = np.random.default_rng(0)
        cur = vec0.copy()
        cur_obj = obj0
        best, best_obj = cur.copy(), cur_obj
        temp = anneal_temp
        for _ in range(anneal_epochs):
            cand = np.clip(cur + rng.normal(0.0, anneal_sigma, cur.size), -PARAM_BOX, PARAM_BOX)
            cand_obj = _objective_only(w, d, cand, K, init.beta, fix_beta)
            if cand_obj >= cur_obj or rng.random() < math.exp((cand_obj - cur_obj) / temp):
                cur, cur_obj = cand, cand_obj
                if cur_obj > best_obj:
                    best, best_obj = cur.copy(), cur_obj
            temp *= anneal_cooling
        vec, obj = _newton_ascent(w, d, best, K, init.beta, fix_beta)
    else:
        raise ValueError(f"unknown method {method!r}")

    if obj < obj0:
        vec = vec0
    alpha, beta = _unpack(vec, K, init.beta, fix_beta)
    return GibbsParams(alpha=alpha, beta=beta)
