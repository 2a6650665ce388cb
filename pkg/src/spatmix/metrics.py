"""Clustering and spatial-dependence diagnostics: ARI, mean age, Moran's I."""

from dataclasses import dataclass

import numpy as np


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def ari(a, b):
    """Adjusted Rand Index between two partitions (any label alphabets).

    Pair-counting agreement corrected for chance:
    (Index - Expected) / (Max - Expected).  Equals 1 exactly when the
    partitions coincide up to relabeling; the degenerate case where both
    bounds collapse (e.g. two all-singleton partitions) is defined as 1.
    """
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError(f"partitions differ in length: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValueError("need at least two elements to compare partitions")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)
    sum_cells = _comb2(contingency).sum()
    sum_rows = _comb2(contingency.sum(axis=1)).sum()
    sum_cols = _comb2(contingency.sum(axis=0)).sum()
    total = _comb2(np.int64(a.size))
    expected = sum_rows * sum_cols / total
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def mean_age(y, midpoints):
    """Average of interval midpoints weighted by the counts in one row."""
    y = np.asarray(y, dtype=float)
    midpoints = np.asarray(midpoints, dtype=float)
    if y.shape != midpoints.shape:
        raise ValueError("counts and midpoints must have the same length")
    if np.any(np.diff(midpoints) <= 0):
        raise ValueError("midpoints must be strictly ascending")
    total = y.sum()
    if total < 1:
        raise ValueError("cannot reduce a row with zero total count")
    return float(np.dot(y, midpoints) / total)


def default_age_midpoints(J=18):
    """Midpoints of five-year age groups; the open-ended last group gets 87.5."""
    mids = 5.0 * np.arange(J) + 2.5
    if J == 18:
        mids[-1] = 87.5
    return mids


def mean_ages(data, midpoints):
    """Per-region mean-age reduction of a count matrix."""
    midpoints = np.asarray(midpoints, dtype=float)
    if midpoints.shape != (data.J,):
        raise ValueError(f"need {data.J} midpoints, got {midpoints.size}")
    return (data.y @ midpoints) / data.m


def _moran_weights(graph, row_standardize):
    a = graph.adjacency().astype(float)
    if row_standardize:
        deg = graph.degrees.astype(float)
        inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
        a = a.multiply(inv[:, None]).tocsr()
    return a


def morans_i(x, graph, row_standardize=False):
    """Moran's spatial autocorrelation of a node variable.

    I = (n / S0) * sum_ij w_ij (x_i - xbar)(x_j - xbar) / sum_i (x_i - xbar)^2
    with binary adjacency weights by default (S0 = sum of all weights).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (graph.n,):
        raise ValueError(f"variable must have one value per node ({graph.n})")
    if graph.num_edges == 0:
        raise ValueError("Moran's I is undefined on a graph without edges")
    dev = x - x.mean()
    denom = float(np.dot(dev, dev))
    if denom == 0.0:
        raise ValueError("variable is constant; Moran's I is undefined")
    w = _moran_weights(graph, row_standardize)
    s0 = float(w.sum())
    num = float(dev @ (w @ dev))
    return (graph.n / s0) * num / denom


@dataclass
class MoranResult:
    I: float
    p_value: float
    n_permutations: int


def moran_permutation_test(x, graph, n_permutations=999, seed=0, row_standardize=False):
    """One-sided (greater) permutation test of Moran's I.

    The variable is randomly relabeled across nodes; the p-value uses the
    +1 correction (1 + #{I_perm >= I_obs}) / (1 + P) and is reproducible
    for a fixed seed.
    """
    if n_permutations < 99:
        raise ValueError("use at least 99 permutations")
    observed = morans_i(x, graph, row_standardize=row_standardize)
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    hits = 0
    for _ in range(n_permutations):
        i_perm = morans_i(rng.permutation(x), graph, row_standardize=row_standardize)
        if i_perm >= observed:
            hits += 1
    p = (1 + hits) / (1 + n_permutations)
    return MoranResult(I=observed, p_value=p, n_permutations=n_permutations)
