"""Synthetic lattice datasets and replicated label-recovery experiments.

Datasets follow the generative model: a label field drawn by Gibbs sampling
on a square lattice, then one multinomial count vector per node from its
component's category probabilities.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .em import FitConfig, fit
from .gibbs import GibbsParams, gibbs_sweep
from .graph import build_lattice
from .metrics import ari
from .multinomial import CountMatrix


def two_block_lambda(J=10):
    """Two mirrored probability rows: 1.2/J on one half of the categories,
    0.8/J on the other, swapped between the clusters."""
    if J % 2 != 0:
        raise ValueError("two_block_lambda needs an even number of categories")
    high, low = 1.2 / J, 0.8 / J
    half = J // 2
    row1 = np.array([high] * half + [low] * half)
    return np.vstack([row1, row1[::-1]])


@dataclass
class SimConfig:
    """One simulation cell: lattice size, emission table, prior strength."""

    side: int = 10
    K: int = 2
    J: int = 10
    m: int = 100
    lam: np.ndarray = None
    beta: np.ndarray = None
    alpha: np.ndarray = None
    burn_in: int = 500
    replicates: int = 100
    seed: int = 0
    scheme: str = "rook"

    def __post_init__(self):
        if self.lam is None:
            self.lam = two_block_lambda(self.J)
        self.lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        if self.lam.shape != (self.K, self.J):
            raise ValueError(f"lam must have shape ({self.K}, {self.J})")
        if not np.allclose(self.lam.sum(axis=1), 1.0):
            raise ValueError("each lam row must sum to 1")
        if self.beta is None:
            self.beta = np.zeros(self.K)
        if self.alpha is None:
            self.alpha = np.zeros(self.K)
        self.beta = np.asarray(self.beta, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.beta.shape != (self.K,) or self.alpha.shape != (self.K,):
            raise ValueError("alpha and beta need one entry per component")
        if self.beta[0] != 0.0 or self.alpha[0] != 0.0:
            raise ValueError("reference component must have alpha[0] = beta[0] = 0")
        if self.side < 2 or self.m < 1 or self.burn_in < 0 or self.replicates < 1:
            raise ValueError("invalid simulation configuration")

    def gibbs_params(self):
        return GibbsParams(alpha=self.alpha.copy(), beta=self.beta.copy())


def simulate_dataset(cfg, replicate_seed):
    """Draw one dataset: burned-in Gibbs label field, then multinomial counts.

    Returns (counts, true labels, lattice graph); deterministic for a fixed
    replicate seed.
    """
    rng = np.random.default_rng(replicate_seed)
    graph = build_lattice(cfg.side, cfg.scheme)
    z = rng.integers(0, cfg.K, size=graph.n)
    params = cfg.gibbs_params()
    for _ in range(cfg.burn_in):
        z = gibbs_sweep(z, graph, params, rng)
    y = rng.multinomial(cfg.m, cfg.lam[z])
    return CountMatrix(y=y), z, graph


def study_fit_config(K=2, seed=0, gibbs_method="newton"):
    """Fit settings used for recovery studies; lighter multi-start phase."""
    return FitConfig(
        K=K, spatial=True, max_iter=150, patience=50,
        n_starts=8, short_run_iter=6, seed=seed, gibbs_method=gibbs_method,
    )


@dataclass
class CellResult:
    """ARI values of the successful replicates of one simulation cell."""

    cfg: SimConfig
    aris: np.ndarray
    failures: list

    def quantiles(self):
        q = np.percentile(self.aris, [0, 25, 50, 75, 100]) if self.aris.size else [np.nan] * 5
        return dict(zip(("min", "q1", "median", "q3", "max"), (float(v) for v in q)))

    @property
    def iqr(self):
        qs = self.quantiles()
        return qs["q3"] - qs["q1"]


@dataclass
class SimReport:
    cells: list = field(default_factory=list)

    def summary_rows(self):
        rows = []
        for cell in self.cells:
            row = {
                "side": cell.cfg.side,
                "beta": float(cell.cfg.beta[-1]) if cell.cfg.K > 1 else 0.0,
                "replicates": int(cell.aris.size),
                "failed": len(cell.failures),
            }
            row.update(cell.quantiles())
            rows.append(row)
        return rows


def study_cells(sides=(8, 10, 20), betas=(0.01, 0.1, 0.2), replicates=100,
                J=10, m=100, burn_in=500, master_seed=0, scheme="rook"):
    """Grid of simulation cells with per-cell seeds derived from one master."""
    cfgs = []
    for idx, (side, beta2) in enumerate((s, b) for s in sides for b in betas):
        cell_seed = int(np.random.SeedSequence([master_seed, idx]).generate_state(1)[0])
        cfgs.append(SimConfig(
            side=side, K=2, J=J, m=m, beta=np.array([0.0, beta2]),
            burn_in=burn_in, replicates=replicates, seed=cell_seed, scheme=scheme,
        ))
    return cfgs


def _replicate_seeds(cfg, rep):
    root = np.random.SeedSequence([cfg.seed, rep])
    sim_ss, fit_ss = root.spawn(2)
    return sim_ss, int(fit_ss.generate_state(1)[0])


def _run_replicate(cfg, rep, fit_cfg):
    sim_ss, fit_seed = _replicate_seeds(cfg, rep)
    data, truth, graph = simulate_dataset(cfg, sim_ss)
    result = fit(data, graph, replace(fit_cfg, seed=fit_seed))
    return ari(result.labels, truth)


def _replicate_task(args):
    cfg, rep, fit_cfg = args
    try:
        return rep, _run_replicate(cfg, rep, fit_cfg), None
    except Exception as exc:
        return rep, None, f"{type(exc).__name__}: {exc}"


def run_study(cfgs, fit_cfg=None, n_jobs=1):
    """Replicated recovery experiment over a list of simulation cells.

    Each replicate simulates a dataset, fits the spatial model at the true
    K, and scores the recovered labels with ARI.  Replicates run
    independently (optionally across processes) with seeds derived from the
    cell seed and replicate index, and are merged by index, so the report
    does not depend on scheduling.  Per-replicate failures are recorded,
    not fatal.
    """
    if not cfgs:
        raise ValueError("need at least one simulation config")
    report = SimReport()
    for cfg in cfgs:
        cell_fit_cfg = fit_cfg if fit_cfg is not None else study_fit_config(K=cfg.K)
        tasks = [(cfg, rep, cell_fit_cfg) for rep in range(cfg.replicates)]
        if n_jobs > 1:
            with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                outcomes = list(pool.map(_replicate_task, tasks, chunksize=1))
        else:
            outcomes = [_replicate_task(t) for t in tasks]
        outcomes.sort(key=lambda t: t[0])
        aris = [value for _, value, err in outcomes if err is None]
        failures = [(rep, err) for rep, _, err in outcomes if err is not None]
        report.cells.append(CellResult(cfg=cfg, aris=np.array(aris), failures=failures))
    return report
