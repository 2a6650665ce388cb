import numpy as np
import pytest
from scipy.stats import chisquare

from spatmix.em import FitConfig
from spatmix.simulate import (
    SimConfig,
    run_study,
    simulate_dataset,
    study_cells,
    two_block_lambda,
)


def test_default_lambda_matches_the_study_table():
    lam = two_block_lambda(10)
    assert np.allclose(lam[0], [0.12] * 5 + [0.08] * 5)
    assert np.allclose(lam[1], [0.08] * 5 + [0.12] * 5)
    with pytest.raises(ValueError, match="even"):
        two_block_lambda(9)


def test_per_node_totals_match_config():
    cfg = SimConfig(side=8, beta=np.array([0.0, 0.1]), burn_in=20, seed=1)
    data, truth, graph = simulate_dataset(cfg, 5)
    assert data.n == 64 and graph.n == 64
    assert np.all(data.m == 100)
    assert truth.shape == (64,) and set(np.unique(truth)) <= {0, 1}


def test_zero_coupling_gives_uniform_labels():
    # beta = 0 makes every site draw iid uniform; chi-square at 1% over
    # >= 10,000 aggregated nodes
    cfg = SimConfig(side=20, beta=np.array([0.0, 0.0]), burn_in=2, seed=2)
    counts = np.zeros(2)
    for rep in range(25):
        _, truth, _ = simulate_dataset(cfg, rep)
        counts += np.bincount(truth, minlength=2)
    assert counts.sum() == 10000
    assert chisquare(counts).pvalue > 0.01


def test_counts_marginally_match_lambda():
    cfg = SimConfig(side=14, beta=np.array([0.0, 0.1]), burn_in=30, seed=3)
    data, truth, _ = simulate_dataset(cfg, 7)
    for k in range(2):
        rows = data.y[truth == k]
        total = rows.sum()
        freq = rows.sum(axis=0) / total
        se = np.sqrt(cfg.lam[k] * (1 - cfg.lam[k]) / total)
        assert np.all(np.abs(freq - cfg.lam[k]) < 3 * se + 1e-12)


def test_simulation_deterministic():
    cfg = SimConfig(side=6, beta=np.array([0.0, 0.2]), burn_in=40, seed=4)
    d1, t1, _ = simulate_dataset(cfg, 11)
    d2, t2, _ = simulate_dataset(cfg, 11)
    assert np.array_equal(d1.y, d2.y)
    assert np.array_equal(t1, t2)


def test_config_validation():
    with pytest.raises(ValueError, match="reference"):
        SimConfig(beta=np.array([0.5, 0.0]))
    with pytest.raises(ValueError, match="shape"):
        SimConfig(lam=np.ones((2, 3)))


def test_study_cells_grid():
    cells = study_cells(sides=[8, 10], betas=[0.1, 0.2], replicates=5, master_seed=0)
    assert [(c.side, float(c.beta[1])) for c in cells] == [
        (8, 0.1), (8, 0.2), (10, 0.1), (10, 0.2),
    ]
    assert len({c.seed for c in cells}) == 4  # distinct derived seeds


def light_fit_cfg():
    return FitConfig(K=2, max_iter=40, patience=15, n_starts=2, short_run_iter=3, seed=0)


def test_run_study_small():
    cfgs = study_cells(sides=[6], betas=[0.1], replicates=4, burn_in=30, master_seed=5)
    report = run_study(cfgs, fit_cfg=light_fit_cfg())
    assert len(report.cells) == 1
    cell = report.cells[0]
    assert cell.aris.size == 4 and not cell.failures
    assert np.all((cell.aris >= -1.0) & (cell.aris <= 1.0))
    rows = report.summary_rows()
    assert rows[0]["side"] == 6 and rows[0]["replicates"] == 4
    assert rows[0]["min"] <= rows[0]["median"] <= rows[0]["max"]


def test_run_study_parallel_matches_serial():
    cfgs = study_cells(sides=[5], betas=[0.1], replicates=4, burn_in=20, master_seed=6)
    serial = run_study(cfgs, fit_cfg=light_fit_cfg(), n_jobs=1)
    parallel = run_study(cfgs, fit_cfg=light_fit_cfg(), n_jobs=2)
    assert np.array_equal(serial.cells[0].aris, parallel.cells[0].aris)


def test_run_study_records_failures(monkeypatch):
    import spatmix.simulate as sim_mod

    def failing(cfg, rep, fit_cfg):
        if rep == 1:
            raise RuntimeError("forced replicate failure")
        return 1.0

    monkeypatch.setattr(sim_mod, "_run_replicate", failing)
    cfgs = study_cells(sides=[5], betas=[0.1], replicates=3, burn_in=5, master_seed=7)
    report = run_study(cfgs, fit_cfg=light_fit_cfg())
    cell = report.cells[0]
    assert cell.aris.size == 2
    assert cell.failures == [(1, "RuntimeError: forced replicate failure")]
