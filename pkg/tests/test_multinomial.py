import math
from itertools import product

import numpy as np
import pytest

from spatmix.multinomial import (
    CountMatrix,
    check_identifiability,
    floor_simplex,
    log_multinomial_pmf,
    log_pmf_matrix,
    standard_mixture_loglik,
)


def compositions(m, J):
    """All non-negative integer J-tuples summing to m (enumeration oracle)."""
    if J == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in compositions(m - first, J - 1):
            yield (first, *rest)


def exact_pmf(y, lam):
    coeff = math.factorial(sum(y))
    for v in y:
        coeff //= math.factorial(v)
    return coeff * math.prod(p ** v for p, v in zip(lam, y))


def test_all_mass_in_first_category():
    eps = 1e-6
    J, m = 4, 7
    lam = np.array([1 - (J - 1) * eps] + [eps] * (J - 1))
    y = np.array([m] + [0] * (J - 1))
    value = log_multinomial_pmf(y, lam, include_coefficient=False)
    assert value == pytest.approx(m * math.log(1 - (J - 1) * eps), abs=1e-14)


def test_binomial_half_half():
    value = log_multinomial_pmf(np.array([1, 1]), np.array([0.5, 0.5]))
    assert value == pytest.approx(math.log(0.5), abs=1e-14)


def test_pmf_matches_enumeration_and_normalizes():
    rng = np.random.default_rng(0)
    for m, J in product(range(1, 7), (2, 3)):
        lam = floor_simplex(rng.uniform(0.2, 1.0, size=(1, J)))[0]
        total = 0.0
        for y in compositions(m, J):
            p = math.exp(log_multinomial_pmf(np.array(y), lam))
            assert p == pytest.approx(exact_pmf(y, lam), rel=1e-12)
            total += p
        assert abs(total - 1.0) < 1e-12


def test_pmf_shape_mismatch():
    with pytest.raises(ValueError):
        log_multinomial_pmf(np.array([1, 2, 3]), np.array([0.5, 0.5]))


def test_zero_probability_with_positive_count():
    from spatmix.errors import NumericError
    with pytest.raises(NumericError):
        log_multinomial_pmf(np.array([1, 1]), np.array([0.0, 1.0]))


def test_log_pmf_matrix_agrees_with_scalar():
    rng = np.random.default_rng(1)
    data = CountMatrix(y=rng.integers(0, 9, size=(6, 4)) + 1)
    lam = floor_simplex(rng.uniform(size=(3, 4)))
    mat = log_pmf_matrix(data, lam)
    for i in range(6):
        for k in range(3):
            assert mat[i, k] == pytest.approx(log_multinomial_pmf(data.y[i], lam[k]), rel=1e-13)


def test_single_component_mixture():
    rng = np.random.default_rng(2)
    data = CountMatrix(y=rng.integers(1, 8, size=(5, 3)))
    lam = floor_simplex(rng.uniform(size=(1, 3)))
    ll = standard_mixture_loglik(data, lam, np.array([1.0]))
    direct = sum(log_multinomial_pmf(data.y[i], lam[0]) for i in range(5))
    assert ll == pytest.approx(direct, rel=1e-13)


def test_duplicate_components_reduce_to_one():
    rng = np.random.default_rng(3)
    data = CountMatrix(y=rng.integers(1, 8, size=(5, 3)))
    lam1 = floor_simplex(rng.uniform(size=(1, 3)))
    lam2 = np.vstack([lam1, lam1])
    assert standard_mixture_loglik(data, lam2, np.array([0.5, 0.5])) == pytest.approx(
        standard_mixture_loglik(data, lam1, np.array([1.0])), rel=1e-13
    )


def test_mixture_permutation_invariance():
    rng = np.random.default_rng(4)
    data = CountMatrix(y=rng.integers(1, 10, size=(7, 4)))
    lam = floor_simplex(rng.uniform(size=(3, 4)))
    p = np.array([0.2, 0.5, 0.3])
    perm = np.array([2, 0, 1])
    assert standard_mixture_loglik(data, lam, p) == pytest.approx(
        standard_mixture_loglik(data, lam[perm], p[perm]), rel=1e-13
    )


def test_identifiability_examples():
    big = CountMatrix(y=np.full((4, 2), 50))  # m_i = 100
    assert check_identifiability(big, 2)

    small = CountMatrix(y=np.array([[2, 1], [3, 0], [1, 2]]))  # min m_i = 3
    with pytest.warns(UserWarning, match="identifiable"):
        assert not check_identifiability(small, 3)

    assert check_identifiability(small, 1)  # 2K-1 = 1 <= m_i always


def test_count_matrix_validation():
    with pytest.raises(ValueError, match="zero total"):
        CountMatrix(y=np.array([[1, 2], [0, 0]]))
    with pytest.raises(ValueError, match="two count categories"):
        CountMatrix(y=np.array([[3], [4]]))
    with pytest.raises(ValueError, match="non-negative"):
        CountMatrix(y=np.array([[1, -1], [2, 2]]))
    with pytest.raises(ValueError, match="integers"):
        CountMatrix(y=np.array([[1.5, 1.0], [2.0, 2.0]]))


def test_mixture_loglik_finite_at_floored_extremes():
    # log-sum-exp path: finite output whenever all component log-densities are
    y = np.full((3, 4), 500)
    y[:, 0] = 1
    data = CountMatrix(y=y)
    lam = floor_simplex(np.array([[1e-300, 1.0, 1.0, 1.0], [1.0, 1e-300, 1.0, 1.0]]))
    ll = standard_mixture_loglik(data, lam, np.array([0.5, 0.5]))
    assert math.isfinite(ll)


def test_floor_simplex_keeps_rows_normalized():
    lam = floor_simplex(np.array([[0.0, 1.0], [0.5, 0.5]]))
    assert np.all(lam > 0)
    assert np.allclose(lam.sum(axis=1), 1.0)
