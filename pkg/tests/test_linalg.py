import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvemu.linalg import (FactorizationError, check_symmetric, chol_lower,
                          chol_solve, logdet_from_chol, symmetrize, tri_solve)

from conftest import random_spd


def test_chol_lower_matches_numpy():
    rng = np.random.default_rng(0)
    a = random_spd(rng, 6)
    l = chol_lower(a, "a")
    assert np.allclose(l, np.linalg.cholesky(a))


def test_logdet_from_chol():
    rng = np.random.default_rng(1)
    a = random_spd(rng, 5)
    assert logdet_from_chol(chol_lower(a, "a")) == pytest.approx(
        np.linalg.slogdet(a)[1], rel=1e-12)


def test_chol_solve_and_tri_solve():
    rng = np.random.default_rng(2)
    a = random_spd(rng, 4)
    b = rng.standard_normal((4, 3))
    l = chol_lower(a, "a")
    assert np.allclose(chol_solve(l, b), np.linalg.solve(a, b))
    assert np.allclose(l @ tri_solve(l, b), b)


def test_jitter_rescues_near_psd():
    # rank-deficient PSD matrix: plain Cholesky fails, jitter succeeds
    v = np.array([[1.0, 1.0], [1.0, 1.0]])
    l = chol_lower(v, "v")
    assert np.allclose(l @ l.T, v, atol=1e-5)


def test_jitter_disabled_raises():
    v = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(FactorizationError):
        chol_lower(v, "v", jitter=False)


def test_indefinite_matrix_raises_with_name():
    a = np.array([[1.0, 0.0], [0.0, -5.0]])
    with pytest.raises(FactorizationError) as err:
        chol_lower(a, "badmat")
    assert "badmat" in str(err.value)


def test_non_square_raises():
    with pytest.raises(FactorizationError):
        chol_lower(np.ones((2, 3)), "rect")


def test_check_symmetric():
    a = np.array([[1.0, 0.5], [0.5, 2.0]])
    assert np.array_equal(check_symmetric(a, "a"), a)
    with pytest.raises(ValueError):
        check_symmetric(np.array([[1.0, 0.5], [0.4, 2.0]]), "a")


def test_symmetrize():
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    s = symmetrize(a)
    assert np.array_equal(s, s.T)
    assert s[0, 1] == 1.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 8))
def test_chol_roundtrip_property(seed, n):
    rng = np.random.default_rng(seed)
    a = random_spd(rng, n)
    l = chol_lower(a, "a")
    assert np.allclose(l @ l.T, a, atol=1e-10 * n)
    assert np.all(np.diag(l) > 0)
