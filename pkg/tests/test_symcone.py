import numpy as np
import pytest

from jumplq.symcone import SymMat, NotUniformlyPositive, min_eigenvalue, is_psd, spd_solve


def test_construction_symmetrizes():
    a = SymMat([[1.0, 2.0], [0.0, 3.0]])
    assert np.array_equal(a.entries, np.array([[1.0, 1.0], [1.0, 3.0]]))
    assert a.dim == 2


def test_entries_are_read_only():
    a = SymMat.identity(2)
    with pytest.raises(ValueError):
        a.entries[0, 0] = 5.0


def test_rejects_non_square_and_non_finite():
    with pytest.raises(ValueError):
        SymMat(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        SymMat([[np.nan]])


def test_min_eigenvalue_examples():
    assert min_eigenvalue(SymMat.identity(3)) == pytest.approx(1.0, abs=1e-12)
    assert min_eigenvalue(SymMat.zero(2)) == pytest.approx(0.0, abs=1e-12)
    assert min_eigenvalue(SymMat.diag([2.0, -1.0])) == pytest.approx(-1.0, abs=1e-12)


def test_is_psd_examples():
    assert is_psd(SymMat.identity(2), 0.0)
    assert not is_psd(SymMat.diag([2.0, -1e-3]), 1e-6)
    assert is_psd(SymMat.zero(4), 0.0)
    with pytest.raises(ValueError):
        is_psd(SymMat.identity(2), -1.0)


def test_is_psd_monotone_in_tol():
    rng = np.random.default_rng(0)
    for _ in range(25):
        g = rng.normal(size=(3, 3))
        a = SymMat(g + g.T)
        tols = sorted(rng.uniform(0.0, 2.0, size=4))
        flags = [is_psd(a, t) for t in tols]
        # once true, stays true for larger tolerances
        assert flags == sorted(flags)


def test_spd_solve_examples():
    out = spd_solve(SymMat(2.0 * np.eye(2)), np.eye(2), floor=1e-10)
    assert np.allclose(out, 0.5 * np.eye(2), atol=1e-14)

    with pytest.raises(NotUniformlyPositive) as exc:
        spd_solve(SymMat.diag([1.0, 1e-14]), np.ones(2), floor=1e-10)
    assert exc.value.min_eig < 1e-10

    # direct 2x2 inverse: [[2,1],[1,2]] x = [1,1] has solution [1/3, 1/3]
    x = spd_solve(SymMat([[2.0, 1.0], [1.0, 2.0]]), np.array([1.0, 1.0]))
    assert np.allclose(x, [1.0 / 3.0, 1.0 / 3.0], atol=1e-14)


def test_spd_solve_recovers_random_vectors():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        g = rng.normal(size=(n, n))
        a = SymMat(g @ g.T + 1e-3 * np.eye(n))
        if min_eigenvalue(a) < 1e-6:
            continue
        x = rng.normal(size=n)
        rec = spd_solve(a, a.entries @ x)
        assert np.linalg.norm(rec - x) <= 1e-10 * max(1.0, np.linalg.norm(x))


def test_spd_solve_matrix_rhs_shape():
    a = SymMat([[3.0, 0.5], [0.5, 2.0]])
    b = np.arange(6.0).reshape(2, 3)
    x = spd_solve(a, b)
    assert x.shape == (2, 3)
    assert np.allclose(a.entries @ x, b, atol=1e-12)
