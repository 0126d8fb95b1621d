import numpy as np
import pytest

from bisteklov.errors import NumericalError
from bisteklov.jacobi import jacobi_eigh, round_robin_pairs


@pytest.mark.parametrize("n", [2, 3, 7, 8])
def test_round_robin_covers_all_pairs(n):
    seen = []
    for p, q in round_robin_pairs(n):
        idx = np.concatenate([p, q])
        assert len(set(idx.tolist())) == len(idx)  # disjoint within a round
        seen += list(zip(p.tolist(), q.tolist()))
    assert sorted(seen) == [(i, j) for i in range(n) for j in range(i + 1, n)]


@pytest.mark.parametrize("n", [1, 2, 5, 40, 101])
def test_matches_eigh(n):
    rng = np.random.default_rng(n)
    a = rng.standard_normal((n, n))
    a = a + a.T
    w, v = jacobi_eigh(a)
    ref = np.linalg.eigvalsh(a)
    assert np.allclose(w, ref, atol=1e-11 * np.abs(ref).max())
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)
    assert np.allclose(a @ v, v * w, atol=1e-10 * np.linalg.norm(a))


def test_diagonal_and_degenerate():
    w, v = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
    assert w.tolist() == [1.0, 2.0, 3.0]
    w, _ = jacobi_eigh(np.ones((4, 4)))
    assert np.allclose(w, [0, 0, 0, 4], atol=1e-14)


def test_graded_spectrum():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    d = -np.logspace(-6, 2, 30)
    a = (q * d) @ q.T
    w, _ = jacobi_eigh(a)
    assert np.allclose(w, np.sort(d), atol=1e-12 * 100)


def test_not_square():
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))


def test_non_convergence():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((20, 20))
    with pytest.raises(NumericalError):
        jacobi_eigh(a + a.T, max_sweeps=1)
