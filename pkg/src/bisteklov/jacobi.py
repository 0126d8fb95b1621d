"""Cyclic Jacobi eigensolver for dense symmetric matrices.

Pairs are visited in round-robin (tournament) order, so each round consists
of ``n/2`` disjoint plane rotations that commute and are applied together as
a block of row and column updates.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericalError

__all__ = ["jacobi_eigh", "round_robin_pairs"]


def round_robin_pairs(n: int):
    """Yield ``n - 1`` (or ``n`` for odd ``n``) rounds of disjoint index pairs covering all pairs once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    for _ in range(m - 1):
        p, q = [], []
        for k in range(m // 2):
            i, j = players[k], players[m - 1 - k]
            if i >= 0 and j >= 0:
                p.append(min(i, j))
                q.append(max(i, j))
        yield np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)
        players = [players[0], players[-1]] + players[1:-1]


def _off(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigen-decomposition of a symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm is at most ``tol * ||A||_F``.

    Returns
    -------
    w : (n,) ndarray
        Eigenvalues in ascending order.
    v : (n, n) ndarray
        Orthonormal eigenvectors, ``v[:, i]`` belonging to ``w[i]``.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("matrix must be square")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    scale = np.linalg.norm(a)
    target = tol * scale
    rounds = list(round_robin_pairs(n))
    for sweep in range(max_sweeps):
        if _off(a) <= target:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = a[p, p], a[q, q]
            with np.errstate(over="ignore"):
                # huge theta means a negligible rotation; t -> 0 is the right limit
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # A <- A J
            ap, aq = a[:, p].copy(), a[:, q]
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            # A <- J^T A
            ap, aq = a[p, :].copy(), a[q, :]
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        if _off(a) > target:
            raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps (off={_off(a):.3e})")
    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
