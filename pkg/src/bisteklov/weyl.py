"""Leading-order Weyl predictions and convergence diagnostics.

For the biharmonic Steklov problem in dimension ``n``

    A(tau) ~ omega_{n-1} tau^{n-1} / (4 pi)^{n-1} * int rho^{n-1} ds,
    lambda_k ~ 4 pi (k / (omega_{n-1} vol(boundary)))^{1/(n-1)}   (rho = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boxspec import BoxCylinder, SpectralFamily
from .counting import counting_function
from .errors import DomainError
from .profile import unit_ball_volume

__all__ = [
    "BoundaryData",
    "ConvergenceReport",
    "predict_count",
    "predict_eigenvalue",
    "convergence_report_counts",
    "convergence_report_eigenvalues",
    "fit_rate_constant",
]


@dataclass(frozen=True)
class BoundaryData:
    n: int
    rho_integral: float
    boundary_volume: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")
        for name in ("rho_integral", "boundary_volume"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")

    @classmethod
    def for_box(cls, box: BoxCylinder) -> "BoundaryData":
        """Density vanishes off the Steklov face, so only that face contributes."""
        area = box.face_area
        return cls(box.n, box.rho ** (box.n - 1) * area, area)


@dataclass
class ConvergenceReport:
    """Exact vs predicted values on an ascending grid of taus or ks.

    ``trend`` is a crude diagnostic: ``"approaching_one"`` when the mean of
    ``|ratio - 1|`` over the last quartile is below that over the first.
    """

    grid: list
    exact: list
    predicted: list
    ratio: list
    trend: str

    @classmethod
    def build(cls, grid, exact, predicted) -> "ConvergenceReport":
        ratio = [e / p for e, p in zip(exact, predicted)]
        return cls(list(grid), list(exact), list(predicted), ratio, _trend(ratio))


def _trend(ratio: Sequence[float]) -> str:
    dev = np.abs(np.asarray(ratio, dtype=float) - 1.0)
    q = max(1, len(dev) // 4)
    if len(dev) < 2:
        return "inconclusive"
    return "approaching_one" if dev[-q:].mean() < dev[:q].mean() else "inconclusive"


def predict_count(b: BoundaryData, tau: float) -> float:
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    d = b.n - 1
    return unit_ball_volume(d) * tau**d * b.rho_integral / (4.0 * math.pi) ** d


def predict_eigenvalue(b: BoundaryData, k: int) -> float:
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    d = b.n - 1
    return 4.0 * math.pi * (k / (unit_ball_volume(d) * b.boundary_volume)) ** (1.0 / d)


def convergence_report_counts(box: BoxCylinder, family, taus: Sequence[float]) -> ConvergenceReport:
    family = SpectralFamily.parse(family)
    taus = [float(t) for t in taus]
    if not taus or any(t <= 0 for t in taus) or any(b <= a for a, b in zip(taus, taus[1:])):
        raise DomainError("taus must be positive and strictly ascending")
    bd = BoundaryData.for_box(box)
    exact = [counting_function(box, family, t) for t in taus]
    return ConvergenceReport.build(taus, exact, [predict_count(bd, t) for t in taus])


def convergence_report_eigenvalues(spectrum: Sequence[float], b: BoundaryData, k_range: Sequence[int]) -> ConvergenceReport:
    ks = [int(k) for k in k_range]
    if not ks:
        raise DomainError("k_range is empty")
    if min(ks) < 1 or max(ks) > len(spectrum):
        raise DomainError(f"k_range must lie in [1, {len(spectrum)}]")
    exact = [float(spectrum[k - 1]) for k in ks]
    return ConvergenceReport.build(ks, exact, [predict_eigenvalue(b, k) for k in ks])


def fit_rate_constant(taus: Sequence[float], ratios: Sequence[float], n_points: int = 4) -> float:
    """Least-squares ``C`` in ``|ratio - 1| ~ C / tau`` over the largest ``n_points`` taus."""
    order = np.argsort(taus)[-n_points:]
    x = 1.0 / np.asarray(taus, dtype=float)[order]
    y = np.abs(np.asarray(ratios, dtype=float)[order] - 1.0)
    return float(x @ y / (x @ x))
