"""Closed-form Steklov spectra on rectangular cylinders.

The cylinder is ``[0, l_1] x ... x [0, l_{n-1}] x [0, l_n]`` with the Steklov
condition on the face ``x_n = 0``.  Separation of variables gives modes
``u = X(x_1..x_{n-1}) Y(x_n)`` where ``X`` is a Laplace eigenfunction of the
base (sine products for Dirichlet lateral faces, cosine products for Neumann
lateral faces) with eigenvalue ``alpha`` and

    lambda = t(sqrt(alpha) * l_n) / (rho * l_n).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, DomainError
from .profile import (
    BoundaryProfile,
    boundary_profile_eval,
    boundary_profile_second_derivative_at_zero,
    t_profile,
    t_profile_array,
)

__all__ = [
    "SpectralFamily",
    "BoxCylinder",
    "BoxMode",
    "lattice_points",
    "base_spectrum",
    "steklov_from_base",
    "spectrum",
    "eigenfunction_eval",
    "steklov_residual",
]


class SpectralFamily(enum.Enum):
    """Lateral boundary family.

    ``DIRICHLET`` uses sine base modes with every ``m_i >= 1``; ``NEUMANN``
    uses cosine base modes with ``m_i >= 0`` and ``sum(m) != 0``.
    """

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value) -> "SpectralFamily":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"dirichletlateral": "dirichlet", "neumannlateral": "neumann", "d": "dirichlet", "n": "neumann"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown spectral family {value!r}") from None

    @property
    def min_index(self) -> int:
        return 1 if self is SpectralFamily.DIRICHLET else 0


@dataclass(frozen=True)
class BoxCylinder:
    n: int
    base_sides: tuple
    height: float
    rho: float = 1.0
    short_base: bool = field(init=False)

    def __post_init__(self):
        sides = tuple(float(v) for v in self.base_sides)
        object.__setattr__(self, "base_sides", sides)
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"ambient dimension must be an integer >= 2, got {self.n!r}")
        if len(sides) != self.n - 1:
            raise DomainError(f"expected {self.n - 1} base sides, got {len(sides)}")
        for name, v in [("base side", x) for x in sides] + [("height", self.height), ("rho", self.rho)]:
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        object.__setattr__(self, "short_base", max(sides) < self.height)
        if not self.short_base:
            warnings.warn("max base side >= height: the l < l_n hypothesis does not hold", stacklevel=2)

    @classmethod
    def from_sides(cls, base_sides: Sequence[float], height: float, rho: float = 1.0) -> "BoxCylinder":
        return cls(len(base_sides) + 1, tuple(base_sides), height, rho)

    @property
    def face_area(self) -> float:
        return math.prod(self.base_sides)


@dataclass(frozen=True)
class BoxMode:
    m: tuple
    alpha: float
    lam: float
    family: SpectralFamily

    @property
    def eta(self) -> float:
        return math.sqrt(self.alpha)


def _admissible(points: np.ndarray, family: SpectralFamily) -> np.ndarray:
    if family is SpectralFamily.NEUMANN:
        return points[points.sum(axis=1) != 0]
    return points


def lattice_points(sides: Sequence[float], radius: float, family) -> np.ndarray:
    """All admissible integer points with ``sum((m_i / l_i)^2) <= radius^2``.

    Returned as an ``(count, len(sides))`` integer array in lexicographic order.
    """
    family = SpectralFamily.parse(family)
    lo = family.min_index
    r2 = radius * radius
    d = len(sides)
    # prefixes with accumulated quadratic form, summed left to right
    prefixes = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1)
    for i, li in enumerate(sides):
        top = int(math.floor(li * radius)) + 1
        ms = np.arange(lo, top + 1, dtype=np.int64)
        q = partial[:, None] + (ms[None, :] / li) ** 2
        keep = q <= r2
        rows, cols = np.nonzero(keep)
        prefixes = np.concatenate([prefixes[rows], ms[cols][:, None]], axis=1)
        partial = q[rows, cols]
        if len(partial) == 0:
            return np.zeros((0, d), dtype=np.int64)
    return _admissible(prefixes, family)


def _alpha(points: np.ndarray, sides: Sequence[float]) -> np.ndarray:
    alpha = np.zeros(len(points))
    for i, li in enumerate(sides):
        alpha = alpha + (points[:, i] * math.pi / li) ** 2
    return alpha


def base_spectrum(box: BoxCylinder, family, K: int) -> list:
    """The ``K`` smallest base Laplace eigenvalues with multiplicity.

    Returns ``[(m, alpha), ...]`` sorted by ``alpha`` with lexicographic
    tie-breaking on the multi-index.
    """
    family = SpectralFamily.parse(family)
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    sides = box.base_sides
    radius = K ** (1.0 / len(sides)) / min(sides)
    while True:
        pts = lattice_points(sides, radius, family)
        if len(pts) >= K:
            break
        radius *= 2.0
    alpha = _alpha(pts, sides)
    keys = [pts[:, i] for i in reversed(range(pts.shape[1]))] + [alpha]
    order = np.lexsort(keys)[:K]
    return [(tuple(int(v) for v in pts[j]), float(alpha[j])) for j in order]


def steklov_from_base(alpha: float, height: float, rho: float) -> float:
    """Steklov eigenvalue ``t(sqrt(alpha) * height) / (rho * height)``."""
    for name, v in (("alpha", alpha), ("height", height), ("rho", rho)):
        if not (math.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be positive, got {v!r}")
    s = math.sqrt(alpha) * height
    if s < 1.0:
        warnings.warn(f"sqrt(alpha)*height = {s:.3g} < 1: outside the proven monotone branch", stacklevel=2)
    return t_profile(s) / (rho * height)


def spectrum(box: BoxCylinder, family, K: int) -> list:
    """The ``K`` smallest Steklov eigenvalues as :class:`BoxMode` records."""
    family = SpectralFamily.parse(family)
    base = base_spectrum(box, family, K)
    alpha = np.array([a for _, a in base])
    s = np.sqrt(alpha) * box.height
    lam = t_profile_array(s) / (box.rho * box.height)
    if np.any(s < 1.0) and np.any(np.diff(lam) < 0):
        k = int(np.argmax(np.diff(lam) < 0))
        raise ConsistencyError(f"Steklov ordering inverted between modes {k} and {k + 1}")
    return [BoxMode(m, float(a), float(v), family) for (m, a), v in zip(base, lam)]


def _check_point(box: BoxCylinder, x: Sequence[float]) -> None:
    if len(x) != box.n:
        raise DomainError(f"point must have {box.n} coordinates")
    for xi, li in zip(x, box.base_sides + (box.height,)):
        if not (0.0 <= xi <= li):
            raise DomainError(f"point {tuple(x)} outside the box")


def _lateral_factor(box: BoxCylinder, mode: BoxMode, x: Sequence[float]) -> float:
    trig = math.sin if mode.family is SpectralFamily.DIRICHLET else math.cos
    out = 1.0
    for mi, li, xi in zip(mode.m, box.base_sides, x):
        if trig is math.sin and (xi == 0.0 or xi == li):
            return 0.0
        out *= trig(mi * math.pi / li * xi)
    return out


def eigenfunction_eval(box: BoxCylinder, mode: BoxMode, x: Sequence[float]) -> float:
    """``X(x_1..x_{n-1}) * Y(x_n)`` with unit normalisation constant."""
    _check_point(box, x)
    X = _lateral_factor(box, mode, x)
    if X == 0.0:
        return 0.0
    return X * boundary_profile_eval(BoundaryProfile(mode.eta, box.height), x[-1])


def steklov_residual(box: BoxCylinder, mode: BoxMode, sample: Sequence[float]) -> float:
    """``|Delta u + lambda rho u_nu|`` on the face ``x_n = 0``.

    There ``Delta u = X Y''(0)`` (``Y(0) = 0`` kills the lateral term) and the
    inward normal derivative is ``X Y'(0) = X``.
    """
    if len(sample) == box.n - 1:
        sample = tuple(sample) + (0.0,)
    _check_point(box, sample)
    if sample[-1] != 0.0:
        raise DomainError("sample must lie on the Steklov face x_n = 0")
    X = _lateral_factor(box, mode, sample)
    if X == 0.0:
        return 0.0
    ypp = boundary_profile_second_derivative_at_zero(BoundaryProfile(mode.eta, box.height))
    return abs(X) * abs(ypp + mode.lam * box.rho)
