"""Exact eigenvalue counts for cylinder boxes and their ellipsoid bounds.

``A0(tau)`` counts the Dirichlet-lateral family and ``Af(tau)`` the
Neumann-lateral family.  Since ``t`` is increasing on ``[1, inf)``,
``t(s) <= rho l_n tau`` is equivalent to ``s <= h(rho l_n tau)``, which turns
the count into a lattice count inside the ellipsoid

    sum (m_i / l_i)^2 <= (h(rho l_n tau) / (pi l_n))^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boxspec import BoxCylinder, SpectralFamily, _alpha, lattice_points
from .errors import ConsistencyError, DomainError, UnsupportedConfigurationError
from .profile import h_inverse, t_profile, t_profile_array, unit_ball_volume

__all__ = [
    "TIE_BAND",
    "MAX_COUNT",
    "LatticeQuery",
    "CountingCurve",
    "count_lattice",
    "counting_function",
    "counting_curve",
    "ellipsoid_volume_bound",
    "mu_from_lambda",
    "mu_from_mu_star",
]

TIE_BAND = 1e-12
MAX_COUNT = 2**53


@dataclass(frozen=True)
class LatticeQuery:
    sides: tuple
    radius: float
    family: SpectralFamily

    def __post_init__(self):
        object.__setattr__(self, "sides", tuple(float(v) for v in self.sides))
        object.__setattr__(self, "family", SpectralFamily.parse(self.family))
        if not self.sides or any(not (math.isfinite(v) and v > 0) for v in self.sides):
            raise DomainError("lattice sides must be positive and finite")
        if not (math.isfinite(self.radius) and self.radius >= 0):
            raise DomainError(f"radius must be nonnegative, got {self.radius!r}")


def _check_size(sides: Sequence[float], radius: float) -> None:
    d = len(sides)
    # volume of the enclosing box of the positive octant, plus the lattice slack
    bound = math.prod(l * radius + 1.0 for l in sides)
    if bound > MAX_COUNT and unit_ball_volume(d) * 2.0**-d * math.prod(sides) * radius**d > MAX_COUNT:
        raise DomainError(f"radius {radius!r} implies a count beyond 2^53")


def _count_last(partial: np.ndarray, li: float, r2: float, lo: int) -> np.ndarray:
    """Per-prefix number of m >= lo with partial + (m/li)^2 <= r2."""
    rem = np.maximum(r2 - partial, 0.0)
    c = np.floor(li * np.sqrt(rem)).astype(np.int64)
    # fix off-by-one from the square root against the exact predicate
    for _ in range(4):
        up = partial + ((c + 1) / li) ** 2 <= r2
        down = (c >= lo) & ~(partial + (c / li) ** 2 <= r2)
        if not (up.any() or down.any()):
            break
        c = c + up - down
    return np.maximum(c - lo + 1, 0)


def count_lattice(q: LatticeQuery) -> int:
    """Number of admissible integer points with ``sum((m_i/l_i)^2) <= R^2``."""
    sides, R = q.sides, q.radius
    _check_size(sides, R)
    lo = q.family.min_index
    r2 = R * R
    partial = np.zeros(1)
    for li in sides[:-1]:
        top = int(math.floor(li * R)) + 1
        ms = np.arange(lo, top + 1)
        qq = partial[:, None] + (ms[None, :] / li) ** 2
        partial = qq[qq <= r2]
        if partial.size == 0:
            return 0
    total = int(_count_last(partial, sides[-1], r2, lo).sum())
    if q.family is SpectralFamily.NEUMANN:
        total -= 1  # the origin
    return total


def _direct_count(box: BoxCylinder, family: SpectralFamily, tau: float, s_limit) -> int:
    target = box.rho * box.height * tau
    # radius (in m/l units) beyond which every mode exceeds tau
    radius = 1.0 / min(box.base_sides)
    while t_profile(math.pi * radius * box.height) <= target:
        radius *= 2.0
    radius *= 1.0 + 1e-9  # keep the tie band inside the enumerated ball
    _check_size(box.base_sides, radius)
    pts = lattice_points(box.base_sides, radius, family)
    if len(pts) == 0:
        return 0
    s = np.sqrt(_alpha(pts, box.base_sides)) * box.height
    in_t = t_profile_array(s) <= target
    if s_limit is None:
        return int(in_t.sum())
    in_s = s <= s_limit * (1.0 + TIE_BAND)
    bad = in_t & ~in_s
    if bad.any():
        raise ConsistencyError(
            f"mode with s={s[bad][0]!r} passes t <= {target!r} but exceeds h = {s_limit!r} beyond the tie band"
        )
    return int((in_t | in_s).sum())


def counting_function(box: BoxCylinder, family, tau: float, *, return_paths: bool = False):
    """Number of Steklov eigenvalues ``<= tau`` (with multiplicity).

    Two paths are evaluated: direct enumeration of modes compared in the
    t-domain, and (when ``rho l_n tau >= t(1)``) a lattice count with radius
    ``h(rho l_n tau) / (pi l_n)``.  Points within a relative band of
    ``TIE_BAND`` of the threshold in the s-domain are counted (inclusive).
    The paths must agree exactly.
    """
    family = SpectralFamily.parse(family)
    if not (math.isfinite(tau) and tau > 0):
        raise DomainError(f"tau must be positive, got {tau!r}")
    target = box.rho * box.height * tau
    s_limit = h_inverse(target) if target >= t_profile(1.0) else None
    direct = _direct_count(box, family, tau, s_limit)
    inverse = None
    if s_limit is not None:
        radius = s_limit * (1.0 + TIE_BAND) / (math.pi * box.height)
        inverse = count_lattice(LatticeQuery(box.base_sides, radius, family))
        if inverse != direct:
            raise ConsistencyError(f"counting paths disagree at tau={tau!r}: direct {direct}, lattice {inverse}")
    if return_paths:
        return direct, inverse
    return direct


@dataclass
class CountingCurve:
    taus: list
    counts0: list
    countsF: list
    weyl: list
    ratios0: list
    ratiosF: list


def counting_curve(box: BoxCylinder, taus: Sequence[float]) -> CountingCurve:
    """A0, Af and the Weyl prediction on an ascending tau grid."""
    from .weyl import BoundaryData, predict_count

    taus = [float(t) for t in taus]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise DomainError("tau grid must be strictly ascending")
    bd = BoundaryData.for_box(box)
    c0 = [counting_function(box, SpectralFamily.DIRICHLET, t) for t in taus]
    cf = [counting_function(box, SpectralFamily.NEUMANN, t) for t in taus]
    w = [predict_count(bd, t) for t in taus]
    return CountingCurve(taus, c0, cf, w, [a / p for a, p in zip(c0, w)], [a / p for a, p in zip(cf, w)])


def ellipsoid_volume_bound(box: BoxCylinder, R: float, *, upper: bool = True):
    """Octant ellipsoid volume ``V`` and the bound ``V + sqrt(n-1) T``.

    ``T`` is the area of the curved part of the octant ellipsoid; it is only
    available for isotropic bases, where the ellipsoid is a sphere of
    radius ``l R``.  Returns ``(V, upper_bound)``; ``upper_bound`` is ``None``
    when ``upper=False``.
    """
    if not (math.isfinite(R) and R > 0):
        raise DomainError(f"R must be positive, got {R!r}")
    sides = box.base_sides
    d = len(sides)
    omega = unit_ball_volume(d)
    V = omega * 2.0**-d * math.prod(sides) * R**d
    if not upper:
        return V, None
    if any(l != sides[0] for l in sides):
        raise UnsupportedConfigurationError("surface bound T is only implemented for isotropic bases")
    T = 2.0**-d * d * omega * (sides[0] * R) ** (d - 1)
    return V, V + math.sqrt(d) * T


def mu_from_lambda(lam: float) -> float:
    """``1 / (1 + lambda)``."""
    if not (lam >= 0):
        raise DomainError(f"lambda must be nonnegative, got {lam!r}")
    return 1.0 / (1.0 + lam)


def mu_from_mu_star(mu_star: float) -> float:
    """``mu* / (1 + mu*)``."""
    if not (mu_star > 0):
        raise DomainError(f"mu* must be positive, got {mu_star!r}")
    return mu_star / (1.0 + mu_star)
