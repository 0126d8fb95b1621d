"""Scalar kernels for the cylinder profile function.

The profile function

    t(s) = 2 s (sinh s cosh s - s) / (sinh^2 s - s^2)

converts a base frequency ``s = sqrt(alpha) * l_n`` into ``rho * l_n`` times a
Steklov eigenvalue.  It tends to 4 as ``s -> 0`` and behaves like ``2 s`` for
large ``s``.  Three evaluation branches are used:

* ``s < S_TAYLOR``: power series of numerator and denominator (the
  difference ``sinh^2 s - s^2`` cancels catastrophically near zero),
* ``S_TAYLOR <= s < S_SWITCH``: direct hyperbolic functions,
* ``s >= S_SWITCH``: the form obtained by dividing through by ``e^{2s}/4``,
  which never overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "S_TAYLOR",
    "S_SWITCH",
    "ProfileEval",
    "BoundaryProfile",
    "t_profile",
    "t_profile_array",
    "profile_eval",
    "t_profile_derivative",
    "h_inverse",
    "boundary_profile_eval",
    "boundary_profile_second_derivative_at_zero",
    "unit_ball_volume",
]

S_TAYLOR = 0.5
S_SWITCH = 20.0

NEWTON_RTOL = 1e-12
NEWTON_MAXITER = 60
BISECT_WIDTH = 1e-14

_N_TERMS = 12
# (sinh s cosh s - s) / s^3 = sum_k 4^k s^(2k-2) / (2k+1)!,      k >= 1
_NUM_COEF = np.array([4.0**k / math.factorial(2 * k + 1) for k in range(1, _N_TERMS + 1)])
# (sinh^2 s - s^2) / s^4 = sum_k 2^(2k-1) s^(2k-4) / (2k)!,       k >= 2
_DEN_COEF = np.array([2.0 ** (2 * k - 1) / math.factorial(2 * k) for k in range(2, _N_TERMS + 2)])


def _series(coef: np.ndarray, s2: np.ndarray) -> np.ndarray:
    # Horner in s^2
    out = np.zeros_like(s2)
    for c in coef[::-1]:
        out = out * s2 + c
    return out


def _t_taylor(s: np.ndarray) -> np.ndarray:
    s2 = s * s
    return 2.0 * _series(_NUM_COEF, s2) / _series(_DEN_COEF, s2)


def _t_direct(s: np.ndarray) -> np.ndarray:
    sh = np.sinh(s)
    ch = np.cosh(s)
    return 2.0 * s * (sh * ch - s) / (sh * sh - s * s)


def _t_asymptotic(s: np.ndarray) -> np.ndarray:
    e = np.exp(-2.0 * s)
    # once e underflows the correction terms vanish; skip them so s*s cannot overflow
    big = e == 0.0
    sc = np.where(big, 0.0, s)
    corr = (1.0 - 4.0 * sc * e - e * e) / (1.0 - (4.0 * sc * sc + 2.0) * e + e * e)
    return 2.0 * s * corr


def t_profile_array(s) -> np.ndarray:
    """Vectorized :func:`t_profile`; every entry of ``s`` must be positive and finite."""
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise DomainError("t_profile requires finite s > 0")
    out = np.empty_like(s)
    lo = s < S_TAYLOR
    hi = s >= S_SWITCH
    mid = ~(lo | hi)
    out[lo] = _t_taylor(s[lo])
    out[mid] = _t_direct(s[mid])
    out[hi] = _t_asymptotic(s[hi])
    return out


def t_profile(s: float) -> float:
    """Evaluate ``t(s) = 2s (sinh s cosh s - s)/(sinh^2 s - s^2)`` for ``s > 0``."""
    if not (math.isfinite(s) and s > 0):
        raise DomainError(f"t_profile requires finite s > 0, got {s!r}")
    a = np.array([s], dtype=float)
    if s < S_TAYLOR:
        return float(_t_taylor(a)[0])
    if s < S_SWITCH:
        return float(_t_direct(a)[0])
    return float(_t_asymptotic(a)[0])


@dataclass(frozen=True)
class ProfileEval:
    s: float
    value: float
    branch: str  # "direct" or "asymptotic"


def profile_eval(s: float) -> ProfileEval:
    """Evaluate t(s) and report which branch produced the value."""
    value = t_profile(s)
    return ProfileEval(s=s, value=value, branch="asymptotic" if s >= S_SWITCH else "direct")


def t_profile_derivative(s: float) -> float:
    """Derivative t'(s) on ``s >= 1``.

    Uses ``t' = 2 theta / (sinh^2 s - s^2)^2`` with

        theta = sinh^3 s cosh s - 3 s sinh^2 s + 3 s^2 sinh s cosh s - s^3 (sinh^2 s + cosh^2 s),

    rewritten in terms of ``E = exp(-2s)`` so that nothing overflows.
    """
    if not math.isfinite(s) or s < 1.0:
        raise DomainError(f"t_profile_derivative is defined for s >= 1, got {s!r}")
    e = math.exp(-2.0 * s)
    a = -math.expm1(-2.0 * s)  # 2 e^{-s} sinh s
    b = 1.0 + e  # 2 e^{-s} cosh s
    theta = a**3 * b - 4.0 * e * (3.0 * s * a * a - 3.0 * s * s * a * b + s**3 * (a * a + b * b))
    den = a * a - 4.0 * s * s * e
    return 2.0 * theta / (den * den)


def h_inverse(t: float) -> float:
    """Inverse of t(s) on the monotone branch ``s >= 1``.

    Safeguarded Newton iteration started at ``max(1, t/2)``; any step that
    leaves the current bracket is replaced by bisection.  If Newton has not
    met ``NEWTON_RTOL`` after ``NEWTON_MAXITER`` steps the bracket is bisected
    down to ``BISECT_WIDTH``.
    """
    t1 = t_profile(1.0)
    # rounding makes t(s) non-monotone at the ulp level near s = 1
    if not math.isfinite(t) or t < t1 * (1.0 - 1e-14):
        raise DomainError(f"h_inverse requires t >= t(1) = {t1!r}, got {t!r}")
    if t <= t1:
        return 1.0
    lo, hi = 1.0, max(t, 1.0)
    s = min(max(1.0, 0.5 * t), hi)
    for _ in range(NEWTON_MAXITER):
        f = t_profile(s) - t
        if abs(f) <= NEWTON_RTOL * t:
            return s
        if f > 0:
            hi = s
        else:
            lo = s
        step = f / t_profile_derivative(s)
        s_new = s - step
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        s = s_new
    while hi - lo > BISECT_WIDTH * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if t_profile(mid) > t:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundaryProfile:
    """Normal profile Y (or Z) of a separated cylinder eigenfunction.

    Solves ``Y'''' - 2 eta^2 Y'' + eta^4 Y = 0`` on ``[0, height]`` with
    ``Y(0) = Y(height) = 0``, ``Y'(0) = 1``, ``Y'(height) = 0``.
    """

    eta: float
    height: float
    kind: str = "Y"

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise DomainError(f"eta must be positive, got {self.eta!r}")
        if not (math.isfinite(self.height) and self.height > 0):
            raise DomainError(f"height must be positive, got {self.height!r}")
        if self.kind not in ("Y", "Z"):
            raise DomainError(f"kind must be 'Y' or 'Z', got {self.kind!r}")

    @property
    def s(self) -> float:
        return self.eta * self.height


def boundary_profile_eval(p: BoundaryProfile, x_n: float) -> float:
    """Evaluate the profile at ``x_n`` in ``[0, height]``."""
    eta, ell = p.eta, p.height
    if not (0.0 <= x_n <= ell):
        raise DomainError(f"x_n={x_n!r} outside [0, {ell!r}]")
    if x_n == ell:
        return 0.0
    s = eta * ell
    if s < S_SWITCH:
        sh = math.sinh(s)
        den = sh * sh - s * s
        num = (-eta * ell * ell * math.sinh(eta * x_n)
               + sh * sh * x_n * math.cosh(eta * x_n)
               + (s - sh * math.cosh(s)) * x_n * math.sinh(eta * x_n))
        return num / den
    # numerator and denominator scaled by 4 e^{-2s}
    e = math.exp(-2.0 * s)
    up = math.exp(eta * x_n - 2.0 * s)
    down = math.exp(-eta * x_n)
    num = (-2.0 * eta * ell * ell * (up - down * e)
           + 0.5 * x_n * ((4.0 * s - 2.0 + 2.0 * e) * up + (2.0 - 2.0 * e - 4.0 * s * e) * down))
    den = (1.0 - e) ** 2 - 4.0 * s * s * e
    return num / den


def boundary_profile_second_derivative_at_zero(p: BoundaryProfile) -> float:
    """``Y''(0) = 2 eta (s - sinh s cosh s)/(sinh^2 s - s^2)`` with ``s = eta * height``."""
    eta, s = p.eta, p.s
    if s < S_TAYLOR:
        s2 = np.array([s * s])
        return float(-2.0 / p.height * _series(_NUM_COEF, s2)[0] / _series(_DEN_COEF, s2)[0])
    if s < S_SWITCH:
        sh = math.sinh(s)
        return 2.0 * eta * (s - sh * math.cosh(s)) / (sh * sh - s * s)
    e = math.exp(-2.0 * s)
    return 2.0 * eta * (4.0 * s * e - 1.0 + e * e) / ((1.0 - e) ** 2 - 4.0 * s * s * e)


def unit_ball_volume(m: int) -> float:
    """Volume of the unit ball in R^m, ``pi^(m/2) / Gamma(m/2 + 1)``."""
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"unit_ball_volume requires an integer m >= 1, got {m!r}")
    m = int(m)
    # recurrence omega_m = 2 pi omega_{m-2} / m keeps omega_1 = 2 and omega_2 = pi exact
    omega = 2.0 if m % 2 else math.pi
    for k in range(m % 2 + 2 if m % 2 else 4, m + 1, 2):
        omega *= 2.0 * math.pi / k
    return omega
