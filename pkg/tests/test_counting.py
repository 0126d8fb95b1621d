import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bisteklov.boxspec import BoxCylinder, SpectralFamily, spectrum
from bisteklov.counting import (
    CountingCurve,
    LatticeQuery,
    count_lattice,
    counting_curve,
    counting_function,
    ellipsoid_volume_bound,
    mu_from_lambda,
    mu_from_mu_star,
)
from bisteklov.errors import DomainError, UnsupportedConfigurationError
from bisteklov.profile import h_inverse, t_profile

T_2PI_HALF = 6.2861402231739610832  # t(2 pi) / 2, mpmath at 50 digits


def box(sides, height, rho=1.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return BoxCylinder.from_sides(sides, height, rho)


def naive_count(sides, R, family):
    """Nested-loop enumeration with the quadratic form summed left to right."""
    lo = SpectralFamily.parse(family).min_index
    ranges = [range(lo, int(math.floor(l * R)) + 2) for l in sides]
    n = 0
    for m in itertools.product(*ranges):
        if sum(m) == 0:
            continue
        q = 0.0
        for mi, li in zip(m, sides):
            q = q + (mi / li) ** 2
        if q <= R * R:
            n += 1
    return n


class TestCountLattice:
    def test_examples(self):
        assert count_lattice(LatticeQuery((1, 1), 2.2, "dirichlet")) == 1
        assert count_lattice(LatticeQuery((1, 1), 2.2, "neumann")) == 5
        assert count_lattice(LatticeQuery((1,), 3.5, "dirichlet")) == 3

    def test_inclusive_boundary(self):
        # (3, 4) lies exactly on the circle of radius 5
        assert count_lattice(LatticeQuery((1, 1), 5.0, "dirichlet")) == naive_count((1, 1), 5.0, "dirichlet")
        assert count_lattice(LatticeQuery((1,), 3.0, "dirichlet")) == 3

    def test_zero_radius(self):
        assert count_lattice(LatticeQuery((1, 1), 0.0, "neumann")) == 0
        assert count_lattice(LatticeQuery((1, 1), 0.0, "dirichlet")) == 0

    @settings(max_examples=120, deadline=None)
    @given(st.lists(st.sampled_from([0.5, 1.0, 1.5, 2.0, 0.75, 1.25]), min_size=1, max_size=3),
           st.floats(0.0, 10.0), st.sampled_from(["dirichlet", "neumann"]))
    def test_brute_force(self, sides, R, family):
        assert count_lattice(LatticeQuery(sides, R, family)) == naive_count(sides, R, family)

    def test_invalid(self):
        with pytest.raises(DomainError):
            LatticeQuery((1.0,), -1.0, "neumann")
        with pytest.raises(DomainError):
            LatticeQuery((), 1.0, "neumann")

    def test_size_guard(self):
        with pytest.raises(DomainError):
            count_lattice(LatticeQuery((1.0, 1.0, 1.0), 1e6, "neumann"))


class TestCountingFunction:
    def test_below_spectrum(self):
        b = box([1.0], 2.0)
        assert counting_function(b, "dirichlet", 1.0) == 0

    def test_threshold_inclusive(self):
        assert counting_function(box([1.0], 2.0), "dirichlet", T_2PI_HALF) == 1

    def test_path_equivalence_large_tau(self):
        b = box([1.0, 1.0], 2.0)
        direct, inverse = counting_function(b, "neumann", 300.0, return_paths=True)
        R = h_inverse(600.0) / (2 * math.pi)
        assert direct == inverse == count_lattice(LatticeQuery((1, 1), R, "neumann"))

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.floats(0.3, 2.0), min_size=1, max_size=3), st.floats(1.0, 4.0),
           st.floats(0.2, 5.0), st.floats(1.0, 80.0))
    def test_paths_and_bracket(self, sides, height, rho, tau):
        b = box(sides, height, rho)
        d0, i0 = counting_function(b, "dirichlet", tau, return_paths=True)
        df, iF = counting_function(b, "neumann", tau, return_paths=True)
        if i0 is not None:
            assert d0 == i0 and df == iF
        assert d0 <= df

    def test_matches_spectrum(self):
        b = box([1.0, 1.3], 2.0, 0.7)
        for fam in SpectralFamily:
            lams = [m.lam for m in spectrum(b, fam, 200)]
            for tau in (5.0, 17.0, 33.3, lams[150]):
                assert counting_function(b, fam, tau) == sum(l <= tau for l in lams)

    def test_jumps_by_multiplicity(self):
        b = box([1.0, 1.0], 2.0)
        modes = spectrum(b, "neumann", 80)
        lams = [m.lam for m in modes]
        for lam in sorted(set(lams))[:15]:
            mult = lams.count(lam)
            below = counting_function(b, "neumann", lam * (1 - 1e-9))
            at = counting_function(b, "neumann", lam)
            assert at - below == mult
            # right-continuity: a hair above adds nothing
            assert counting_function(b, "neumann", lam * (1 + 1e-11)) == at

    def test_monotone(self):
        b = box([1.0, 1.0], 2.0)
        c = [counting_function(b, "dirichlet", t) for t in np.linspace(1, 120, 60)]
        assert all(x <= y for x, y in zip(c, c[1:]))

    def test_invalid_tau(self):
        with pytest.raises(DomainError):
            counting_function(box([1.0], 2.0), "neumann", 0.0)


class TestCurve:
    def test_curve(self):
        cc = counting_curve(box([1.0, 1.0], 2.0), [50, 100, 200])
        assert isinstance(cc, CountingCurve)
        assert all(a <= f for a, f in zip(cc.counts0, cc.countsF))
        assert cc.ratiosF[2] == pytest.approx(cc.countsF[2] / (200**2 / (16 * math.pi)), rel=1e-14)

    def test_not_ascending(self):
        with pytest.raises(DomainError):
            counting_curve(box([1.0, 1.0], 2.0), [100, 50])


class TestEllipsoid:
    def test_example_disc(self):
        V, up = ellipsoid_volume_bound(box([1.0, 1.0], 2.0), 2.2)
        assert V == pytest.approx(math.pi * 4.84 / 4, rel=1e-15)
        assert up == pytest.approx(V + math.sqrt(2) * math.pi * 2.2 / 2, rel=1e-15)
        count = count_lattice(LatticeQuery((1, 1), 2.2, "neumann"))
        assert V <= count + 1 <= up

    def test_example_interval(self):
        V, _ = ellipsoid_volume_bound(box([1.0], 4.0), 3.5)
        assert V == pytest.approx(3.5)
        assert count_lattice(LatticeQuery((1,), 3.5, "neumann")) + 1 >= V

    def test_anisotropic(self):
        b = box([1.0, 2.0], 3.0)
        with pytest.raises(UnsupportedConfigurationError):
            ellipsoid_volume_bound(b, 2.0)
        V, up = ellipsoid_volume_bound(b, 2.0, upper=False)
        assert up is None and V == pytest.approx(math.pi * 2 * 4 / 4)

    @pytest.mark.parametrize("d", [1, 2])
    def test_sandwich_cube(self, d):
        b = box([1.0] * d, 2.0)
        for R in np.logspace(0, 2, 50):
            V, up = ellipsoid_volume_bound(b, R)
            c = count_lattice(LatticeQuery([1.0] * d, R, "neumann")) + 1
            assert V <= c <= up

    def test_sandwich_three_dimensional_base(self):
        # with a 3-D base the upper bound is only asymptotic: it fails at the
        # smallest radii and holds from R ~ 1.2 on
        b = box([1.0] * 3, 2.0)
        bad = []
        for R in np.logspace(0, 2, 50):
            V, up = ellipsoid_volume_bound(b, R)
            c = count_lattice(LatticeQuery([1.0] * 3, R, "neumann")) + 1
            assert V <= c
            if c > up:
                bad.append(R)
        assert bad == pytest.approx([1.0, 10 ** (2 / 49)])

    def test_small_radius(self):
        V, _ = ellipsoid_volume_bound(box([1.0, 1.0], 2.0), 1e-6)
        assert V < 1e-11
        assert count_lattice(LatticeQuery((1, 1), 1e-6, "neumann")) == 0


class TestMu:
    def test_examples(self):
        assert mu_from_lambda(0.0) == 1.0
        assert mu_from_lambda(3.0) == 0.25
        assert mu_from_mu_star(3.0) == 0.75
        assert mu_from_mu_star(1 / 3) == pytest.approx(mu_from_lambda(3.0), rel=1e-15)
        assert mu_from_lambda(1e300) < 1e-299
        assert 0 < mu_from_mu_star(1e-300) < 1e-299

    def test_domain(self):
        with pytest.raises(DomainError):
            mu_from_lambda(-1.0)
        with pytest.raises(DomainError):
            mu_from_mu_star(0.0)
        with pytest.raises(DomainError):
            mu_from_lambda(math.nan)

    @settings(max_examples=100)
    @given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
    def test_agree_and_monotone(self, lam, lam2):
        mu = mu_from_lambda(lam)
        assert mu == pytest.approx(mu_from_mu_star(1 / lam), rel=1e-14)
        assert 0 < mu < 1 and 0 < mu_from_mu_star(lam) < 1
        if lam < lam2:
            assert mu_from_lambda(lam) > mu_from_lambda(lam2)
            assert mu_from_mu_star(lam) < mu_from_mu_star(lam2)
