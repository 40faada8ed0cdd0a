"""Orbits, periodic points, multipliers, and the weight cocycle."""

from __future__ import annotations

import numpy as np
import pytest

from holorigid.dynamics import (
    ALL_POINTS,
    AllPoints,
    PolyFunc,
    PolyMap,
    SearchConfig,
    classify,
    cocycle_poly,
    companion_roots,
    durand_kerner,
    iterate,
    iterate_point,
    make_orbit,
    multipliers,
    orbit_points,
    periodic_points_1d,
    periodic_points_2d,
    weight_cocycle,
)
from holorigid.errors import OrbitError, PreconditionError, TermOverflowError

SQUARE = PolyMap.from_coeffs_1d([0, 0, 1])          # z^2
SQUARE_MINUS_1 = PolyMap.from_coeffs_1d([-1, 0, 1])  # z^2 - 1
HENON = PolyMap(2, ({(0, 1): 1}, {(0, 2): 1, (0, 0): -3, (1, 0): -0.3}))


class TestIterate:
    def test_square_twice(self):
        assert iterate(SQUARE, 2).components == ({(4,): 1 + 0j},)

    def test_square_minus_one_twice(self):
        # (z^2 - 1)^2 - 1 = z^4 - 2 z^2 (hand expansion)
        assert iterate(SQUARE_MINUS_1, 2).components == \
            ({(2,): -2 + 0j, (4,): 1 + 0j},)

    def test_r_equals_one_is_identity_of_iteration(self):
        assert iterate(HENON, 1).components == HENON.components

    def test_overflow_advises_pointwise(self):
        f = PolyMap.from_coeffs_1d([1, 1, 1, 1, 1])
        with pytest.warns(UserWarning, match="safety cap"):
            with pytest.raises(TermOverflowError, match="pointwise"):
                iterate(f, 8, max_terms=64)

    def test_overflow_warning(self):
        f = PolyMap.from_coeffs_1d([0, 0, 1])
        with pytest.warns(UserWarning, match="safety cap"):
            try:
                iterate(f, 14, max_terms=100)
            except TermOverflowError:
                pass


class TestPeriodicPoints1D:
    def test_square_fixed_points(self):
        assert sorted(periodic_points_1d(SQUARE, 1), key=abs) == \
            pytest.approx([0j, 1 + 0j])

    def test_square_period_two(self):
        # roots of z^4 - z: 0, 1, and the primitive cube roots of unity
        pts = periodic_points_1d(SQUARE, 2)
        want = [0, 1, np.exp(2j * np.pi / 3), np.exp(4j * np.pi / 3)]
        assert len(pts) == 4
        for w in want:
            assert min(abs(p - w) for p in pts) < 1e-9

    def test_negation_is_all_points(self):
        assert periodic_points_1d(PolyMap.from_coeffs_1d([0, -1]), 2) is ALL_POINTS

    def test_translation_has_no_periodic_points(self):
        assert periodic_points_1d(PolyMap.from_coeffs_1d([1, 1]), 3) == []

    def test_residuals_meet_orbit_tolerance(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            coeffs = rng.normal(size=4) + 1j * rng.normal(size=4)
            f = PolyMap.from_coeffs_1d(coeffs)
            detail = periodic_points_1d(f, 2, detail=True)
            for p, res in zip(detail.points, detail.residuals):
                assert res <= 1e-8 * (1 + abs(p))

    def test_companion_and_durand_kerner_agree(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            deg = int(rng.integers(2, 9))
            coeffs = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
            a = companion_roots(coeffs)
            b = durand_kerner(coeffs)
            b = list(b)
            for x in sorted(a, key=abs, reverse=True):
                j = min(range(len(b)), key=lambda k: abs(b[k] - x))
                assert abs(b[j] - x) < 1e-8 * (1 + abs(x))
                b.pop(j)

    def test_degree_64_completeness(self):
        # deg(f^r) = 64 for a cubic iterated... 4^3 = 64: quartic, r = 3
        f = PolyMap.from_coeffs_1d([0.2, -0.4, 0.0, 0.0, 1.0])
        pts = periodic_points_1d(f, 3)
        assert len(pts) <= 64
        for p in pts:
            assert abs(iterate_point(f, [p], 3)[0] - p) <= 1e-8 * (1 + abs(p))

    def test_iterated_random_polynomials_stress(self):
        # degree-64 expansions with wildly scaled coefficients: every
        # returned point must still verify pointwise, and every candidate
        # must be resolved (this distribution once exposed a diverging
        # Newton polish and a stalling root iteration)
        rng = np.random.default_rng(77)
        for _ in range(30):
            deg = int(rng.integers(1, 5))
            f = PolyMap.from_coeffs_1d(rng.normal(size=deg + 1)
                                       + 1j * rng.normal(size=deg + 1))
            r = int(rng.integers(1, 4))
            detail = periodic_points_1d(f, r, detail=True)
            if isinstance(detail, AllPoints):
                continue
            assert detail.unresolved == ()
            for p, res in zip(detail.points, detail.residuals):
                assert res <= 1e-8 * (1 + abs(p))


class TestMultipliers:
    def test_linear_map(self):
        assert multipliers(PolyMap.from_coeffs_1d([0, 2]), [0], 1) == \
            pytest.approx((2 + 0j,))

    def test_square_at_one(self):
        assert multipliers(SQUARE, [1], 1) == pytest.approx((2 + 0j,))

    def test_superattracting_two_cycle(self):
        # f'(0) * f'(-1) = 0 * (-2) = 0
        assert multipliers(SQUARE_MINUS_1, [0], 2) == pytest.approx((0j,))

    def test_not_periodic_raises_with_residual(self):
        with pytest.raises(OrbitError, match="residual"):
            multipliers(SQUARE, [0.5], 1)

    def test_orbit_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            coeffs = rng.normal(size=3) + 1j * rng.normal(size=3)
            f = PolyMap.from_coeffs_1d(coeffs)
            pts = periodic_points_1d(f, 3)
            if isinstance(pts, AllPoints) or not pts:
                continue
            p = pts[0]
            orbit = orbit_points(f, [p], 3)
            base = sorted(multipliers(f, orbit[0], 3), key=abs)
            for q in orbit[1:]:
                other = sorted(multipliers(f, q, 3), key=abs)
                assert np.allclose(base, other, atol=1e-8 * (1 + abs(base[-1])))


class TestClassify:
    @pytest.mark.parametrize("mults,want", [
        ((2.0,), "repelling"),
        ((4.939, 0.0607), "saddle"),
        ((1.0,), "indifferent"),
        ((0.0,), "superattracting"),
        ((0.5, 0.2), "attracting"),
        ((2.0, 1.0), "inconclusive"),
        ((np.exp(1j * 0.3),), "indifferent"),
    ])
    def test_examples(self, mults, want):
        assert classify(mults) == want


class TestWeightCocycle:
    def test_trivial_weight(self):
        assert weight_cocycle(None, [np.array([1 + 2j]), np.array([3j])]) == 1

    def test_gaussian_weight_on_fixed_point(self):
        # u = e^(z^2/2) at the fixed point i of (z+1)^2/2: u(i) = e^(-1/2)
        u = lambda z: np.exp(z[0] ** 2 / 2)
        assert weight_cocycle(u, [np.array([1j])]) == pytest.approx(np.exp(-0.5))

    def test_vanishing_factor(self):
        u = PolyFunc(1, {(1,): 1})
        assert weight_cocycle(u, [np.array([0j]), np.array([-1 + 0j])]) == 0

    def test_multiplicative_splitting(self):
        # u_{a+b}(p) = u_a(p) * u_b(f^a(p))
        rng = np.random.default_rng(13)
        f = PolyMap.from_coeffs_1d([0.3, 0.2, 0.1])
        u = PolyFunc(1, {(0,): 0.5, (1,): 1.0, (2,): -0.25})
        for _ in range(10):
            p = np.array([complex(rng.normal(), rng.normal())])
            a, b = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            whole = weight_cocycle(u, orbit_points(f, p, a + b))
            split = weight_cocycle(u, orbit_points(f, p, a)) * \
                weight_cocycle(u, orbit_points(f, iterate_point(f, p, a), b))
            assert whole == pytest.approx(split, rel=1e-10)

    def test_cocycle_poly_matches_pointwise(self):
        rng = np.random.default_rng(15)
        f = PolyMap.from_coeffs_1d([0.1, -0.7, 0.4])
        u = PolyFunc(1, {(0,): 1.0, (1,): 2.0})
        u3 = cocycle_poly(u, f, 3)
        for _ in range(10):
            p = np.array([complex(rng.normal(), rng.normal())])
            assert u3(p) == pytest.approx(
                weight_cocycle(u, orbit_points(f, p, 3)), rel=1e-10)


class TestPeriodicPoints2D:
    def test_henon_fixed_points(self):
        # x = y = t with t^2 - 1.3 t - 3 = 0, i.e. t = 2.5 and t = -1.2
        res = periodic_points_2d(HENON, 1, SearchConfig(starts=300, seed=7))
        ts = sorted(p[0].real for p in res.points)
        assert ts == pytest.approx([-1.2, 2.5], abs=1e-9)
        assert not res.complete
        assert res.seed == 7

    def test_affine_contraction_single_fixed_point(self):
        f = PolyMap.linear(np.eye(2) * 0.5)
        res = periodic_points_2d(f, 1, SearchConfig(starts=100, seed=1))
        assert len(res.points) == 1
        assert np.linalg.norm(np.array(res.points[0])) < 1e-10

    def test_translation_has_none(self):
        f = PolyMap(2, ({(1, 0): 1, (0, 0): 1}, {(0, 1): 1}))
        res = periodic_points_2d(f, 1, SearchConfig(starts=100, seed=1))
        assert res.points == ()

    def test_deterministic_under_seed(self):
        a = periodic_points_2d(HENON, 1, SearchConfig(starts=150, seed=3))
        b = periodic_points_2d(HENON, 1, SearchConfig(starts=150, seed=3))
        assert a == b

    def test_threads_do_not_change_results(self):
        a = periodic_points_2d(HENON, 1, SearchConfig(starts=80, seed=3))
        b = periodic_points_2d(HENON, 1, SearchConfig(starts=80, seed=3, threads=4))
        assert a.points == b.points

    def test_wrong_dimension_rejected(self):
        with pytest.raises(PreconditionError):
            periodic_points_2d(SQUARE, 1)


class TestMakeOrbit:
    def test_exact_period_reduction(self):
        f = PolyMap.from_coeffs_1d([0, -1])
        orbit = make_orbit(f, [0], 2)
        assert orbit.period == 1 and len(orbit.points) == 1
        orbit = make_orbit(f, [1], 2)
        assert orbit.period == 2 and len(orbit.points) == 2

    def test_two_cycle_data(self):
        u = PolyFunc(1, {(0,): 2.0, (1,): 1.0})  # u = z + 2
        orbit = make_orbit(SQUARE_MINUS_1, [0], 2, u)
        assert orbit.period == 2
        assert orbit.u_r_value == pytest.approx(2.0)  # u(0) u(-1) = 2 * 1
        assert orbit.stability == "superattracting"

    def test_rejects_non_periodic(self):
        with pytest.raises(OrbitError):
            make_orbit(SQUARE, [0.5], 1)
