"""Operator matrices on the truncated monomial model."""

from __future__ import annotations

import math

import numpy as np
import pytest

from holorigid.dynamics import PolyFunc, PolyMap, cocycle_poly, iterate
from holorigid.errors import InsufficientDegreeError
from holorigid.fock import (
    TruncatedSpaceModel,
    assumption_witness,
    block_growth_norms,
    coefficient_matrix,
    conjugate_translation,
    jets_from_polys,
    norm_sweep,
    operator_matrix,
    operator_matrix_from_polys,
    restriction_norm_profile,
    sqrt_factorial,
    truncated_norm,
)
from holorigid.jets import Jet, JetMap, weighted_pullback

HALF = PolyMap.from_coeffs_1d([0, 0.5])
DOUBLE = PolyMap.from_coeffs_1d([0, 2])
SQUARE = PolyMap.from_coeffs_1d([0, 0, 1])
WEIGHT_Z = PolyFunc(1, {(1,): 1})


class TestOperatorMatrix:
    def test_scaling_map_is_diagonal(self):
        m = operator_matrix_from_polys(None, HALF, 8)
        assert m.entries == pytest.approx(np.diag(0.5 ** np.arange(9)))
        assert not m.truncation_loss

    def test_square_map_columns(self):
        # column m sends e_m to sqrt((2m)!/m!) e_{2m}, zero once 2m > N
        n_cap = 12
        m = operator_matrix_from_polys(None, SQUARE, n_cap)
        for col in range(n_cap + 1):
            expect = np.zeros(n_cap + 1)
            if 2 * col <= n_cap:
                expect[2 * col] = math.sqrt(
                    math.factorial(2 * col) / math.factorial(col))
            assert m.entries[:, col] == pytest.approx(expect)
            assert m.column_loss[col] == (2 * col > n_cap)

    def test_weighted_shift_subdiagonal(self):
        # u = z, f = 2z: z * (2z)^m / sqrt(m!) = 2^m sqrt(m+1) e_{m+1}
        n_cap = 31
        m = operator_matrix_from_polys(WEIGHT_Z, DOUBLE, n_cap)
        for k in range(31):
            assert m.entries[k + 1, k] == pytest.approx(
                2 ** k * math.sqrt(k + 1), rel=1e-12)

    def test_columns_match_weighted_pullback(self):
        # independent route: each column is the pullback of the monomial jet
        # expanded at f(0)
        rng = np.random.default_rng(31)
        n_cap = 6
        f = PolyMap.from_coeffs_1d(rng.normal(size=3) + 1j * rng.normal(size=3))
        u = PolyFunc(1, {(0,): 0.4, (1,): -0.3 + 0.2j})
        uj, fj = jets_from_polys(u, f, n_cap)
        mat = coefficient_matrix(uj, fj, n_cap)
        q = fj.value()
        for col in range(n_cap + 1):
            # expand z^col at q via the binomial theorem
            coeffs = {(k,): math.comb(col, k) * q[0] ** (col - k)
                      for k in range(col + 1)}
            mono = Jet(1, fj.cap, q, coeffs)
            pulled = weighted_pullback(uj, fj, mono)
            for row in range(n_cap + 1):
                assert mat.entries[row, col] == pytest.approx(
                    pulled.term((row,)), rel=1e-9, abs=1e-9)

    def test_insufficient_cap_rejected(self):
        u = Jet.constant(1, 3, (0j,), 1.0)
        f = JetMap(1, 1, (Jet(1, 3, (0j,), {(1,): 1}),))
        with pytest.raises(InsufficientDegreeError):
            operator_matrix(u, f, 5)

    def test_fock_weights_relate_matrices(self):
        m_plain = coefficient_matrix(*jets_from_polys(WEIGHT_Z, DOUBLE, 6), 6)
        m_fock = operator_matrix(*jets_from_polys(WEIGHT_Z, DOUBLE, 6), 6)
        w = np.array([sqrt_factorial(a) for a in m_fock.basis])
        assert m_fock.entries == pytest.approx(
            m_plain.entries * w[:, None] / w[None, :])


class TestTruncatedNorm:
    def test_contraction_norm_one_for_every_cap(self):
        for n_cap in (1, 5, 17, 40):
            m = operator_matrix_from_polys(None, HALF, n_cap)
            assert truncated_norm(m) == pytest.approx(1.0, abs=1e-9)

    def test_square_norm_is_top_column(self):
        # the columns hit disjoint rows, so the norm is the largest column norm
        m = operator_matrix_from_polys(None, SQUARE, 20)
        assert truncated_norm(m) == pytest.approx(
            math.sqrt(math.factorial(20) / math.factorial(10)), rel=1e-12)

    def test_zero_matrix(self):
        zero_weight = PolyFunc(1, {})
        m = operator_matrix_from_polys(zero_weight, HALF, 4)
        assert truncated_norm(m) == 0.0

    def test_zero_map_keeps_constant_column(self):
        zero = PolyMap(1, ({},))
        m = operator_matrix_from_polys(WEIGHT_Z, zero, 4)
        # u * f^beta = z * 0^beta: only the beta = 0 column survives
        assert truncated_norm(m) == pytest.approx(1.0)

    def test_nondecreasing_in_cap_without_loss(self):
        rows = norm_sweep(None, PolyMap.from_coeffs_1d([0, 1.3]), 12)
        norms = [v for _, v, lossy in rows if not lossy]
        assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))


class TestRestrictionProfile:
    def test_contraction_decays_geometrically(self):
        m = operator_matrix_from_polys(None, HALF, 40)
        prof = restriction_norm_profile(m)
        for n, norm, lossy in prof.levels:
            assert norm == pytest.approx(2.0 ** (-n), abs=1e-9)
            assert not lossy
        assert prof.fixes_origin and prof.invariance_warning is None

    def test_expansion_dominates_power_lower_bound(self):
        n_cap = 24
        m = operator_matrix_from_polys(None, DOUBLE, n_cap)
        prof = restriction_norm_profile(m)
        for n, norm, _ in prof.levels:
            assert norm >= 2.0 ** n
            assert norm == pytest.approx(2.0 ** n_cap, rel=1e-12)

    def test_square_profile_diverges_in_cap(self):
        # at fixed N the norm is the top column sqrt(N!/(N/2)!) down to
        # level N/2 (columns beyond map outside the window); as N grows the
        # value at any fixed level diverges
        m = operator_matrix_from_polys(None, SQUARE, 16)
        prof = restriction_norm_profile(m)
        top = math.sqrt(math.factorial(16) / math.factorial(8))
        for n, value, _ in prof.levels:
            if n <= 8:
                assert value == pytest.approx(top, rel=1e-12)
            else:
                assert value == 0.0
        smaller = restriction_norm_profile(
            operator_matrix_from_polys(None, SQUARE, 8))
        for n in range(5):
            assert prof.levels[n][1] > smaller.levels[n][1]

    def test_invariance_warning_without_fixed_origin(self):
        f = PolyMap.from_coeffs_1d([1, 0, 1])  # f(0) = 1
        m = operator_matrix_from_polys(None, f, 6)
        prof = restriction_norm_profile(m)
        assert not prof.fixes_origin
        assert "not invariant" in prof.invariance_warning


class TestCompositionCompatibility:
    def test_square_of_operator_matches_cocycle_matrix(self):
        # (uC_f)^2 = (u * (u o f)) C_{f o f} on columns untouched by truncation
        n_cap = 16
        u = PolyFunc(1, {(0,): 1.0, (1,): 1.0 / 3.0})
        f = HALF
        m = operator_matrix_from_polys(u, f, n_cap)
        v = cocycle_poly(u, f, 2)
        g = iterate(f, 2)
        direct = operator_matrix_from_polys(v, g, n_cap)
        product = m.entries @ m.entries
        # u has degree 1, so column beta of the square involves rows up to
        # beta + 2: compare the columns that stay inside the cap
        safe = n_cap - 2
        assert product[:, :safe] == pytest.approx(direct.entries[:, :safe],
                                                  abs=1e-9)


class TestGrowthLaw:
    def test_weighted_blocks_match_closed_form(self):
        # product of k subdiagonal blocks from level n:
        # 2^(kn + k(k-1)/2) * sqrt((n+k)!/n!)
        n = 2
        uj, fj = jets_from_polys(WEIGHT_Z, DOUBLE, 26)
        norms = block_growth_norms(uj, fj, n, 12, 26, weighted=True)
        for k, got in enumerate(norms, start=1):
            want = 2.0 ** (k * n + k * (k - 1) / 2) * math.sqrt(
                math.factorial(n + k) / math.factorial(n))
            assert got == pytest.approx(want, rel=1e-9)

    def test_coefficient_blocks_quadratic_exponent(self):
        # in Taylor coordinates the k-step norm is exactly
        # 2^(kn + k(k-1)/2), so the second difference of the log is log 2
        uj, fj = jets_from_polys(WEIGHT_Z, DOUBLE, 26)
        norms = block_growth_norms(uj, fj, 3, 20, 26, weighted=False)
        second = np.diff(np.log(norms), 2)
        assert np.max(np.abs(second - np.log(2.0))) < 1e-6

    def test_budget_checked(self):
        uj, fj = jets_from_polys(WEIGHT_Z, DOUBLE, 10)
        with pytest.raises(InsufficientDegreeError):
            block_growth_norms(uj, fj, 5, 10, 10)


class TestAssumptionWitness:
    def test_one_variable_witnesses(self):
        report = assumption_witness(TruncatedSpaceModel(1, 10), 7)
        level = report["levels"][7]
        assert level["realized"] and level["witnesses"] == [[7]]
        assert "one_variable_argument" in report

    def test_two_variable_level_two(self):
        report = assumption_witness(TruncatedSpaceModel(2, 5), 2)
        assert report["levels"][2]["witnesses"] == [[2, 0], [1, 1], [0, 2]]

    def test_beyond_cap_is_honest(self):
        report = assumption_witness(TruncatedSpaceModel(1, 3), 5)
        assert report["levels"][5] == {"n": 5, "realized": False,
                                       "note": "not realized at cap"}


class TestTranslationConjugation:
    def test_recentred_map_fixes_origin(self):
        # f = z^2 fixes 1; g = f(z+1) - 1 = z^2 + 2z fixes 0
        g, v = conjugate_translation(SQUARE, None, [1.0])
        assert g([0])[0] == pytest.approx(0.0)
        assert g.components[0] == {(1,): 2 + 0j, (2,): 1 + 0j}
        assert v is None

    def test_recentred_weight(self):
        u = PolyFunc(1, {(1,): 1.0})
        g, v = conjugate_translation(SQUARE, u, [1.0])
        assert v(np.array([0j])) == pytest.approx(1.0)  # u(0 + 1)

    def test_pointwise_conjugation_identity(self):
        rng = np.random.default_rng(8)
        p = np.array([0.3 - 0.2j, 1.1j])
        f = PolyMap(2, ({(1, 0): 0.5, (0, 2): 1}, {(0, 1): 2.0, (2, 0): -1}))
        g, _ = conjugate_translation(f, None, p)
        for _ in range(5):
            z = rng.normal(size=2) + 1j * rng.normal(size=2)
            assert np.allclose(g(z), f(z + p) - p, atol=1e-12)
