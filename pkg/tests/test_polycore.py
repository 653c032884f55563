import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablepgf.polycore import (
    MultiPoly,
    UniPoly,
    elem_sym,
    elem_sym_all,
    evaluate,
    exact_real_root_count,
    hermite_sum_form,
    kummer_series_poly,
    negative_x_zeros_of_series,
    polarize,
    polarize_multi,
    quadratic_death_cluster_poly,
    real_roots,
)

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=8)


class TestEval:
    def test_linear_at_i(self):
        val, err = evaluate(UniPoly.from_coeffs([1, 1]), 1j)
        assert val == 1 + 1j
        assert err < 1e-12

    def test_product_point(self):
        f = MultiPoly.from_dict({(1, 1): 1}, 2)
        val, _ = evaluate(f, (2, 3))
        assert val == 6

    def test_root_of_cube(self):
        p = UniPoly.from_roots([-0.5, -0.5, -0.5])
        val, err = evaluate(p, -0.5)
        assert abs(val) <= max(err, 1e-15)

    def test_dimension_mismatch(self):
        f = MultiPoly.from_dict({(1, 0): 1}, 2)
        with pytest.raises(ValueError):
            f.eval_with_bound([1.0])

    def test_exact_eval_is_exact(self):
        p = UniPoly.from_coeffs([F(1, 3), F(2, 7)])
        val, err = p.eval_with_bound(F(1, 2))
        assert val == F(1, 3) + F(1, 7)
        assert err == 0.0


class TestElemSym:
    def test_e0(self):
        assert elem_sym(0, []) == 1
        assert elem_sym(0, [5, 7]) == 1

    def test_e2_explicit(self):
        assert elem_sym(2, [1, 2, 3]) == 11

    def test_all_ones(self):
        assert elem_sym(3, [1, 1, 1]) == 1

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            elem_sym(3, [1, 2])

    @given(st.lists(rationals, min_size=1, max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_newton_consistency_against_expansion(self, values):
        # prod (x + v_i) has coefficient e_{m-k} on x^k
        p = UniPoly.from_roots([-v for v in values])
        es = elem_sym_all(values)
        m = len(values)
        for k in range(m + 1):
            assert p.coeffs[k] == es[m - k] if k <= p.degree else es[m - k] == 0


class TestPolarize:
    def test_square_to_product(self):
        pol = polarize(UniPoly.from_coeffs([0, 0, 1]), 2)
        assert pol.terms_dict() == {(1, 1): F(1)}

    def test_affine(self):
        pol = polarize(UniPoly.from_coeffs([1, 2]), 2)
        assert pol.terms_dict() == {(0, 0): F(1), (0, 1): F(1), (1, 0): F(1)}

    def test_degree_guard(self):
        with pytest.raises(ValueError):
            polarize(UniPoly.from_coeffs([0, 0, 0, 1]), 2)

    @given(
        st.lists(rationals, min_size=1, max_size=5),
        st.integers(min_value=0, max_value=3),
        rationals,
    )
    @settings(max_examples=40, deadline=None)
    def test_diagonal_identity_exact(self, coeffs, extra, x):
        p = UniPoly.from_coeffs(coeffs)
        N = max(p.degree + extra, p.degree, 1)
        pol = polarize(p, N)
        diag, _ = pol.eval_with_bound([x] * N)
        assert diag == p(x)

    def test_multi_identity_on_multiaffine(self):
        f = MultiPoly.from_dict({(1, 1): 1}, 2)
        out = polarize_multi(f, 1)
        assert out.terms_dict() == {(1, 1): F(1)}

    def test_multi_square(self):
        out = polarize_multi(MultiPoly.from_dict({(2,): 1}, 1), 2)
        assert out.terms_dict() == {(1, 1): F(1)}

    def test_multi_diagonal_identity(self):
        f = MultiPoly.from_dict({(2, 1): F(1, 2), (0, 1): F(1, 3)}, 2)
        out = polarize_multi(f, 2)
        x, y = F(1, 2), F(-2, 3)
        lifted = out([x, x, y, y])
        assert lifted == f([x, y])
        assert out.is_multi_affine()

    def test_multi_degree_guard(self):
        with pytest.raises(ValueError):
            polarize_multi(MultiPoly.from_dict({(3, 0): 1}, 2), 2)


class TestRealRoots:
    def test_known_linear_factors(self):
        p = UniPoly.from_roots([F(-1), F(-2)])
        rl = real_roots(p)
        assert rl.certified_real_count == 2
        got = sorted(z.real for z in rl.roots)
        assert abs(got[0] + 2) <= max(rl.radii) + 1e-12
        assert abs(got[1] + 1) <= max(rl.radii) + 1e-12

    def test_complex_pair(self):
        rl = real_roots(UniPoly.from_coeffs([1, 0, 1]))
        assert rl.certified_real_count == 0
        assert len(rl.roots) == 2

    def test_two_state_death_discriminant_case(self):
        # law of a double root at 1/2 pushed through the two-state chain:
        # discriminant e^{-2t}(e^{-2t}-1) < 0 for t > 0
        t = 0.1
        u = math.exp(-2 * t)
        p = UniPoly.from_coeffs([0.25, -u, u])
        rl = real_roots(p)
        assert rl.certified_real_count == 0
        ims = sorted(z.imag for z in rl.roots)
        assert ims[0] < -1e-3 and ims[1] > 1e-3

    def test_zero_polynomial_raises(self):
        with pytest.raises(ValueError):
            real_roots(UniPoly.zero())

    def test_multiplicity_counted(self):
        p = UniPoly.from_roots([F(-1, 2)] * 3 + [F(-3)])
        rl = real_roots(p)
        assert rl.certified_real_count == 4
        assert len(rl.roots) == 4

    @given(st.lists(st.fractions(min_value=-3, max_value=0, max_denominator=6), min_size=1, max_size=6))
    @settings(max_examples=30, deadline=None)
    def test_roots_within_radius(self, roots):
        p = UniPoly.from_roots(roots)
        rl = real_roots(p)
        assert rl.certified_real_count == len(roots)
        found = sorted(z.real for z in rl.roots)
        for a, b in zip(found, sorted(float(r) for r in roots)):
            assert abs(a - b) < 1e-6


class TestSpecialFamilies:
    def test_hermite_small(self):
        assert hermite_sum_form(1).coeffs == (F(0), F(1))
        assert hermite_sum_form(2).coeffs == (F(-2), F(0), F(1))
        assert hermite_sum_form(3).coeffs == (F(0), F(-6), F(0), F(1))

    def test_hermite_three_roots(self):
        rl = real_roots(hermite_sum_form(3))
        got = sorted(z.real for z in rl.roots)
        expect = [-math.sqrt(6), 0.0, math.sqrt(6)]
        assert all(abs(a - b) < 1e-9 for a, b in zip(got, expect))

    @pytest.mark.parametrize("n", range(1, 13))
    def test_hermite_distinct_real_roots(self, n):
        p = hermite_sum_form(n)
        assert exact_real_root_count(p) == n
        rl = real_roots(p)
        reals = sorted(z.real for z in rl.roots)
        assert all(b - a > 1e-9 for a, b in zip(reals, reals[1:]))

    def test_kummer_trivial(self):
        assert kummer_series_poly(1).coeffs == (F(1),)

    def test_kummer_three(self):
        assert kummer_series_poly(3).coeffs == (F(1), F(-2), F(1, 2))
        zeros = negative_x_zeros_of_series(kummer_series_poly(3))
        assert abs(zeros[0] - (-1 - 1 / math.sqrt(2))) < 1e-9
        assert abs(zeros[1] - (-1 + 1 / math.sqrt(2))) < 1e-9

    @pytest.mark.parametrize("n", range(2, 13))
    def test_kummer_negative_zero_count(self, n):
        zeros = negative_x_zeros_of_series(kummer_series_poly(n))
        assert len(zeros) == n - 1
        assert all(z < 0 for z in zeros)

    def test_kummer_five_has_four_zeros(self):
        assert len(negative_x_zeros_of_series(kummer_series_poly(5))) == 4

    @pytest.mark.parametrize("n", range(2, 13))
    def test_cluster_poly_negative_zero_count(self, n):
        p = quadratic_death_cluster_poly(n)
        assert exact_real_root_count(p) == n - 1
        rl = real_roots(p)
        assert all(z.real < 0 for z in rl.roots)

    def test_cluster_poly_small_cases(self):
        # n=2: single zero at -2 (exact two-state computation)
        rl = real_roots(quadratic_death_cluster_poly(2))
        assert abs(rl.roots[0].real + 2.0) < 1e-12
        # n=3: zeros -3 +/- sqrt(3)
        got = sorted(z.real for z in real_roots(quadratic_death_cluster_poly(3)).roots)
        assert abs(got[0] - (-3 - math.sqrt(3))) < 1e-9
        assert abs(got[1] - (-3 + math.sqrt(3))) < 1e-9


class TestArithmetic:
    def test_derivative(self):
        assert UniPoly.from_coeffs([0, 0, 0, 1]).derivative().coeffs == (F(0), F(0), F(3))

    def test_substitute(self):
        out = UniPoly.from_coeffs([0, 0, 1]).compose_affine(-1, 1)
        assert out.coeffs == (F(1), F(-2), F(1))

    def test_mul(self):
        out = UniPoly.from_coeffs([1, 1]) * UniPoly.from_coeffs([2, 1])
        assert out.coeffs == (F(2), F(3), F(1))

    @given(st.lists(rationals, min_size=1, max_size=5), rationals, rationals, rationals)
    @settings(max_examples=40, deadline=None)
    def test_compose_affine_agrees_pointwise(self, coeffs, a, b, x):
        p = UniPoly.from_coeffs(coeffs)
        assert p.compose_affine(a, b)(x) == p(a * x + b)

    def test_json_round_trip_exact(self):
        p = UniPoly.from_coeffs([F(1, 3), F(-2, 7), F(5)])
        assert UniPoly.from_json(p.to_json()).coeffs == p.coeffs

    def test_json_round_trip_multi(self):
        f = MultiPoly.from_dict({(1, 2): 0.25, (0, 0): -1.5}, 2)
        back = MultiPoly.from_json(f.to_json(), 2)
        assert back.terms == f.terms
