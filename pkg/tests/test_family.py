"""Family construction tests.

Expected values below were derived with an independent sympy/Fraction oracle
(recursions coded separately from the library) before being frozen here.
"""

import dataclasses
from fractions import Fraction

import pytest
import sympy as sp

from noricert.arith import Poly
from noricert.family import (
    Family,
    FamilyParamError,
    FamilyParams,
    build_family,
    choose_epsilon,
    default_family,
    eps_upper_bound,
    family_hash,
    make_constants,
    structural_checks,
)

F = Fraction


class TestConstants:
    def test_frozen_tables(self):
        assert make_constants(2) == ((1,), (1,), 8)
        assert make_constants(3) == ((1, 4), (3, 1), 30)
        assert make_constants(4) == ((1, 4, 11), (8, 3, 1), 104)
        assert make_constants(5) == ((1, 4, 11, 29), (21, 8, 3, 1), 340)

    def test_rejects_small_n(self):
        with pytest.raises(FamilyParamError):
            make_constants(1)

    def test_recursions_from_scratch(self):
        # re-derive with an independently written loop and compare
        for n in range(2, 8):
            c, d, N = make_constants(n)
            cc = [1]
            for k in range(2, n):
                cc.append(2 * k - 1 + sum((k - j) * cc[j - 1] for j in range(1, k)))
            dd = [1]
            for k in range(n - 2, 0, -1):
                below = list(reversed(dd))  # d_{k+1}, ..., d_{n-1}
                dd.append(sum((i + 1) * below[i] for i in range(len(below))) + (n - k))
            dd.reverse()
            assert list(c) == cc
            assert list(d) == dd
            assert N == 2 * n * (sum(dd) + 1)


class TestEpsilon:
    def test_frozen_exponents(self):
        assert choose_epsilon(2, F(1, 5)) == F(1, 10**8)
        assert choose_epsilon(3, F(1, 5)) == F(1, 10**25)
        assert choose_epsilon(4, F(1, 5)) == F(1, 10**83)

    def test_minimality_property(self):
        for n in (2, 3, 4):
            for r in (F(1, 5), F(1, 7), F(3, 20)):
                eps = choose_epsilon(n, r)
                bound = eps_upper_bound(n, r)
                assert eps < bound
                assert eps * 10 >= bound  # one digit fewer would break the bound

    def test_nonincreasing_in_n(self):
        vals = [choose_epsilon(n, F(1, 5)) for n in range(2, 6)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


class TestParams:
    def test_default_equality_case(self):
        p = FamilyParams.build(2)
        # r = 1/5, rho = 1/2 attains equality in r <= (rho/2)(1-r)
        assert p.r == (p.rho / 2) * (1 - p.r)

    def test_r_rho_incompat_rejected(self):
        with pytest.raises(FamilyParamError) as err:
            FamilyParams.build(2, r=F(9, 10), rho=F(1, 2))
        assert err.value.violation == "r-rho-compat"

    def test_unsafe_eps_rejected_without_flag(self):
        eps = choose_epsilon(2, F(1, 5)) * 10 ** make_constants(2)[2]
        with pytest.raises(FamilyParamError) as err:
            FamilyParams.build(2, eps=eps)
        assert err.value.violation == "eps-bound"
        # the flag lets it through for refutation-path testing
        p = FamilyParams.build(2, eps=eps, allow_unsafe_eps=True)
        assert p.eps == eps

    def test_negative_eps_rejected_even_unsafe(self):
        with pytest.raises(FamilyParamError) as err:
            FamilyParams.build(2, eps=F(-1, 10), allow_unsafe_eps=True)
        assert err.value.violation == "eps-positive"

    def test_size_cap_is_configurable(self):
        with pytest.raises(FamilyParamError) as err:
            FamilyParams.build(6)
        assert err.value.violation == "n-range"
        p = FamilyParams.build(6, max_n=6)
        assert p.n == 6

    def test_rho_bounds_strict(self):
        with pytest.raises(FamilyParamError) as err:
            FamilyParams.build(2, r=F(1, 5), rho=F(1))
        assert err.value.violation == "rho-range"


class TestBuild:
    def test_n2_closed_forms(self):
        fam = default_family(2)
        eps = fam.params.eps
        assert fam.Pk(1) == Poly([eps, -1])
        assert fam.f1 == Poly([0, 0, eps**2, -eps])
        assert fam.f2 == Poly([0, eps**3, -(eps**2)])
        # P_1 vanishes exactly at eps
        assert fam.Pk(1)(eps) == 0

    def test_n3_closed_forms(self):
        fam = default_family(3)
        eps = fam.params.eps
        assert fam.Pk(2) == Poly([eps**4, -1])
        assert fam.Pk(1) == Poly([eps, 0, -(eps**4), 1])

    def test_product_example_n3(self):
        fam = default_family(3)
        eps = fam.params.eps
        sq = fam.Pk(2) * fam.Pk(2)
        assert sq == Poly([eps**8, -2 * eps**4, 1])

    def test_f_formulas_against_sympy(self):
        lam, e = sp.symbols("lam e")
        for n in (2, 3):
            fam = default_family(n)
            eps = fam.params.eps
            c, d, _ = make_constants(n)
            P = {n - 1: e ** c[n - 2] - lam}
            for k in range(n - 2, 0, -1):
                prod = sp.Integer(1)
                for j in range(k + 1, n):
                    prod *= P[j] ** (j - k)
                P[k] = sp.expand(e ** c[k - 1] - prod * lam ** (n - k))
            f1 = sp.expand(e * sp.prod([P[j] ** j for j in range(1, n)]) * lam**n)
            sub = {e: sp.Rational(eps.numerator, eps.denominator)}
            want = sp.Poly(f1.subs(sub), lam).all_coeffs()[::-1]
            got = [sp.Rational(c_.numerator, c_.denominator) for c_ in fam.f1.coeffs]
            assert want == got

    def test_degree_formulas(self):
        # building n=5 takes over a minute, so degrees are checked against the
        # closed formulas there instead of a full build (frozen: 55 and 34)
        for n in (2, 3, 4):
            fam = default_family(n)
            rep = structural_checks(fam)
            by_name = {c.name: c for c in rep.checks}
            assert by_name["f1-degree"].passed
            assert by_name["f2-degree"].passed
            assert by_name["f1-f2-degree-gap"].passed
        c5, d5, _ = make_constants(5)
        assert sum((k + 1) * d5[k] for k in range(4)) + 5 == 55
        assert sum(d5) + 1 == 34


class TestStructuralChecks:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_all_pass_on_honest_family(self, n):
        fam = default_family(n)
        rep = structural_checks(fam)
        assert rep.all_passed, [c.name for c in rep.failed()]

    def test_tampered_leading_coefficient_detected(self):
        fam = default_family(2)
        bad_p = 2 * fam.Pk(1)
        tampered = dataclasses.replace(fam, P=(bad_p,))
        rep = structural_checks(tampered)
        names = {c.name for c in rep.failed()}
        assert "P1-unit-leading" in names

    def test_tampered_constant_term_detected(self):
        fam = default_family(3)
        bad = fam.Pk(1) + Poly.constant(fam.params.eps)
        tampered = dataclasses.replace(fam, P=(bad, fam.Pk(2)))
        rep = structural_checks(tampered)
        names = {c.name for c in rep.failed()}
        assert "P1-constant-term" in names


class TestSerialization:
    def test_roundtrip_and_hash(self):
        fam = default_family(3)
        blob = fam.to_json()
        back = Family.from_json(blob)
        assert back == fam
        assert family_hash(back) == family_hash(fam)
        other = default_family(2)
        assert family_hash(other) != family_hash(fam)

    def test_poly_text_form(self):
        fam = default_family(2)
        eps = fam.params.eps
        assert fam.to_json()["P"][0] == [f"1/{eps.denominator}", "-1/1"]
