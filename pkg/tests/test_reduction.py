import random
from fractions import Fraction

import pytest

from pvesym import expr as E
from pvesym.parser import parse
from pvesym.pde import PVEParams, beta_transform, residual, transform_solution
from pvesym.reduction import (InconsistentReduction, build_case, consistency_check, consistency_check_2d,
                              default_points, exact_solution_2d, invariance_defects, is_invariant,
                              catalogued_formula_2d, rossby_wave, singular_solutions, solve_reduced_ode)

TESTS = ["p^2 + q^2", "sin(p)*cos(q)", "p^3*q - p*q^3"]
PARAMS = {1: {"a": 0.3, "F": 1}, 2: {"a": -1.2, "F": 2}, 3: {"a": 0.5, "eps": 1, "F": 1},
          4: {"c": 1.5, "F": -1}, 5: {"a": 1, "c": 0, "F": 1}, 6: {"c": 1, "F": 3}}


@pytest.mark.parametrize("cid", range(1, 7))
@pytest.mark.parametrize("vtest", TESTS)
def test_reduced_equation_consistency(cid, vtest):
    rep = consistency_check(build_case(cid, PARAMS[cid]), vtest)
    assert rep.points == 30
    assert rep.passed, rep.to_json()


@pytest.mark.parametrize("eps", [1, -1])
def test_case3_both_signs(eps):
    case = build_case(3, {"a": 2, "eps": eps, "F": 1})
    assert consistency_check(case, "exp(p/3)*q").passed


@pytest.mark.parametrize("cid", range(1, 7))
def test_invariants_annihilated_symbolically(cid):
    # eps stays symbolic elsewhere, but the identity needs eps^2 = 1
    case = build_case(cid, {"eps": -1} if cid == 3 else None)
    for name, defect in invariance_defects(case).items():
        assert E.equal_expr(defect, 0, ranges={"t": (0.5, 2), "y": (0.5, 2)}).equal, name


def test_printed_case6_invariants_are_not_invariant_under_vx():
    from pvesym.liealg import AlgebraElement

    printed = build_case(6, {"c": 1, "F": 1}, variant="printed")
    X = (AlgebraElement.basis("vx") + AlgebraElement.basis("vpsi")).to_vector_field()
    assert X(printed.p) == E.ONE
    # they are the invariants of v_t + c v_psi, and the printed equation is consistent for that field
    assert is_invariant(printed)
    assert consistency_check(printed, "p^3*q - p*q^3").passed


def test_case7_is_marker():
    case = build_case(7)
    assert not case.reducible
    assert "no reduction" in case.to_json()["note"]
    with pytest.raises(InconsistentReduction):
        consistency_check(case, "p")


def test_catalogue_examples():
    c5 = build_case(5)
    assert c5.p == parse("x - a*t") and c5.q == parse("y") and c5.v_invariant == parse("psi - c*t")
    assert c5.reduced_residual == parse("a*w_p - F*(a*v_p - c) - v_p*w_q + v_q*w_p")
    c4 = build_case(4)
    assert "arctan" in str(c4.ansatz)
    assert c4.w_definition == parse("v_pp + v_p/p")


def test_mu_fixture_values():
    assert build_case(1).mu == parse("-1/t^2")
    assert build_case(6).mu == E.ONE
    assert abs(E.evaluate(build_case(5).mu, {})) == 1


def test_case4_points_avoid_axis():
    assert all(pt["y"] > 0 for pt in default_points(build_case(4)))


def test_mismatch_detected_for_wrong_equation():
    case = build_case(5, {"a": 1, "c": 1, "F": 1})
    wrong = case.__class__(**{**case.__dict__, "mu": E.ONE})
    assert not consistency_check(wrong, "sin(p)*cos(q)").passed


def test_eps_must_be_unit():
    with pytest.raises(ValueError):
        build_case(3, {"eps": 2})


class TestReducedODE:
    def test_exponential(self):
        k = solve_reduced_ode(1, 0, 0, 1)
        assert k.branch == "exponential"
        assert k.v == parse("v1*exp(p) + v2*exp(-p) + v3")

    def test_trigonometric(self):
        assert solve_reduced_ode(1, -2, 0, 1).branch == "trigonometric"

    def test_degenerate(self):
        k = solve_reduced_ode(1, -1, 0, 1)
        assert k.branch == "degenerate" and k.v == parse("v3")

    def test_a_zero_rejected(self):
        with pytest.raises(ValueError, match="singular"):
            solve_reduced_ode(0, 1, 0, 1)

    def test_branch_completeness(self):
        rng = random.Random(0)
        seen = set()
        for _ in range(1000):
            a = Fraction(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 5))
            b = Fraction(rng.randint(-20, 20), rng.randint(1, 5))
            if rng.random() < 0.05:
                b = -a
            F = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 3))
            k = solve_reduced_ode(a, b, 0, F)
            seen.add(k.branch)
            res = k.ode_residual(a, b, F)
            pt = {"p": rng.uniform(-1, 1), "v1": 1.0, "v2": -0.5, "v3": 2.0}
            assert abs(E.evaluate(res, pt)) <= 1e-10 * max(1.0, abs(E.evaluate(E.diff(k.v, "p"), pt)))
        assert seen == {"exponential", "trigonometric", "degenerate"}

    @pytest.mark.parametrize("a,b,c,F", [(1, 2, 3, 1.5), (-1, 0.5, 1, 2), (0, 2, 3, 1.5), (0, 1, 0, -1)])
    def test_full_ansatz_consistency(self, a, b, c, F):
        assert consistency_check_2d(a, b, c, F, "sin(p) + p^4").passed


class TestExactSolutions:
    def test_beta0_exponential(self):
        s = exact_solution_2d(1, 0, 0, 1, 0)
        assert E.equal_expr(s.psi, parse("exp(x - t) + exp(t - x)")).equal
        assert residual(s.psi, PVEParams(1, 0)).is_zero

    def test_beta_extension_matches_formula(self):
        s = exact_solution_2d(1, 0, 0, 1, 1)
        assert E.equal_expr(s.psi, catalogued_formula_2d(1, 0, 0, 1, 1)).equal
        assert s.check().passed

    @pytest.mark.parametrize("a,b,c,F,beta", [(2, 1, 3, 2, -3), (1, 3, -1, 4, 0.5), (-1, -2, 1, 1, 2)])
    def test_general_parameters(self, a, b, c, F, beta):
        s = exact_solution_2d(a, b, c, F, beta, 0.5, -1, 2)
        assert s.check().passed
        assert E.equal_expr(s.psi, catalogued_formula_2d(a, b, c, F, beta, 0.5, -1, 2)).equal

    def test_trigonometric_branch(self):
        s = exact_solution_2d(1, -2, 0, 1, 0)
        assert s.branch == "trigonometric"
        assert s.check().passed

    def test_extension_by_transformation(self):
        base = exact_solution_2d(1, -2, 1, 1, 0).psi
        moved = transform_solution(base, beta_transform(PVEParams(1, 2)), "inverse")
        assert residual(moved, PVEParams(1, 2)).is_zero

    def test_preconditions(self):
        with pytest.raises(ValueError):
            exact_solution_2d(1, -1, 0, 1)
        with pytest.raises(ValueError):
            exact_solution_2d(0, 1, 0, 1)
        with pytest.raises(ValueError):
            exact_solution_2d(1, 0, 0, 0)

    def test_singular_cubic(self):
        s = singular_solutions(1, 1, 1)
        assert s.psi == parse("-x^3/6 + t + y")
        assert s.check().passed
        assert singular_solutions(2, -1, 3, k=(1, 2, 3)).check().passed

    def test_arbitrary_profile(self):
        assert singular_solutions(0, 0, 1).psi == parse("sin(3*x)")
        assert singular_solutions(0, 0, 1, "exp(x)*x^2").check().passed

    def test_inconsistent(self):
        with pytest.raises(InconsistentReduction, match="inconsistent reduction"):
            singular_solutions(0, 1, 1)

    @pytest.mark.parametrize("A,k,F,beta", [(1, 1, 1, 1), (2, 3, 1, -2), (0.5, 2, -1, 1)])
    def test_rossby(self, A, k, F, beta):
        r = rossby_wave(A, k, F, beta)
        assert r.params["sigma"] == -Fraction(beta) / (Fraction(k) ** 2 + Fraction(F))
        assert r.check().passed
