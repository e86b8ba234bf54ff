"""Aggregated verification suites, each returning a JSON-ready report."""
from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from . import expr as E
from .classify import verify_optimal_system
from .liealg import (BASIS_NAMES, AlgebraElement, a0_structure, adjoint_basis, adjoint_ode,
                     adjoint_series, pushforward, sym1_basis, sym2_basis)
from .pde import (PVEParams, beta_transform, check_residual, sym1_to_sym2, transform_solution,
                  verify_symmetry)
from .reduction import (build_case, consistency_check, exact_solution_2d, is_invariant, catalogued_formula_2d,
                        rossby_wave, singular_solutions)

# The four nonzero commutators of the beta = 0 algebra as catalogued.
EXPECTED_BRACKETS = {("vt", "D"): ("vt", 1), ("vpsi", "D"): ("vpsi", -1),
                     ("vx", "vr"): ("vy", 1), ("vy", "vr"): ("vx", -1)}

# Parameter sets for the reduction suite (bound values of a, c, eps, F).
REDUCTION_PARAMS = {
    1: {"a": Fraction(3, 10), "F": 1},
    2: {"a": Fraction(7, 10), "F": 2},
    3: {"a": Fraction(1, 2), "eps": -1, "F": 1},
    4: {"c": Fraction(3, 2), "F": 1},
    5: {"a": 1, "c": 1, "F": 1},
    6: {"c": 1, "F": 2},
}
TEST_FUNCTIONS = ("p^2 + q^2", "sin(p)*cos(q)", "p^3*q - p*q^3")


def expected_bracket(i: str, j: str):
    out = [Fraction(0)] * 6
    for (a, b), (target, sign) in EXPECTED_BRACKETS.items():
        if (a, b) == (i, j):
            out[BASIS_NAMES.index(target)] += sign
        elif (b, a) == (i, j):
            out[BASIS_NAMES.index(target)] -= sign
    return out


def commutator_table_check() -> dict:
    tensor = a0_structure().tensor
    mismatches = []
    for i, a in enumerate(BASIS_NAMES):
        for j, b in enumerate(BASIS_NAMES):
            got = [tensor[i][j][k] for k in range(6)]
            if got != expected_bracket(a, b):
                mismatches.append({"pair": [a, b], "got": [str(x) for x in got]})
    return {"name": "commutator-table", "passed": not mismatches, "mismatches": mismatches}


def pushforward_check(param_sets=((1, 1), (2, -3), (-1, Fraction(1, 2)))) -> dict:
    """Does each beta != 0 generator map onto its beta = 0 namesake under the transformation?"""
    rows = []
    for F, beta in param_sets:
        B = beta_transform(PVEParams(F, beta))
        for v, w in zip(sym1_basis(F, beta), sym2_basis()):
            image = pushforward(v, B)
            rows.append({"F": str(F), "beta": str(beta), "generator": v.name,
                         "image": str(image), "matches": bool(image.equals(w))})
    return {"name": "pushforward-namesake", "passed": all(r["matches"] for r in rows),
            "failures": [r for r in rows if not r["matches"]], "checked": len(rows)}


def pushforward_image_check(param_sets=((1, 1), (2, -3), (-1, Fraction(1, 2)))) -> dict:
    """Each beta != 0 generator maps exactly onto the element given by sym1_to_sym2."""
    failures = []
    basis2 = sym2_basis()
    for F, beta in param_sets:
        params = PVEParams(F, beta)
        B = beta_transform(params)
        for i, v in enumerate(sym1_basis(F, beta)):
            coords = sym1_to_sym2(AlgebraElement.basis(i), params).coords
            target = None
            for c, b in zip(coords, basis2):
                term = b.scale(E.as_expr(E.to_fraction(c)))
                target = term if target is None else target + term
            if not pushforward(v, B).equals(target):
                failures.append({"F": str(F), "beta": str(beta), "generator": v.name})
    return {"name": "pushforward-image", "passed": not failures, "failures": failures}


def adjoint_table_check(eps_values=(0.1, 1.0, 2.0), tol: float = 1e-10) -> dict:
    worst = 0.0
    for v in range(6):
        for w in range(6):
            for eps in eps_values:
                base = AlgebraElement.basis(w).array
                series = adjoint_series(AlgebraElement.basis(v), AlgebraElement.basis(w), eps).array
                worst = max(worst, float(np.max(np.abs(series - adjoint_basis(v, eps, base)))))
    return {"name": "adjoint-closed-form", "passed": worst <= tol, "max_error": worst}


def adjoint_ode_check(trials: int = 100, seed: int = 0, tol: float = 1e-9) -> dict:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        v = AlgebraElement(tuple(rng.uniform(-1, 1) for _ in range(6)))
        w = AlgebraElement(tuple(rng.uniform(-1, 1) for _ in range(6)))
        eps = rng.uniform(-1, 1)
        a, b = adjoint_series(v, w, eps).array, adjoint_ode(v, w, eps).array
        worst = max(worst, float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))))
    return {"name": "adjoint-series-vs-ode", "passed": worst <= tol, "max_error": worst}


def suite_algebra() -> dict:
    s = a0_structure()
    checks = [commutator_table_check(),
              {"name": "antisymmetry", "passed": s.is_antisymmetric()},
              {"name": "jacobi", "passed": s.jacobi_defect() == 0},
              adjoint_table_check(), adjoint_ode_check(), pushforward_image_check()]
    literal = pushforward_check()
    literal["advisory"] = True
    report = _wrap("algebra", checks)
    report["checks"].append(literal)
    return report


def suite_optimal_system(trials: int = 50, seed: int = 0, tol: float = 1e-8) -> dict:
    checks = []
    for dim in (1, 2):
        r = verify_optimal_system(dim, trials=trials, seed=seed, tol=tol)
        checks.append({"name": f"optimal-system-dim{dim}", "passed": r["passed"],
                       "classes_idempotent": r["classes_idempotent"], "classes_total": r["classes_total"],
                       "collisions": r["collisions"],
                       "failures": [{"class_id": e["class_id"], "count": len(e["failures"])}
                                    for e in r["entries"] if e["failures"] or not e["idempotent"]]})
    return _wrap("optimal-system", checks)


def suite_reductions(tol: float = 1e-9) -> dict:
    checks = []
    for cid, params in REDUCTION_PARAMS.items():
        case = build_case(cid, params)
        worst = max(consistency_check(case, f, tol=tol).max_rel_mismatch for f in TEST_FUNCTIONS)
        checks.append({"name": f"case-{cid}", "passed": worst <= tol and is_invariant(case),
                       "mu": str(case.mu), "max_rel_mismatch": worst})
    marker = build_case(7)
    checks.append({"name": "case-7", "passed": not marker.reducible, "note": marker.note})
    return _wrap("reductions", checks)


def solution_fixtures() -> list:
    """(name, psi, params) triples whose residual must vanish."""
    out = []
    s = exact_solution_2d(1, 0, 0, 1, 0)
    out.append(("exponential-beta0", s.psi, PVEParams(1, 0)))
    s = exact_solution_2d(1, 0, 0, 1, 1)
    out.append(("exponential-beta1", s.psi, PVEParams(1, 1)))
    s = exact_solution_2d(2, 1, 3, 2, -3, Fraction(1, 2), -1, 2)
    out.append(("exponential-general", s.psi, PVEParams(2, -3)))
    s = exact_solution_2d(1, -2, 0, 1, 0)
    out.append(("trigonometric", s.psi, PVEParams(1, 0)))
    s = singular_solutions(1, 1, 1)
    out.append(("singular-cubic", s.psi, PVEParams(1, 0)))
    s = singular_solutions(0, 0, 1, "sin(3*x)")
    out.append(("arbitrary-profile", s.psi, PVEParams(1, 0)))
    r = rossby_wave(1, 2, 1, 1)
    out.append(("rossby", r.psi, PVEParams(1, 1)))
    return out


def suite_solutions(tol: float = 1e-9, seed: int = 0) -> dict:
    checks = []
    for name, psi, params in solution_fixtures():
        rep = check_residual(psi, params, seed=seed)
        checks.append(dict(name=name, passed=rep.residual_max_abs < tol, psi=str(psi), **rep.to_json()))
    formula = catalogued_formula_2d(1, 0, 0, 1, 1)
    ours = exact_solution_2d(1, 0, 0, 1, 1).psi
    checks.append({"name": "beta-formula", "passed": bool(E.equal_expr(formula, ours).equal)})
    return _wrap("solutions", checks)


def suite_symmetries(tol: float = 1e-9, seed: int = 0) -> dict:
    checks = []
    fixtures = [f for f in solution_fixtures() if float(f[2].beta) == 0]
    for name, psi, params in fixtures:
        for i, gname in enumerate(BASIS_NAMES):
            for eps in (0.3, -1.0):
                rep = verify_symmetry(AlgebraElement.basis(i), eps, psi, params, seed=seed)
                checks.append({"name": f"{name}/{gname}/{eps}", "passed": rep.residual_max_abs < tol,
                               "residual_max_abs": rep.residual_max_abs})
    base = transform_solution(_sinsin(), beta_transform(PVEParams(1, 1)), "inverse")
    for i, gname in enumerate(BASIS_NAMES):
        rep = verify_symmetry(AlgebraElement.basis(i), 1.0471975511965976, base, PVEParams(1, 1), seed=seed)
        checks.append({"name": f"beta1/{gname}", "passed": rep.residual_max_abs < tol,
                       "residual_max_abs": rep.residual_max_abs})
    return _wrap("symmetries", checks)


def _sinsin():
    return E.mul(E.sin(E.Sym("x")), E.sin(E.Sym("y")))


def _wrap(suite: str, checks: list) -> dict:
    """Advisory checks are reported but do not decide the suite verdict."""
    return {"suite": suite, "passed": all(c["passed"] for c in checks if not c.get("advisory")),
            "checks": checks}


SUITES = {
    "algebra": suite_algebra,
    "optimal-system": suite_optimal_system,
    "reductions": suite_reductions,
    "solutions": suite_solutions,
    "symmetries": suite_symmetries,
}
