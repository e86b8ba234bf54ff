"""The eight acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line (printed at the end of the session and
also to stdout). Criteria that cannot be met as literally stated fail here
rather than being weakened; see the README for why.
"""
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE
from pvesym import expr as E
from pvesym import solver as S
from pvesym.classify import verify_optimal_system
from pvesym.liealg import BASIS_NAMES, AlgebraElement, adjoint_basis, adjoint_ode, adjoint_series, pushforward, sym1_basis, \
    sym2_basis
from pvesym.parser import parse
from pvesym.pde import PVEParams, beta_transform, check_residual
from pvesym.reduction import (build_case, consistency_check, exact_solution_2d, catalogued_formula_2d, rossby_wave,
                              singular_solutions)
from pvesym.suites import REDUCTION_PARAMS, TEST_FUNCTIONS, commutator_table_check


def report(n, passed, detail):
    ACCEPTANCE[n] = (bool(passed), detail)
    print(f"{'PASS' if passed else 'FAIL'} criterion {n}: {detail}")
    assert passed, detail


def vec(**kw):
    names = ("D", "vr", "vt", "vx", "vy", "vpsi")
    return lambda eps: np.array([float(kw.get(n, lambda e: 0.0)(eps)) for n in names])


# The eight nontrivial adjoint actions exactly as catalogued: (direction, acted-on, closed form).
CATALOGUED_ADJOINT = [
    ("vt", "D", vec(D=lambda e: 1, vt=lambda e: -e)),
    ("vpsi", "D", vec(D=lambda e: 1, vpsi=lambda e: e)),
    ("D", "vt", vec(vt=lambda e: math.exp(-e))),
    ("D", "vpsi", vec(vpsi=lambda e: math.exp(e))),
    ("vx", "vr", vec(vr=lambda e: 1, vy=lambda e: -e)),
    ("vy", "vr", vec(vr=lambda e: 1, vx=lambda e: e)),
    ("vr", "vx", vec(vx=math.cos, vy=math.sin)),
    ("vr", "vy", vec(vx=lambda e: -math.sin(e), vy=math.cos)),
]


def test_criterion_1_commutator_table():
    start = time.perf_counter()
    res = commutator_table_check()
    elapsed = time.perf_counter() - start
    report(1, res["passed"] and elapsed < 1.0,
           f"{len(res['mismatches'])} mismatching pairs, exact rational arithmetic, {elapsed:.3f} s")


def test_criterion_2_adjoint_table():
    start = time.perf_counter()
    literal_bad, closed_err = [], 0.0
    for v, w, closed in CATALOGUED_ADJOINT:
        for eps in (0.1, 1.0, 2.0):
            series = adjoint_series(AlgebraElement.basis(v), AlgebraElement.basis(w), eps, order=40).array
            closed_err = max(closed_err, float(np.max(np.abs(
                series - adjoint_basis(BASIS_NAMES.index(v), eps, AlgebraElement.basis(w).array)))))
            if np.max(np.abs(series - closed(eps))) > 1e-10:
                literal_bad.append(f"Ad(exp(eps {v})) {w}")
    rng = random.Random(0)
    ode_err = 0.0
    for _ in range(100):
        v = AlgebraElement(tuple(rng.uniform(-1, 1) for _ in range(6)))
        w = AlgebraElement(tuple(rng.uniform(-1, 1) for _ in range(6)))
        eps = rng.uniform(-2, 2)
        a, b = adjoint_series(v, w, eps, order=40).array, adjoint_ode(v, w, eps).array
        ode_err = max(ode_err, float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))))
    elapsed = time.perf_counter() - start
    literal_bad = sorted(set(literal_bad))
    ok = not literal_bad and closed_err <= 1e-10 and ode_err <= 1e-9 and elapsed < 10
    report(2, ok, f"catalogued rows disagreeing with the series: {literal_bad or 'none'}; "
                  f"series vs derived closed form {closed_err:.1e}; series vs ODE {ode_err:.1e}; {elapsed:.2f} s")


def test_criterion_3_pushforward():
    bad = []
    for F, beta in ((1, 1), (2, -3), (-1, Fraction(1, 2))):
        B = beta_transform(PVEParams(F, beta))
        for v, w in zip(sym1_basis(F, beta), sym2_basis()):
            if not pushforward(v, B).equals(w):
                bad.append(f"{v.name}@(F={F},beta={beta})")
    report(3, not bad, f"generators not mapped to their namesake: {bad or 'none'}")


def test_criterion_4_optimal_systems():
    start = time.perf_counter()
    r1 = verify_optimal_system(1, trials=50, seed=0)
    r2 = verify_optimal_system(2, trials=50, seed=0)
    elapsed = time.perf_counter() - start
    ok = r1["passed"] and r2["passed"] and r1["classes_idempotent"] == 7 and r2["classes_idempotent"] == 12 \
        and not r1["collisions"] and not r2["collisions"] and elapsed < 60
    report(4, ok, f"{r1['classes_idempotent']}/7 and {r2['classes_idempotent']}/12 idempotent, "
                  f"50 conjugates per class, collisions {len(r1['collisions']) + len(r2['collisions'])}, {elapsed:.1f} s")


def test_criterion_5_reductions():
    worst, bad = 0.0, []
    for cid in range(1, 7):
        case = build_case(cid, REDUCTION_PARAMS[cid])
        for vtest in TEST_FUNCTIONS:
            rep = consistency_check(case, vtest, tol=1e-9)
            worst = max(worst, rep.max_rel_mismatch)
            if not rep.passed or rep.points != 30:
                bad.append((cid, vtest))
    marker = build_case(7)
    ok = not bad and not marker.reducible
    report(5, ok, f"cases 1-6 x 3 test functions x 30 points, worst relative mismatch {worst:.1e}; "
                  f"case 7 non-reducible: {not marker.reducible}")


def test_criterion_6_exact_solutions():
    fixtures = {
        "exponential beta=0": (exact_solution_2d(1, 0, 0, 1, 0).psi, PVEParams(1, 0)),
        "exponential beta=1": (exact_solution_2d(1, 0, 0, 1, 1).psi, PVEParams(1, 1)),
        "catalogued beta formula": (catalogued_formula_2d(1, 0, 0, 1, 1), PVEParams(1, 1)),
        "trigonometric": (exact_solution_2d(1, -2, 0, 1, 0).psi, PVEParams(1, 0)),
        "singular cubic": (singular_solutions(1, 1, 1).psi, PVEParams(1, 0)),
        "arbitrary profile": (singular_solutions(0, 0, 1, "exp(x)*x^2").psi, PVEParams(1, 0)),
        "rossby": (rossby_wave(1, 2, 1, 1).psi, PVEParams(1, 1)),
    }
    worst, bad = 0.0, []
    for name, (psi, params) in fixtures.items():
        rep = check_residual(psi, params, points=100)
        worst = max(worst, rep.residual_max_abs)
        if not rep.residual_max_abs < 1e-9:
            bad.append(name)
    same = E.equal_expr(fixtures["exponential beta=1"][0], fixtures["catalogued beta formula"][0]).equal
    r = rossby_wave(1, 3, 2, -1)
    sigma_ok = r.params["sigma"] == Fraction(1, 11)
    report(6, not bad and same and sigma_ok,
           f"{len(fixtures)} fixtures, worst residual {worst:.1e} at 100 points; transport matches formula: {same}")


@pytest.mark.slow
def test_criterion_7_solver():
    start = time.perf_counter()
    g = S.Grid(64, 64)
    X, Y = g.coords()
    stat = S.Field(np.sin(X) * np.sin(Y), g, 0.0)
    cfg = S.SolverConfig(F=1.0, beta=0.0, dt=1e-3, Nx=64, Ny=64)
    f = stat
    for _ in range(100):
        f = S.step(f, cfg)
    drift = float(np.max(np.abs(f.data - stat.data)))

    cfg = S.SolverConfig(F=1.0, beta=1.0, dt=1e-3, t_end=1.0, Nx=64, Ny=64)
    final, _ = S.integrate(S.Field(np.sin(X), g, 0.0), cfg)
    sigma = -1.0 / 2.0
    rossby = float(np.max(np.abs(final.data - np.sin(X - sigma * 1.0))))

    rows = S.convergence_study(parse("sin(2*x + 5*t)"),
                               S.SolverConfig(F=1, beta=12.5, t_end=0.5, Nx=32, Ny=32))
    order = rows[-1].order

    cfg = S.SolverConfig(F=1.0, beta=0.5, dt=1e-3, t_end=5.0, Nx=64, Ny=64, output_every=5000)
    _, diag = S.integrate(S.random_smooth_field(g, seed=7), cfg)
    e_drift = abs(diag[-1]["energy"] / diag[0]["energy"] - 1)
    z_drift = abs(diag[-1]["enstrophy"] / diag[0]["enstrophy"] - 1)
    elapsed = time.perf_counter() - start
    ok = drift < 1e-10 and rossby < 1e-6 and abs(order - 4) <= 0.2 and e_drift < 1e-6 and z_drift < 1e-6 \
        and elapsed < 120
    report(7, ok, f"stationary drift {drift:.1e}; Rossby error {rossby:.1e}; order {order:.3f}; "
                  f"energy drift {e_drift:.1e}, enstrophy drift {z_drift:.1e}; {elapsed:.1f} s")


def test_criterion_8_beta_equivalence():
    g = S.Grid(64, 64)
    errs = [S.beta_equivalence_check(S.random_smooth_field(g, seed=s), F, beta, t_end=1.0, dt=1e-3)
            for s, (F, beta) in enumerate(((1.0, 1.0), (2.0, -3.0)))]
    report(8, max(errs) < 1e-6, f"relative disagreement at t=1: {', '.join(f'{e:.1e}' for e in errs)}")
