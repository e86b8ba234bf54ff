"""Group-invariant reductions of the potential vorticity equation (beta = 0).

Each one-dimensional class of the optimal system gives invariants ``p``, ``q``
and ``v`` and an ansatz ``psi = Psi(t, x, y, v(p, q))``.  The reduced
equation is stored as a template in the symbols ``v, v_p, v_q, w, w_p, w_q,
p, q``; substituting a test function and comparing with the full residual
verifies it.  The comparison factor ``mu`` (full = mu * reduced) was worked
out by hand for every case and is kept here as a fixture.

Case 6 of the printed catalogue lists the invariants ``p = x, q = y,
v = psi - c t``.  These are annihilated by ``v_t + c v_psi`` but not by the
class generator ``v_x + c v_psi``, so the default build uses the invariants
``p = t, q = y, v = psi - c x`` of the actual generator.  The catalogue
version stays available as ``build_case(6, variant="printed")``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import expr as E
from .expr import Expr, Sym
from .liealg import AlgebraElement
from .parser import parse
from .pde import PVEParams, check_residual, residual

REDUCED_SYMBOLS = ("v", "v_p", "v_q", "w", "w_p", "w_q", "p", "q")
DEFAULT_PARAMS = {"a": Sym("a"), "c": Sym("c"), "eps": Sym("eps"), "F": Sym("F")}


class InconsistentReduction(ValueError):
    pass


class SingularSamplePoint(ValueError):
    pass


@dataclass(frozen=True)
class ReductionCase:
    class_id: int
    p: Expr | None = None
    q: Expr | None = None
    v_invariant: Expr | None = None  # v in terms of (t, x, y, psi)
    ansatz: Expr | None = None       # psi in terms of (t, x, y, v)
    reduced_residual: Expr | None = None
    w_definition: Expr | None = None  # w in terms of v_pp, v_qq, v_p, p
    mu: Expr | None = None           # full = mu * reduced, in (t, x, y)
    generator: AlgebraElement | None = None
    params: dict = field(default_factory=dict)
    variant: str = "default"
    note: str = ""

    @property
    def reducible(self) -> bool:
        return self.ansatz is not None

    def to_json(self) -> dict:
        if not self.reducible:
            return {"class_id": self.class_id, "reducible": False, "note": self.note}
        return {
            "class_id": self.class_id,
            "reducible": True,
            "variant": self.variant,
            "p": str(self.p),
            "q": str(self.q),
            "v": str(self.v_invariant),
            "ansatz": f"psi = {self.ansatz}",
            "reduced_residual": str(self.reduced_residual),
            "w": str(self.w_definition),
            "mu": str(self.mu),
            "note": self.note,
        }


def _P(text: str, params: dict) -> Expr:
    return E.subs(parse(text), params)


_W_FLAT = "v_pp + v_qq"
_CASES = {
    # id: (p, q, v(t,x,y,psi), psi(t,x,y,v), reduced residual, w, mu, generator coordinates)
    1: ("x*cos(a*ln(t)) + y*sin(a*ln(t))", "-x*sin(a*ln(t)) + y*cos(a*ln(t))", "t*psi", "v/t",
        "w - a*(q*w_p - p*w_q) - F*(v - a*(q*v_p - p*v_q)) + v_q*w_p - v_p*w_q", _W_FLAT,
        "-t^(-2)", ("1", "a", "0", "0", "0", "0")),
    2: ("x - a*ln(t)", "y", "t*psi", "v/t",
        "w + a*w_p - F*(v + a*v_p) - v_p*w_q + v_q*w_p", _W_FLAT,
        "-t^(-2)", ("1", "0", "0", "a", "0", "0")),
    3: ("x*cos(eps*t) + y*sin(eps*t)", "-x*sin(eps*t) + y*cos(eps*t)", "psi - eps*a*t", "v + eps*a*t",
        "eps*(q*w_p - p*w_q) - eps*F*(q*v_p - p*v_q + a) + v_p*w_q - v_q*w_p", _W_FLAT,
        "1", ("0", "1", "eps", "0", "0", "a")),
    4: ("sqrt(x^2 + y^2)", "t", "psi + c*arctan(x/y)", "v - c*arctan(x/y)",
        "w_q - F*v_q - (c/p)*w_p", "v_pp + v_p/p",
        "1", ("0", "1", "0", "0", "0", "c")),
    5: ("x - a*t", "y", "psi - c*t", "v + c*t",
        "a*w_p - F*(a*v_p - c) - v_p*w_q + v_q*w_p", _W_FLAT,
        "-1", ("0", "0", "1", "a", "0", "c")),
    6: ("t", "y", "psi - c*x", "v + c*x",
        "w_p - F*v_p + c*w_q", "v_qq",
        "1", ("0", "0", "0", "1", "0", "c")),
}
_CASE6_PRINTED = ("x", "y", "psi - c*t", "v + c*t", "F*c - v_p*w_q + v_q*w_p", _W_FLAT,
                  "-1", ("0", "0", "1", "0", "0", "c"))
_NOTES = {
    4: "sample points need y > 0 so that arctan(x/y) is smooth",
    6: "invariants of the class generator v_x + c v_psi",
}


def build_case(class_id: int, params: dict | None = None, variant: str = "default") -> ReductionCase:
    """Ansatz and reduced equation for a class of the one-dimensional optimal system.

    ``params`` may bind any of ``a, c, eps, F`` to numbers; unbound slots stay
    symbolic.  Class 7 returns a marker without an ansatz.
    """
    if class_id not in range(1, 8):
        raise ValueError(f"class id must be 1..7, got {class_id}")
    if variant not in ("default", "printed"):
        raise ValueError("variant must be 'default' or 'printed'")
    if class_id == 7:
        return ReductionCase(7, generator=AlgebraElement.basis("vpsi"),
                             note="no reduction can be achieved: the generator acts on psi alone")
    bound = dict(DEFAULT_PARAMS)
    for k, val in (params or {}).items():
        if k not in bound:
            raise ValueError(f"unknown parameter {k!r}")
        bound[k] = val if isinstance(val, Expr) else E.as_expr(E.to_fraction(val))
    eps = bound["eps"]
    if class_id == 3 and not isinstance(eps, Sym) and abs(E.evaluate(eps, {})) != 1:
        raise ValueError("eps must be +1 or -1")
    printed = class_id == 6 and variant == "printed"
    spec = _CASE6_PRINTED if printed else _CASES[class_id]
    p, q, v_inv, ans, red, w_def, mu, gen = spec
    mk = lambda s: _P(s, bound)  # noqa: E731
    gen_coords = [mk(g) for g in gen]
    generator = None
    if all(not g.free_symbols() for g in gen_coords):
        generator = AlgebraElement(tuple(E.evaluate(g, {}) if not isinstance(g, E.Const) else g.value
                                         for g in gen_coords))
    note = _NOTES.get(class_id, "")
    if printed:
        note = "catalogue invariants; annihilated by v_t + c v_psi, not by v_x + c v_psi"
    return ReductionCase(class_id, mk(p), mk(q), mk(v_inv), mk(ans), mk(red), parse(w_def), mk(mu),
                         generator, {k: str(v) for k, v in bound.items()},
                         "printed" if printed else "default", note)


def generator_field(case: ReductionCase):
    """Vector field of the generating element with the case's parameter binding."""
    bound = {k: parse(v) for k, v in case.params.items()}
    spec = _CASE6_PRINTED if case.variant == "printed" else _CASES[case.class_id]
    coords = [E.subs(parse(g), bound) for g in spec[7]]
    from .liealg import sym2_basis
    basis = sym2_basis()
    total = None
    for c, b in zip(coords, basis):
        term = b.scale(c)
        total = term if total is None else total + term
    return total


def invariance_defects(case: ReductionCase) -> dict:
    """X(p), X(q), X(v) for the generating field; all vanish for a valid case."""
    X = generator_field(case)
    return {name: X(e) for name, e in (("p", case.p), ("q", case.q), ("v", case.v_invariant))}


def is_invariant(case: ReductionCase, seed: int = 0) -> bool:
    ranges = {"t": (0.5, 2.0), "y": (0.5, 2.0)}
    return all(E.equal_expr(d, 0, seed=seed, ranges=ranges).equal
               for d in invariance_defects(case).values())


def _reduced_value_expr(case: ReductionCase, vtest: Expr) -> Expr:
    """The reduced residual as an expression in (p, q) for a concrete v."""
    v_p, v_q = E.diff(vtest, "p"), E.diff(vtest, "q")
    derivs = {"v": vtest, "v_p": v_p, "v_q": v_q,
              "v_pp": E.diff(v_p, "p"), "v_qq": E.diff(v_q, "q")}
    w = E.subs(case.w_definition, derivs)
    mapping = dict(derivs, w=w, w_p=E.diff(w, "p"), w_q=E.diff(w, "q"))
    return E.subs(case.reduced_residual, mapping)


def full_ansatz(case: ReductionCase, vtest: Expr) -> Expr:
    """psi(t, x, y) obtained by inserting v = vtest(p, q) into the ansatz."""
    v_txy = E.subs(E.as_expr(vtest), {"p": case.p, "q": case.q})
    return E.subs(case.ansatz, {"v": v_txy})


def default_points(case: ReductionCase, n: int = 30, seed: int = 0) -> list:
    """Sample points avoiding the case singularities (t > 0 and y > 0)."""
    rng = random.Random(seed)
    pts = []
    for _ in range(n):
        pts.append({"t": rng.uniform(0.5, 2.0), "x": rng.uniform(-2.0, 2.0),
                    "y": rng.uniform(0.5, 2.0) if case.class_id == 4 else rng.uniform(-2.0, 2.0)})
    return pts


@dataclass
class ConsistencyReport:
    class_id: int
    mu: str
    max_rel_mismatch: float
    points: int
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_rel_mismatch <= self.tol

    def to_json(self) -> dict:
        return {"class_id": self.class_id, "mu": self.mu, "max_rel_mismatch": self.max_rel_mismatch,
                "points": self.points, "passed": self.passed}


def consistency_check(case: ReductionCase, vtest, pts: list | None = None, tol: float = 1e-9,
                      F=None) -> ConsistencyReport:
    """Compare the full residual (beta = 0) with mu times the reduced residual."""
    if not case.reducible:
        raise InconsistentReduction("no reduction can be achieved for this class")
    vtest = parse(vtest) if isinstance(vtest, str) else E.as_expr(vtest)
    extra = (case.reduced_residual.free_symbols() | case.ansatz.free_symbols()
             | case.p.free_symbols() | case.q.free_symbols()) - set(REDUCED_SYMBOLS) - {"t", "x", "y", "v"}
    if F is None and "F" in extra:
        raise ValueError("bind F in the case parameters or pass F")
    Fv = parse(case.params["F"]) if F is None else F
    others = extra - {"F"}
    if others:
        raise ValueError(f"unbound parameters {sorted(others)}")
    psi = full_ansatz(case, vtest)
    full = residual(psi, PVEParams(Fv, 0))
    red = E.subs(_reduced_value_expr(case, vtest), {"F": E.as_expr(Fv) if not isinstance(Fv, Expr) else Fv})
    pts = pts if pts is not None else default_points(case)
    worst = 0.0
    for pt in pts:
        try:
            p_val, q_val = E.evaluate(case.p, pt), E.evaluate(case.q, pt)
            f_val = E.evaluate(full, pt)
            r_val = E.evaluate(red, {"p": p_val, "q": q_val})
            mu_val = E.evaluate(case.mu, pt)
        except (E.ExprDomainError, ZeroDivisionError) as exc:
            raise SingularSamplePoint(f"singular sample point {pt}: {exc}") from exc
        err = abs(f_val - mu_val * r_val) / max(1.0, abs(f_val))
        worst = max(worst, err)
    return ConsistencyReport(case.class_id, str(case.mu), worst, len(pts), tol)


# ---------------------------------------------------------------------------
# Two-dimensional reduction by <v_t + a v_x + c v_psi, v_y + b v_psi>


@dataclass(frozen=True)
class ODEKernel:
    branch: str  # "exponential", "trigonometric" or "degenerate"
    v: Expr      # in p and the constants v1, v2, v3
    lam2: Fraction | float

    def ode_residual(self, a, b, F) -> Expr:
        v_p = E.diff(self.v, "p")
        v_ppp = E.diff(E.diff(v_p, "p"), "p")
        a, b, F = (E.as_expr(E.to_fraction(z)) for z in (a, b, F))
        return E.add(E.mul(E.add(a, b), v_ppp), E.neg(E.mul(F, a, v_p)))


def _num(z):
    return z if isinstance(z, Expr) else E.as_expr(E.to_fraction(z))


def solve_reduced_ode(a, b, c, F) -> ODEKernel:
    """General solution of (a + b) v_ppp - F a v_p = 0.

    ``c`` does not enter the ODE; it is accepted so the call mirrors the
    subalgebra parameters.
    """
    a, b, F = E.to_fraction(a), E.to_fraction(b), E.to_fraction(F)
    if F == 0:
        raise ValueError("F must be nonzero")
    if a == 0:
        raise ValueError("a = 0 is the singular case; use singular_solutions")
    p = Sym("p")
    v1, v2, v3 = Sym("v1"), Sym("v2"), Sym("v3")
    if a + b == 0:
        return ODEKernel("degenerate", v3, math.inf)
    lam2 = F * a / (a + b)
    if lam2 > 0:
        lam = E.sqrt(E.Const(lam2))
        return ODEKernel("exponential", E.add(E.mul(v1, E.exp(E.mul(lam, p))),
                                              E.mul(v2, E.exp(E.neg(E.mul(lam, p)))), v3), lam2)
    lam = E.sqrt(E.Const(-lam2))
    return ODEKernel("trigonometric", E.add(E.mul(v1, E.cos(E.mul(lam, p))),
                                            E.mul(v2, E.sin(E.mul(lam, p))), v3), lam2)


@dataclass(frozen=True)
class ExactSolution:
    psi: Expr
    params: dict
    conditions: tuple = ()
    branch: str = ""

    def check(self, points: int = 100, seed: int = 0):
        return check_residual(self.psi, PVEParams(self.params.get("F", 1), self.params.get("beta", 0)),
                              points=points, seed=seed)

    def to_json(self) -> dict:
        return {"psi": str(self.psi), "branch": self.branch,
                "params": {k: str(v) for k, v in self.params.items()},
                "conditions": list(self.conditions)}


def reduction_2d(a, b, c) -> tuple:
    """Invariants (p, v) of the two-dimensional subalgebra and the ansatz for psi."""
    a, b, c = _num(a), _num(b), _num(c)
    if a.is_zero:
        raise ValueError("a = 0 is the singular case; use singular_solutions")
    t, x, y = Sym("t"), Sym("x"), Sym("y")
    p = E.add(x, E.neg(E.mul(a, t)))
    shift = E.add(E.mul(b, y), E.mul(c, E.power(a, -1), x))
    return p, E.add(Sym("psi"), E.neg(shift)), E.add(Sym("v"), shift)


def exact_solution_2d(a, b, c, F, beta=0, psi1=1, psi2=1, psi3=0) -> ExactSolution:
    """Invariant solution of the two-dimensional reduction, moved to beta != 0."""
    from .pde import beta_transform, transform_solution

    if E.to_fraction(F) == 0:
        raise ValueError("F must be nonzero")
    if E.to_fraction(a) == 0:
        raise ValueError("a must be nonzero")
    if E.to_fraction(a) + E.to_fraction(b) == 0:
        raise ValueError("a + b must be nonzero")
    kernel = solve_reduced_ode(a, b, c, F)
    p, _, ansatz = reduction_2d(a, b, c)
    v = E.subs(kernel.v, {"v1": _num(psi1), "v2": _num(psi2), "v3": _num(psi3), "p": p})
    psi0 = E.subs(ansatz, {"v": v})
    params = {"F": F, "beta": beta, "a": a, "b": b, "c": c}
    psi = transform_solution(psi0, beta_transform(PVEParams(F, beta)), "inverse")
    cond = ("F != 0", "a != 0", "a + b != 0",
            "F a/(a + b) > 0" if kernel.branch == "exponential" else "F a/(a + b) < 0")
    return ExactSolution(psi, params, cond, kernel.branch)


def catalogued_formula_2d(a, b, c, F, beta, psi1=1, psi2=1, psi3=0) -> Expr:
    """The catalogued beta != 0 invariant solution, written out term by term."""
    a, b, c, F, beta = (_num(z) for z in (a, b, c, F, beta))
    k = E.mul(beta, E.power(F, -1))
    t, x, y = Sym("t"), Sym("x"), Sym("y")
    lam = E.sqrt(E.mul(F, a, E.power(E.add(a, b), -1)))
    arg = E.mul(lam, E.add(x, E.mul(k, t), E.neg(E.mul(a, t))))
    return E.add(_num(psi3), E.mul(E.add(b, k), y), E.mul(c, E.power(a, -1), E.add(x, E.mul(k, t))),
                 E.mul(_num(psi1), E.exp(arg)), E.mul(_num(psi2), E.exp(E.neg(arg))))


def singular_solutions(b, c, F, profile=None, k=(0, 0, 0)) -> ExactSolution:
    """Solutions for a = 0: psi = v(x) + c t + b y with F c + b v_ppp = 0."""
    bq, cq = E.to_fraction(b), E.to_fraction(c)
    x = Sym("x")
    if bq == 0:
        if cq != 0:
            raise InconsistentReduction("inconsistent reduction: b = 0 forces c = 0")
        prof = parse(profile) if isinstance(profile, str) else (
            E.sin(E.mul(3, x)) if profile is None else E.as_expr(profile))
        if prof.free_symbols() - {"x"}:
            raise ValueError("the profile must depend on x only")
        return ExactSolution(prof, {"F": F, "beta": 0, "b": b, "c": c}, ("a = 0", "b = 0", "c = 0"),
                             "arbitrary-profile")
    Fq = E.to_fraction(F)
    k0, k1, k2 = (E.to_fraction(z) for z in k)
    v = E.add(E.mul(E.Const(-Fq * cq / (6 * bq)), E.power(x, 3)), E.mul(k2, E.power(x, 2)), E.mul(k1, x), k0)
    psi = E.add(v, E.mul(cq, Sym("t")), E.mul(bq, Sym("y")))
    return ExactSolution(psi, {"F": F, "beta": 0, "b": b, "c": c}, ("a = 0", "b != 0"), "cubic")


def rossby_wave(A=1, k=1, F=1, beta=1) -> ExactSolution:
    """Single-mode wave psi = A sin(k (x - sigma t)) with sigma = -beta/(k^2 + F)."""
    A, kq, Fq, bq = (E.to_fraction(z) for z in (A, k, F, beta))
    if kq * kq + Fq == 0:
        raise ValueError("k^2 + F must be nonzero")
    sigma = -bq / (kq * kq + Fq)
    psi = E.mul(A, E.sin(E.mul(kq, E.add(Sym("x"), E.mul(-sigma, Sym("t"))))))
    return ExactSolution(psi, {"F": F, "beta": beta, "k": k, "A": A, "sigma": sigma},
                         ("k^2 + F != 0",), "rossby")


def consistency_check_2d(a, b, c, F, vtest, pts: list | None = None, tol: float = 1e-9) -> ConsistencyReport:
    """Full residual of the two-dimensional ansatz against -(reduced ODE).

    With ``a = 0`` the singular ansatz ``psi = v(x) + c t + b y`` and the
    reduced equation ``F c + b v_ppp`` are used instead.
    """
    vtest = parse(vtest) if isinstance(vtest, str) else E.as_expr(vtest)
    if vtest.free_symbols() - {"p"}:
        raise ValueError("the test function must depend on p only")
    aq, bq, cq, Fq = (E.to_fraction(z) for z in (a, b, c, F))
    v_p = E.diff(vtest, "p")
    v_ppp = E.diff(E.diff(v_p, "p"), "p")
    if aq == 0:
        p = Sym("x")
        ansatz = E.add(Sym("v"), E.mul(cq, Sym("t")), E.mul(bq, Sym("y")))
        reduced = E.add(E.Const(Fq * cq), E.mul(bq, v_ppp))
    else:
        p, _, ansatz = reduction_2d(aq, bq, cq)
        reduced = E.add(E.mul(aq + bq, v_ppp), E.neg(E.mul(Fq * aq, v_p)))
    psi = E.subs(ansatz, {"v": E.subs(vtest, {"p": p})})
    full = residual(psi, PVEParams(Fq, 0))
    rng = random.Random(0)
    pts = pts or [{z: rng.uniform(-2.0, 2.0) for z in ("t", "x", "y")} for _ in range(30)]
    worst = 0.0
    for pt in pts:
        f_val = E.evaluate(full, pt)
        r_val = E.evaluate(reduced, {"p": E.evaluate(p, pt)})
        worst = max(worst, abs(f_val + r_val) / max(1.0, abs(f_val)))
    return ConsistencyReport(0, "-1", worst, len(pts), tol)
