"""Residual operator of the potential vorticity equation and solution transport.

The equation is ``zeta_t - F psi_t + J(psi, zeta) + beta psi_x = 0`` with
``zeta = psi_xx + psi_yy`` and ``J(a, b) = a_x b_y - a_y b_x``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .expr import Expr, Sym
from .liealg import COORDS, AlgebraElement, PointTransformation, flow

SPACE_TIME = ("t", "x", "y")


@dataclass(frozen=True)
class PVEParams:
    F: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("F", "beta"):
            v = getattr(self, name)
            if isinstance(v, Expr):
                continue
            if not math.isfinite(float(v)):
                raise ValueError(f"{name} must be finite")

    def require_nonzero_F(self):
        if not isinstance(self.F, Expr) and float(self.F) == 0.0:
            raise ValueError("transformation undefined; F must be nonzero")


def _param(v) -> Expr:
    return v if isinstance(v, Expr) else E.as_expr(E.to_fraction(v))


def vorticity(psi) -> Expr:
    psi = E.as_expr(psi)
    return E.add(E.diff(E.diff(psi, "x"), "x"), E.diff(E.diff(psi, "y"), "y"))


def jacobian(f, g) -> Expr:
    f, g = E.as_expr(f), E.as_expr(g)
    return E.add(E.mul(E.diff(f, "x"), E.diff(g, "y")),
                 E.neg(E.mul(E.diff(f, "y"), E.diff(g, "x"))))


def residual(psi, params: PVEParams) -> Expr:
    psi = E.as_expr(psi)
    zeta = vorticity(psi)
    F, beta = _param(params.F), _param(params.beta)
    return E.add(
        E.diff(zeta, "t"),
        E.neg(E.mul(F, E.diff(psi, "t"))),
        jacobian(psi, zeta),
        E.mul(beta, E.diff(psi, "x")),
    )


def beta_transform(params: PVEParams) -> PointTransformation:
    """The equivalence transformation removing beta (needs F != 0)."""
    params.require_nonzero_F()
    k = E.mul(_param(params.beta), E.power(_param(params.F), -1))
    t, x, y, psi = (Sym(n) for n in COORDS)
    fwd = (t, E.add(x, E.mul(k, t)), y, E.add(psi, E.neg(E.mul(k, y))))
    inv = (t, E.add(x, E.neg(E.mul(k, t))), y, E.add(psi, E.mul(k, y)))
    return PointTransformation(fwd, inv)


def _check_fibre_preserving(T: PointTransformation):
    for comp in T.forward[:3] + T.inverse[:3]:
        if "psi" in comp.free_symbols():
            raise ValueError("transformation mixes psi into the independent variables")
    for comp in (T.forward[3], T.inverse[3]):
        if not E.diff(E.diff(comp, "psi"), "psi").is_zero:
            raise ValueError("psi must enter the transformation affinely")


def transform_solution(psi, T: PointTransformation, direction: str = "forward") -> Expr:
    """Image of the graph ``psi = f(t, x, y)`` under ``T`` (or its inverse).

    For the beta transformation, ``direction="inverse"`` turns a beta = 0
    solution into one of the beta != 0 equation.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    if direction == "inverse":
        T = T.inverted()
    _check_fibre_preserving(T)
    psi = E.as_expr(psi)
    lifted = E.subs(T.forward[3], {"psi": psi})
    back = dict(zip(SPACE_TIME, T.inverse[:3]))
    return E.subs(lifted, back)


@dataclass
class ResidualReport:
    residual_symbolic_zero: bool
    residual_max_abs: float
    points: int
    method: str = ""

    @property
    def passed(self) -> bool:
        return self.residual_max_abs < 1e-9

    def to_json(self) -> dict:
        return {"residual_symbolic_zero": self.residual_symbolic_zero,
                "residual_max_abs": self.residual_max_abs, "points": self.points}


def sample_points(n: int = 100, seed: int = 0, box: float = 2.0, t_min: float = 0.1,
                  ranges: dict | None = None) -> list:
    """Uniform points in [-box, box]^3 with |t| >= t_min."""
    rng = random.Random(seed)
    ranges = ranges or {}
    pts = []
    while len(pts) < n:
        pt = {z: rng.uniform(*ranges.get(z, (-box, box))) for z in SPACE_TIME}
        if abs(pt["t"]) >= t_min:
            pts.append(pt)
    return pts


def max_abs_at(e: Expr, pts: list) -> float:
    names = sorted(e.free_symbols())
    if not names:
        return abs(E.evaluate(e, {}))
    f = E.lambdify(e, names)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(*(np.array([p[n] for p in pts]) for n in names)), dtype=float)
    if not np.all(np.isfinite(vals)):
        return math.inf
    return float(np.max(np.abs(vals)))


def check_residual(psi, params: PVEParams, points: int = 100, seed: int = 0,
                   ranges: dict | None = None) -> ResidualReport:
    res = residual(psi, params)
    eq = E.equal_expr(res, 0, seed=seed, ranges=ranges)
    pts = sample_points(points, seed=seed, ranges=ranges)
    return ResidualReport(bool(eq.equal), max_abs_at(res, pts), points, eq.method)


def sym1_to_sym2(g: AlgebraElement, params: PVEParams) -> AlgebraElement:
    """Coordinates of the pushforward of a beta != 0 element under the beta transformation.

    D, v_r, v_x and v_psi map to their beta = 0 namesakes, but
    v_t -> v_t + (beta/F) v_x and v_y -> v_y - (beta/F) v_psi.
    """
    params.require_nonzero_F()
    k = E.to_fraction(params.beta) / E.to_fraction(params.F)
    a = list(g.coords)
    a[3] = a[3] + k * a[2]
    a[5] = a[5] - k * a[4]
    return AlgebraElement(tuple(a))


def sym1_flow(g: AlgebraElement, eps, params: PVEParams) -> PointTransformation:
    """Flow of the beta != 0 element with coordinates ``g``: B^-1 o flow o B."""
    B = beta_transform(params)
    return B.then(flow(sym1_to_sym2(g, params), eps)).then(B.inverted())


def verify_symmetry(g: AlgebraElement, eps, psi, params: PVEParams, points: int = 100,
                    seed: int = 0) -> ResidualReport:
    """Transport ``psi`` along the symmetry generated by ``g`` and check the image."""
    if isinstance(params.beta, Expr) or float(params.beta) != 0.0:
        T = sym1_flow(g, eps, params)
    else:
        T = flow(g, eps)
    moved = transform_solution(psi, T)
    return check_residual(moved, params, points=points, seed=seed)
