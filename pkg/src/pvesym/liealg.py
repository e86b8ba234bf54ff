"""Vector fields on (t, x, y, psi)-space and the six-dimensional symmetry algebra.

The basis order (D, vr, vt, vx, vy, vpsi) is used for every coordinate vector.
Structure constants are exact rationals; adjoint orbits are computed in
doubles.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from . import expr as E
from .expr import Expr, Sym

COORDS = ("t", "x", "y", "psi")
BASIS_NAMES = ("D", "vr", "vt", "vx", "vy", "vpsi")
_NAME_INDEX = {n: i for i, n in enumerate(BASIS_NAMES)}
_NAME_INDEX.update({"v_r": 1, "v_t": 2, "v_x": 3, "v_y": 4, "v_psi": 5, "vψ": 5})


class NotClosedError(ValueError):
    """A bracket left the span of the given basis."""


class NoClosedFormFlow(ValueError):
    pass


class SeriesNotConverged(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# Vector fields


@dataclass(frozen=True)
class VectorField:
    coeffs: tuple  # Expr coefficients of d_t, d_x, d_y, d_psi
    name: str = ""

    def __post_init__(self):
        if len(self.coeffs) != 4:
            raise ValueError("a vector field needs four coefficients")
        object.__setattr__(self, "coeffs", tuple(E.as_expr(c) for c in self.coeffs))

    def __call__(self, f: Expr) -> Expr:
        """Action of the field on a function of (t, x, y, psi)."""
        f = E.as_expr(f)
        return E.add(*[E.mul(c, E.diff(f, z)) for c, z in zip(self.coeffs, COORDS) if not c.is_zero])

    def __add__(self, other):
        return VectorField(tuple(E.add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        return VectorField(tuple(E.add(a, E.neg(b)) for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, k) -> "VectorField":
        k = E.as_expr(k)
        return VectorField(tuple(E.mul(k, c) for c in self.coeffs), self.name)

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coeffs)

    def subs(self, mapping) -> "VectorField":
        return VectorField(tuple(E.subs(c, mapping) for c in self.coeffs), self.name)

    def equals(self, other: "VectorField") -> bool:
        return all(E.equal_expr(a, b) for a, b in zip(self.coeffs, other.coeffs))

    def __str__(self):
        parts = [f"({c})*d_{z}" for c, z in zip(self.coeffs, COORDS) if not c.is_zero]
        return " + ".join(parts) if parts else "0"


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v, w]^k = v(w^k) - w(v^k)."""
    return VectorField(tuple(E.add(v(wk), E.neg(w(vk))) for vk, wk in zip(v.coeffs, w.coeffs)))


def sym2_basis() -> list:
    """Generators of the algebra for F != 0, beta = 0."""
    t, x, y, psi = (Sym(n) for n in COORDS)
    z = E.ZERO
    return [
        VectorField((t, z, z, -psi), "D"),
        VectorField((z, -y, x, z), "vr"),
        VectorField((1, z, z, z), "vt"),
        VectorField((z, 1, z, z), "vx"),
        VectorField((z, z, 1, z), "vy"),
        VectorField((z, z, z, 1), "vpsi"),
    ]


def sym1_basis(F=None, beta=None) -> list:
    """Generators for F != 0 and arbitrary beta; symbolic parameters by default."""
    F = Sym("F") if F is None else E.as_expr(F)
    beta = Sym("beta") if beta is None else E.as_expr(beta)
    if F.is_zero:
        raise ValueError("F must be nonzero")
    k = E.mul(beta, E.power(F, -1))
    t, x, y, psi = (Sym(n) for n in COORDS)
    z = E.ZERO
    shifted = E.add(x, E.mul(k, t))
    return [
        VectorField((t, E.neg(E.mul(k, t)), z, E.neg(E.add(psi, E.neg(E.mul(k, y))))), "D"),
        VectorField((z, -y, shifted, E.mul(k, shifted)), "vr"),
        VectorField((1, z, z, z), "vt"),
        VectorField((z, 1, z, z), "vx"),
        VectorField((z, z, 1, z), "vy"),
        VectorField((z, z, z, 1), "vpsi"),
    ]


# ---------------------------------------------------------------------------
# Exact linear algebra over the rationals


def _solve_exact(rows: list, rhs: list):
    """Unique solution of an (overdetermined) rational system, or None."""
    n = len(rows[0])
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_row = 0
    pivots = []
    for col in range(n):
        pr = next((r for r in range(piv_row, len(m)) if m[r][col] != 0), None)
        if pr is None:
            return None
        m[piv_row], m[pr] = m[pr], m[piv_row]
        p = m[piv_row][col]
        m[piv_row] = [v / p for v in m[piv_row]]
        for r in range(len(m)):
            if r != piv_row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[piv_row])]
        pivots.append(col)
        piv_row += 1
    if any(row[-1] != 0 for row in m[piv_row:]):
        return None
    return [m[i][-1] for i in range(n)]


_SAMPLE_POINTS = [
    {"t": Fraction(a), "x": Fraction(b), "y": Fraction(c), "psi": Fraction(d)}
    for a, b, c, d in [(1, 2, 3, 5), (2, -1, 7, 3), (-3, 4, 1, 2), (5, 3, -2, -7), (1, -5, 2, 11), (7, 1, 1, -1)]
]


def decompose(field: VectorField, basis: Sequence[VectorField]):
    """Exact coordinates of ``field`` in ``basis`` (numeric parameters required)."""
    rows, rhs = [], []
    for pt in _SAMPLE_POINTS:
        for k in range(4):
            vals = [E.subs(b.coeffs[k], pt) for b in basis]
            target = E.subs(field.coeffs[k], pt)
            for v in vals + [target]:
                if not isinstance(v, E.Const):
                    raise ValueError(f"decomposition needs numeric parameters, got {v}")
            rows.append([v.value for v in vals])
            rhs.append(target.value)
    sol = _solve_exact(rows, rhs)
    if sol is None:
        raise NotClosedError(f"field {field} is not in the span of the basis")
    recon = VectorField(tuple(E.add(*[E.mul(E.Const(c), b.coeffs[k]) for c, b in zip(sol, basis)]) for k in range(4)))
    if not (field - recon).is_zero:
        raise NotClosedError(f"field {field} is not in the span of the basis")
    return sol


@dataclass(frozen=True)
class StructureConstants:
    tensor: tuple  # tensor[i][j][k], exact Fractions
    names: tuple

    @property
    def dim(self) -> int:
        return len(self.tensor)

    def as_array(self) -> np.ndarray:
        return np.array([[[float(v) for v in row] for row in plane] for plane in self.tensor])

    def nonzero(self) -> dict:
        out = {}
        n = self.dim
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.tensor[i][j][k] != 0:
                        out[(self.names[i], self.names[j], self.names[k])] = self.tensor[i][j][k]
        return out

    def is_antisymmetric(self) -> bool:
        n = self.dim
        return all(self.tensor[i][j][k] == -self.tensor[j][i][k] for i in range(n) for j in range(n) for k in range(n))

    def jacobi_defect(self) -> Fraction:
        """Largest |cyclic sum| over all index quadruples (exactly 0 for a Lie algebra)."""
        c = self.tensor
        n = self.dim
        worst = Fraction(0)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for m in range(n):
                        s = sum(
                            c[i][j][l] * c[l][k][m] + c[j][k][l] * c[l][i][m] + c[k][i][l] * c[l][j][m]
                            for l in range(n)
                        )
                        worst = max(worst, abs(s))
        return worst

    def to_json(self) -> str:
        return json.dumps({"names": list(self.names), "tensor": [[[_num(v) for v in r] for r in p] for p in self.tensor]})


def _num(v):
    v = Fraction(v)
    return int(v) if v.denominator == 1 else float(v)


def structure_constants(basis: Sequence[VectorField]) -> StructureConstants:
    n = len(basis)
    tensor = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            br = lie_bracket(basis[i], basis[j])
            if br.is_zero:
                continue
            try:
                coords = decompose(br, basis)
            except NotClosedError:
                raise NotClosedError(f"[{basis[i].name}, {basis[j].name}] leaves the span") from None
            for k, v in enumerate(coords):
                tensor[i][j][k] = v
                tensor[j][i][k] = -v
    sc = StructureConstants(tuple(tuple(tuple(r) for r in p) for p in tensor), tuple(b.name for b in basis))
    if not sc.is_antisymmetric() or sc.jacobi_defect() != 0:
        raise ArithmeticError("structure constants violate antisymmetry or the Jacobi identity")
    return sc


@lru_cache(maxsize=None)
def a0_structure() -> StructureConstants:
    return structure_constants(sym2_basis())


@lru_cache(maxsize=None)
def _a0_array() -> np.ndarray:
    return a0_structure().as_array()


# ---------------------------------------------------------------------------
# Algebra elements


@dataclass(frozen=True)
class AlgebraElement:
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != 6:
            raise ValueError("an algebra element has six coordinates")
        for c in self.coords:
            if isinstance(c, float) and not math.isfinite(c):
                raise ValueError("coordinates must be finite")

    @classmethod
    def basis(cls, name_or_index) -> "AlgebraElement":
        i = name_or_index if isinstance(name_or_index, int) else _NAME_INDEX[name_or_index]
        return cls(tuple(1 if k == i else 0 for k in range(6)))

    @classmethod
    def parse(cls, spec: str) -> "AlgebraElement":
        """A named generator ('D', 'vr', ...) or six comma-separated numbers."""
        spec = spec.strip()
        if spec in _NAME_INDEX:
            return cls.basis(spec)
        parts = [p.strip() for p in spec.split(",")]
        if len(parts) != 6:
            raise ValueError(f"cannot parse algebra element {spec!r}")
        vals = []
        for p in parts:
            try:
                vals.append(Fraction(p))
            except ValueError:
                vals.append(float(p))
        return cls(tuple(int(v) if isinstance(v, Fraction) and v.denominator == 1 else v for v in vals))

    @property
    def array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords])

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coords)

    def __add__(self, other):
        return AlgebraElement(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        return AlgebraElement(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __mul__(self, k):
        return AlgebraElement(tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coords)

    def to_vector_field(self, basis=None) -> VectorField:
        basis = sym2_basis() if basis is None else basis
        out = VectorField((0, 0, 0, 0))
        for c, b in zip(self.coords, basis):
            if c != 0:
                out = out + b.scale(E.Const(c))
        return out

    def to_json(self) -> list:
        return [_num(c) if isinstance(c, (int, Fraction)) else float(c) for c in self.coords]

    def __str__(self):
        terms = []
        for c, n in zip(self.coords, BASIS_NAMES):
            if c == 0:
                continue
            terms.append(n if c == 1 else f"-{n}" if c == -1 else f"{_num(c) if not isinstance(c, float) else c}*{n}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def bracket(u: AlgebraElement, w: AlgebraElement) -> AlgebraElement:
    """Lie bracket of two elements of the F != 0, beta = 0 algebra."""
    if u.is_exact and w.is_exact:
        c = a0_structure().tensor
        out = [Fraction(0)] * 6
        for i, ui in enumerate(u.coords):
            if ui == 0:
                continue
            for j, wj in enumerate(w.coords):
                if wj == 0:
                    continue
                for k in range(6):
                    out[k] += ui * wj * c[i][j][k]
        return AlgebraElement(tuple(int(v) if v.denominator == 1 else v for v in out))
    v = np.einsum("i,j,ijk->k", u.array, w.array, _a0_array())
    return AlgebraElement(tuple(float(x) for x in v))


def ad_generator(v) -> np.ndarray:
    """Matrix A with (A w) = [w, v], the right-hand side of the adjoint ODE."""
    v = _arr(v)
    return np.einsum("j,ijk->ki", v, _a0_array())


def _arr(v) -> np.ndarray:
    return v.array if isinstance(v, AlgebraElement) else np.asarray(v, dtype=float)


def adjoint_series(v, w0, eps: float, order: int = 40, check: bool = True) -> AlgebraElement:
    """Partial sum of the Lie series sum_n eps^n/n! {v^n, w0}.

    The iterated term is {v^n, w0} = -[v, {v^(n-1), w0}], so that the series
    solves dw/deps = [w, v].  Nilpotent directions terminate exactly.  With
    ``check`` the last nonzero term must fall below 1e-14 of the partial sum.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    v, w = _arr(v), _arr(w0)
    C = _a0_array()
    term = w.copy()
    total = w.copy()
    last = 0.0
    for n in range(1, order + 1):
        term = -np.einsum("i,j,ijk->k", v, term, C) * (eps / n)
        if not term.any():
            last = 0.0
            break
        total = total + term
        last = float(np.linalg.norm(term))
    if check and last >= 1e-14 * max(np.linalg.norm(total), 1e-300):
        raise SeriesNotConverged(f"adjoint series not converged at order {order} (tail {last:.3e})")
    return AlgebraElement(tuple(float(x) for x in total))


def adjoint_ode(v, w0, eps: float, rtol: float = 1e-12) -> AlgebraElement:
    """Integrate dw/deps = [w, v], w(0) = w0 with an adaptive Runge-Kutta scheme."""
    w = _arr(w0)
    if eps == 0:
        return AlgebraElement(tuple(float(x) for x in w))
    A = ad_generator(v)
    sol = solve_ivp(lambda _, y: A @ y, (0.0, float(eps)), w, method="DOP853", rtol=rtol, atol=rtol * 1e-2)
    return AlgebraElement(tuple(float(x) for x in sol.y[:, -1]))


def adjoint_expm(v, w0, eps: float) -> AlgebraElement:
    return AlgebraElement(tuple(float(x) for x in expm(float(eps) * ad_generator(v)) @ _arr(w0)))


def adjoint_basis(index: int, eps: float, w) -> np.ndarray:
    """Closed-form Ad(exp(eps * e_index)) on coordinates ``w``."""
    a = np.array(_arr(w), dtype=float)
    if index == 0:
        a[2] *= math.exp(eps)
        a[5] *= math.exp(-eps)
    elif index == 1:
        c, s = math.cos(eps), math.sin(eps)
        a[3], a[4] = a[3] * c - a[4] * s, a[3] * s + a[4] * c
    elif index == 2:
        a[2] -= eps * a[0]
    elif index == 3:
        a[4] -= eps * a[1]
    elif index == 4:
        a[3] += eps * a[1]
    elif index == 5:
        a[5] += eps * a[0]
    else:
        raise IndexError(index)
    return a


# ---------------------------------------------------------------------------
# Point transformations and flows


@dataclass(frozen=True)
class PointTransformation:
    forward: tuple  # (t~, x~, y~, psi~) in terms of (t, x, y, psi)
    inverse: tuple  # (t, x, y, psi) in terms of (t~, x~, y~, psi~), same symbol names

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(E.as_expr(e) for e in self.forward))
        object.__setattr__(self, "inverse", tuple(E.as_expr(e) for e in self.inverse))

    @classmethod
    def identity(cls) -> "PointTransformation":
        syms = tuple(Sym(n) for n in COORDS)
        return cls(syms, syms)

    def inverted(self) -> "PointTransformation":
        return PointTransformation(self.inverse, self.forward)

    def then(self, other: "PointTransformation") -> "PointTransformation":
        """``other`` after ``self``."""
        fwd = tuple(E.subs(f, dict(zip(COORDS, self.forward))) for f in other.forward)
        inv = tuple(E.subs(f, dict(zip(COORDS, other.inverse))) for f in self.inverse)
        return PointTransformation(fwd, inv)

    def apply(self, point: dict) -> dict:
        return {z: E.evaluate(f, point) for z, f in zip(COORDS, self.forward)}

    def check_inverse(self) -> bool:
        round_trip = self.then(self.inverted())
        return all(E.equal_expr(f, Sym(z)) for f, z in zip(round_trip.forward, COORDS))

    def to_json(self) -> dict:
        return {"forward": [str(f) for f in self.forward], "inverse": [str(f) for f in self.inverse]}


def flow(v: AlgebraElement, eps) -> PointTransformation:
    """Closed-form flow exp(eps v) of an element of the beta = 0 algebra.

    Every element has one: t and psi obey affine scalar ODEs and (x, y) rotates
    about a fixed centre (or translates when the rotation coefficient is zero).
    """
    fwd = _flow_exprs(v, eps)
    inv = _flow_exprs(v, -eps if not isinstance(eps, Expr) else E.neg(eps))
    return PointTransformation(fwd, inv)


def _flow_exprs(v: AlgebraElement, eps):
    a1, a2, a3, a4, a5, a6 = (E.as_expr(E.to_fraction(c)) for c in v.coords)
    eps = E.as_expr(eps if isinstance(eps, Expr) else E.to_fraction(eps))
    t, x, y, psi = (Sym(n) for n in COORDS)
    if a1.is_zero:
        t_new = E.add(t, E.mul(a3, eps))
        psi_new = E.add(psi, E.mul(a6, eps))
    else:
        r = E.mul(a3, E.power(a1, -1))
        t_new = E.add(E.mul(E.add(t, r), E.exp(E.mul(a1, eps))), E.neg(r))
        s = E.mul(a6, E.power(a1, -1))
        psi_new = E.add(E.mul(E.add(psi, E.neg(s)), E.exp(E.neg(E.mul(a1, eps)))), s)
    if a2.is_zero:
        x_new = E.add(x, E.mul(a4, eps))
        y_new = E.add(y, E.mul(a5, eps))
    else:
        x0 = E.neg(E.mul(a5, E.power(a2, -1)))
        y0 = E.mul(a4, E.power(a2, -1))
        th = E.mul(a2, eps)
        c, s = E.cos(th), E.sin(th)
        dx, dy = E.add(x, E.neg(x0)), E.add(y, E.neg(y0))
        x_new = E.add(x0, E.mul(dx, c), E.neg(E.mul(dy, s)))
        y_new = E.add(y0, E.mul(dx, s), E.mul(dy, c))
    return (t_new, x_new, y_new, psi_new)


def pushforward(v: VectorField, T: PointTransformation) -> VectorField:
    """Re-express ``v`` in the coordinates produced by ``T`` (chain rule)."""
    back = dict(zip(COORDS, T.inverse))
    return VectorField(tuple(E.subs(v(f), back) for f in T.forward), v.name)
