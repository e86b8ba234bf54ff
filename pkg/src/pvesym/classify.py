"""Adjoint classification of one- and two-dimensional subalgebras.

Every nonzero element (and every closed pair) is driven to one fixed
representative by explicit adjoint maps, rescalings and basis recombinations.
The sequence of steps is returned as a witness that can be replayed.

Parameter normalisation (coordinates in the basis D, vr, vt, vx, vy, vpsi)::

    dim 1                                   dim 2
    1  D + a vr          a != 0             1  <D, vr>
    2  D + a vx          a >= 0             2  <D + a vr, vt>         a != 0
    3  vr + s vt + a vpsi  s = +-1          3  <D + a vx, vt>         a >= 0
    4  vr + c vpsi       c in {-1,0,1}      4  <D + a vx, vy>         a >= 0
    5  vt + a vx + c vpsi                   5  <D + a vr, vpsi>       a != 0
         c in {-1,0,1}, a >= 0,             6  <D + a vx, vpsi>       a >= 0
         a in {0,1} when c = 0              7  <vr + c vpsi, vt + b vpsi>
    6  vx + c vpsi       c in {0,1}               c in {-1,0,1}; b in {-1,0,1} if c = 0
    7  vpsi                                 8  <vr + c vt, vpsi>      c in {-1,0,1}
                                            9  <vt + a vx + c vpsi, vy + b vpsi>
                                                 c in {-1,0,1}; if c != 0: a > 0 or
                                                 (a = 0, b >= 0); if c = 0: b in {0,1},
                                                 and a in {0,1} when b = 0
                                           10  <vt + a vx, vpsi>      a in {0,1}
                                           11  <vx + c vpsi, vy>      c in {0,1}
                                           12  <vx, vpsi>

Rotations by pi and the Ad(exp(eps D)) rescaling make several of the real
parameters of the published lists equivalent to their negatives or to 1;
the table above keeps exactly one point per adjoint orbit.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .liealg import AlgebraElement, BASIS_NAMES, adjoint_basis, bracket

ZERO_TOL = 1e-12

D, VR, VT, VX, VY, VPSI = range(6)


class SubalgebraError(ValueError):
    pass


@dataclass(frozen=True)
class Subalgebra:
    generators: tuple  # AlgebraElements

    @property
    def dim(self) -> int:
        return len(self.generators)

    def matrix(self) -> np.ndarray:
        return np.array([g.array for g in self.generators])


@dataclass
class CanonicalForm:
    dim: int
    class_id: int
    params: dict
    representative: list  # list of 6-vectors
    witness: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "class_id": self.class_id,
            "params": self.params,
            "representative": [[float(x) for x in r] for r in self.representative],
            "representative_text": [str(AlgebraElement(tuple(float(x) for x in r))) for r in self.representative],
            "witness": [list(step) if not isinstance(step[1], np.ndarray) else [step[0], step[1].tolist()] for step in self.witness],
        }


def _vec(v) -> np.ndarray:
    if isinstance(v, AlgebraElement):
        return v.array
    return np.asarray(v, dtype=float)


def _tol(*vecs) -> float:
    scale = max([1.0] + [float(np.max(np.abs(v))) for v in vecs])
    return ZERO_TOL * scale


def replay(witness, generators) -> np.ndarray:
    """Apply witness steps to generator rows; returns the resulting rows."""
    rows = np.array([_vec(g) for g in generators], dtype=float)
    for step in witness:
        kind = step[0]
        if kind == "ad":
            _, idx, eps = step
            rows = np.array([adjoint_basis(idx, eps, r) for r in rows])
        elif kind == "scale":
            rows = rows * step[1]
        elif kind == "combine":
            rows = np.asarray(step[1], dtype=float) @ rows
        else:
            raise ValueError(f"unknown witness step {kind!r}")
    return rows


class _Work:
    """Rows under transformation, recording every step."""

    def __init__(self, rows, tol):
        self.rows = np.array(rows, dtype=float)
        self.tol = tol
        self.steps = []

    def ad(self, idx, eps):
        if eps == 0:
            return
        self.rows = np.array([adjoint_basis(idx, eps, r) for r in self.rows])
        self.steps.append(("ad", idx, float(eps)))

    def combine(self, G):
        G = np.asarray(G, dtype=float)
        if np.allclose(G, np.eye(len(self.rows)), rtol=0, atol=0):
            return
        self.rows = G @ self.rows
        self.steps.append(("combine", G))

    def scale(self, k):
        if k == 1:
            return
        self.rows = self.rows * k
        self.steps.append(("scale", float(k)))

    def nz(self, value) -> bool:
        return abs(value) > self.tol

    def rotate_to(self, row, target):
        """Rotate so the (vx, vy) part of ``row`` points along +target (VX or VY)."""
        a4, a5 = self.rows[row, VX], self.rows[row, VY]
        theta = math.atan2(a4, a5) if target == VY else math.atan2(-a5, a4)
        self.ad(VR, theta)


# ---------------------------------------------------------------------------
# One-dimensional


def branch_1d(v, tol=None) -> int:
    a = _vec(v)
    tol = _tol(a) if tol is None else tol
    nz = [abs(x) > tol for x in a]
    if nz[D]:
        return 1 if nz[VR] else 2
    if nz[VR]:
        return 3 if nz[VT] else 4
    if nz[VT]:
        return 5
    if nz[VX] or nz[VY]:
        return 6
    if nz[VPSI]:
        return 7
    raise SubalgebraError("zero element has no class")


def branch_predicates_1d(v, tol=None) -> list:
    """The seven case conditions written independently; exactly one holds."""
    a = _vec(v)
    tol = _tol(a) if tol is None else tol
    z = [abs(x) <= tol for x in a]
    return [
        not z[D] and not z[VR],
        not z[D] and z[VR],
        z[D] and not z[VR] and not z[VT],
        z[D] and not z[VR] and z[VT],
        z[D] and z[VR] and not z[VT],
        z[D] and z[VR] and z[VT] and not (z[VX] and z[VY]),
        z[D] and z[VR] and z[VT] and z[VX] and z[VY] and not z[VPSI],
    ]


def canonicalize_1d(v) -> CanonicalForm:
    a = _vec(v)
    if not np.any(np.abs(a) > 0):
        raise SubalgebraError("zero element")
    w = _Work([a], _tol(a))
    cls = branch_1d(a, w.tol)
    r = lambda: w.rows[0]  # noqa: E731
    params = {}
    if cls in (1, 2):
        w.scale(1 / r()[D])
        w.ad(VT, r()[VT])
        w.ad(VPSI, -r()[VPSI])
        if cls == 1:
            w.ad(VX, r()[VY] / r()[VR])
            w.ad(VY, -r()[VX] / r()[VR])
            params["a"] = float(r()[VR])
        else:
            if w.nz(np.hypot(r()[VX], r()[VY])):
                w.rotate_to(0, VX)
            params["a"] = float(r()[VX])
    elif cls in (3, 4):
        w.scale(1 / r()[VR])
        w.ad(VX, r()[VY])
        w.ad(VY, -r()[VX])
        if cls == 3:
            s = 1.0 if r()[VT] > 0 else -1.0
            w.ad(D, -math.log(abs(r()[VT])))
            params["sign"] = int(s)
            params["a"] = float(r()[VPSI])
        else:
            c = r()[VPSI]
            if w.nz(c):
                w.ad(D, math.log(abs(c)))
            params["c"] = _unit(r()[VPSI], w)
    elif cls == 5:
        if w.nz(np.hypot(r()[VX], r()[VY])):
            w.rotate_to(0, VX)
        w.scale(1 / r()[VT])
        a_, c_ = r()[VX], r()[VPSI]
        if w.nz(c_):
            # (a, c) -> (a s, c s^2) with s = exp(-eps)
            eps = 0.5 * math.log(abs(c_))
        elif w.nz(a_):
            eps = math.log(abs(a_))
        else:
            eps = 0.0
        w.ad(D, eps)
        w.scale(1 / r()[VT])
        if r()[VX] < -w.tol:
            w.ad(VR, math.pi)
        params["a"] = float(r()[VX])
        params["c"] = _unit(r()[VPSI], w)
    elif cls == 6:
        w.rotate_to(0, VX)
        w.scale(1 / r()[VX])
        c = r()[VPSI]
        if w.nz(c):
            w.ad(D, math.log(abs(c)))
            if r()[VPSI] < 0:
                w.ad(VR, math.pi)
                w.scale(-1.0)
        params["c"] = _unit(r()[VPSI], w)
    else:
        w.scale(1 / r()[VPSI])
    rep = representative_1d(cls, params)
    return CanonicalForm(1, cls, params, [rep], w.steps)


def _unit(value, w) -> int:
    if not w.nz(value):
        return 0
    return 1 if value > 0 else -1


def representative_1d(cls: int, params: dict) -> np.ndarray:
    a = params.get("a", 0.0)
    c = params.get("c", 0)
    s = params.get("sign", 1)
    vecs = {
        1: [1, a, 0, 0, 0, 0],
        2: [1, 0, 0, a, 0, 0],
        3: [0, 1, s, 0, 0, a],
        4: [0, 1, 0, 0, 0, c],
        5: [0, 0, 1, a, 0, c],
        6: [0, 0, 0, 1, 0, c],
        7: [0, 0, 0, 0, 0, 1],
    }
    return np.array(vecs[cls], dtype=float)


# ---------------------------------------------------------------------------
# Two-dimensional


def is_subalgebra(S: Subalgebra, tol: float = 1e-10) -> bool:
    gens = S.generators
    M = S.matrix()
    if np.linalg.matrix_rank(M, tol=_tol(*M) * 1e2) < len(gens):
        raise SubalgebraError("generators are linearly dependent")
    if len(gens) == 1:
        return True
    exact = all(g.is_exact for g in gens)
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            br = bracket(gens[i], gens[j])
            if exact:
                if _in_span_exact(br, gens) is None:
                    return False
                continue
            b = br.array
            coef, *_ = np.linalg.lstsq(M.T, b, rcond=None)
            if np.linalg.norm(M.T @ coef - b) > tol * max(1.0, np.linalg.norm(b)):
                return False
    return True


def closure_certificate(S: Subalgebra):
    """Coefficients (l1, l2) with [v1, v2] = l1 v1 + l2 v2."""
    br = bracket(*S.generators)
    if all(g.is_exact for g in S.generators):
        sol = _in_span_exact(br, S.generators)
        if sol is None:
            raise SubalgebraError("not closed")
        return sol
    coef, *_ = np.linalg.lstsq(S.matrix().T, br.array, rcond=None)
    return [float(c) for c in coef]


def _in_span_exact(br, gens):
    from .liealg import _solve_exact
    from fractions import Fraction

    rows = [[Fraction(g.coords[k]) for g in gens] for k in range(6)]
    return _solve_exact(rows, [Fraction(c) for c in br.coords])


def branch_2d(u, w, tol=None) -> int:
    return _canonical_2d(_vec(u), _vec(w), tol, dry=True)


def branch_predicates_2d(u, w, tol=None) -> list:
    """The twelve case conditions evaluated independently on a closed pair."""
    u, w = _vec(u), _vec(w)
    tol = _tol(u, w) if tol is None else tol
    M = np.vstack([u, w])
    dr = M[:, [D, VR]]
    rank_dr = np.linalg.matrix_rank(dr, tol=tol)
    preds = [False] * 12
    preds[0] = rank_dr == 2
    if rank_dr == 1:
        # row combination killing the (D, vr) block
        i = int(np.argmax(np.abs(dr).max(axis=1)))
        j = 1 - i
        col = int(np.argmax(np.abs(dr[i])))
        e1 = M[i]
        e2 = M[j] - (M[j, [D, VR][col]] / M[i, [D, VR][col]]) * M[i]
        has_d = abs(e1[D]) > tol
        gamma = e1[VR] / e1[D] if has_d else None
        xy = abs(e2[VX]) > tol or abs(e2[VY]) > tol
        et, ep = abs(e2[VT]) > tol, abs(e2[VPSI]) > tol
        preds[1] = has_d and abs(gamma) > tol and et
        preds[4] = has_d and abs(gamma) > tol and ep
        preds[2] = has_d and abs(gamma) <= tol and not xy and et
        preds[5] = has_d and abs(gamma) <= tol and not xy and ep
        preds[3] = has_d and abs(gamma) <= tol and xy
        preds[6] = not has_d and et
        preds[7] = not has_d and not et
    elif rank_dr == 0:
        tcol = np.abs(M[:, VT]).max() > tol
        if tcol:
            i = int(np.argmax(np.abs(M[:, VT])))
            e2 = M[1 - i] - (M[1 - i, VT] / M[i, VT]) * M[i]
            xy = abs(e2[VX]) > tol or abs(e2[VY]) > tol
            preds[8] = xy
            preds[9] = not xy
        else:
            r = np.linalg.matrix_rank(M[:, [VX, VY]], tol=tol)
            preds[10] = r == 2
            preds[11] = r == 1
    return preds


def canonicalize_2d(S) -> CanonicalForm:
    if not isinstance(S, Subalgebra):
        S = Subalgebra(tuple(g if isinstance(g, AlgebraElement) else AlgebraElement(tuple(g)) for g in S))
    if S.dim != 2:
        raise SubalgebraError("expected two generators")
    if not is_subalgebra(S):
        raise SubalgebraError("generators do not span a subalgebra (bracket not in span)")
    u, w = (g.array for g in S.generators)
    return _canonical_2d(u, w, None, dry=False)


def _canonical_2d(u, w, tol, dry):
    tol = _tol(u, w) if tol is None else tol
    W = _Work([u, w], tol)
    R = lambda i: W.rows[i]  # noqa: E731
    params = {}
    dr = W.rows[:, [D, VR]]
    rank_dr = np.linalg.matrix_rank(dr, tol=tol)

    if rank_dr == 2:
        cls = 1
        if dry:
            return cls
        W.combine(np.linalg.inv(dr))
        W.ad(VT, R(0)[VT])
        W.ad(VPSI, -R(0)[VPSI])
        W.ad(VX, R(1)[VY])
        W.ad(VY, -R(1)[VX])
    elif rank_dr == 1:
        i = int(np.argmax(np.abs(dr).max(axis=1)))
        col = int(np.argmax(np.abs(dr[i])))
        f = W.rows[1 - i, [D, VR][col]] / W.rows[i, [D, VR][col]]
        G = np.zeros((2, 2))
        G[0, i] = 1.0
        G[1, 1 - i] = 1.0
        G[1, i] = -f
        W.combine(G)
        has_d = W.nz(R(0)[D])
        if has_d:
            W.combine(np.diag([1 / R(0)[D], 1.0]))
            gamma = R(0)[VR]
            e2 = R(1)
            xy = W.nz(e2[VX]) or W.nz(e2[VY])
            if abs(gamma) > tol:
                cls = 2 if W.nz(e2[VT]) else 5
            elif xy:
                cls = 4
            else:
                cls = 3 if W.nz(e2[VT]) else 6
            if dry:
                return cls
            if cls in (2, 3):
                W.combine(np.array([[1.0, -R(0)[VT] / R(1)[VT]], [0.0, 1 / R(1)[VT]]]))
                W.ad(VPSI, -R(0)[VPSI])
            elif cls in (5, 6):
                W.combine(np.array([[1.0, -R(0)[VPSI] / R(1)[VPSI]], [0.0, 1 / R(1)[VPSI]]]))
                W.ad(VT, R(0)[VT])
            if cls in (2, 5):
                W.ad(VX, R(0)[VY] / R(0)[VR])
                W.ad(VY, -R(0)[VX] / R(0)[VR])
                params["a"] = float(R(0)[VR])
            elif cls in (3, 6):
                if W.nz(np.hypot(R(0)[VX], R(0)[VY])):
                    W.rotate_to(0, VX)
                params["a"] = float(R(0)[VX])
            else:  # 4
                W.rotate_to(1, VY)
                W.combine(np.array([[1.0, -R(0)[VY] / R(1)[VY]], [0.0, 1 / R(1)[VY]]]))
                W.ad(VT, R(0)[VT])
                W.ad(VPSI, -R(0)[VPSI])
                if R(0)[VX] < -tol:
                    W.ad(VR, math.pi)
                    W.combine(np.diag([1.0, -1.0]))
                params["a"] = float(R(0)[VX])
        else:
            cls = 7 if W.nz(R(1)[VT]) else 8
            if dry:
                return cls
            W.combine(np.diag([1 / R(0)[VR], 1.0]))
            W.ad(VX, R(0)[VY])
            W.ad(VY, -R(0)[VX])
            if cls == 7:
                W.combine(np.array([[1.0, -R(0)[VT] / R(1)[VT]], [0.0, 1 / R(1)[VT]]]))
                c0, b0 = R(0)[VPSI], R(1)[VPSI]
                if W.nz(c0):
                    eps = math.log(abs(c0))
                elif W.nz(b0):
                    eps = 0.5 * math.log(abs(b0))
                else:
                    eps = 0.0
                W.ad(D, eps)
                W.combine(np.diag([1.0, 1 / R(1)[VT]]))
                params["c"] = _unit(R(0)[VPSI], W)
                params["b"] = _unit(R(1)[VPSI], W) if params["c"] == 0 else float(R(1)[VPSI])
            else:
                W.combine(np.array([[1.0, -R(0)[VPSI] / R(1)[VPSI]], [0.0, 1 / R(1)[VPSI]]]))
                if W.nz(R(0)[VT]):
                    W.ad(D, -math.log(abs(R(0)[VT])))
                    W.combine(np.diag([1.0, 1 / R(1)[VPSI]]))
                params["c"] = _unit(R(0)[VT], W)
    else:
        tcol = np.abs(W.rows[:, VT]).max() > tol
        if tcol:
            i = int(np.argmax(np.abs(W.rows[:, VT])))
            G = np.zeros((2, 2))
            G[0, i] = 1 / W.rows[i, VT]
            G[1, 1 - i] = 1.0
            G[1, i] = -W.rows[1 - i, VT] / W.rows[i, VT]
            W.combine(G)
            xy = W.nz(R(1)[VX]) or W.nz(R(1)[VY])
            cls = 9 if xy else 10
            if dry:
                return cls
            if cls == 9:
                W.rotate_to(1, VY)
                W.combine(np.array([[1.0, -R(0)[VY] / R(1)[VY]], [0.0, 1 / R(1)[VY]]]))
                a_, b_, c_ = R(0)[VX], R(1)[VPSI], R(0)[VPSI]
                if W.nz(c_):
                    eps = 0.5 * math.log(abs(c_))
                elif W.nz(b_):
                    eps = math.log(abs(b_))
                elif W.nz(a_):
                    eps = math.log(abs(a_))
                else:
                    eps = 0.0
                W.ad(D, eps)
                W.combine(np.diag([1 / R(0)[VT], 1.0]))
                a_, b_, c_ = R(0)[VX], R(1)[VPSI], R(0)[VPSI]
                if W.nz(c_):
                    flip = a_ < -tol or (not W.nz(a_) and b_ < -tol)
                elif W.nz(b_):
                    flip = b_ < 0
                else:
                    flip = a_ < -tol
                if flip:
                    W.ad(VR, math.pi)
                    W.combine(np.diag([1.0, -1.0]))
                c = _unit(R(0)[VPSI], W)
                params["c"] = c
                params["a"] = float(R(0)[VX])
                params["b"] = float(R(1)[VPSI]) if c != 0 else _unit(R(1)[VPSI], W)
            else:
                W.combine(np.array([[1.0, -R(0)[VPSI] / R(1)[VPSI]], [0.0, 1 / R(1)[VPSI]]]))
                if W.nz(np.hypot(R(0)[VX], R(0)[VY])):
                    W.rotate_to(0, VX)
                    W.ad(D, math.log(R(0)[VX]))
                    W.combine(np.diag([1 / R(0)[VT], 1 / R(1)[VPSI]]))
                params["a"] = _unit(R(0)[VX], W)
        else:
            xy = W.rows[:, [VX, VY]]
            r = np.linalg.matrix_rank(xy, tol=tol)
            cls = 11 if r == 2 else 12
            if dry:
                return cls
            if cls == 11:
                W.combine(np.linalg.inv(xy))
                c_, b_ = R(0)[VPSI], R(1)[VPSI]
                if W.nz(np.hypot(c_, b_)):
                    # the functional (c, b) rotates with the plane
                    W.ad(VR, math.atan2(-b_, c_))
                    W.combine(np.linalg.inv(W.rows[:, [VX, VY]]))
                    W.ad(D, math.log(R(0)[VPSI]))
                params["c"] = _unit(R(0)[VPSI], W)
                params["b"] = 0
            else:
                i = int(np.argmax(np.abs(xy).max(axis=1)))
                G = np.zeros((2, 2))
                G[0, i] = 1.0
                G[1, 1 - i] = 1.0
                k = np.argmax(np.abs(xy[i]))
                G[1, i] = -xy[1 - i, k] / xy[i, k]
                W.combine(G)
                W.rotate_to(0, VX)
                W.combine(np.array([[1 / R(0)[VX], -R(0)[VPSI] / (R(0)[VX] * R(1)[VPSI])], [0.0, 1 / R(1)[VPSI]]]))
    rep = representative_2d(cls, params)
    return CanonicalForm(2, cls, params, list(rep), W.steps)


def representative_2d(cls: int, params: dict) -> np.ndarray:
    a = params.get("a", 0.0)
    b = params.get("b", 0.0)
    c = params.get("c", 0)
    pairs = {
        1: ([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]),
        2: ([1, a, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0]),
        3: ([1, 0, 0, a, 0, 0], [0, 0, 1, 0, 0, 0]),
        4: ([1, 0, 0, a, 0, 0], [0, 0, 0, 0, 1, 0]),
        5: ([1, a, 0, 0, 0, 0], [0, 0, 0, 0, 0, 1]),
        6: ([1, 0, 0, a, 0, 0], [0, 0, 0, 0, 0, 1]),
        7: ([0, 1, 0, 0, 0, c], [0, 0, 1, 0, 0, b]),
        8: ([0, 1, c, 0, 0, 0], [0, 0, 0, 0, 0, 1]),
        9: ([0, 0, 1, a, 0, c], [0, 0, 0, 0, 1, b]),
        10: ([0, 0, 1, a, 0, 0], [0, 0, 0, 0, 0, 1]),
        11: ([0, 0, 0, 1, 0, c], [0, 0, 0, 0, 1, 0]),
        12: ([0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 0, 1]),
    }
    return np.array(pairs[cls], dtype=float)


# ---------------------------------------------------------------------------
# Optimal-system verification


def representatives(dim: int) -> list:
    """(class_id, params) samples covering every branch of the normalisation table."""
    if dim == 1:
        return [
            (1, {"a": 1.0}), (1, {"a": -0.7}),
            (2, {"a": 0.0}), (2, {"a": 1.5}),
            (3, {"sign": 1, "a": 0.5}), (3, {"sign": -1, "a": 0.0}), (3, {"sign": 1, "a": -2.0}),
            (4, {"c": 0}), (4, {"c": 1}), (4, {"c": -1}),
            (5, {"a": 0.0, "c": 0}), (5, {"a": 1.0, "c": 0}), (5, {"a": 0.8, "c": 1}), (5, {"a": 0.0, "c": -1}),
            (6, {"c": 0}), (6, {"c": 1}),
            (7, {}),
        ]
    return [
        (1, {}),
        (2, {"a": 1.0}), (2, {"a": -0.4}),
        (3, {"a": 0.0}), (3, {"a": 1.3}),
        (4, {"a": 0.0}), (4, {"a": 0.6}),
        (5, {"a": 2.0}), (5, {"a": -1.0}),
        (6, {"a": 0.0}), (6, {"a": 0.9}),
        (7, {"c": 1, "b": 0.5}), (7, {"c": -1, "b": -1.2}), (7, {"c": 0, "b": 1}), (7, {"c": 0, "b": -1}), (7, {"c": 0, "b": 0}),
        (8, {"c": 1}), (8, {"c": 0}), (8, {"c": -1}),
        (9, {"c": 1, "a": 0.7, "b": -0.3}), (9, {"c": -1, "a": 0.0, "b": 0.4}), (9, {"c": 0, "b": 1, "a": -0.5}),
        (9, {"c": 0, "b": 0, "a": 1.0}), (9, {"c": 0, "b": 0, "a": 0.0}),
        (10, {"a": 0}), (10, {"a": 1}),
        (11, {"c": 0, "b": 0}), (11, {"c": 1, "b": 0}),
        (12, {}),
    ]


def random_conjugation(rng: random.Random, max_flows: int = 4) -> list:
    steps = []
    for _ in range(rng.randint(1, max_flows)):
        steps.append(("ad", rng.randrange(6), rng.uniform(-2.0, 2.0)))
    return steps


def _params_close(p, q, tol) -> bool:
    if p.keys() != q.keys():
        return False
    return all(abs(float(p[k]) - float(q[k])) <= tol * max(1.0, abs(float(p[k]))) for k in p)


def verify_optimal_system(dim: int, trials: int = 50, seed: int = 0, tol: float = 1e-8) -> dict:
    """Idempotence, conjugation recovery and collision checks over all classes."""
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    rng = random.Random(seed)
    canon = canonicalize_1d if dim == 1 else canonicalize_2d
    rep_of = representative_1d if dim == 1 else representative_2d
    entries = []
    seen = []
    collisions = []
    for cls, params in representatives(dim):
        rep = rep_of(cls, params)
        rows = [rep] if dim == 1 else list(rep)
        failures = []
        first = canon(rows[0] if dim == 1 else rows)
        idempotent = first.class_id == cls and _params_close(first.params, params, tol)
        if not idempotent:
            failures.append({"kind": "idempotence", "got": [first.class_id, first.params]})
        for other_cls, other_params in seen:
            if other_cls != cls and other_params == (first.class_id, first.params):
                collisions.append([cls, other_cls])
        seen.append((cls, (first.class_id, first.params)))
        for _ in range(trials):
            conj = random_conjugation(rng)
            if dim == 2:
                G = np.array([[rng.uniform(-2, 2), rng.uniform(-2, 2)], [rng.uniform(-2, 2), rng.uniform(-2, 2)]])
                while abs(np.linalg.det(G)) < 0.2:
                    G = np.array([[rng.uniform(-2, 2), rng.uniform(-2, 2)], [rng.uniform(-2, 2), rng.uniform(-2, 2)]])
                conj = conj + [("combine", G)]
            else:
                conj = conj + [("scale", rng.choice([-1, 1]) * rng.uniform(0.3, 3.0))]
            moved = replay(conj, rows)
            try:
                got = canon(moved[0] if dim == 1 else [AlgebraElement(tuple(moved[0])), AlgebraElement(tuple(moved[1]))])
            except SubalgebraError as exc:
                failures.append({"kind": "error", "message": str(exc)})
                continue
            if got.class_id != cls or not _params_close(got.params, params, tol):
                failures.append({"kind": "conjugate", "got": [got.class_id, got.params], "steps": _jsonable(conj)})
                continue
            back = replay(got.witness, moved)
            if np.max(np.abs(back - np.array(got.representative))) > 1e-9 * max(1.0, np.max(np.abs(moved))):
                failures.append({"kind": "witness", "steps": _jsonable(conj)})
        entries.append({
            "class_id": cls,
            "params": params,
            "representative": np.asarray(rows).tolist(),
            "idempotent": idempotent,
            "trials": trials,
            "failures": failures,
        })
    classes = {e["class_id"] for e in entries if e["idempotent"]}
    return {
        "dim": dim,
        "classes_total": 7 if dim == 1 else 12,
        "classes_idempotent": len(classes),
        "collisions": collisions,
        "entries": entries,
        "passed": all(e["idempotent"] and not e["failures"] for e in entries) and not collisions,
    }


def _jsonable(steps):
    return [[s[0], s[1].tolist()] if s[0] == "combine" else list(s) for s in steps]
