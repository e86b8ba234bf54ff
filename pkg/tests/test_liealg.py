import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pvesym import expr as E
from pvesym.liealg import (BASIS_NAMES, AlgebraElement, PointTransformation, a0_structure, adjoint_basis,
                           adjoint_expm, adjoint_ode, adjoint_series, bracket, decompose, flow, lie_bracket,
                           pushforward, structure_constants, sym1_basis, sym2_basis)
from pvesym.pde import PVEParams, beta_transform, sym1_to_sym2

coords = st.lists(st.fractions(-3, 3, max_denominator=4), min_size=6, max_size=6).map(tuple)


def el(name):
    return AlgebraElement.basis(name)


def test_nonzero_commutators():
    nz = a0_structure().nonzero()
    assert nz[("vt", "D", "vt")] == 1
    assert nz[("vpsi", "D", "vpsi")] == -1
    assert nz[("vx", "vr", "vy")] == 1
    assert nz[("vy", "vr", "vx")] == -1
    # the four relations above plus their antisymmetric partners
    assert len(nz) == 8


def test_structure_tensor_from_vector_fields_matches_cached():
    assert structure_constants(sym2_basis()).tensor == a0_structure().tensor


def test_jacobi_and_antisymmetry():
    s = a0_structure()
    assert s.is_antisymmetric()
    assert s.jacobi_defect() == 0


def test_bracket_examples():
    assert bracket(el("vt"), el("D")) == el("vt")
    assert bracket(el("vx"), el("vy")).is_zero()
    assert bracket(el("vy"), el("vr")) == -1 * el("vx")


@settings(max_examples=60, deadline=None)
@given(coords, coords, coords)
def test_bracket_jacobi_identity_exact(a, b, c):
    u, v, w = AlgebraElement(a), AlgebraElement(b), AlgebraElement(c)
    total = bracket(u, bracket(v, w)) + bracket(v, bracket(w, u)) + bracket(w, bracket(u, v))
    assert total.is_zero()


@settings(max_examples=30, deadline=None)
@given(coords, coords)
def test_element_bracket_agrees_with_vector_fields(a, b):
    u, w = AlgebraElement(a), AlgebraElement(b)
    field = lie_bracket(u.to_vector_field(), w.to_vector_field())
    assert field.equals(bracket(u, w).to_vector_field())


def test_decompose_recovers_coordinates():
    v = AlgebraElement((1, Fraction(1, 2), -2, 0, 3, 1)).to_vector_field()
    assert [Fraction(c) for c in decompose(v, sym2_basis())] == [1, Fraction(1, 2), -2, 0, 3, 1]


def test_parse_element():
    assert AlgebraElement.parse("vr") == el("vr")
    assert AlgebraElement.parse("0,0,0,1,0,2").coords == (0, 0, 0, 1, 0, 2)
    with pytest.raises(ValueError):
        AlgebraElement.parse("vz")


def test_adjoint_series_d_on_vt():
    out = adjoint_series(el("D"), el("vt"), 1.0)
    assert np.allclose(out.array, [0, 0, math.e, 0, 0, 0], rtol=1e-14)


@pytest.mark.parametrize("v", range(6))
@pytest.mark.parametrize("w", range(6))
@pytest.mark.parametrize("eps", [0.1, 1.0, 2.0])
def test_closed_form_matches_series(v, w, eps):
    series = adjoint_series(AlgebraElement.basis(v), AlgebraElement.basis(w), eps).array
    closed = adjoint_basis(v, eps, AlgebraElement.basis(w).array)
    assert np.max(np.abs(series - closed)) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.lists(st.floats(-1, 1), min_size=6, max_size=6),
       st.floats(-1.5, 1.5))
def test_series_ode_expm_agree(a, b, eps):
    v, w = AlgebraElement(tuple(a)), AlgebraElement(tuple(b))
    s = adjoint_series(v, w, eps).array
    assert np.allclose(s, adjoint_ode(v, w, eps).array, atol=1e-9)
    assert np.allclose(s, adjoint_expm(v, w, eps).array, atol=1e-12)


def test_adjoint_is_a_group_action():
    v, w = AlgebraElement((1, 1, 0, 2, -1, 0)), AlgebraElement((0, 0.5, 1, 0, 0, 3))
    two_steps = adjoint_series(v, adjoint_series(v, w, 0.4), 0.7).array
    assert np.allclose(two_steps, adjoint_series(v, w, 1.1).array, atol=1e-12)


def test_flow_is_invertible_and_generated_by_field():
    v = AlgebraElement((1, 2, -1, Fraction(1, 2), 3, 1))
    T = flow(v, Fraction(3, 10))
    assert T.check_inverse()
    eps = E.Sym("eps")
    Tsym = flow(v, eps)
    gen = [E.subs(E.diff(f, "eps"), {"eps": 0}) for f in Tsym.forward]
    for g, c in zip(gen, v.to_vector_field().coeffs):
        assert E.equal_expr(g, c).equal


def test_identity_transformation():
    T = PointTransformation.identity()
    assert T.apply({"t": 1.0, "x": 2.0, "y": 3.0, "psi": 4.0}) == {"t": 1.0, "x": 2.0, "y": 3.0, "psi": 4.0}


@pytest.mark.parametrize("F,beta", [(1, 1), (2, -3), (-1, Fraction(1, 2))])
def test_pushforward_of_beta_algebra(F, beta):
    """D, v_r, v_x, v_psi map to their namesakes; v_t and v_y pick up extra terms."""
    B = beta_transform(PVEParams(F, beta))
    k = Fraction(beta) / F
    images = [pushforward(v, B) for v in sym1_basis(F, beta)]
    for i in (0, 1, 3, 5):
        assert images[i].equals(sym2_basis()[i])
    expected_vt = AlgebraElement((0, 0, 1, k, 0, 0)).to_vector_field()
    expected_vy = AlgebraElement((0, 0, 0, 0, 1, -k)).to_vector_field()
    assert images[2].equals(expected_vt)
    assert images[4].equals(expected_vy)
    for i in range(6):
        target = sym1_to_sym2(AlgebraElement.basis(i), PVEParams(F, beta)).to_vector_field()
        assert images[i].equals(target)


def test_coordinate_map_is_an_isomorphism():
    """The beta != 0 brackets, pushed through sym1_to_sym2, are the beta = 0 brackets."""
    F, beta = 2, -3
    params = PVEParams(F, beta)
    basis = sym1_basis(F, beta)
    for i in range(6):
        for j in range(6):
            coeffs = decompose(lie_bracket(basis[i], basis[j]), basis)
            lhs = sym1_to_sym2(AlgebraElement(tuple(Fraction(c) for c in coeffs)), params)
            rhs = bracket(sym1_to_sym2(AlgebraElement.basis(i), params),
                          sym1_to_sym2(AlgebraElement.basis(j), params))
            assert lhs == rhs, (BASIS_NAMES[i], BASIS_NAMES[j])


def test_sym1_requires_nonzero_F():
    with pytest.raises(ValueError):
        sym1_basis(0, 1)
