import pytest
from hypothesis import given

from dtoda.lax import LaxSystem
from dtoda.opalg import E, EPLUS, adjoint, compose, invert_monic
from strategies import finite_ops, flat_elems

SYS = LaxSystem(4, 3, 3)
A, R = SYS.alg, SYS.ring
ops = finite_ops(SYS)
coeffs = flat_elems(R, max_terms=2, max_deriv=0)


def same(X, Y):
    return X.diff(Y) is None


@given(coeffs)
def test_shift_commutes_through_lambda(f):
    assert same(compose(A.mono(1), A.scalar(f)), A.series({(1, 0, 0): f.shift(1).flatten()}))


@given(coeffs)
def test_leibniz_for_d2(f):
    lhs = compose(A.mono(0, 1, 0), A.scalar(f))
    rhs = A.series({(0, 1, 0): f, (0, 0, 0): SYS.d2(f)})
    assert same(lhs, rhs)


@given(coeffs)
def test_adjoint_of_lambda_term(f):
    assert same(adjoint(A.series({(1, 0, 0): f})), A.series({(-1, 0, 0): f.shift(-1).flatten()}))


@given(ops, ops, ops)
def test_compose_associative(x, y, z):
    assert same(compose(compose(x, y), z), compose(x, compose(y, z)))


@given(ops, ops)
def test_compose_distributes(x, y):
    z = A.mono(0, 1, 0) + A.mono(-1)
    assert same(compose(z, x + y), compose(z, x) + compose(z, y))


@given(ops, ops)
def test_adjoint_anti_homomorphism(x, y):
    assert same(adjoint(compose(x, y)), compose(adjoint(y), adjoint(x)))


@given(ops)
def test_adjoint_involution(x):
    assert same(adjoint(adjoint(x)), x)


def test_base_derivations_commute():
    d2, d3 = A.mono(0, 1, 0), A.mono(0, 0, 1)
    assert same(compose(d2, d3), compose(d3, d2))


@pytest.mark.parametrize("name, axis", [("H2", 2), ("H3", 3)])
def test_invert_monic_doubly_laurent(name, axis):
    ctx = [-1, 0, 0]
    ctx[axis - 1] = -1
    cut = [-5, None, None]
    cut[axis - 1] = -4
    H = getattr(SYS, name).with_ctx(tuple(ctx))
    Hinv = invert_monic(H, axis, tuple(cut))
    assert compose(H, Hinv, tuple(cut)).eq_window(A.one(tuple(ctx)))
    assert compose(Hinv, H, tuple(cut)).eq_window(A.one(tuple(ctx)))


def test_context_guarantee_in_json():
    X = SYS.lax_projection("+", 2)
    assert X.ctx == EPLUS
    assert X.to_json()["guarantee"]
    assert A.one(E).is_zero() is False
