import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from dtoda.ring import ConfigError, Ring, apply_dx_symbol, eq_mod_eps
from dtoda.symbols import DxSymbol
from strategies import flat_elems, ring_elems

R = Ring(4, 3)
R5 = Ring(5, 3)
elems = ring_elems(R)


def test_generators_and_config():
    assert R.gen("q2") == R.gen("q2")
    assert R.gen("q2") != R.gen("q3")
    assert R5.gen("a1") is not None


@pytest.mark.parametrize(
    "make",
    [lambda: Ring(3, 3), lambda: Ring(4, 0), lambda: R.gen("zz"), lambda: R.gen("a1")],
    ids=["n<4", "eps_order=0", "unknown", "a1 absent for n=4"],
)
def test_config_errors(make):
    with pytest.raises(ConfigError):
        make()


# Taylor expansions frozen from an independent sympy series expansion.
def test_flatten_shift_taylor():
    q = R.gen("q2")
    expected = q + R.eps(1) * R.gen("q2", 1) + R.eps(2, mpq(1, 2)) * R.gen("q2", 2)
    assert q.shift(1).flatten() == expected


def test_flatten_exponential_taylor():
    e, a1, a2 = R.exp_alpha(1), R.gen("alpha", 1), R.gen("alpha", 2)
    expected = e + R.eps(1) * e * a1 + R.eps(2, mpq(1, 2)) * e * (a2 + a1 * a1)
    assert R.exp_alpha(1, 1).flatten() == expected


@pytest.mark.parametrize(
    "symbol, c0, c1, c2",
    [
        ("inv(1+L)", mpq(1, 2), mpq(-1, 4), 0),
        ("L", 1, 1, mpq(1, 2)),
        ("(L-1)/(L+1)", 0, mpq(1, 2), 0),
    ],
)
def test_apply_dx_symbol(symbol, c0, c1, c2):
    lam = DxSymbol.exp(1, 8)
    phi = {"inv(1+L)": (lam + 1).inv(), "L": lam, "(L-1)/(L+1)": (lam - 1) / (lam + 1)}[symbol]
    q = R.gen("q2")
    got = apply_dx_symbol(phi, q)
    want = R.const(c0) * q + R.eps(1, c1) * R.gen("q2", 1) + R.eps(2, c2) * R.gen("q2", 2)
    assert got == want


def test_unit_inverse():
    u = 1 + R.eps(1) * R.gen("c2")
    assert (u * u.inverse()).eq_mod_eps(R.one())


def test_eps_truncation():
    assert (R.eps(2) * R.eps(1)).is_zero()


@given(elems, elems, elems)
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == R.zero()
    assert x * R.one() == x


@given(elems, elems, st.integers(-2, 2), st.integers(-2, 2))
def test_shift_is_ring_automorphism(x, y, m, k):
    assert (x * y).shift(m) == x.shift(m) * y.shift(m)
    assert (x + y).shift(m) == x.shift(m) + y.shift(m)
    assert x.shift(m).shift(k) == x.shift(m + k)


@given(elems, elems)
def test_dx_is_derivation(x, y):
    assert (x * y).d_x() == x.d_x() * y + x * y.d_x()


@given(elems, st.integers(-2, 2))
def test_dx_commutes_with_shift(x, m):
    assert x.shift(m).d_x() == x.d_x().shift(m)


@given(elems, st.integers(-2, 2))
def test_flatten_shift_commutation(x, m):
    assert x.shift(m).flatten() == x.flatten().shift(m).flatten()


@given(elems, elems)
def test_flatten_is_ring_hom(x, y):
    assert (x * y).flatten() == (x.flatten() * y.flatten()).flatten()
    assert (x + y).flatten() == x.flatten() + y.flatten()


@given(elems)
def test_flatten_commutes_with_dx(x):
    assert x.d_x().flatten() == x.flatten().d_x()


@given(flat_elems(R))
def test_flatten_idempotent_on_flat(x):
    assert x.flatten() == x
    assert eq_mod_eps(x, x.flatten())


@given(flat_elems(R, max_terms=2))
def test_shift_is_exp_eps_dx(x):
    lam = DxSymbol.exp(1, 8)
    assert x.shift(1).flatten() == apply_dx_symbol(lam, x)
