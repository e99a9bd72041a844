import pytest
from gmpy2 import mpq

from dtoda.dressing import (
    A_symmetry_check,
    ell1_commutes_check,
    ell_1,
    ell_a_roundtrip_check,
    psi0_ratio,
)
from dtoda.lax import LaxSystem, b10
from dtoda.ring import ConfigError


@pytest.fixture(scope="module", params=[4, 5], ids=["n4", "n5"])
def sys(request):
    return LaxSystem(request.param, 3, 3)


def test_ell1_commutes_with_root(sys):
    assert ell1_commutes_check(sys, 3)


@pytest.mark.parametrize("a", [2, 3])
def test_ell_a_roundtrip(sys, a):
    assert ell_a_roundtrip_check(sys, a, 3)


@pytest.mark.parametrize("a, k", [(2, 1), (3, 1), (2, 3), (3, 3)])
def test_A_symmetry(sys, a, k):
    assert A_symmetry_check(sys, a, k, 3)


def test_ell1_zero_mode():
    # Lambda^0 part: 2z/(1 - e^{2z}) applied to alpha, series -1 + z - z^2/3 + O(z^4)
    S = LaxSystem(4, 3, 3)
    R = S.ring
    X = ell_1(S, 3)
    assert all(j[0] <= 0 for j in X.terms)
    want = -R.gen("alpha") + R.eps(1) * R.gen("alpha", 1) + R.eps(2, mpq(-1, 3)) * R.gen("alpha", 2)
    assert X.coeff(0) == want


def test_psi0_ratio_inverts_b10():
    # for n = 4 the shift ratio of psi_{1,0} is e^{-beta}
    S = LaxSystem(4, 3, 3)
    assert (psi0_ratio(S, 1) * b10(S)).eq_mod_eps(S.ring.one())
    assert psi0_ratio(S, 0) == S.ring.one()


def test_eps_order_one_rejected():
    with pytest.raises(ConfigError):
        ell_1(LaxSystem(4, 1, 2), 2)
