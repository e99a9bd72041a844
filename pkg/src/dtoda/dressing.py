"""Logarithmic dressing data l_1, l_2, l_3 and the operators A_{i,k}, computed inside the
coefficient ring without materializing the dressing operators themselves."""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .opalg import E2, E3, EPLUS, ExtOpSeries, compose, invert_monic
from .ring import ConfigError, apply_dx_symbol, ring_exp
from .symbols import DxSymbol


def _check_eps(sys):
    if sys.eps_order < 2:
        raise ConfigError("the dressing data needs eps_order >= 2")


def ratio_symbol(n, j, prec):
    """Symbol of (e^{jz} - 1)(n-2)/(1 - e^{(n-2)z}); applied to alpha it gives log(psi0[j]/psi0)."""
    num = (DxSymbol.exp(j, prec) - 1) * (n - 2)
    den = 1 - DxSymbol.exp(n - 2, prec)
    return num / den


def psi0_ratio(sys, j):
    """r_j = psi_{1,0}[j] / psi_{1,0} as an element of the ring."""
    if j == 0:
        return sys.ring.one()
    return ring_exp(0, apply_dx_symbol(ratio_symbol(sys.n, j, sys.prec), sys.alpha))


def ell_tilde(Lt, depth):
    """l~ = sum_{m>=1} a_m Lambda^-m for a monic L~ = Lambda + ..., via the a_m recursion."""
    alg = Lt.alg
    R = alg.ring
    prec = max(16, R.N + 2)
    powers = {1: Lt}
    for m in range(2, depth + 1):
        powers[m] = compose(powers[m - 1], Lt)
    a = {}
    for m in range(1, depth + 1):
        P = powers[m]
        den = 1 - DxSymbol.exp(m, prec)
        acc = apply_dx_symbol(DxSymbol.z(prec) / den, P.coeff(0))
        for i in range(1, m):
            phi = (1 - DxSymbol.exp(i, prec)) / den
            acc = acc - apply_dx_symbol(phi, a[i] * P.coeff(i).shift(-i))
        a[m] = acc
    return alg.series({(-m, 0, 0): f for m, f in a.items()}, EPLUS, (-depth, None, None))


def ell_1(sys, depth=None):
    """l_1 with eps d_x - l_1 = S_1 eps d_x S_1^-1, as a series in Lambda^-1."""
    _check_eps(sys)
    depth = sys.depth if depth is None else depth
    key = ("ell1", depth)
    hit = sys.cached(*key)
    if hit is not None:
        return hit
    alg = sys.alg
    L1 = sys.root_L1(depth + 1)
    # L~ = psi0^-1 L1 psi0
    Lt = alg.series(
        {j: f * psi0_ratio(sys, j[0]) for j, f in L1.terms.items()},
        EPLUS,
        L1.cut,
    )
    lt = ell_tilde(Lt, depth)
    n, prec = sys.n, sys.prec
    phi = DxSymbol.z(prec) * (n - 2) / (1 - DxSymbol.exp(n - 2, prec))
    terms = {(0, 0, 0): apply_dx_symbol(phi, sys.alpha)}
    for (m, _, _), f in lt.terms.items():
        terms[(m, 0, 0)] = f * psi0_ratio(sys, m).inverse()
    out = alg.series(terms, EPLUS, (-depth, None, None))
    sys._roots[key] = out
    return out


def _axis_ctx(a):
    return (E2, 1) if a == 2 else (E3, 2)


def _jd(a, e):
    return (0, e, 0) if a == 2 else (0, 0, e)


def log_target(sys, a, depth):
    """(d_a + q_a)^-1 (d_a - q_a) expanded in d_a^-1."""
    alg, R = sys.alg, sys.ring
    ctx, ax = _axis_ctx(a)
    qa = sys.q2 if a == 2 else sys.q3
    cut = [None, None, None]
    cut[ax] = -depth
    cut = tuple(cut)
    plus = alg.series({_jd(a, 1): R.one(), (0, 0, 0): qa}, ctx)
    minus = alg.series({_jd(a, 1): R.one(), (0, 0, 0): -qa}, ctx)
    deeper = tuple(None if c is None else c - 1 for c in cut)
    return compose(invert_monic(plus, a, deeper), minus, cut)


def exp_series(lt, terms):
    """sum_{m>=1} l~^(m)/m! with l~^(1) = l~ and l~^(m+1) = l~ l~^(m) + eps d_x l~^(m)."""
    acc = lt
    cur = lt
    for m in range(2, terms + 1):
        cur = compose(lt, cur, lt.cut) + cur.d_x()
        if not cur.terms:
            break
        acc = acc + cur.scale(mpq(1, factorial(m)))
    return acc


def ell_a(sys, a, depth=None):
    """l_a = -l~_a, l~_a determined by sum_{m>=0} l~_a^(m)/m! = (d_a+q_a)^-1 (d_a-q_a)."""
    _check_eps(sys)
    depth = sys.depth if depth is None else depth
    key = (f"ell{a}", depth)
    hit = sys.cached(*key)
    if hit is not None:
        return hit
    alg = sys.alg
    ctx, ax = _axis_ctx(a)
    cut = [None, None, None]
    cut[ax] = -depth
    cut = tuple(cut)
    target = log_target(sys, a, depth)
    prec = sys.prec
    inv_phi = DxSymbol.z(prec) / (DxSymbol.exp(1, prec) - 1)
    coeffs = {}
    for i in range(1, depth + 1):
        lt = alg.series({_jd(a, -k): f for k, f in coeffs.items()}, ctx, cut)
        E = exp_series(lt, i + sys.eps_order) if coeffs else alg.zero(ctx, cut)
        rhs = target.coeff(*_jd(a, -i)) - E.coeff(*_jd(a, -i))
        coeffs[i] = apply_dx_symbol(inv_phi, rhs)
    out = alg.series({_jd(a, -k): -f for k, f in coeffs.items()}, ctx, cut)
    sys._roots[key] = out
    return out


# the operators A_{i,k} ------------------------------------------------------


def _power(X, p):
    out = X.alg.one(X.ctx)
    for _ in range(p):
        out = compose(out, X)
    return out


def build_A(sys, i, k, depth=None):
    """A^+_{1,k} (i='1+'), A^-_{1,k} (i='1-') or A_{a,k} (i=2, 3) as an operator affine in eps d_x."""
    depth = sys.depth if depth is None else depth
    i = str(i)
    alg = sys.alg
    n = sys.n
    if i in ("1+", "1-"):
        p = (n - 2) * k
        L1 = sys.root_L1(depth + p)
        P = _power(L1, p)
        ell = ell_1(sys, depth + p)
        c = mpq(1, (n - 2) ** k * factorial(k))
        rest = ell + alg.scalar(sys.ring.const(sys.h(k)), EPLUS) if k else ell
        Ap = ExtOpSeries(alg, {0: -compose(P, rest).scale(c), 1: P.scale(c)})
        if i == "1+":
            return Ap
        return conj_minus_ext(sys, Ap, depth)
    a = int(i)
    La = sys.root_La(a, depth + 2 * k)
    P = _power(La, 2 * k)
    ell = ell_a(sys, a, depth + 2 * k)
    c = mpq(1, 2 ** k * factorial(k))
    return ExtOpSeries(alg, {0: -compose(P, ell).scale(c), 1: P.scale(c)})


def conj_minus_ext(sys, X, depth):
    """iota_Lambda (Lambda - Lambda^-1)^-1 . X^# . (Lambda - Lambda^-1) for X affine in eps d_x."""
    from .lax import lm_inverse_plus
    from .opalg import EMINUS

    alg = sys.alg
    inv = ExtOpSeries.lift(lm_inverse_plus(sys, depth + 3))
    lm = ExtOpSeries.lift(alg.from_lambda_poly({1: 1, -1: -1}, EMINUS))
    Xh = X.adjoint()
    return inv.compose(Xh, (depth + 1, None, None)).compose(lm, (depth, None, None))


def A_symmetry_check(sys, a, k, depth=None):
    """A_{a,k}^# = -d_a A_{a,k} d_a^-1 on the window."""
    A = build_A(sys, a, k, depth)
    alg = sys.alg
    ctx, _ = _axis_ctx(a)
    one = sys.ring.one()
    d = ExtOpSeries.lift(alg.series({_jd(a, 1): one}, ctx))
    dinv = ExtOpSeries.lift(alg.series({_jd(a, -1): one}, ctx))
    cut = A.parts[0].cut
    rhs = -(d.compose(A, cut).compose(dinv, cut))
    return A.adjoint().eq_window(rhs)


def ell1_commutes_check(sys, depth=None):
    """[eps d_x - l_1, L_1] = 0, i.e. eps d_x(L_1) = [l_1, L_1], on the window."""
    depth = sys.depth if depth is None else depth
    L1 = sys.root_L1(depth + 1)
    ell = ell_1(sys, depth + 1)
    cut = (1 - depth, None, None)
    lhs = L1.d_x()
    rhs = compose(ell, L1, cut) - compose(L1, ell, cut)
    return lhs.eq_window(rhs, cut)


def ell_a_roundtrip_check(sys, a, depth=None):
    """sum_{m>=0} l~_a^(m)/m! reproduces (d_a+q_a)^-1 (d_a-q_a) on the window."""
    depth = sys.depth if depth is None else depth
    lt = -ell_a(sys, a, depth)
    E = exp_series(lt, depth + sys.eps_order + 1) + sys.alg.one(lt.ctx)
    return E.eq_window(log_target(sys, a, depth))


__all__ = [
    "ell_1",
    "ell_a",
    "ell_tilde",
    "build_A",
    "conj_minus_ext",
    "psi0_ratio",
    "A_symmetry_check",
    "ell1_commutes_check",
    "ell_a_roundtrip_check",
]
