"""The Lax operator, the ideal generators, the base derivations d2, d3 and the roots L1, L2, L3."""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

from .opalg import EMINUS, EPLUS, OpAlgebra, adjoint, compose, iota_expand
from .projection import IdealData, Projector
from .ring import Derivation, Ring, apply_dx_symbol, solve_linear
from .symbols import DxSymbol


def harmonic(k, n):
    """h_k = (1 + 1/2 + ... + 1/k)/(n-2)."""
    s = sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))
    return mpq(s.numerator, s.denominator) / (n - 2)


def build_lax(alg, fields):
    """The Lax operator for the fields (a dict with keys a[i], c2, c3) over ``alg``."""
    n = fields["n"]
    R = alg.ring
    one = R.one()
    acc = alg.zero()
    lm = alg.from_lambda_poly({1: 1, -1: -1})
    for i in range(1, n - 2):
        ai = fields["a"][i]
        part = alg.series({(i, 0, 0): ai}) - alg.series({(-i, 0, 0): ai.shift(-i)})
        acc = acc + compose(part, lm)
    half = R.const("1/2")
    quarter = R.const("1/4")
    c2, c3 = fields["c2"], fields["c3"]
    acc = acc + alg.series({(0, 2, 0): half, (0, 0, 2): half})
    d = (c2 - c3) * quarter
    acc = acc + alg.series({(1, 0, 0): d, (-1, 0, 0): d, (0, 0, 0): (c2 + c3) * half})
    del one
    return acc


class LaxSystem:
    """Lax operator, generators of the ideal, derivations and roots for a given n."""

    def __init__(self, n=4, eps_order=4, depth=4, flat=True):
        self.n = n
        self.flat = flat
        self.depth = depth
        self.ring = R = Ring(n, eps_order)
        self.prec = max(16, eps_order + 2)
        self.q2, self.q3 = R.gen("q2"), R.gen("q3")
        self.c2, self.c3 = R.gen("c2"), R.gen("c3")
        self.alpha = R.gen("alpha")
        self.a = {i: R.gen(f"a{i}") for i in range(1, n - 3)}
        self.a[n - 3] = R.exp_alpha(n - 2) * mpq(1, n - 2)
        lam = DxSymbol.exp(1, self.prec)
        self.q1 = apply_dx_symbol(DxSymbol.const(-2, self.prec) / (lam + 1), self.q2 * self.q3)
        self.fields = {"n": n, "a": self.a, "c2": self.c2, "c3": self.c3}
        self.qtable = {
            2: {"q2": (self.c2 - self.c2.shift(1)) * R.const("1/2"), "q3": self.q1 + self.q2 * self.q3},
            3: {"q3": (self.c3 - self.c3.shift(1)) * R.const("1/2"), "q2": self.q1 + self.q2 * self.q3},
        }
        t2 = bootstrap_derivation(self, 2)
        t3 = bootstrap_derivation(self, 3)
        self.d2 = Derivation(R, t2, "d2")
        self.d3 = Derivation(R, t3, "d3")
        self.alg = OpAlgebra(R, self.d2, self.d3, depth, flat)
        self.ideal = IdealData(self.alg, self.q1, self.q2, self.q3)
        self.L = build_lax(self.alg, self.fields)
        self.H1, self.H2, self.H3 = self.ideal.H
        self._proj = {}
        self._roots = {}

    def cached(self, name, depth):
        """A cached root (or l) of depth >= ``depth``, truncated to ``depth``; None if absent."""
        hit = self._roots.get((name, depth))
        if hit is not None:
            return hit
        deeper = sorted(k[1] for k in self._roots if len(k) == 2 and k[0] == name and k[1] > depth)
        for d in deeper:
            X = self._roots[(name, d)]
            cut = [None if c is None else (depth if c > 0 else -depth) for c in X.cut]
            if all(c is None or abs(c) == d for c in X.cut):
                out = X.truncate(tuple(cut))
                self._roots[(name, depth)] = out
                return out
        return None

    @property
    def eps_order(self):
        return self.ring.N

    def h(self, k):
        return harmonic(k, self.n)

    def projector(self, kind, depth=None, witness=False, order=None):
        from .projection import DEFAULT_ORDER

        depth = self.depth + 2 if depth is None else depth
        key = (kind, depth, witness, order)
        p = self._proj.get(key)
        if p is None:
            p = self._proj[key] = Projector(self.ideal, kind, depth, order or DEFAULT_ORDER, witness)
        return p

    def Q(self, a, direction=-1, depth=None):
        return self.ideal.Q(a, direction, self.depth + 2 if depth is None else depth)

    def lax_projection(self, kind, depth=None):
        """pi_kind of the Lax operator."""
        return self.projector(kind, depth)(self.L)

    # roots
    def root_L1(self, depth=None):
        return root_L1(self, depth)

    def root_La(self, a, depth=None):
        return root_La(self, a, depth)

    def root_L1_minus(self, depth=None):
        return root_L1_minus(self, depth)


def _partial_q_derivation(sys, a):
    return Derivation(sys.ring, sys.qtable[a], f"d{a}(q)")


def bootstrap_derivation(sys, a):
    """Solve (d_a(L) - pi_+([Q_a, L]))_{1,>=0} = 0 for d_a on alpha, a_i, c2, c3."""
    R = sys.ring
    n = sys.n
    tag = f"d{a}"
    P_alpha = R.gen(R.placeholder(f"{tag}_alpha"))
    P_a = {i: R.gen(R.placeholder(f"{tag}_a{i}")) for i in range(1, n - 3)}
    Dd = R.gen(R.placeholder(f"{tag}_D"))
    Sd = R.gen(R.placeholder(f"{tag}_S"))
    half = R.const("1/2")
    table = dict(sys.qtable[a])
    table["alpha"] = P_alpha
    for i in range(1, n - 3):
        table[f"a{i}"] = P_a[i]
    table["c2"] = (Sd + Dd) * half
    table["c3"] = (Sd - Dd) * half
    full = Derivation(R, table, f"{tag}-bootstrap")
    other = _partial_q_derivation(sys, 5 - a)
    alg = OpAlgebra(R, full, other) if a == 2 else OpAlgebra(R, other, full)
    ideal = IdealData(alg, sys.q1, sys.q2, sys.q3)
    W = n + 1
    proj = Projector(ideal, "+", W)
    L = build_lax(alg, sys.fields)
    Qa = ideal.Q(a, -1, W)
    cut = (-W, None, None)
    C = compose(Qa, L, cut) - compose(L, Qa, cut)
    piC = proj(C)
    dL = L.derive(full)
    eqs = {k: dL.coeff(k) - piC.coeff(k) for k in range(n - 2, -1, -1)}
    unknowns = [(n - 2, P_alpha)] + [(k, P_a[k - 1]) for k in range(n - 3, 1, -1)] + [(1, Dd), (0, Sd)]
    sol = {}
    for k, u in unknowns:
        (s,) = [f[0][0] for (m, _) in u.terms for f in m]
        eq = eqs[k].subs(sol) if sol else eqs[k]
        sol[s] = solve_linear(eq, s)
    for k in eqs:
        res = eqs[k].subs(sol)
        if not res.flatten().is_zero():
            raise ArithmeticError(f"bootstrap for d{a}: residual at Lambda^{k}")
    sym = {name: R.sym(f"{tag}_{name}") for name in ["alpha", "D", "S"]}
    out = dict(sys.qtable[a])
    out["alpha"] = sol[sym["alpha"]]
    for i in range(1, n - 3):
        out[f"a{i}"] = sol[R.sym(f"{tag}_a{i}")]
    S, D = sol[sym["S"]], sol[sym["D"]]
    out["c2"] = (S + D) * half
    out["c3"] = (S - D) * half
    return out


# roots ---------------------------------------------------------------------


def _phi_b10(n, prec):
    lam = DxSymbol.exp(1, prec)
    return (lam - 1) * (n - 2) / (DxSymbol.exp(n - 2, prec) - 1)


def b10(sys):
    """b_{1,0} = exp((Lambda-1)(n-2)/(Lambda^{n-2}-1) alpha)."""
    from .ring import ring_exp

    phi = _phi_b10(sys.n, sys.prec)
    return ring_exp(0, apply_dx_symbol(phi, sys.alpha))


def root_L1(sys, depth=None):
    """L1 = b0 Lambda + sum_{i>=1} b_i Lambda^{1-i} with L1^{n-2}/(n-2) = pi_+(L)."""
    depth = sys.depth if depth is None else depth
    key = ("L1", depth)
    hit = sys.cached(*key)
    if hit is not None:
        return hit
    R = sys.ring
    n = sys.n
    alg = sys.alg
    target = sys.lax_projection("+", depth + 2)
    coeffs = {0: b10(sys)}
    for i in range(1, depth + 2):
        u = R.placeholder(f"L1_b{i}")
        terms = {(1 - j, 0, 0): c for j, c in coeffs.items()}
        terms[(1 - i, 0, 0)] = R.gen(u)
        cut = (1 - i, None, None)
        X = alg.series(terms, EPLUS, cut)
        P = X
        for _ in range(n - 3):
            P = compose(P, X)
        eq = P.coeff(n - 2 - i) * mpq(1, n - 2) - target.coeff(n - 2 - i)
        coeffs[i] = solve_linear(eq, u)
    L1 = alg.series({(1 - j, 0, 0): c for j, c in coeffs.items()}, EPLUS, (1 - (depth + 1), None, None))
    sys._roots[key] = L1
    return L1


def root_La(sys, a, depth=None):
    """L_a = d_a + sum_{i>=2} b_{a,i} d_a^{1-i} with L_a^2/2 = pi_a(L)."""
    depth = sys.depth if depth is None else depth
    key = (f"L{a}", depth)
    hit = sys.cached(*key)
    if hit is not None:
        return hit
    R = sys.ring
    alg = sys.alg
    ax = a - 1
    ctx = [0, 0, 0]
    ctx[ax] = -1
    ctx = tuple(ctx)
    target = sys.lax_projection(str(a), depth + 3)

    def j(e):
        t = [0, 0, 0]
        t[ax] = e
        return tuple(t)

    coeffs = {0: R.one()}
    for i in range(1, depth + 2):
        u = R.placeholder(f"L{a}_b{i}")
        terms = {j(1 - k): c for k, c in coeffs.items()}
        terms[j(1 - i)] = R.gen(u)
        cut = [None, None, None]
        cut[ax] = 1 - i
        X = alg.series(terms, ctx, tuple(cut))
        c2 = [None, None, None]
        c2[ax] = 2 - i
        P = compose(X, X, tuple(c2))
        eq = P.coeff(*j(2 - i)) * R.const("1/2") - target.coeff(*j(2 - i))
        coeffs[i] = solve_linear(eq, u)
    cut = [None, None, None]
    cut[ax] = 1 - (depth + 1)
    La = alg.series({j(1 - k): c for k, c in coeffs.items()}, ctx, tuple(cut))
    sys._roots[key] = La
    return La


def lm_inverse_plus(sys, cut):
    """iota_Lambda (Lambda - Lambda^-1)^-1, expanded toward positive powers."""
    return iota_expand(sys.alg, "inv(L-Linv)", 1, cut)


def conj_minus(sys, X, cut):
    """iota_Lambda (Lambda-Lambda^-1)^-1 . X^# . (Lambda-Lambda^-1) for X in E+ (result in E-)."""
    alg = sys.alg
    inv = lm_inverse_plus(sys, cut + 3)
    lm = alg.from_lambda_poly({1: 1, -1: -1}, EMINUS)
    Xh = adjoint(X)
    return compose(compose(inv, Xh, (cut + 1, None, None)), lm, (cut, None, None))


def root_L1_minus(sys, depth=None):
    depth = sys.depth if depth is None else depth
    key = ("L1-", depth)
    hit = sys.cached(*key)
    if hit is not None:
        return hit
    L1 = root_L1(sys, depth + 3)
    r = conj_minus(sys, L1, depth)
    sys._roots[key] = r
    return r


# structural identities -----------------------------------------------------


def _lm_conj(sys, X, direction, cut):
    """(Lambda-Lambda^-1) . X . (Lambda-Lambda^-1)^-1 expanded at Lambda^direction."""
    alg = sys.alg
    ctx = (direction, 0, 0)
    lm = alg.from_lambda_poly({1: 1, -1: -1}, ctx)
    inv = iota_expand(alg, "inv(L-Linv)", direction, cut + 2 * direction)
    return compose(compose(lm, X.with_ctx(ctx), (cut - direction, None, None)), inv, (cut, None, None))


def decomposition_parts(sys, direction=-1, depth=None):
    """(A, C, Q) with L = A + C + Q, C and Q expanded at Lambda^direction."""
    depth = sys.depth + 2 if depth is None else depth
    alg, R = sys.alg, sys.ring
    ctx = (direction, 0, 0)
    cut = (direction * depth, None, None)
    lm = alg.from_lambda_poly({1: 1, -1: -1})
    A = alg.zero()
    for i in range(1, sys.n - 2):
        ai = sys.a[i]
        A = A + compose(alg.series({(i, 0, 0): ai, (-i, 0, 0): -ai.shift(-i)}), lm)
    deep = (cut[0] + 2 * direction, None, None)
    inv_m = iota_expand(alg, "inv(L-1)", direction, deep[0])
    inv_p = iota_expand(alg, "inv(L+1)", direction, deep[0])
    quarter = R.const("1/4")

    def mid(c):
        return alg.series({(1, 0, 0): c.shift(1) * quarter, (-1, 0, 0): -c * quarter}, ctx)

    C = compose(compose(inv_m, mid(sys.c2), deep), alg.from_lambda_poly({1: 1, 0: 1}, ctx), cut)
    C = C - compose(compose(inv_p, mid(sys.c3), deep), alg.from_lambda_poly({1: 1, 0: -1}, ctx), cut)
    Q2, Q3 = sys.Q(2, direction, depth + 2), sys.Q(3, direction, depth + 2)
    half = R.const("1/2")
    C = C + (compose(Q2, Q2, cut) + compose(Q3, Q3, cut)).scale(half)
    Qq = alg.zero(ctx)
    for a, Qa in ((2, Q2), (3, Q3)):
        j = (0, 1, 0) if a == 2 else (0, 0, 1)
        d = alg.mono(*j, ctx=ctx)
        Qq = Qq + compose(d + Qa, d - Qa, cut)
    Qq = Qq.scale(half)
    return A, C, Qq


def _explicit_cofactor_check(sys, a):
    """H_a L = (Lambda -+ 1) A' H_a + K H_a + d_b(q_a) H_b exactly, A' the conjugated A part."""
    alg, R = sys.alg, sys.ring
    quarter, half = R.const("1/4"), R.const("1/2")
    core = alg.zero()
    for i in range(1, sys.n - 2):
        ai = sys.a[i]
        core = core + alg.series({(i, 0, 0): ai, (-i, 0, 0): -ai.shift(-i)})
    if a == 2:
        left, right = alg.from_lambda_poly({1: 1, 0: -1}), alg.from_lambda_poly({0: 1, -1: 1})
        Ha, Hb, db = sys.H2, sys.H3, sys.d3
        qa = sys.q2
    else:
        left, right = alg.from_lambda_poly({1: 1, 0: 1}), alg.from_lambda_poly({0: 1, -1: -1})
        Ha, Hb, db = sys.H3, sys.H2, sys.d2
        qa = sys.q3
    Aconj = compose(compose(left, core), right)
    D = sys.c2 - sys.c3
    K = alg.series({
        (0, 2, 0): half,
        (0, 0, 2): half,
        (1, 0, 0): D.shift(1) * quarter,
        (-1, 0, 0): D * quarter,
        (0, 0, 0): (sys.c2 + sys.c3 + sys.c2.shift(1) + sys.c3.shift(1)) * quarter,
    })
    rhs = compose(Aconj + K, Ha) + compose(alg.scalar(db(qa)), Hb)
    return compose(Ha, sys.L).eq_window(rhs)


def structural_checks(sys, depth=None):
    """Boolean report over the structural identities of the Lax operator."""
    from .projection import zero_curvature_check

    depth = sys.depth if depth is None else depth
    alg, R = sys.alg, sys.ring
    n = sys.n
    report = {}
    report["zero_curvature(+)"] = zero_curvature_check(sys.ideal, depth + 2, -1)
    report["zero_curvature(-)"] = zero_curvature_check(sys.ideal, depth + 2, 1)
    half = R.const("1/2")
    for direction, tag in ((-1, "+"), (1, "-")):
        A, C, Qq = decomposition_parts(sys, direction, depth + 2)
        total = A.with_ctx((direction, 0, 0)) + C + Qq
        report[f"decomposition({tag})"] = total.eq_window(sys.L.with_ctx((direction, 0, 0)))
        cut = direction * (depth + 1)
        rhs = sys.L.with_ctx((direction, 0, 0))
        rhs = rhs + sys.Q(2, direction, depth + 4).derive(alg.d2) + sys.Q(3, direction, depth + 4).derive(alg.d3)
        rhs = _lm_conj(sys, rhs, direction, cut)
        report[f"L_adjoint_symmetry({tag})"] = adjoint(sys.L).with_ctx((direction, 0, 0)).eq_window(rhs)
    H1 = sys.H1
    d2 = alg.mono(0, 1, 0)
    d3 = alg.mono(0, 0, 1)
    rhs = (compose(d2 - sys.q2, sys.H3) - compose(d3 - sys.q3, sys.H2)).scale(half)
    report["H1_from_H2_H3"] = H1.eq_window(rhs)
    for a in (2, 3):
        Ha = sys.H2 if a == 2 else sys.H3
        X = compose(Ha, sys.L)
        for kind in ("+", "2", "3"):
            p = sys.projector(kind, depth + 3, witness=True)
            head, wit = p.reduce(X)
            ok = head.is_zero() and p.reconstruct(head, wit).eq_window(X.with_ctx(p.ctx))
            report[f"H{a}L_in_ideal(pi_{kind})"] = ok
        report[f"H{a}L_cofactors"] = _explicit_cofactor_check(sys, a)
    L1 = sys.root_L1(depth)
    P = L1
    for _ in range(n - 3):
        P = compose(P, L1)
    report["L1_power_roundtrip"] = P.scale(mpq(1, n - 2)).eq_window(sys.lax_projection("+", depth + 3))
    Lm = sys.root_L1_minus(depth)
    P = Lm
    for _ in range(n - 3):
        P = compose(P, Lm)
    report["L1_minus_power_roundtrip"] = P.scale(mpq(1, n - 2)).eq_window(sys.lax_projection("-", depth + 3))
    for a in (2, 3):
        La = sys.root_La(a, depth)
        ctx = La.ctx
        report[f"L{a}_square_roundtrip"] = compose(La, La).scale(half).eq_window(sys.lax_projection(str(a), depth + 3))
        j = (0, 1, 0) if a == 2 else (0, 0, 1)
        jinv = (0, -1, 0) if a == 2 else (0, 0, -1)
        cut = La.cut
        rhs = -compose(compose(alg.mono(*j, ctx=ctx), La, cut), alg.series({jinv: R.one()}, ctx), cut)
        report[f"L{a}_adjoint"] = adjoint(La).eq_window(rhs)
        cube = compose(compose(La, La), La)
        report[f"L{a}_cube_residue_free"] = cube.coeff(*(0, 0, 0)).flatten().is_zero()
        Qa = sys.Q(a, -1, depth + 3)
        dmQ = alg.mono(*j, ctx=EPLUS) - Qa
        comm = compose(dmQ, L1) - compose(L1, dmQ)
        report[f"L1_commutes_d{a}-Q{a}"] = comm.eq_window(alg.zero(EPLUS))
    return report
