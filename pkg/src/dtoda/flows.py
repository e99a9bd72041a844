"""The generators B_{i,k}, the flows d_{i,k} obtained by coefficient matching, and the
Zakharov-Shabat, commutativity and extended-relation checks."""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .dressing import _jd, _power, build_A
from .emit import SCHEMA_VERSION, ring_json, ring_latex, ring_text
from .opalg import (
    E,
    EPLUS,
    ExtOpSeries,
    OpSeries,
    WindowError,
    adjoint,
    compose,
    eval_lambda,
    invert_monic,
    iota_expand,
)
from .ring import ConfigError, Derivation, solve_linear


@dataclass(frozen=True, order=True)
class FlowLabel:
    """A flow t_{i,k}: i in 0..3, k >= 1, k odd for i = 2, 3."""

    i: int
    k: int

    def __post_init__(self):
        if self.i not in (0, 1, 2, 3):
            raise ConfigError(f"flow index i must be 0, 1, 2 or 3, got {self.i}")
        if self.k < 1:
            raise ConfigError(f"flow index k must be >= 1, got {self.k}")
        if self.i in (2, 3) and self.k % 2 == 0:
            raise ConfigError(f"flow index k must be odd for i = {self.i}")

    @classmethod
    def parse(cls, text):
        if isinstance(text, FlowLabel):
            return text
        if isinstance(text, tuple):
            return cls(*text)
        try:
            i, k = (int(x) for x in str(text).split(","))
        except ValueError:
            raise ConfigError(f"flow label must look like 'i,k', got {text!r}") from None
        return cls(i, k)

    def __str__(self):
        return f"{self.i},{self.k}"


def field_names(n):
    return ["alpha"] + [f"a{i}" for i in range(1, n - 3)] + ["c2", "c3", "q2", "q3"]


@dataclass
class FlowResult:
    label: FlowLabel
    table: dict
    meta: dict = field(default_factory=dict)

    def derivation(self, sys):
        return Derivation(sys.ring, self.table, f"d{self.label.i}{self.label.k}", sys.flat)

    def to_text(self):
        i, k = self.label.i, self.label.k
        return "\n".join(f"d_{{{i},{k}}}({name}) = {ring_text(v)}" for name, v in self.table.items())

    def to_latex(self):
        i, k = self.label.i, self.label.k
        lines = []
        for name, v in self.table.items():
            sym = {"alpha": r"\alpha", "c2": "c_2", "c3": "c_3", "q2": "q_2", "q3": "q_3"}.get(name, name)
            lines.append(f"\\partial_{{{i},{k}}}({sym}) &= {ring_latex(v)}")
        return "\\begin{align*}\n" + " \\\\\n".join(lines) + "\n\\end{align*}"

    def to_json(self):
        return {
            "schema": SCHEMA_VERSION,
            "flow": [self.label.i, self.label.k],
            "table": {name: ring_json(v) for name, v in self.table.items()},
            "meta": self.meta,
        }


# building B -----------------------------------------------------------------


def _finite(A):
    """Re-home a series with only finitely many exact terms in the finite context E."""
    for axis in range(3):
        if A.ctx[axis] and A.cut[axis] is not None:
            raise WindowError("truncation too shallow: a finite part still carries a window")
    return A.alg.series(A.terms, E)


def _finite_ext(X):
    return X.map_parts(_finite)


def _lm(sys, ctx=E):
    return sys.alg.from_lambda_poly({1: 1, -1: -1}, ctx)


def _lam(sys, j, ctx=E):
    return sys.alg.mono(j, ctx=ctx)


def _B1(sys, k, depth):
    L1 = sys.root_L1(k + 1)
    P = _power(L1, k)
    Ph = adjoint(P)
    alg = sys.alg
    acc = alg.zero()
    for m in range(k + 1):
        acc = acc + _finite(compose(P, _lam(sys, -2 * m - 1, EPLUS)).part(1, ">=", 0))
        acc = acc + _finite(compose(_lam(sys, 2 * m + 1, Ph.ctx), Ph).part(1, "<", 0))
    return compose(acc, _lm(sys))


def _B1_lemma(sys, k, depth):
    L1 = sys.root_L1(k + 1)
    Lm = sys.root_L1_minus(k + 1)
    X = _finite(_power(L1, k).part(1, ">=", 1)) - _finite(_power(Lm, k).part(1, "<=", -1))
    return X - eval_lambda(X, 1)


def _Ba(sys, a, k, depth):
    La = sys.root_La(a, k + 1)
    return _finite(_power(La, k).part(a, ">=", 0))


def _B0_parts(sys, k, depth):
    Ap = build_A(sys, "1+", k, depth)
    Am = build_A(sys, "1-", k, depth)
    A2 = build_A(sys, 2, k, depth)
    A3 = build_A(sys, 3, k, depth)
    return Ap, Am, A2, A3


def _B0(sys, k, depth):
    Ap, Am, A2, A3 = _B0_parts(sys, k, depth)
    p = (sys.n - 2) * k
    alg = sys.alg
    acc = ExtOpSeries(alg, {0: alg.zero()})
    for m in range(p + 1):
        t = Ap.compose(_lam(sys, -2 * m - 1, EPLUS)).part(1, ">=", 0)
        acc = acc + _finite_ext(t)
        t = Am.compose(_lam(sys, 2 * m + 1, Am.A0.ctx)).part(1, "<", 0)
        acc = acc + _finite_ext(t)
    B = acc.compose(_lm(sys))
    half = mpq(1, 2)
    for a, A, tail in ((2, A2, {0: 1, -1: 1}), (3, A3, {0: 1, -1: -1})):
        B = B + _finite_ext(A.part(a, ">", 0))
        zero = _finite_ext(A.part(a, "[]", 0))
        B = B + zero.compose(alg.from_lambda_poly(tail)).scale(half)
    return B


def _B0_lemma(sys, k, depth, sign=1):
    """Closed form of B_{0,k}; sign = -1 uses the evaluation at Lambda = -1 and the d3 residue."""
    Ap, Am, A2, A3 = _B0_parts(sys, k, depth)
    X = _finite_ext(Ap.part(1, ">=", 1)) - _finite_ext(Am.part(1, "<=", -1))
    B = X - X.map_parts(lambda A: eval_lambda(A, sign))
    B = B + _finite_ext(A2.part(2, ">=", 1)) + _finite_ext(A3.part(3, ">=", 1))
    return B + _finite_ext((A2 if sign == 1 else A3).part(2 if sign == 1 else 3, "[]", 0))


def build_B(sys, label, depth=None, form="definition"):
    """B_{i,k} as an ExtOpSeries in the finite context E.

    ``form`` is "definition" (the defining sums) or "lemma" (the closed formulas); both are
    exact, the second one serves as a cross-check.
    """
    label = FlowLabel.parse(label)
    depth = sys.depth if depth is None else depth
    key = ("B", label, depth, form)
    if key in sys._roots:
        return sys._roots[key]
    i, k = label.i, label.k
    if form not in ("definition", "lemma", "lemma-"):
        raise ConfigError(f"unknown form {form!r}")
    if i == 1:
        B = _B1(sys, k, depth) if form == "definition" else _B1_lemma(sys, k, depth)
        out = ExtOpSeries.lift(B)
    elif i in (2, 3):
        out = ExtOpSeries.lift(_Ba(sys, i, k, depth))
    elif form == "definition":
        out = _B0(sys, k, depth)
    else:
        out = _B0_lemma(sys, k, depth, 1 if form == "lemma" else -1)
    sys._roots[key] = out
    return out


# projections of operators affine in eps d_x -----------------------------------


def project_ext(proj, X):
    """pi(X) for X = sum_r (eps d_x)^r Y_r; the projection acts on each Y_r (left form)."""
    X = ExtOpSeries.lift(X)
    return {r: proj(Y) for r, Y in X.to_left_form().items()}


def B_plus(sys, label, depth=None):
    """pi_+(B_{i,k}) in right form."""
    depth = sys.depth if depth is None else depth
    key = ("B+", FlowLabel.parse(label), depth)
    if key not in sys._roots:
        proj = sys.projector("+", depth + sys.n)
        left = project_ext(proj, build_B(sys, label, depth))
        sys._roots[key] = ExtOpSeries.from_left_form(sys.alg, left)
    return sys._roots[key]


def _left_zero(A):
    return A.diff(A.alg.zero(A.ctx, A.cut)) is None


# deriving the flows -------------------------------------------------------------


def _matching_data(sys, label, depth):
    """pi_+[B+, L] and pi_+(H_a B+) in left form."""
    Bp = B_plus(sys, label, depth)
    W = sys.n + 1
    cut = (-W, None, None)
    proj = sys.projector("+", W)
    L = ExtOpSeries.lift(sys.L)
    C = Bp.compose(L, cut) - L.compose(Bp, cut)
    comm = project_ext(proj, C)
    hq = {}
    for a, H in ((2, sys.H2), (3, sys.H3)):
        hq[a] = project_ext(proj, ExtOpSeries.lift(H).compose(Bp, cut))
    return comm, hq


def derive_flow(sys, label, depth=None):
    """Solve (d(L) - pi_+[B+, L])_{Lambda^{n-2..0}} = 0 and d(H_a) = -pi_+(H_a B+) for d = d_{i,k}."""
    label = FlowLabel.parse(label)
    depth = sys.depth if depth is None else depth
    key = ("flow", label, depth)
    if key in sys._roots:
        return sys._roots[key]
    R, n = sys.ring, sys.n
    comm, hq = _matching_data(sys, label, depth)
    meta = {
        "n": n,
        "eps_order": sys.eps_order,
        "depth": depth,
        "eps_dx_part_vanishes": all(_left_zero(A) for r, A in comm.items() if r)
        and all(_left_zero(A) for a in hq for r, A in hq[a].items() if r),
    }
    C = comm[0]
    table = {
        "q2": hq[2][0].coeff(0),
        "q3": -hq[3][0].coeff(0),
    }
    tag = f"f{label.i}{label.k}"
    P_alpha = R.gen(R.placeholder(f"{tag}_alpha"))
    P_a = {i: R.gen(R.placeholder(f"{tag}_a{i}")) for i in range(1, n - 3)}
    Dd = R.gen(R.placeholder(f"{tag}_D"))
    Sd = R.gen(R.placeholder(f"{tag}_S"))
    half = R.const("1/2")
    trial = dict(table)
    trial["alpha"] = P_alpha
    for i in range(1, n - 3):
        trial[f"a{i}"] = P_a[i]
    trial["c2"] = (Sd + Dd) * half
    trial["c3"] = (Sd - Dd) * half
    dL = sys.L.derive(Derivation(R, trial, tag, sys.flat))
    eqs = {j: dL.coeff(j) - C.coeff(j) for j in range(n - 2, -1, -1)}
    unknowns = [(n - 2, P_alpha)] + [(j, P_a[j - 1]) for j in range(n - 3, 1, -1)] + [(1, Dd), (0, Sd)]
    sol = {}
    for j, u in unknowns:
        (s,) = [f[0][0] for (m, _) in u.terms for f in m]
        eq = eqs[j].subs(sol) if sol else eqs[j]
        sol[s] = solve_linear(eq, s)
    residual = {}
    for j in eqs:
        res = eqs[j].subs(sol)
        residual[f"L^{j}"] = res.flatten().is_zero()
    out = {"alpha": sol[R.sym(f"{tag}_alpha")]}
    for i in range(1, n - 3):
        out[f"a{i}"] = sol[R.sym(f"{tag}_a{i}")]
    S, D = sol[R.sym(f"{tag}_S")], sol[R.sym(f"{tag}_D")]
    out["c2"] = (S + D) * half
    out["c3"] = (S - D) * half
    out["q2"] = table["q2"]
    out["q3"] = table["q3"]
    # the Lambda^1 coefficient of d(H_a) gives a second formula for d(q_a)
    residual["H2^1"] = hq[2][0].coeff(1).eq_mod_eps(out["q2"])
    residual["H3^1"] = hq[3][0].coeff(1).eq_mod_eps(out["q3"])
    meta["residuals_zero"] = residual
    result = FlowResult(label, out, meta)
    sys._roots[key] = result
    return result


def flow_derivation(sys, label, depth=None):
    return derive_flow(sys, label, depth).derivation(sys)


# cross-checks -------------------------------------------------------------------


def membership_check(sys, label, depth=None, kinds=("+", "2", "3")):
    """d(M) - [B, M] lies in the ideal for M = L, H2, H3 (its projections vanish on the window)."""
    depth = sys.depth if depth is None else depth
    T = flow_derivation(sys, label, depth)
    B = build_B(sys, label, depth)
    report = {}
    for name, M in (("L", sys.L), ("H2", sys.H2), ("H3", sys.H3)):
        Me = ExtOpSeries.lift(M)
        X = ExtOpSeries.lift(M.derive(T)) - (B.compose(Me) - Me.compose(B))
        for kind in kinds:
            proj = sys.projector(kind, depth + 2)
            report[f"{name}:pi_{kind}"] = all(_left_zero(A) for A in project_ext(proj, X).values())
    return report


def zs_check(sys, label1, label2, depth=None, B1=None):
    """pi_+(d_1 B_2 - d_2 B_1 + [B_2, B_1]) = 0 on the window."""
    depth = sys.depth if depth is None else depth
    T1 = flow_derivation(sys, label1, depth)
    T2 = flow_derivation(sys, label2, depth)
    Ba = build_B(sys, label1, depth) if B1 is None else ExtOpSeries.lift(B1)
    Bb = build_B(sys, label2, depth)
    X = Bb.derive(T1) - Ba.derive(T2) + Bb.compose(Ba) - Ba.compose(Bb)
    proj = sys.projector("+", depth + 2)
    return all(_left_zero(A) for A in project_ext(proj, X).values())


def commutativity_check(sys, label1, label2, name, depth=None):
    """d_1 d_2 (xi) = d_2 d_1 (xi) for a generator xi."""
    T1 = flow_derivation(sys, label1, depth)
    T2 = flow_derivation(sys, label2, depth)
    xi = sys.ring.gen(name)
    return T1(T2(xi)).eq_mod_eps(T2(T1(xi)))


def base_commutation_check(sys, label, a, depth=None):
    """d(d_a(q_a)) = d_a(d(q_a)) for the base derivations d2, d3."""
    T = flow_derivation(sys, label, depth)
    da = sys.d2 if a == 2 else sys.d3
    q = sys.q2 if a == 2 else sys.q3
    return T(da(q)).eq_mod_eps(da(T(q)))


def _rhs_term(sys, a, k, depth):
    """iota_{Lambda^-1} (L_a^{2k} H~_a^{-1} / 2^k)_{a,[0]} with H~_a^{-1} = H_a^{-1}(d_a + q_a)."""
    alg, R = sys.alg, sys.ring
    ctx = [-1, 0, 0]
    ctx[a - 1] = -1
    ctx = tuple(ctx)
    cut = [None, None, None]
    cut[0] = -(depth + 2)
    cut[a - 1] = -(2 * k + 3)
    cut = tuple(cut)
    H = (sys.H2 if a == 2 else sys.H3).with_ctx(ctx)
    Hinv = invert_monic(H, a, cut)
    q = sys.q2 if a == 2 else sys.q3
    plus = alg.series({_jd(a, 1): R.one(), (0, 0, 0): q}, ctx)
    La = sys.root_La(a, 2 * k + depth + 4)
    P = _power(La, 2 * k).with_ctx(ctx)
    X = compose(compose(P, Hinv, cut), plus, cut)
    return X.coefficient_op(a, 0).scale(mpq(1, 2 ** k))


def ext_rel_check(sys, k, depth=None):
    """The extended relation linking the Lambda-parts of L_1 with the [0]-parts of L_2, L_3."""
    depth = sys.depth if depth is None else depth
    n = sys.n
    p = (n - 2) * k
    alg = sys.alg
    c = mpq(1, (n - 2) ** k)
    cut = (-depth, None, None)
    L1 = sys.root_L1(depth + p + 2)
    P = _power(L1, p)
    inv = iota_expand(alg, "inv(L-Linv)", -1, -(depth + p + 3))
    first = compose(P, inv, (-(depth + 1), None, None)).part(1, "<", 0)
    Ph = adjoint(P)
    second = alg.zero()
    for m in range(p + 1):
        second = second + _finite(compose(_lam(sys, 2 * m + 1, Ph.ctx), Ph).part(1, "<", 0))
    lhs = compose((first + second).scale(c), _lm(sys, EPLUS), cut)
    rhs = _rhs_term(sys, 2, k, depth) + _rhs_term(sys, 3, k, depth)
    rhs = compose(rhs.with_ctx(EPLUS), _lm(sys, EPLUS), cut).scale(mpq(1, 2))
    rhs = OpSeries(alg, EPLUS, rhs.terms, (min(rhs.cut[0], cut[0]) if rhs.cut[0] is not None else cut[0], None, None))
    return lhs.eq_window(rhs, cut)


def appendix_label_set():
    return [FlowLabel(1, 1), FlowLabel(1, 2), FlowLabel(2, 1), FlowLabel(2, 3), FlowLabel(3, 1), FlowLabel(3, 3), FlowLabel(0, 1)]


__all__ = [
    "FlowLabel",
    "FlowResult",
    "build_B",
    "B_plus",
    "project_ext",
    "derive_flow",
    "flow_derivation",
    "membership_check",
    "zs_check",
    "commutativity_check",
    "base_commutation_check",
    "ext_rel_check",
    "appendix_label_set",
    "field_names",
]
