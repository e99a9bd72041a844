"""Projections pi_+, pi_-, pi_2, pi_3 onto the reduced operator rings along the left ideal
generated by H1, H2, H3, with ideal witnesses and the residue cross-check route."""

from __future__ import annotations

from .opalg import (
    E,
    E2,
    E3,
    EMINUS,
    EPLUS,
    OpSeries,
    WindowError,
    compose,
    invert_monic,
    iota_expand,
    join_ctx,
)

KINDS = ("+", "-", "2", "3")
_CTX = {"+": EPLUS, "-": EMINUS, "2": E2, "3": E3}
# axis (0-based) carrying the Laurent direction of each reduced ring
_AXIS = {"+": 0, "-": 0, "2": 1, "3": 2}
# generators that already lie in the reduced ring
_INSIDE = {"+": {"L", "Linv"}, "-": {"L", "Linv"}, "2": {"d2"}, "3": {"d3"}}

DEFAULT_ORDER = ("d3", "d2", "L")
ALT_ORDER = ("L", "d2", "d3")


class IdealData:
    """q1, q2, q3 and the generators H1, H2, H3 over a fixed operator algebra."""

    def __init__(self, alg, q1, q2, q3):
        self.alg = alg
        self.q1, self.q2, self.q3 = q1, q2, q3
        one = alg.ring.one()
        self.H1 = alg.series({(0, 1, 1): one, (0, 0, 0): q1})
        self.H2 = alg.series({(1, 1, 0): one, (0, 1, 0): -one, (1, 0, 0): -q2, (0, 0, 0): -q2})
        self.H3 = alg.series({(1, 0, 1): one, (0, 0, 1): one, (1, 0, 0): -q3, (0, 0, 0): q3})

    @property
    def H(self):
        return (self.H1, self.H2, self.H3)

    def Q(self, a, direction, depth):
        """Q2 = (Lambda-1)^-1 q2 (Lambda+1), Q3 = (Lambda+1)^-1 q3 (Lambda-1), expanded at Lambda^direction."""
        alg = self.alg
        ctx = (direction, 0, 0)
        cut = (direction * depth, None, None)
        if a == 2:
            inv = iota_expand(alg, "inv(L-1)", direction, cut[0] + direction)
            right = alg.from_lambda_poly({1: 1, 0: 1}, ctx)
            mid = alg.scalar(self.q2, ctx)
        else:
            inv = iota_expand(alg, "inv(L+1)", direction, cut[0] + direction)
            right = alg.from_lambda_poly({1: 1, 0: -1}, ctx)
            mid = alg.scalar(self.q3, ctx)
        return compose(compose(inv, mid, cut), right, cut)


def _zero_triple(alg, ctx):
    z = alg.zero(ctx)
    return [z, z, z]


class Projector:
    """pi_kind with memoized values on monomials Lambda^j1 d2^j2 d3^j3.

    ``depth`` is the working depth: base series are expanded to exponent -depth (or +depth for
    pi_-) along the reduced ring's Laurent axis; results carry their own guarantee windows.
    """

    def __init__(self, ideal, kind, depth, order=DEFAULT_ORDER, witness=False):
        if kind not in KINDS:
            raise ValueError(f"unknown projection {kind!r}")
        self.ideal = ideal
        self.alg = ideal.alg
        self.kind = kind
        self.depth = depth
        self.order = order
        self.ctx = _CTX[kind]
        ax = _AXIS[kind]
        direction = self.ctx[ax]
        c = [None, None, None]
        c[ax] = direction * depth
        self.cut = tuple(c)
        self.want_witness = witness
        self.memo = {(0, 0, 0): self.alg.one(self.ctx)}
        self.wmemo = {(0, 0, 0): _zero_triple(self.alg, self.ctx)}
        self._build_base()

    # base cases
    def _build_base(self):
        alg, I, kind, cut = self.alg, self.ideal, self.kind, self.cut
        one = alg.ring.one()
        ctx = self.ctx
        base, wit = {}, {}
        z = _zero_triple
        if kind in ("+", "-"):
            direction = ctx[0]
            base["d2"] = I.Q(2, direction, self.depth)
            base["d3"] = I.Q(3, direction, self.depth)
            w2 = z(alg, ctx)
            w2[1] = iota_expand(alg, "inv(L-1)", direction, cut[0])
            w3 = z(alg, ctx)
            w3[2] = iota_expand(alg, "inv(L+1)", direction, cut[0])
            wit["d2"], wit["d3"] = w2, w3
        elif kind == "2":
            m = alg.series({(0, 1, 0): one, (0, 0, 0): -I.q2}, ctx)
            m_inv = invert_monic(m, 2, cut)
            plus = alg.series({(0, 1, 0): one, (0, 0, 0): I.q2}, ctx)
            base["L"] = compose(m_inv, plus, cut)
            wl = z(alg, ctx)
            wl[1] = m_inv
            wit["L"] = wl
            d2inv = alg.series({(0, -1, 0): one}, ctx, cut)
            base["d3"] = -compose(d2inv, alg.scalar(I.q1), cut)
            w3 = z(alg, ctx)
            w3[0] = d2inv
            wit["d3"] = w3
        else:
            m = alg.series({(0, 0, 1): one, (0, 0, 0): -I.q3}, ctx)
            m_inv = invert_monic(m, 3, cut)
            plus = alg.series({(0, 0, 1): one, (0, 0, 0): I.q3}, ctx)
            base["L"] = -compose(m_inv, plus, cut)
            wl = z(alg, ctx)
            wl[2] = m_inv
            wit["L"] = wl
            d3inv = alg.series({(0, 0, -1): one}, ctx, cut)
            base["d2"] = -compose(d3inv, alg.scalar(I.q1), cut)
            w2 = z(alg, ctx)
            w2[0] = d3inv
            wit["d2"] = w2
        if kind in ("2", "3"):
            # pi(Lambda^-1) from Lambda^-1(pi(Lambda)) . pi(Lambda^-1) = 1
            Y = base["L"].shift_coeffs(-1)
            Yinv = invert_monic(Y, _AXIS[kind] + 1, cut)
            base["Linv"] = Yinv
            linv = alg.series({(-1, 0, 0): one}, ctx)
            wit["Linv"] = [-compose(compose(Yinv, linv, cut), w, cut) for w in wit["L"]]
        self.base = base
        self.wbase = wit

    def base_value(self, gen):
        if gen in _INSIDE[self.kind]:
            j = {"L": (1, 0, 0), "Linv": (-1, 0, 0), "d2": (0, 1, 0), "d3": (0, 0, 1)}[gen]
            return self.alg.series({j: self.alg.ring.one()}, self.ctx)
        return self.base[gen]

    # recursion
    def _peel(self, j):
        j1, j2, j3 = j
        for gen in self.order:
            if gen == "d3" and j3 > 0:
                return "d3", (j1, j2, j3 - 1)
            if gen == "d2" and j2 > 0:
                return "d2", (j1, j2 - 1, j3)
            if gen == "L" and j1 > 0:
                return "L", (j1 - 1, j2, j3)
            if gen == "L" and j1 < 0:
                return "Linv", (j1 + 1, j2, j3)
        raise AssertionError("unreachable")

    def mono(self, j):
        j = tuple(j)
        r = self.memo.get(j)
        if r is not None:
            return r
        if j[1] < 0 or j[2] < 0:
            ax = _AXIS[self.kind]
            if ax and all(e == 0 for a, e in enumerate(j) if a != ax):
                # already a normal form of the target ring
                r = self.memo[j] = self.alg.series({j: self.alg.ring.one()}, self.ctx)
                self.wmemo[j] = _zero_triple(self.alg, self.ctx)
                return r
            raise ValueError("projection is defined on polynomial d-powers only")
        gen, rest = self._peel(j)
        P = self.mono(rest)
        alg, cut = self.alg, self.cut
        one = alg.ring.one()
        if gen in _INSIDE[self.kind]:
            jj = {"L": (1, 0, 0), "Linv": (-1, 0, 0), "d2": (0, 1, 0), "d3": (0, 0, 1)}[gen]
            X = alg.series({jj: one}, self.ctx)
            r = compose(X, P, cut)
            if self.want_witness:
                self.wmemo[j] = [compose(X, w, cut) for w in self.witness_mono(rest)]
        elif gen in ("d2", "d3"):
            der = alg.d2 if gen == "d2" else alg.d3
            r = P.derive(der) + compose(P, self.base[gen], cut)
            if self.want_witness:
                jj = (0, 1, 0) if gen == "d2" else (0, 0, 1)
                X = alg.series({jj: one}, self.ctx)
                self.wmemo[j] = [compose(X, w, cut) + compose(P, wb, cut) for w, wb in zip(self.witness_mono(rest), self.wbase[gen])]
        else:
            m = 1 if gen == "L" else -1
            Ps = P.shift_coeffs(m)
            r = compose(Ps, self.base[gen], cut)
            if self.want_witness:
                X = alg.series({(m, 0, 0): one}, self.ctx)
                self.wmemo[j] = [compose(X, w, cut) + compose(Ps, wb, cut) for w, wb in zip(self.witness_mono(rest), self.wbase[gen])]
        self.memo[j] = r
        return r

    def witness_mono(self, j):
        j = tuple(j)
        if j not in self.wmemo:
            if not self.want_witness:
                raise ValueError("projector built without witness tracking")
            self.memo.pop(j, None)
            self.mono(j)
        return self.wmemo[j]

    def __call__(self, A):
        """pi applied to an operator series (linear over the ring)."""
        alg = self.alg
        ctx = join_ctx(A.ctx, self.ctx)
        acc = alg.zero(self.ctx, self.cut)
        ax = _AXIS[self.kind]
        for j, f in A.terms.items():
            acc = acc + self.mono(j).scale(f)
        cut = list(acc.cut)
        if A.ctx[ax] and A.cut[ax] is not None:
            from .opalg import _tighter

            cut[ax] = _tighter(self.ctx[ax], cut[ax], A.cut[ax])
        for a in range(3):
            if a != ax and A.ctx[a] and A.cut[a] is not None:
                raise WindowError("input is Laurent along an axis the projection does not reduce")
        del ctx
        return OpSeries(alg, self.ctx, acc.terms, tuple(cut))

    def reduce(self, A):
        """(pi(A), (P1, P2, P3)) with A = pi(A) + sum P_i H_i on the guarantee window."""
        if not self.want_witness:
            raise ValueError("projector built without witness tracking")
        head = self(A)
        wit = _zero_triple(self.alg, self.ctx)
        for j, f in A.terms.items():
            w = self.witness_mono(j)
            wit = [x + y.scale(f) for x, y in zip(wit, w)]
        return head, tuple(wit)

    def reconstruct(self, head, wit):
        acc = head
        for P, H in zip(wit, self.ideal.H):
            acc = acc + compose(P, H.with_ctx(self.ctx), self.cut)
        return acc


def project(projector, A):
    return projector(A)


def ideal_reduce(projector, A):
    return projector.reduce(A)


def zero_curvature_check(ideal, depth=6, direction=-1):
    """d2(Q3) - d3(Q2) = [Q2, Q3] on the window."""
    alg = ideal.alg
    Q2 = ideal.Q(2, direction, depth)
    Q3 = ideal.Q(3, direction, depth)
    cut = (direction * depth, None, None)
    lhs = Q3.derive(alg.d2) - Q2.derive(alg.d3)
    rhs = compose(Q2, Q3, cut) - compose(Q3, Q2, cut)
    return lhs.eq_window(rhs)


# residue route ------------------------------------------------------------


def _lift(alg, terms, ctx, cut=(None, None, None)):
    return alg.series(terms, ctx, cut)


def project_residue(ideal, kind, j, depth):
    """pi_kind of a pure power (Lambda^k, d2^k or d3^k) from the residue formulas.

    The inverses of H1, H2, H3 are expanded in doubly Laurent contexts; the Lambda-expansion
    direction of the rational factor equals that of the target ring.
    """
    alg = ideal.alg
    one = alg.ring.one()
    j1, j2, j3 = j
    nz = [x for x in j if x]
    if len(nz) > 1:
        raise ValueError("residue route supports pure powers only")
    I = ideal
    D = depth
    if kind in ("+", "-"):
        if j1 or (j2 == 0 and j3 == 0):
            return alg.series({(j1, 0, 0): one}, _CTX[kind])
        direction = _CTX[kind][0]
        a = 2 if j2 else 3
        k = j2 or j3
        ctx = (direction, 0, 0)
        ctx = list(ctx)
        ctx[a - 1] = -1
        ctx = tuple(ctx)
        cut = [None, None, None]
        cut[0] = direction * (D + 2)
        cut[a - 1] = -(k + 3)
        cut = tuple(cut)
        H = (I.H2 if a == 2 else I.H3).with_ctx(ctx)
        Hinv = invert_monic(H, a, cut)
        q = I.q2 if a == 2 else I.q3
        jj = [0, 0, 0]
        jj[a - 1] = 1
        plus = alg.series({tuple(jj): one, (0, 0, 0): q}, ctx)
        jj[a - 1] = k
        Dk = alg.series({tuple(jj): one}, ctx)
        X = compose(compose(Dk, Hinv, cut), plus, cut)
        coef = X.coefficient_op(a, 0)
        fac = alg.from_lambda_poly({1: 1, -1: -1}, (direction, 0, 0))
        res = compose(coef.with_ctx((direction, 0, 0)), fac).scale(alg.ring.const("1/2"))
        c = [None, None, None]
        c[0] = res.cut[0]
        return OpSeries(alg, _CTX[kind], res.terms, tuple(c))
    if kind in ("2", "3"):
        a = int(kind)
        b = 5 - a
        if (j2 if a == 2 else j3) and not j1 and not (j3 if a == 2 else j2):
            return alg.series({j: one}, _CTX[kind])
        kb = j3 if a == 2 else j2
        if kb:
            # pi_a(d_b^k) = (d_b^k H1^-1 d_a)_{a,[0]} d_b ... with the roles of the axes as in the formula
            ctx = [0, 0, 0]
            ctx[a - 1] = -1
            ctx[b - 1] = -1
            ctx = tuple(ctx)
            cut = [None, None, None]
            cut[a - 1] = -(D + kb + 4)
            cut[b - 1] = -(kb + 3)
            cut = tuple(cut)
            H1 = I.H1.with_ctx(ctx)
            Hinv = invert_monic(H1, b, cut)
            jb = [0, 0, 0]
            jb[b - 1] = kb
            jb1 = [0, 0, 0]
            jb1[b - 1] = 1
            X = compose(compose(alg.series({tuple(jb): one}, ctx), Hinv, cut), alg.series({tuple(jb1): one}, ctx), cut)
            coef = X.coefficient_op(b, 0)
            ja = [0, 0, 0]
            ja[a - 1] = 1
            res = compose(coef, alg.series({tuple(ja): one}, ctx), cut)
            c = [None, None, None]
            c[a - 1] = res.cut[a - 1]
            return OpSeries(alg, _CTX[kind], res.terms, tuple(c))
        if j1:
            k = abs(j1)
            sign = 1 if j1 > 0 else -1
            direction = -sign  # iota_{Lambda^{-+1}}
            ctx = [direction, 0, 0]
            ctx[a - 1] = -1
            ctx = tuple(ctx)
            cut = [None, None, None]
            cut[0] = direction * (k + 2)
            cut[a - 1] = -(D + 4)
            cut = tuple(cut)
            H = (I.H2 if a == 2 else I.H3).with_ctx(ctx)
            Hinv = invert_monic(H, 1, cut)
            fac = iota_expand(alg, "inv(1+Linv)" if a == 2 else "inv(Linv-1)", direction, cut[0] + direction * (k + 2))
            X = compose(compose(alg.series({(j1, 0, 0): one}, ctx), Hinv, cut), fac.with_ctx(ctx), cut)
            coef = X.coefficient_op(1, 0)
            ja = [0, 0, 0]
            ja[a - 1] = 1
            tail = compose(coef, alg.series({tuple(ja): one}, ctx), cut).scale(2 * sign)
            const = (-1) ** k if a == 2 else 1
            res = tail + alg.scalar(alg.ring.const(const), ctx)
            c = [None, None, None]
            c[a - 1] = tail.cut[a - 1]
            return OpSeries(alg, _CTX[kind], {jj: f for jj, f in res.terms.items()}, tuple(c))
    raise ValueError("unsupported shape for the residue route")


__all__ = [
    "IdealData",
    "Projector",
    "project",
    "project_residue",
    "ideal_reduce",
    "zero_curvature_check",
    "E",
]
