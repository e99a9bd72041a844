"""Operator series sum f_j Lambda^j1 d2^j2 d3^j3 over the coefficient ring.

Coefficients sit on the left.  Each axis is finite (direction 0) or Laurent-infinite
toward negative (-1) or, for the Lambda axis only, positive (+1) exponents.  On a Laurent
axis ``cut`` records the exponent beyond which coefficients are not trusted: for
direction -1 terms with exponent >= cut are exact, for +1 those with exponent <= cut.
"""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .ring import RingElem

AXES = ("L", "d2", "d3")

E = (0, 0, 0)
EPLUS = (-1, 0, 0)
EMINUS = (1, 0, 0)
E2 = (0, -1, 0)
E3 = (0, 0, -1)

_CTX_NAMES = {E: "E", EPLUS: "E+", EMINUS: "E-", E2: "E2", E3: "E3"}


class ContextError(ValueError):
    pass


class WindowError(ArithmeticError):
    pass


def binom(b, j):
    """Generalized binomial coefficient C(b, j) for integer b and j >= 0."""
    num = 1
    for i in range(j):
        num *= b - i
    return mpq(num, factorial(j))


def ctx_name(ctx):
    if ctx in _CTX_NAMES:
        return _CTX_NAMES[ctx]
    marks = []
    for axis, d in zip(AXES, ctx):
        if d:
            marks.append(f"{axis}{'+inf' if d > 0 else '-inf'}")
    return "E(" + ",".join(marks) + ")"


def join_ctx(a, b):
    out = []
    for x, y in zip(a, b):
        if x and y and x != y:
            raise ContextError(f"incompatible contexts {ctx_name(a)} and {ctx_name(b)}")
        out.append(x or y)
    return tuple(out)


def _exact(d, cut, e):
    if cut is None:
        return True
    return e >= cut if d < 0 else e <= cut


def _tighter(d, a, b):
    """The more restrictive of two cuts on an axis with direction d."""
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b) if d < 0 else min(a, b)


class OpAlgebra:
    """Binds the ring and the derivations d2, d3 used to move coefficients past d2, d3."""

    def __init__(self, ring, d2=None, d3=None, depth=6, flat=False):
        self.ring = ring
        self.flat = flat
        if flat:
            d2 = d2.flattened() if d2 is not None and not d2.flat else d2
            d3 = d3.flattened() if d3 is not None and not d3.flat else d3
        self.d2 = d2
        self.d3 = d3
        self.depth = depth

    def with_derivations(self, d2, d3):
        return OpAlgebra(self.ring, d2, d3, self.depth, self.flat)

    def flattened(self):
        """Same algebra with all coefficients kept in shift-free form (fast verification mode)."""
        return OpAlgebra(self.ring, self.d2, self.d3, self.depth, True)

    def series(self, terms, ctx=E, cut=(None, None, None)):
        return OpSeries(self, ctx, terms, cut)

    def zero(self, ctx=E, cut=(None, None, None)):
        return OpSeries(self, ctx, {}, cut)

    def scalar(self, f, ctx=E):
        if not isinstance(f, RingElem):
            f = self.ring.const(f)
        return OpSeries(self, ctx, {(0, 0, 0): f}, (None, None, None))

    def one(self, ctx=E):
        return self.scalar(self.ring.one(), ctx)

    def mono(self, j1=0, j2=0, j3=0, coeff=None, ctx=E):
        c = self.ring.one() if coeff is None else (coeff if isinstance(coeff, RingElem) else self.ring.const(coeff))
        return OpSeries(self, ctx, {(j1, j2, j3): c}, (None, None, None))

    def from_lambda_poly(self, coeffs, ctx=E):
        """sum_j c_j Lambda^j with scalar or ring coefficients."""
        terms = {}
        for j, c in coeffs.items():
            terms[(j, 0, 0)] = c if isinstance(c, RingElem) else self.ring.const(c)
        return OpSeries(self, ctx, terms, (None, None, None))

    def derive_coeff(self, g, j, k):
        """d3^k d2^j (g)."""
        for _ in range(j):
            if self.d2 is None:
                raise ContextError("no d2 derivation installed")
            g = self.d2(g)
        for _ in range(k):
            if self.d3 is None:
                raise ContextError("no d3 derivation installed")
            g = self.d3(g)
        return g


class OpSeries:
    __slots__ = ("alg", "ctx", "terms", "cut")

    def __init__(self, alg, ctx, terms, cut=(None, None, None)):
        self.alg = alg
        self.ctx = tuple(ctx)
        cut = tuple(cut)
        for d, c in zip(self.ctx, cut):
            if d == 0 and c is not None:
                raise ContextError("finite axis cannot carry a cut")
        self.cut = cut
        clean = {}
        flat = alg.flat
        for j, f in terms.items():
            if flat:
                f = f.flatten()
            if not f.terms:
                continue
            ok = True
            for axis in range(3):
                d = self.ctx[axis]
                if not _exact(d, cut[axis], j[axis]):
                    ok = False
                    break
                if axis and d == 0 and j[axis] < 0:
                    raise ContextError("negative d-power on a finite axis")
            if ok:
                clean[j] = f
        self.terms = clean

    @property
    def ring(self):
        return self.alg.ring

    def _new(self, terms, ctx=None, cut=None):
        return OpSeries(self.alg, self.ctx if ctx is None else ctx, terms, self.cut if cut is None else cut)

    def ctx_name(self):
        return ctx_name(self.ctx)

    def is_zero(self):
        return not self.terms

    def coeff(self, j1=0, j2=0, j3=0):
        j = (j1, j2, j3)
        for axis in range(3):
            if not _exact(self.ctx[axis], self.cut[axis], j[axis]):
                raise WindowError(f"coefficient {j} lies outside the guarantee window {self.cut}")
        f = self.terms.get(j)
        return f if f is not None else self.ring.zero()

    def is_exact(self, j):
        return all(_exact(self.ctx[a], self.cut[a], j[a]) for a in range(3))

    def min_valid(self):
        return min((f.valid for f in self.terms.values()), default=self.ring.N)

    # linear structure
    def _coerce(self, other):
        if isinstance(other, OpSeries):
            return other
        return self.alg.scalar(other if isinstance(other, RingElem) else self.ring.const(other))

    def __add__(self, other):
        other = self._coerce(other)
        ctx = join_ctx(self.ctx, other.ctx)
        cut = tuple(_tighter(ctx[a], self.cut[a], other.cut[a]) for a in range(3))
        out = dict(self.terms)
        for j, f in other.terms.items():
            out[j] = out[j] + f if j in out else f
        return OpSeries(self.alg, ctx, out, cut)

    __radd__ = __add__

    def __neg__(self):
        return self._new({j: -f for j, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        """Multiply by a rational scalar, or by a ring element on the left."""
        return self._new({j: (c * f if isinstance(c, RingElem) else f * c) for j, f in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, OpSeries):
            return compose(self, other)
        if isinstance(other, RingElem):
            return compose(self, self.alg.scalar(other))
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, RingElem):
            return self.scale(other)
        return self.scale(other)

    def __pow__(self, p):
        out = self.alg.one(self.ctx)
        for _ in range(p):
            out = compose(out, self)
        return out

    def map_coeffs(self, fn):
        return self._new({j: fn(f) for j, f in self.terms.items()})

    def shift_coeffs(self, m):
        """Lambda^m . A . Lambda^-m: shifts every coefficient."""
        return self.map_coeffs(lambda f: f.shift(m))

    def d_x(self, eps=True):
        """Coefficientwise eps*d_x (or d_x when eps is False)."""
        if eps:
            return self.map_coeffs(lambda f: f.d_x().times_eps(1))
        return self.map_coeffs(lambda f: f.d_x())

    def derive(self, derivation):
        return self.map_coeffs(derivation)

    def flatten(self):
        return self.map_coeffs(lambda f: f.flatten())

    def rebase(self, alg):
        """The same series over another algebra with the same ring."""
        return OpSeries(alg, self.ctx, self.terms, self.cut)

    def with_ctx(self, ctx):
        """Embed into a larger context (finite axes may become Laurent)."""
        new = join_ctx(self.ctx, ctx)
        return OpSeries(self.alg, new, self.terms, self.cut)

    def truncate(self, cut):
        cut = tuple(_tighter(self.ctx[a], self.cut[a], cut[a]) if self.ctx[a] else None for a in range(3))
        return OpSeries(self.alg, self.ctx, self.terms, cut)

    def part(self, axis, sel, k=0):
        """Keep terms whose exponent on axis (1: Lambda, 2: d2, 3: d3) satisfies sel."""
        a = axis - 1
        test = {
            "<=": lambda e: e <= k,
            "<": lambda e: e < k,
            "[]": lambda e: e == k,
            ">=": lambda e: e >= k,
            ">": lambda e: e > k,
        }[sel]
        out = {j: f for j, f in self.terms.items() if test(j[a])}
        cut = list(self.cut)
        d, c = self.ctx[a], self.cut[a]
        if d and c is not None:
            if sel == "[]":
                if not _exact(d, c, k):
                    raise WindowError(f"exponent {k} outside the guarantee window")
                cut[a] = None
            else:
                lo = {"<=": None, "<": None, ">=": k, ">": k + 1}[sel]
                hi = {"<=": k, "<": k - 1, ">=": None, ">": None}[sel]
                bound = lo if d < 0 else hi
                if bound is not None and _exact(d, c, bound):
                    cut[a] = None
        return OpSeries(self.alg, self.ctx, out, tuple(cut))

    def coefficient_op(self, axis, k):
        """The operator multiplying X^k (X the generator of ``axis``), as a series in the other axes."""
        a = axis - 1
        if not _exact(self.ctx[a], self.cut[a], k):
            raise WindowError(f"exponent {k} outside the guarantee window")
        out = {}
        for j, f in self.terms.items():
            if j[a] == k:
                jj = list(j)
                jj[a] = 0
                out[tuple(jj)] = f
        ctx = list(self.ctx)
        ctx[a] = 0
        cut = list(self.cut)
        cut[a] = None
        return OpSeries(self.alg, tuple(ctx), out, tuple(cut))

    def scalar_part(self):
        """The coefficient of Lambda^0 d2^0 d3^0 as a ring element."""
        return self.coeff(0, 0, 0)

    def exponents(self, axis):
        return sorted({j[axis - 1] for j in self.terms})

    def top(self, axis):
        """Extreme exponent on an axis in the direction of its leading terms."""
        a = axis - 1
        es = [j[a] for j in self.terms]
        if not es:
            return None
        return min(es) if self.ctx[a] > 0 else max(es)

    # comparison on windows
    def diff(self, other, cut=None):
        """First differing exponent on the common window, or None; compares with eq_mod_eps."""
        from .ring import eq_mod_eps

        other = self._coerce(other)
        ctx = join_ctx(self.ctx, other.ctx)
        win = tuple(_tighter(ctx[a], _tighter(ctx[a], self.cut[a], other.cut[a]), None if cut is None else cut[a]) for a in range(3))
        keys = sorted(set(self.terms) | set(other.terms), reverse=True)
        zero = self.ring.zero()
        for j in keys:
            if not all(_exact(ctx[a], win[a], j[a]) for a in range(3)):
                continue
            f = self.terms.get(j, zero)
            g = other.terms.get(j, zero)
            if not eq_mod_eps(f, g):
                return j, f, g
        return None

    def eq_window(self, other, cut=None):
        return self.diff(other, cut) is None

    def window_text(self):
        parts = []
        for axis, d, c in zip(("L", "d2", "d3"), self.ctx, self.cut):
            if d and c is not None:
                parts.append(f"O({axis}^({c - 1 if d < 0 else c + 1}))")
        return " + ".join(parts)

    def window_latex(self):
        names = (r"\Lambda", r"\partial_2", r"\partial_3")
        parts = []
        for axis, d, c in zip(names, self.ctx, self.cut):
            if d and c is not None:
                parts.append(f"O({axis}^{{{c - 1 if d < 0 else c + 1}}})")
        return " + ".join(parts)

    def guarantee_json(self):
        return {axis: {"direction": d, "cut": c} for axis, d, c in zip(AXES, self.ctx, self.cut)}

    def __str__(self):
        from .emit import op_text

        return op_text(self)

    __repr__ = __str__

    def latex(self):
        from .emit import op_latex

        return op_latex(self)

    def to_json(self):
        from .emit import op_json

        return op_json(self)


def _prime_data(X, axis, s):
    """(top', cut') in the decreasing convention e' = s*e; cut' None means exact everywhere."""
    es = [s * j[axis] for j in X.terms]
    c = X.cut[axis]
    cp = None if c is None else s * c
    top = max(es) if es else None
    if cp is not None:
        top = cp - 1 if top is None else max(top, cp - 1)
    return top, cp


def product_cut(A, B, ctx, requested=(None, None, None)):
    cut = []
    for a in range(3):
        d = ctx[a]
        if d == 0:
            cut.append(None)
            continue
        s = -d
        ta, ca = _prime_data(A, a, s)
        tb, cb = _prime_data(B, a, s)
        cands = []
        if ca is not None and tb is not None:
            cands.append(ca + tb)
        if cb is not None and ta is not None:
            cands.append(ta + cb)
        cp = max(cands) if cands else None
        r = requested[a]
        if r is not None:
            rp = s * r
            cp = rp if cp is None else max(cp, rp)
        if cp is None and a > 0:
            # exact factors with a negative d-power still give an infinite series
            neg = any(j[a] < 0 for j in A.terms)
            if neg and ta is not None and tb is not None:
                cp = ta + tb - A.alg.depth
        cut.append(None if cp is None else s * cp)
    return tuple(cut)


def compose(A, B, cut=(None, None, None)):
    """Operator product A.B in left-coefficient normal form, truncated to the guarantee window."""
    if not isinstance(B, OpSeries):
        B = A.alg.scalar(B)
    alg = A.alg
    ctx = join_ctx(A.ctx, B.ctx)
    rcut = product_cut(A, B, ctx, cut)
    if not A.terms or not B.terms:
        return OpSeries(alg, ctx, {}, rcut)
    c0, c1, c2 = rcut
    out = {}
    dcache = {}
    for (a1, b1, e1), f in A.terms.items():
        for (a2, b2, e2), g in B.terms.items():
            L = a1 + a2
            if not _exact(ctx[0], c0, L):
                continue
            # d2 Leibniz range
            if b1 >= 0:
                jmax = b1
            elif c1 is None:
                raise WindowError("infinite d2-expansion needs a guarantee window")
            else:
                jmax = None
            if e1 >= 0:
                kmax = e1
            elif c2 is None:
                raise WindowError("infinite d3-expansion needs a guarantee window")
            else:
                kmax = None
            j = 0
            while True:
                if jmax is not None and j > jmax:
                    break
                x2 = b1 - j + b2
                if c1 is not None and x2 < c1:
                    break
                cj = binom(b1, j)
                k = 0
                while True:
                    if kmax is not None and k > kmax:
                        break
                    x3 = e1 - k + e2
                    if c2 is not None and x3 < c2:
                        break
                    ck = binom(e1, k)
                    key = ((a2, b2, e2), j, k, a1)
                    h = dcache.get(key)
                    if h is None:
                        h = alg.derive_coeff(g, j, k).shift(a1)
                        if alg.flat:
                            h = h.flatten()
                        dcache[key] = h
                    if h.terms:
                        t = f * h
                        coef = cj * ck
                        if coef != 1:
                            t = t * coef
                        kk = (L, x2, x3)
                        prev = out.get(kk)
                        out[kk] = t if prev is None else prev + t
                    k += 1
                j += 1
    return OpSeries(alg, ctx, out, rcut)


def commutator(A, B, cut=(None, None, None)):
    return compose(A, B, cut) - compose(B, A, cut)


def adjoint(A):
    """A^# = sum Lambda^-j1 (-d2)^j2 (-d3)^j3 f, renormalized; Lambda-direction flips."""
    if isinstance(A, ExtOpSeries):
        return A.adjoint()
    alg = A.alg
    ctx = (-A.ctx[0], A.ctx[1], A.ctx[2])
    cut = (None if A.cut[0] is None else -A.cut[0], A.cut[1], A.cut[2])
    acc = OpSeries(alg, ctx, {}, cut)
    for (j1, j2, j3), f in A.terms.items():
        sign = -1 if (j2 + j3) % 2 else 1
        mono = OpSeries(alg, ctx, {(-j1, j2, j3): alg.ring.const(sign)}, (None, None, None))
        acc = acc + compose(mono, alg.scalar(f), cut)
    return OpSeries(alg, ctx, acc.terms, cut)


def part(A, axis, sel, k=0):
    return A.part(axis, sel, k)


def residue(A, axis):
    """Coefficient of the exponent -1 on a d-axis (2 or 3)."""
    op = A.coefficient_op(axis, -1)
    if all(j == (0, 0, 0) for j in op.terms):
        return op.terms.get((0, 0, 0), A.ring.zero())
    return op


def leading_axis_term(A, axis):
    t = A.top(axis)
    if t is None:
        raise ArithmeticError("cannot invert zero")
    return t, A.coefficient_op(axis, t)


def invert_monic(A, axis=None, cut=None):
    """Two-sided inverse of A whose leading term along ``axis`` is invertible.

    The leading coefficient may itself be an operator in another Laurent axis; it is then
    inverted recursively.  ``cut`` is the requested guarantee window of the result.
    """
    alg = A.alg
    ctx = A.ctx
    if axis is None:
        lax = [a for a in range(3) if ctx[a]]
        if not lax:
            raise ContextError("inversion needs a Laurent axis")
        axis = lax[0] + 1
    a = axis - 1
    if not ctx[a]:
        raise ContextError("inversion axis must be Laurent")
    if cut is None:
        cut = tuple(A.cut[i] for i in range(3))
    if cut[a] is None:
        raise WindowError("inversion needs a finite window on its axis")
    t, C = leading_axis_term(A, axis)
    # inverse of the leading coefficient
    if all(j == (0, 0, 0) for j in C.terms):
        f = C.terms[(0, 0, 0)]
        Cinv = alg.scalar(f.inverse(), ctx)
    else:
        sub = [i + 1 for i in range(3) if i != a and ctx[i]]
        if not sub:
            raise ArithmeticError("leading coefficient is not invertible")
        Cinv = invert_monic(C.with_ctx(ctx), sub[0], cut)
    Xinv = [0, 0, 0]
    Xinv[a] = -t
    lead_inv = compose(OpSeries(alg, ctx, {tuple(Xinv): alg.ring.one()}), Cinv, cut)
    lead = compose(C.with_ctx(ctx), OpSeries(alg, ctx, {tuple(-x for x in Xinv): alg.ring.one()}))
    M = compose(lead_inv, A - lead, cut)
    s = -ctx[a]
    # number of Neumann terms: every factor of M lowers the primary exponent by >= 1
    span = s * t - s * cut[a] + 1
    acc = alg.one(ctx)
    term = alg.one(ctx)
    for _ in range(max(span, 0) + 1):
        term = -compose(term, M, cut)
        if not term.terms:
            break
        acc = acc + term
    acc = OpSeries(alg, ctx, acc.terms, product_cut(acc, lead_inv, ctx, cut))
    res = compose(acc, lead_inv, cut)
    return res


def iota_inverse(alg, coeffs, direction, cut):
    """Expansion of (sum_j c_j Lambda^j)^-1 at Lambda^-1 = 0 (direction -1) or Lambda = 0 (+1)."""
    ctx = (direction, 0, 0)
    P = alg.from_lambda_poly(coeffs, ctx)
    return invert_monic(P, 1, (cut, None, None))


def iota_expand(alg, name, direction, cut):
    """The rational difference factors used in the formulas, expanded in the given direction."""
    table = {
        "inv(L-1)": {1: 1, 0: -1},
        "inv(L+1)": {1: 1, 0: 1},
        "inv(L-Linv)": {1: 1, -1: -1},
        "inv(1+Linv)": {0: 1, -1: 1},
        "inv(Linv-1)": {-1: 1, 0: -1},
    }
    try:
        poly = table[name]
    except KeyError:
        raise ValueError(f"unsupported factor {name!r}") from None
    return iota_inverse(alg, poly, direction, cut)


def eval_lambda(A, value=1):
    """Substitute Lambda = value in an operator polynomial in Lambda (pure Lambda terms)."""
    out = {}
    for (j1, j2, j3), f in A.terms.items():
        if A.ctx[0] and A.cut[0] is not None:
            raise WindowError("evaluation needs a finite Lambda-range")
        c = mpq(value) ** j1
        out[(0, j2, j3)] = out[(0, j2, j3)] + f * c if (0, j2, j3) in out else f * c
    return OpSeries(A.alg, (0, A.ctx[1], A.ctx[2]), out, (None, A.cut[1], A.cut[2]))


class ExtOpSeries:
    """sum_p A_p (eps d_x)^p with the symbol eps d_x placed on the right."""

    __slots__ = ("alg", "parts")

    def __init__(self, alg, parts):
        self.alg = alg
        self.parts = {p: A for p, A in parts.items() if A.terms or p == 0}
        if 0 not in self.parts:
            self.parts[0] = alg.zero()

    @classmethod
    def lift(cls, A):
        if isinstance(A, ExtOpSeries):
            return A
        return cls(A.alg, {0: A})

    @property
    def A0(self):
        return self.parts.get(0)

    @property
    def A1(self):
        return self.parts.get(1, self.alg.zero(self.parts[0].ctx, self.parts[0].cut))

    def degree(self):
        return max((p for p, A in self.parts.items() if A.terms), default=0)

    def _co(self, other):
        return ExtOpSeries.lift(other) if isinstance(other, (OpSeries, ExtOpSeries)) else ExtOpSeries.lift(self.alg.scalar(other))

    def __add__(self, other):
        other = self._co(other)
        out = dict(self.parts)
        for p, A in other.parts.items():
            out[p] = out[p] + A if p in out else A
        return ExtOpSeries(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return ExtOpSeries(self.alg, {p: -A for p, A in self.parts.items()})

    def __sub__(self, other):
        return self + (-self._co(other))

    def scale(self, c):
        return ExtOpSeries(self.alg, {p: A.scale(c) for p, A in self.parts.items()})

    def map_parts(self, fn):
        return ExtOpSeries(self.alg, {p: fn(A) for p, A in self.parts.items()})

    def derive(self, derivation):
        return self.map_parts(lambda A: A.derive(derivation))

    def compose(self, other, cut=(None, None, None)):
        other = self._co(other)
        out = {}
        for p, A in self.parts.items():
            for r, B in other.parts.items():
                Bj = B
                for j in range(p + 1):
                    if j:
                        Bj = Bj.d_x()
                    if not Bj.terms:
                        break
                    t = compose(A, Bj, cut).scale(binom(p, j))
                    deg = p - j + r
                    out[deg] = out[deg] + t if deg in out else t
        return ExtOpSeries(self.alg, out)

    def __mul__(self, other):
        if isinstance(other, (OpSeries, ExtOpSeries)):
            return self.compose(other)
        return self.scale(other)

    def adjoint(self):
        out = {}
        for p, A in self.parts.items():
            Ah = adjoint(A)
            sign = -1 if p % 2 else 1
            cur = Ah
            for j in range(p + 1):
                if j:
                    cur = cur.d_x()
                t = cur.scale(binom(p, j) * sign)
                deg = p - j
                out[deg] = out[deg] + t if deg in out else t
        return ExtOpSeries(self.alg, out)

    def to_left_form(self):
        """Rewrite as sum_r D^r Y_r (eps d_x on the left); returns {r: Y_r}."""
        out = {}
        for p, A in self.parts.items():
            cur = A
            for j in range(p + 1):
                if j:
                    cur = cur.d_x()
                t = cur.scale(binom(p, j) * (-1) ** j)
                r = p - j
                out[r] = out[r] + t if r in out else t
        return out

    @classmethod
    def from_left_form(cls, alg, left):
        out = {}
        for r, Y in left.items():
            cur = Y
            for i in range(r + 1):
                if i:
                    cur = cur.d_x()
                t = cur.scale(binom(r, i))
                deg = r - i
                out[deg] = out[deg] + t if deg in out else t
        return cls(alg, out)

    def part(self, axis, sel, k=0):
        return self.map_parts(lambda A: A.part(axis, sel, k))

    def truncate(self, cut):
        return self.map_parts(lambda A: A.truncate(cut))

    def diff(self, other):
        other = self._co(other)
        for p in sorted(set(self.parts) | set(other.parts)):
            A = self.parts.get(p, self.alg.zero())
            B = other.parts.get(p, self.alg.zero())
            d = A.diff(B)
            if d is not None:
                return (p,) + d
        return None

    def eq_window(self, other):
        return self.diff(other) is None

    def is_zero_window(self):
        return all(A.diff(self.alg.zero(A.ctx, A.cut)) is None for A in self.parts.values())

    def __str__(self):
        out = []
        for p in sorted(self.parts):
            tag = "" if p == 0 else (" * (eps d_x)" if p == 1 else f" * (eps d_x)^{p}")
            out.append(f"[{str(self.parts[p])}]{tag}")
        return "\n+ ".join(out)

    def latex(self):
        out = []
        for p in sorted(self.parts):
            tag = "" if p == 0 else (r"\,\epsilon\partial_x" if p == 1 else f"\\,(\\epsilon\\partial_x)^{{{p}}}")
            out.append(f"\\left({self.parts[p].latex()}\\right){tag}")
        return " + ".join(out)

    def to_json(self):
        return {"ext_parts": {str(p): A.to_json() for p, A in sorted(self.parts.items())}}
