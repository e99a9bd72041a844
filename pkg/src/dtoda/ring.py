"""The coefficient ring: polynomials in shifted jets xi^(i)[m] and exponentials e^{c alpha[m]},
with exact rational coefficients, truncated in eps.

A monomial is a sorted tuple of ((symbol, shift, deriv), power) pairs.  The exponential
e^{c alpha[m]} is stored as the pair ((EXP, m, 0), c); weights merge additively.
A RingElem is a flat map (monomial, eps power) -> rational together with the order
``valid`` below which all eps-coefficients are exact.
"""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .symbols import DxSymbol

EXP = -1
ZERO = mpq(0)
ONE = mpq(1)


class ConfigError(ValueError):
    pass


class DerivationError(KeyError):
    pass


class SolveError(ArithmeticError):
    pass


def q(x):
    """Coerce ints, strings like '3/4' and rationals to mpq."""
    if isinstance(x, str):
        return mpq(x)
    return mpq(x)


def mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, p in b:
        v = d.get(k, 0) + p
        if v:
            d[k] = v
        else:
            del d[k]
    return tuple(sorted(d.items()))


_mono_cache = {}


def mmul(a, b):
    key = (a, b)
    r = _mono_cache.get(key)
    if r is None:
        if len(_mono_cache) > 2_000_000:
            _mono_cache.clear()
        r = _mono_cache[key] = mono_mul(a, b)
    return r


def mono_shift(mono, m):
    if not m:
        return mono
    return tuple(((s, sh + m, d), p) for (s, sh, d), p in mono)


def mono_degree(mono):
    return sum(p for (s, _, _), p in mono if s != EXP)


class EpsSeries:
    """Truncated series sum_k c_k eps^k, exact below ``valid``."""

    __slots__ = ("coeffs", "valid")

    def __init__(self, coeffs, valid):
        self.valid = valid
        c = [q(x) for x in coeffs[:valid]]
        c += [ZERO] * (valid - len(c))
        self.coeffs = tuple(c)

    def __add__(self, other):
        v = min(self.valid, other.valid)
        return EpsSeries([a + b for a, b in zip(self.coeffs[:v], other.coeffs[:v])], v)

    def __mul__(self, other):
        if not isinstance(other, EpsSeries):
            return EpsSeries([c * q(other) for c in self.coeffs], self.valid)
        v = min(self.valid, other.valid)
        a, b = self.coeffs, other.coeffs
        return EpsSeries([sum((a[i] * b[k - i] for i in range(k + 1)), ZERO) for k in range(v)], v)

    def inv(self):
        a = self.coeffs
        if not a or not a[0]:
            raise ArithmeticError("eps-series with zero constant term is not invertible")
        out = [1 / a[0]]
        for k in range(1, self.valid):
            out.append(-sum((a[i] * out[k - i] for i in range(1, k + 1)), ZERO) / a[0])
        return EpsSeries(out, self.valid)

    def is_zero(self):
        return not any(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, EpsSeries) and self.coeffs == other.coeffs and self.valid == other.valid

    def __repr__(self):
        return f"EpsSeries({[str(c) for c in self.coeffs]}, valid={self.valid})"


class Ring:
    """Symbol registry and caches for one configuration (n, N_eps)."""

    def __init__(self, n=4, eps_order=4):
        if n < 4:
            raise ConfigError("n must be at least 4")
        if eps_order < 1:
            raise ConfigError("eps_order must be positive")
        self.n = n
        self.N = eps_order
        self.names = [f"a{i}" for i in range(1, n - 3)] + ["alpha", "q2", "q3", "c2", "c3"]
        self.index = {name: i for i, name in enumerate(self.names)}
        self.n_base = len(self.names)
        self._flat = {}
        self._dx = {}
        self._subs = {}

    @property
    def config(self):
        return (self.n, self.N)

    def sym(self, name):
        try:
            return self.index[name]
        except KeyError:
            raise ConfigError(f"unknown symbol {name!r} for n={self.n}") from None

    def placeholder(self, name):
        """Register an auxiliary unknown used by the linear solvers."""
        if name not in self.index:
            self.index[name] = len(self.names)
            self.names.append(name)
        return self.index[name]

    def name_of(self, s):
        return "exp_alpha" if s == EXP else self.names[s]

    def base_symbols(self):
        return list(range(self.n_base))

    # constructors
    def elem(self, terms, valid=None):
        return RingElem(self, terms, self.N if valid is None else valid)

    def zero(self, valid=None):
        return self.elem({}, valid)

    def const(self, c, valid=None):
        c = q(c)
        return self.elem({((), 0): c} if c else {}, valid)

    def one(self):
        return self.const(1)

    def eps(self, k=1, c=1):
        if k >= self.N:
            return self.zero()
        return self.elem({((), k): q(c)})

    def gen(self, name, deriv=0, shift=0):
        s = name if isinstance(name, int) else self.sym(name)
        return self.elem({((((s, shift, deriv), 1),), 0): ONE})

    def exp_alpha(self, weight=1, shift=0):
        if weight == 0:
            return self.one()
        return self.elem({((((EXP, shift, 0), weight),), 0): ONE})

    # cached monomial maps
    def dx_mono(self, mono):
        r = self._dx.get(mono)
        if r is not None:
            return r
        out = {}
        alpha = self.index["alpha"]
        for idx, ((s, sh, d), p) in enumerate(mono):
            if s == EXP:
                extra = (((alpha, sh, 1), 1),)
                nm = mmul(mono, extra)
                out[nm] = out.get(nm, ZERO) + p
            else:
                rest = list(mono)
                if p == 1:
                    del rest[idx]
                else:
                    rest[idx] = ((s, sh, d), p - 1)
                nm = mmul(tuple(rest), (((s, sh, d + 1), 1),))
                out[nm] = out.get(nm, ZERO) + p
        r = self._dx[mono] = [(m, c) for m, c in out.items() if c]
        return r

    def flatten_mono(self, mono):
        r = self._flat.get(mono)
        if r is not None:
            return r
        N = self.N
        alpha = self.index["alpha"]
        acc = {((), 0): ONE}
        for (s, sh, d), p in mono:
            if sh == 0:
                fac = {((((s, 0, d), p),), 0): ONE}
            elif s == EXP:
                # e^{p alpha[sh]} = e^{p alpha} exp(p sum_k (sh eps)^k alpha^(k)/k!)
                arg = {((((alpha, 0, k), 1),), k): q(p) * mpq(sh) ** k / factorial(k) for k in range(1, N)}
                ex = _exp_dict(arg, N)
                fac = {(mmul(m, (((EXP, 0, 0), p),)), k): c for (m, k), c in ex.items()}
            else:
                base = {((((s, 0, d + k), 1),), k): mpq(sh) ** k / factorial(k) for k in range(N)}
                fac = {((), 0): ONE}
                for _ in range(p):
                    fac = _mul_dict(fac, base, N)
            acc = _mul_dict(acc, fac, N)
        self._flat[mono] = acc
        return acc


def _mul_dict(a, b, N):
    out = {}
    for (m1, k1), c1 in a.items():
        for (m2, k2), c2 in b.items():
            k = k1 + k2
            if k >= N:
                continue
            key = (mmul(m1, m2), k)
            out[key] = out.get(key, ZERO) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _exp_dict(arg, N):
    """exp of a series with no eps^0 part."""
    acc = {((), 0): ONE}
    term = {((), 0): ONE}
    for j in range(1, N):
        term = _mul_dict(term, arg, N)
        if not term:
            break
        inv = mpq(1, factorial(j))
        for key, c in term.items():
            acc[key] = acc.get(key, ZERO) + c * inv
    return {k: v for k, v in acc.items() if v}


class RingElem:
    __slots__ = ("ring", "terms", "valid", "_flatcache")

    def __init__(self, ring, terms, valid):
        self.ring = ring
        self.valid = valid
        self.terms = {k: c for k, c in terms.items() if c and k[1] < valid}
        self._flatcache = None

    # basic predicates
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _coerce(self, other):
        if isinstance(other, RingElem):
            if other.ring is not self.ring and other.ring.config != self.ring.config:
                raise ConfigError("ring configuration mismatch")
            return other
        return self.ring.const(other)

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, ZERO) + c
        return RingElem(self.ring, out, min(self.valid, other.valid))

    __radd__ = __add__

    def __neg__(self):
        return RingElem(self.ring, {k: -c for k, c in self.terms.items()}, self.valid)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RingElem):
            c = q(other)
            return RingElem(self.ring, {k: v * c for k, v in self.terms.items()}, self.valid)
        other = self._coerce(other)
        v = min(self.valid, other.valid)
        if not self.terms or not other.terms:
            return RingElem(self.ring, {}, v)
        out = {}
        for (m1, k1), c1 in self.terms.items():
            for (m2, k2), c2 in other.terms.items():
                k = k1 + k2
                if k >= v:
                    continue
                key = (mmul(m1, m2), k)
                out[key] = out.get(key, ZERO) + c1 * c2
        return RingElem(self.ring, out, v)

    __rmul__ = __mul__

    def __pow__(self, p):
        out = self.ring.one()
        for _ in range(p):
            out = out * self
        return out

    def scale(self, c):
        return self * c

    def times_eps(self, k=1):
        return RingElem(self.ring, {(m, j + k): c for (m, j), c in self.terms.items()}, self.valid)

    def with_valid(self, valid):
        return RingElem(self.ring, self.terms, min(valid, self.valid))

    def eps_part(self, k):
        """Coefficient of eps^k as an element with eps-power 0."""
        return RingElem(self.ring, {(m, 0): c for (m, j), c in self.terms.items() if j == k}, self.valid - k)

    def min_eps(self):
        return min((j for (_, j) in self.terms), default=self.valid)

    def series(self):
        """monomial -> EpsSeries."""
        out = {}
        for (m, j), c in self.terms.items():
            out.setdefault(m, [ZERO] * self.valid)[j] = c
        return {m: EpsSeries(cs, self.valid) for m, cs in out.items()}

    def monomials(self):
        return sorted({m for (m, _) in self.terms}, key=_mono_sort_key)

    def symbols(self):
        return {s for (m, _) in self.terms for (s, _, _), _ in m}

    def contains_symbol(self, s):
        return any(f[0][0] == s for (m, _) in self.terms for f in m)

    # derivations and shifts
    def d_x(self):
        ring = self.ring
        out = {}
        for (m, k), c in self.terms.items():
            for m2, c2 in ring.dx_mono(m):
                key = (m2, k)
                out[key] = out.get(key, ZERO) + c * c2
        return RingElem(ring, out, self.valid)

    def shift(self, m):
        if not m:
            return self
        return RingElem(self.ring, {(mono_shift(mo, m), k): c for (mo, k), c in self.terms.items()}, self.valid)

    def flatten(self):
        if self._flatcache is not None:
            return self._flatcache
        ring = self.ring
        v = self.valid
        if all(sh == 0 for (m, _) in self.terms for (_, sh, _), _ in m):
            self._flatcache = self
            return self
        out = {}
        for (m, k), c in self.terms.items():
            for (m2, k2), c2 in ring.flatten_mono(m).items():
                kk = k + k2
                if kk < v:
                    key = (m2, kk)
                    out[key] = out.get(key, ZERO) + c * c2
        res = RingElem(ring, out, v)
        res._flatcache = res
        self._flatcache = res
        return res

    def is_flat(self):
        return self.flatten() is self

    def derive(self, table):
        return table(self)

    def subs(self, mapping):
        """Ring homomorphism fixing d_x and shifts, sending symbol s to mapping[s]."""
        ring = self.ring
        if not mapping:
            return self
        cache = {}

        def image(key):
            r = cache.get(key)
            if r is None:
                s, sh, d = key
                r = mapping[s]
                for _ in range(d):
                    r = r.d_x()
                r = cache[key] = r.shift(sh)
            return r

        acc = ring.zero(self.valid)
        grouped = {}
        for (m, k), c in self.terms.items():
            keep = tuple(f for f in m if f[0][0] not in mapping)
            repl = tuple(f for f in m if f[0][0] in mapping)
            grouped.setdefault(repl, {})
            g = grouped[repl]
            g[(keep, k)] = g.get((keep, k), ZERO) + c
        for repl, rest in grouped.items():
            part = RingElem(ring, rest, self.valid)
            for key, p in repl:
                for _ in range(p):
                    part = part * image(key)
            acc = acc + part
        return acc

    def inverse(self):
        """Inverse of a unit: exponential monomial times an eps-series with nonzero constant term."""
        ring = self.ring
        mons = {m for (m, _) in self.terms}
        if len(mons) == 1:
            (m,) = mons
            if all(s == EXP for (s, _, _), _ in m):
                ser = self.series()[m]
                if ser.coeffs[0]:
                    inv_m = tuple(((k, -p) for k, p in m))
                    si = ser.inv()
                    return RingElem(ring, {(inv_m, j): c for j, c in enumerate(si.coeffs)}, self.valid)
        flat = self.flatten()
        lead = flat.eps_part(0)
        lead_mons = list(lead.terms)
        if len(lead_mons) != 1 or not all(s == EXP for (s, _, _), _ in lead_mons[0][0]):
            raise ArithmeticError("element is not a unit of the ring")
        u = RingElem(ring, lead.terms, self.valid)
        uinv = u.inverse()
        rest = flat - u
        x = rest * uinv
        acc = ring.one().with_valid(self.valid)
        term = ring.one()
        for _ in range(1, self.valid):
            term = -(term * x)
            if not term:
                break
            acc = acc + term
        return acc * uinv

    # comparison
    def __eq__(self, other):
        if isinstance(other, (int, str)) or not isinstance(other, RingElem):
            other = self._coerce(other)
        v = min(self.valid, other.valid)
        a = {k: c for k, c in self.terms.items() if k[1] < v}
        b = {k: c for k, c in other.terms.items() if k[1] < v}
        return a == b

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def eq_mod_eps(self, other):
        return eq_mod_eps(self, other)

    # output
    def __str__(self):
        from .emit import ring_text

        return ring_text(self)

    def __repr__(self):
        return f"RingElem({self})"

    def latex(self):
        from .emit import ring_latex

        return ring_latex(self)

    def to_json(self):
        from .emit import ring_json

        return ring_json(self)


def _mono_sort_key(m):
    return (mono_degree(m), m)


# module-level operations


def add(P, Q):
    return P + Q


def mul(P, Q):
    return P * Q


def scale(P, c):
    return P * c


def d_x(P):
    return P.d_x()


def shift(P, m):
    return P.shift(m)


def flatten(P):
    return P.flatten()


def eq_mod_eps(P, Q):
    if not isinstance(Q, RingElem):
        Q = P.ring.const(Q)
    if not isinstance(P, RingElem):
        P = Q.ring.const(P)
    return (P - Q).flatten().is_zero()


def apply_dx_symbol(phi, P, preimage=None):
    """phi(eps d_x) applied to P, truncated at the valid order of P.

    For a marked form phi = psi/z pass ``preimage`` R with P = eps d_x R; the result is psi(eps d_x) R.
    """
    if phi.pole:
        if preimage is None:
            raise ValueError("marked pole symbol needs the eps*d_x preimage of its argument")
        if not eq_mod_eps(preimage.d_x().times_eps(1), P):
            raise ValueError("argument is not eps*d_x of the supplied preimage")
        return apply_dx_symbol(DxSymbol(list(phi.taylor)), preimage)
    ring = P.ring
    cur = P.flatten()
    v = cur.valid
    if phi.prec < v:
        raise ValueError("symbol precision below eps order")
    acc = cur * phi.taylor[0]
    for k in range(1, v):
        cur = RingElem(ring, {key: c for key, c in cur.terms.items() if key[1] < v - k}, v)
        if not cur.terms:
            break
        cur = cur.d_x()
        if phi.taylor[k]:
            acc = acc + cur.times_eps(k) * phi.taylor[k]
    return acc


def ring_exp(c, Q):
    """e^{c alpha} exp(Q) for Q of positive eps-order (an eps^0 part j*alpha is absorbed into c)."""
    ring = Q.ring
    Q = Q.flatten()
    lead = Q.eps_part(0)
    if lead:
        alpha_mono = ((((ring.sym("alpha"), 0, 0), 1),))
        terms = list(lead.terms.items())
        if len(terms) != 1 or terms[0][0][0] != alpha_mono or terms[0][1].denominator != 1:
            raise ValueError("eps^0 part of the exponent must be an integer multiple of alpha")
        j = int(terms[0][1])
        c += j
        Q = Q - ring.gen("alpha") * j
    acc = ring.one().with_valid(Q.valid)
    term = ring.one()
    for k in range(1, Q.valid):
        term = term * Q * mpq(1, k)
        if not term:
            break
        acc = acc + term
    return ring.exp_alpha(c) * acc


class Derivation:
    """Derivation of the ring commuting with d_x and shifts, fixed by its values on symbols."""

    def __init__(self, ring, table, name="", flat=False):
        self.ring = ring
        self.name = name
        self.flat = flat
        self.table = {(ring.sym(k) if isinstance(k, str) else k): v for k, v in table.items()}
        if flat:
            self.table = {k: v.flatten() for k, v in self.table.items()}
        self._gen = {}
        self._mono = {}

    def flattened(self):
        """The same derivation producing shift-free (flattened) images."""
        return Derivation(self.ring, self.table, self.name, flat=True)

    def value(self, name):
        s = self.ring.sym(name) if isinstance(name, str) else name
        return self.table[s]

    def gen_image(self, key):
        r = self._gen.get(key)
        if r is not None:
            return r
        s, sh, d = key
        if s == EXP:
            raise DerivationError("exponential generators are handled through alpha")
        try:
            base = self.table[s]
        except KeyError:
            raise DerivationError(f"derivation {self.name!r} has no entry for {self.ring.name_of(s)}") from None
        r = base
        for _ in range(d):
            r = r.d_x()
        r = r.shift(sh)
        if self.flat:
            r = r.flatten()
        self._gen[key] = r
        return r

    def mono_image(self, mono):
        r = self._mono.get(mono)
        if r is not None:
            return r
        ring = self.ring
        acc = ring.zero()
        alpha = ring.sym("alpha")
        for idx, ((s, sh, d), p) in enumerate(mono):
            if s == EXP:
                img = self.gen_image((alpha, sh, 0)) * p
                acc = acc + img * ring.elem({(mono, 0): ONE})
            else:
                rest = list(mono)
                if p == 1:
                    del rest[idx]
                else:
                    rest[idx] = ((s, sh, d), p - 1)
                acc = acc + self.gen_image((s, sh, d)) * ring.elem({(tuple(rest), 0): mpq(p)})
        self._mono[mono] = acc
        return acc

    def __call__(self, P):
        ring = self.ring
        out = {}
        if self.flat:
            P = P.flatten()
        v = P.valid
        for (m, k), c in P.terms.items():
            if not m:
                continue
            img = self.mono_image(m)
            v = min(v, img.valid + k)
            for (m2, k2), c2 in img.terms.items():
                kk = k + k2
                key = (m2, kk)
                out[key] = out.get(key, ZERO) + c * c2
        return RingElem(ring, out, v)


def derive(P, table):
    return table(P)


def linear_parts(E, u):
    """Split E = sum_key f_key * u-key + R; raises if E is not linear in symbol u."""
    ring = E.ring
    parts, rest = {}, {}
    for (m, k), c in E.terms.items():
        uf = [f for f in m if f[0][0] == u]
        if not uf:
            rest[(m, k)] = c
            continue
        if len(uf) > 1 or uf[0][1] != 1:
            raise SolveError("equation is not linear in the unknown")
        key = uf[0][0]
        other = tuple(f for f in m if f[0][0] != u)
        d = parts.setdefault(key, {})
        d[(other, k)] = d.get((other, k), ZERO) + c
    return ({key: RingElem(ring, d, E.valid) for key, d in parts.items()}, RingElem(ring, rest, E.valid))


def _is_exp_unit(f):
    mons = {m for (m, _) in f.terms}
    if len(mons) != 1:
        return False
    (m,) = mons
    return all(s == EXP for (s, _, _), _ in m) and f.series()[m].coeffs[0] != 0


def solve_linear(E, u, iterations=None):
    """Solve E(u) = 0 for the symbol u, E affine in the jets of u.

    A single term f*u[m] with f a unit monomial is solved exactly (shifted form kept);
    otherwise the equation is flattened and solved eps-adically by fixed-point iteration.
    """
    ring = E.ring
    parts, R = linear_parts(E, u)
    if not parts:
        raise SolveError("unknown does not occur in the equation")
    if len(parts) == 1:
        (key, f), = parts.items()
        if key[2] == 0 and _is_exp_unit(f):
            sol = (-R * f.inverse()).shift(-key[1])
            return sol
    flat = E.flatten()
    parts, R = linear_parts(flat, u)
    v = flat.valid
    g = {key[2]: f for key, f in parts.items()}
    g0 = g.get(0)
    if g0 is None:
        raise SolveError("no undifferentiated occurrence of the unknown")
    u0 = g0.eps_part(0).with_valid(v)
    if not _is_exp_unit(u0):
        raise SolveError("leading coefficient is not a unit")
    for j, f in g.items():
        if j and f.eps_part(0):
            raise SolveError("derivative of the unknown occurs at eps^0")
    u0inv = u0.inverse()
    corr = dict(g)
    corr[0] = g0 - u0
    sol = ring.zero(v)
    for _ in range(iterations or v):
        acc = -R
        jets = sol
        for j in range(max(corr) + 1):
            if j:
                jets = jets.d_x()
            f = corr.get(j)
            if f is not None and f:
                acc = acc - f * jets
        sol = (acc * u0inv).with_valid(v)
    return sol
