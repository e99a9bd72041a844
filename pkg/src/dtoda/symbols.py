"""Truncated Taylor series in z, used as symbols of analytic functions of eps*d/dx.

A DxSymbol phi(z) = sum phi_k z^k stands for the operator phi(eps d_x), which acts on
ring elements as sum phi_k eps^k d_x^k.  The shift operator Lambda is exp(z).
"""

from __future__ import annotations

from gmpy2 import mpq

DEFAULT_PREC = 16


class SymbolError(ValueError):
    pass


def _q(x):
    return x if type(x) is type(mpq()) else mpq(x)


class DxSymbol:
    """Taylor coefficients of phi(z) at z = 0, truncated at z^prec.

    ``pole=True`` marks the form phi(z) = psi(z)/z; ``taylor`` then stores psi.
    Such a symbol may only be applied to an exact image of eps*d_x.
    """

    __slots__ = ("taylor", "pole")

    def __init__(self, taylor, pole=False, prec=None):
        prec = len(taylor) if prec is None else prec
        coeffs = [_q(c) for c in taylor[:prec]]
        coeffs += [mpq(0)] * (prec - len(coeffs))
        self.taylor = tuple(coeffs)
        self.pole = pole
        if pole and not self.taylor[0]:
            raise SymbolError("marked form psi(z)/z needs psi(0) != 0")

    @property
    def prec(self):
        return len(self.taylor)

    # constructors
    @classmethod
    def const(cls, c, prec=DEFAULT_PREC):
        return cls([c], prec=prec)

    @classmethod
    def z(cls, prec=DEFAULT_PREC):
        return cls([0, 1], prec=prec)

    @classmethod
    def exp(cls, m=1, prec=DEFAULT_PREC):
        """exp(m z), the symbol of Lambda^m."""
        out, term = [], mpq(1)
        for k in range(prec):
            out.append(term)
            term = term * m / (k + 1)
        return cls(out, prec=prec)

    @classmethod
    def from_poly_in_lambda(cls, coeffs, prec=DEFAULT_PREC):
        """sum_j c_j exp(j z) for a mapping j -> c_j."""
        acc = cls.const(0, prec)
        for j, c in coeffs.items():
            acc = acc + cls.exp(j, prec) * c
        return acc

    # arithmetic
    def _lift(self, other):
        if isinstance(other, DxSymbol):
            return other
        return DxSymbol.const(other, self.prec)

    def _check(self, other):
        if self.pole or other.pole:
            raise SymbolError("arithmetic on marked pole forms is not supported")

    def __add__(self, other):
        other = self._lift(other)
        self._check(other)
        p = min(self.prec, other.prec)
        return DxSymbol([a + b for a, b in zip(self.taylor[:p], other.taylor[:p])])

    __radd__ = __add__

    def __neg__(self):
        return DxSymbol([-a for a in self.taylor], pole=self.pole)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, DxSymbol):
            return DxSymbol([a * _q(other) for a in self.taylor], pole=self.pole)
        if self.pole and other.pole:
            raise SymbolError("product of two pole forms has a double pole")
        p = min(self.prec, other.prec)
        a, b = self.taylor, other.taylor
        out = [sum((a[i] * b[k - i] for i in range(k + 1)), mpq(0)) for k in range(p)]
        return DxSymbol(out, pole=self.pole or other.pole)

    __rmul__ = __mul__

    def valuation(self):
        for k, c in enumerate(self.taylor):
            if c:
                return k
        return self.prec

    def inv(self):
        if self.pole:
            return DxSymbol(list(self.taylor)).inv().mul_z()
        a = self.taylor
        if not a[0]:
            raise SymbolError("phi(0) = 0: symbol is not invertible")
        out = [1 / a[0]]
        for k in range(1, self.prec):
            s = sum((a[i] * out[k - i] for i in range(1, k + 1)), mpq(0))
            out.append(-s / a[0])
        return DxSymbol(out)

    def __truediv__(self, other):
        other = self._lift(other)
        self._check(other)
        v = other.valuation()
        if v >= other.prec:
            raise SymbolError("division by zero symbol")
        vn = self.valuation()
        if vn >= v:
            return self.div_z_shift(v) * other.div_z_shift(v).inv()
        if vn == v - 1:
            return DxSymbol.marked(self.div_z_shift(vn), other.div_z_shift(v))
        raise SymbolError("pole of order > 1 at z = 0")

    @classmethod
    def marked(cls, num, den):
        """psi/z with psi = num/den, both analytic, den(0) != 0."""
        psi = num * den.inv()
        return cls(list(psi.taylor), pole=True)

    def div_z_shift(self, k):
        out = self
        for _ in range(k):
            out = out.div_z()
        return out

    def div_z(self):
        """phi(z)/z for phi(0) = 0 (loses one order of precision)."""
        if self.taylor[0]:
            raise SymbolError("phi(0) != 0: division by z is not exact")
        return DxSymbol(list(self.taylor[1:]), pole=self.pole)

    def mul_z(self):
        """z*phi(z); turns a marked pole form into an analytic symbol."""
        if self.pole:
            return DxSymbol(list(self.taylor))
        return DxSymbol([mpq(0)] + list(self.taylor[:-1]))

    def __call__(self, m):
        return self.taylor[m]

    def __eq__(self, other):
        if not isinstance(other, DxSymbol):
            return NotImplemented
        p = min(self.prec, other.prec)
        return self.pole == other.pole and self.taylor[:p] == other.taylor[:p]

    def __repr__(self):
        head = "psi/z" if self.pole else "phi"
        return f"DxSymbol({head}: {[str(c) for c in self.taylor[:6]]}...)"


def lam(m=1, prec=DEFAULT_PREC):
    """Symbol of Lambda^m."""
    return DxSymbol.exp(m, prec)
