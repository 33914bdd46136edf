"""
Exact coefficient algebra for differential operators on a torus.

Two representations are provided:

``SinCosPoly``
    Polynomials in ``sin<alpha,H>`` and ``cos<alpha,H>`` over the positive
    roots.  This is the working form: derivatives are exact and numerical
    evaluation keeps full relative precision near the walls, where the
    factored sines are small.

``TrigLaurentPoly``
    Finite Laurent series in the characters ``exp(i<kappa,H>)`` with integer
    frequency labels.  This is the expanded form used for structural checks
    (analyticity, W-equivariance, exact cancellation).

Coefficients are Gaussian rationals built on :class:`fractions.Fraction`.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = ["GaussRational", "SinCosPoly", "TrigLaurentPoly", "solve_exact"]


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer, Rational)):
        return Fraction(int(x)) if isinstance(x, (int, np.integer)) else Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, GaussRational):
            return x
        return cls(x, 0)

    def __add__(self, other):
        o = GaussRational.coerce(other)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussRational.coerce(other)
        return GaussRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussRational.coerce(other) - self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __mul__(self, other):
        o = GaussRational.coerce(other)
        return GaussRational(self.re * o.re - self.im * o.im,
                             self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussRational.coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * o.conjugate()
        return GaussRational(num.re / den, num.im / den)

    def __pow__(self, k: int):
        out = GaussRational(1)
        for _ in range(int(k)):
            out = out * self
        return out

    def conjugate(self):
        return GaussRational(self.re, -self.im)

    def __eq__(self, other):
        try:
            o = GaussRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"{self.re}"
        if not self.re:
            return f"{self.im}i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"


I_UNIT = GaussRational(0, 1)


def solve_exact(A, b):
    """Solve ``A x = b`` over the rationals by Gauss-Jordan elimination."""
    n = len(A)
    M = [[_frac(A[i][j]) for j in range(n)] + [_frac(b[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular system")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                fac = M[r][col]
                M[r] = [a - fac * c for a, c in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def _clean(d):
    return {k: v for k, v in d.items() if v}


class TrigLaurentPoly:
    """
    Finite sum ``sum_k c_k exp(i<kappa_k, H>)`` with integer labels ``k``.

    A label ``k`` stands for the weight with Dynkin labels ``k``, so that in
    period coordinates ``t`` of the torus the character is ``exp(i*pi*k.t)``.
    Labels of roots may be odd; functions on the torus itself have even labels.

    Parameters
    ----------
    terms : dict
        Map from label tuples to coefficients (converted to GaussRational).
    weight_of_label : callable, optional
        Returns the exact ambient vector of a label; needed for derivatives.
    """

    def __init__(self, terms=None, weight_of_label=None, scale=Fraction(1)):
        self.terms = _clean({tuple(int(v) for v in k): GaussRational.coerce(c)
                             for k, c in (terms or {}).items()})
        self.weight_of_label = weight_of_label
        self.scale = _frac(scale)

    def _like(self, terms):
        return TrigLaurentPoly(terms, self.weight_of_label, self.scale)

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, GaussRational()) + c
        return self._like(out)

    def __sub__(self, other):
        return self + other * GaussRational(-1)

    def __mul__(self, other):
        if isinstance(other, TrigLaurentPoly):
            out = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    k = tuple(a + b for a, b in zip(k1, k2))
                    out[k] = out.get(k, GaussRational()) + c1 * c2
            return self._like(out)
        c = GaussRational.coerce(other)
        return self._like({k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, TrigLaurentPoly) and (self - other).is_zero()

    def derivative(self, k: int):
        """Exact partial derivative along the k-th ambient coordinate."""
        if self.weight_of_label is None:
            raise ValueError("derivative needs the label-to-weight map")
        out = {}
        for lab, c in self.terms.items():
            w = self.weight_of_label(lab)
            out[lab] = c * I_UNIT * (self.scale * w[k])
        return self._like(out)

    def labels(self):
        return sorted(self.terms)

    def evaluate(self, t):
        """Evaluate at period coordinates ``t`` (array of shape (..., n))."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape[:-1], dtype=complex)
        for lab, c in self.terms.items():
            out += complex(c) * np.exp(1j * np.pi * (t @ np.asarray(lab, float)))
        return out

    def __repr__(self):
        inner = ", ".join(f"{k}: {v!r}" for k, v in sorted(self.terms.items()))
        return f"TrigLaurentPoly({{{inner}}})"


class SinCosPoly:
    """
    Polynomial in ``s_r = sin<alpha_r,H>`` and ``c_r = cos<alpha_r,H>``.

    Keys are pairs ``(a, b)`` of exponent tuples over the positive roots.

    Parameters
    ----------
    roots : array_like of int
        Positive roots in ambient coordinates, one per row.
    scale : Fraction
        The invariant form is ``<x,y> = scale * (x . y)``.
    """

    def __init__(self, roots, terms=None, scale=Fraction(1)):
        self.roots = np.asarray(roots)
        self.nroots = self.roots.shape[0]
        self.scale = _frac(scale)
        self.terms = _clean({(tuple(a), tuple(b)): GaussRational.coerce(c)
                             for (a, b), c in (terms or {}).items()})

    @classmethod
    def constant(cls, roots, value, scale=Fraction(1)):
        z = (0,) * np.asarray(roots).shape[0]
        return cls(roots, {(z, z): value}, scale)

    @classmethod
    def monomial(cls, roots, a, b, coeff=1, scale=Fraction(1)):
        return cls(roots, {(tuple(a), tuple(b)): coeff}, scale)

    def _like(self, terms):
        return SinCosPoly(self.roots, terms, self.scale)

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, GaussRational()) + c
        return self._like(out)

    def __sub__(self, other):
        return self + other * GaussRational(-1)

    def __mul__(self, other):
        if isinstance(other, SinCosPoly):
            out = {}
            for (a1, b1), c1 in self.terms.items():
                for (a2, b2), c2 in other.terms.items():
                    k = (tuple(x + y for x, y in zip(a1, a2)),
                         tuple(x + y for x, y in zip(b1, b2)))
                    out[k] = out.get(k, GaussRational()) + c1 * c2
            return self._like(out)
        c = GaussRational.coerce(other)
        return self._like({k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def is_zero(self):
        return not self.terms

    def derivative(self, k: int):
        """Exact partial derivative along the k-th ambient coordinate."""
        out = {}
        for (a, b), c in self.terms.items():
            for r in range(self.nroots):
                slope = self.scale * int(self.roots[r, k])
                if slope == 0:
                    continue
                if a[r]:
                    na = list(a); nb = list(b)
                    na[r] -= 1; nb[r] += 1
                    key = (tuple(na), tuple(nb))
                    out[key] = out.get(key, GaussRational()) + c * (a[r] * slope)
                if b[r]:
                    na = list(a); nb = list(b)
                    na[r] += 1; nb[r] -= 1
                    key = (tuple(na), tuple(nb))
                    out[key] = out.get(key, GaussRational()) - c * (b[r] * slope)
        return self._like(out)

    def ratio_to(self, other):
        """Return ``q`` with ``self == q * other`` exactly, or None."""
        if set(self.terms) != set(other.terms) or not other.terms:
            return None
        keys = list(other.terms)
        q = self.terms[keys[0]] / other.terms[keys[0]]
        for k in keys[1:]:
            if self.terms[k] != q * other.terms[k]:
                return None
        return q

    def evaluate(self, X):
        """Evaluate at ambient points ``X`` (real or complex, shape (..., d))."""
        X = np.asarray(X)
        ang = float(self.scale) * (X @ self.roots.T.astype(float))
        s = np.sin(ang)
        c = np.cos(ang)
        out = np.zeros(X.shape[:-1], dtype=complex)
        for (a, b), coef in self.terms.items():
            term = np.full(X.shape[:-1], complex(coef), dtype=complex)
            for r in range(self.nroots):
                if a[r]:
                    term = term * s[..., r] ** a[r]
                if b[r]:
                    term = term * c[..., r] ** b[r]
            out += term
        return out

    def min_sine_power(self):
        """Smallest total sine degree among the terms."""
        return min((sum(a) for a, _ in self.terms), default=0)

    def to_laurent(self, root_labels, weight_of_label=None):
        """
        Expand into a :class:`TrigLaurentPoly`.

        ``root_labels[r]`` are the integer Dynkin labels of root ``r``.
        """
        n = len(root_labels[0])
        zero = (0,) * n
        one = TrigLaurentPoly({zero: 1}, weight_of_label, self.scale)
        half = Fraction(1, 2)
        sin_r, cos_r = [], []
        for lab in root_labels:
            lab = tuple(int(v) for v in lab)
            neg = tuple(-v for v in lab)
            # sin x = (e^{ix} - e^{-ix}) / (2i),  cos x = (e^{ix} + e^{-ix}) / 2
            sin_r.append(TrigLaurentPoly({lab: GaussRational(0, -half),
                                          neg: GaussRational(0, half)},
                                         weight_of_label, self.scale))
            cos_r.append(TrigLaurentPoly({lab: half, neg: half},
                                         weight_of_label, self.scale))
        total = TrigLaurentPoly({}, weight_of_label, self.scale)
        for (a, b), c in self.terms.items():
            term = one * c
            for r in range(self.nroots):
                for _ in range(a[r]):
                    term = term * sin_r[r]
                for _ in range(b[r]):
                    term = term * cos_r[r]
            total = total + term
        return total

    def __repr__(self):
        return f"SinCosPoly({len(self.terms)} terms)"
