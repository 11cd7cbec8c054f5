"""Scalar backends, polynomials, polynomial matrices and supporting algebra.

Two scalar backends are used throughout the package:

* ``EXACT`` -- arbitrary-precision rationals (:class:`fractions.Fraction`),
  used wherever an identity is polynomial and can be checked bit-exactly.
* ``FLOAT`` -- double-precision complex numbers, used only where root
  finding forces approximation.

All polynomial containers are duck-typed over their coefficients, so the
same code paths also run over :class:`LinForm` (sparse exact linear forms
in coordinate symbols) and :class:`Jet` (value plus first-order gradient),
which is how symbolic bracket tables and implicit-function gradients are
obtained without a computer-algebra dependency.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NonSquare,
    NotDivisible,
    ZeroPolynomial,
)

EXACT = "exact"
FLOAT = "float"

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


def scalar_zero(backend):
    return Fraction(0) if backend == EXACT else 0j


def scalar_one(backend):
    return Fraction(1) if backend == EXACT else complex(1.0)


def to_complex(x):
    """Convert an exact or float scalar to a python complex."""
    if isinstance(x, Fraction):
        return complex(float(x))
    return complex(x)


def exact_zero(c) -> bool:
    """True when c is exactly the zero scalar of its type.

    Jets are never treated as exactly zero so that gradient information is
    not silently discarded during trimming.
    """
    if isinstance(c, (int, Fraction)):
        return c == 0
    if isinstance(c, (float, complex)):
        return c == 0
    if isinstance(c, LinForm):
        return not c.terms
    return False


def check_finite(x):
    v = to_complex(x)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ArithmeticError("non-finite float scalar escaped an operation")
    return x


# ---------------------------------------------------------------------------
# linear forms over coordinate symbols


class LinForm:
    """Sparse exact linear form  sum_w c_w * x_w  over integer symbol ids."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @classmethod
    def basis(cls, idx):
        return cls({idx: Fraction(1)})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if isinstance(other, LinForm):
            out = dict(self.terms)
            for k, v in other.terms.items():
                s = out.get(k, Fraction(0)) + v
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
            return LinForm(out)
        if other == 0:
            return self
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return LinForm({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LinForm):
            raise TypeError("product of two linear forms is not linear")
        if other == 0:
            return LinForm()
        return LinForm({k: v * other for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, LinForm):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def evaluate(self, values):
        """Evaluate at a coordinate vector (indexable by symbol id)."""
        total = None
        for k, c in self.terms.items():
            term = c * values[k] if isinstance(values[k], Fraction) else complex(c) * values[k]
            total = term if total is None else total + term
        if total is None:
            return Fraction(0)
        return total

    def __repr__(self):
        if not self.terms:
            return "LinForm(0)"
        bits = [f"{v}*x{k}" for k, v in sorted(self.terms.items())]
        return "LinForm(" + " + ".join(bits) + ")"


# ---------------------------------------------------------------------------
# first-order jets (forward mode, dense complex gradient)


class Jet:
    """Value plus first-order derivative vector, over complex floats."""

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = complex(val)
        self.grad = np.asarray(grad, dtype=complex)

    @classmethod
    def seed(cls, val, i, dim):
        g = np.zeros(dim, dtype=complex)
        g[i] = 1.0
        return cls(val, g)

    @classmethod
    def const(cls, val, dim):
        return cls(val, np.zeros(dim, dtype=complex))

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        if isinstance(other, (int, float, complex, Fraction)):
            return Jet(to_complex(other), np.zeros_like(self.grad))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.val + o.val, self.grad + o.grad)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.val - o.val, self.grad - o.grad)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(o.val - self.val, o.grad - self.grad)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.val * o.val, self.val * o.grad + o.val * self.grad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        inv = 1.0 / o.val
        return Jet(self.val * inv, (self.grad - (self.val * inv) * o.grad) * inv)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o.__truediv__(self)

    def __repr__(self):
        return f"Jet({self.val!r})"


# ---------------------------------------------------------------------------
# dense univariate polynomials


class Poly:
    """Dense univariate polynomial; ``coeffs[k]`` is the z^k coefficient.

    Exact-zero trailing coefficients are trimmed on construction; float
    coefficients are trimmed below a tolerance only by :meth:`normalize`.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = list(coeffs)
        while cs and exact_zero(cs[-1]):
            cs.pop()
        self.coeffs = cs

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def monomial(cls, k, c):
        return cls([0] * k + [c]) if not exact_zero(c) else cls()

    @property
    def degree(self):
        """Formal degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def coeff(self, k):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def lead(self):
        if not self.coeffs:
            raise ZeroPolynomial("leading coefficient of zero polynomial")
        return self.coeffs[-1]

    def __add__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, Poly):
            if not self.coeffs or not other.coeffs:
                return Poly()
            out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if exact_zero(a):
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return Poly(out)
        return Poly([c * other for c in self.coeffs])

    def __rmul__(self, other):
        return Poly([other * c for c in self.coeffs])

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def shift(self, k):
        """Multiply by z^k."""
        if not self.coeffs:
            return Poly()
        return Poly([0] * k + self.coeffs)

    def deriv(self):
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, z):
        total = None
        for c in reversed(self.coeffs):
            total = c if total is None else total * z + c
        return 0 if total is None else total

    def map(self, fn):
        return Poly([fn(c) for c in self.coeffs])

    def normalize(self, tol):
        """Drop trailing float coefficients of magnitude <= tol."""
        cs = list(self.coeffs)
        while cs and abs(to_complex(cs[-1])) <= tol:
            cs.pop()
        return Poly(cs)

    def divmod_exact(self, other):
        """Euclidean division over a field; (quotient, remainder)."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        dd = other.degree
        rem = list(self.coeffs)
        if len(rem) - 1 < dd:
            return Poly(), Poly(rem)
        dlead = other.lead()
        quot = [0] * (len(rem) - dd)
        for k in range(len(rem) - 1 - dd, -1, -1):
            c = rem[k + dd] / dlead
            quot[k] = c
            if not exact_zero(c):
                for i, b in enumerate(other.coeffs[:-1]):
                    rem[k + i] = rem[k + i] - c * b
            rem[k + dd] = 0  # leading term cancels by construction
        return Poly(quot), Poly(rem[:dd])

    def __repr__(self):
        return f"Poly({self.coeffs!r})"


# ---------------------------------------------------------------------------
# dense bivariate polynomials


class BiPoly:
    """Dense bivariate polynomial; ``grid[a][b]`` is the u^a v^b coefficient."""

    __slots__ = ("grid",)

    def __init__(self, grid=()):
        g = [list(row) for row in grid]
        # canonical trim: drop all-zero trailing rows and columns
        while g and all(exact_zero(c) for c in g[-1]):
            g.pop()
        if g:
            w = max(len(r) for r in g)
            for r in g:
                r.extend([0] * (w - len(r)))
            while w > 0 and all(exact_zero(r[w - 1]) for r in g):
                for r in g:
                    r.pop()
                w -= 1
            if w == 0:
                g = []
        self.grid = g

    @classmethod
    def const(cls, c):
        return cls([[c]])

    @classmethod
    def monomial(cls, a, b, c):
        rows = [[0] * (b + 1) for _ in range(a + 1)]
        rows[a][b] = c
        return cls(rows)

    @classmethod
    def from_poly_v(cls, p):
        """Embed a univariate polynomial as a polynomial in v."""
        return cls([list(p.coeffs)]) if not p.is_zero() else cls()

    @property
    def deg_u(self):
        return len(self.grid) - 1

    @property
    def deg_v(self):
        return (max(len(r) for r in self.grid) - 1) if self.grid else -1

    def is_zero(self):
        return not self.grid

    def coeff(self, a, b):
        if 0 <= a < len(self.grid) and 0 <= b < len(self.grid[a]):
            return self.grid[a][b]
        return 0

    def monomials(self):
        for a, row in enumerate(self.grid):
            for b, c in enumerate(row):
                if not exact_zero(c):
                    yield a, b, c

    def __add__(self, other):
        if not isinstance(other, BiPoly):
            return NotImplemented
        nu = max(len(self.grid), len(other.grid))
        nv = max(self.deg_v, other.deg_v) + 1
        out = [[0] * nv for _ in range(nu)]
        for src in (self, other):
            for a, b, c in src.monomials():
                out[a][b] = out[a][b] + c
        return BiPoly(out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return BiPoly([[-c for c in row] for row in self.grid])

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            if self.is_zero() or other.is_zero():
                return BiPoly()
            nu = self.deg_u + other.deg_u + 1
            nv = self.deg_v + other.deg_v + 1
            out = [[0] * nv for _ in range(nu)]
            for a1, b1, c1 in self.monomials():
                for a2, b2, c2 in other.monomials():
                    out[a1 + a2][b1 + b2] = out[a1 + a2][b1 + b2] + c1 * c2
            return BiPoly(out)
        return BiPoly([[c * other for c in row] for row in self.grid])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.grid == other.grid

    def __call__(self, u, v):
        total = 0
        for a, b, c in self.monomials():
            total = total + c * u**a * v**b
        return total

    def poly_in_u(self):
        """List of v-polynomials, index = power of u."""
        return [Poly(row) for row in self.grid]

    def subs_diagonal(self):
        """Restrict to u = v = z; returns a univariate Poly in z."""
        out = []
        for a, b, c in self.monomials():
            k = a + b
            if k >= len(out):
                out.extend([0] * (k + 1 - len(out)))
            out[k] = out[k] + c
        return Poly(out)

    def __repr__(self):
        return f"BiPoly({self.grid!r})"


def bipoly_div_linear(p: BiPoly) -> BiPoly:
    """Exact division of p(u, v) by (u - v).

    The quotient is computed by synthetic division of p, viewed as a
    polynomial in u over the ring of polynomials in v, by (u - v).  The
    diagonal restriction p(z, z) must vanish identically; a nonzero
    remainder means the caller constructed something not divisible, which
    for the bracket tables is a construction bug.
    """
    if p.is_zero():
        return BiPoly()
    rows = p.poly_in_u()  # a_k(v) for u^k
    d = len(rows) - 1
    quot = [None] * d
    carry = rows[d] if d >= 0 else Poly()
    for k in range(d - 1, -1, -1):
        quot[k] = carry
        carry = rows[k] + carry.shift(1)  # a_k + v * q_k
    # remainder is carry = p(v, v)
    if not carry.is_zero():
        raise NotDivisible("bivariate polynomial does not vanish on the diagonal")
    out = []
    for q in quot:
        out.append(list(q.coeffs))
    return BiPoly(out)


# ---------------------------------------------------------------------------
# polynomial matrices


class PolyMatrix:
    """Rectangular matrix of Poly entries sharing one scalar backend."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        self.entries = [list(r) for r in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        for r in self.entries:
            if len(r) != self.cols:
                raise ValueError("ragged polynomial matrix")

    @classmethod
    def from_scalars(cls, mat):
        return cls([[Poly.const(c) for c in row] for row in mat])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def submatrix(self, rows, cols):
        return PolyMatrix([[self.entries[i][j] for j in cols] for i in rows])

    def __mul__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} times {other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Poly()
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def map(self, fn):
        return PolyMatrix([[fn(p) for p in row] for row in self.entries])

    def evaluate(self, z):
        """Numeric (or jet) matrix of entry values at z."""
        return [[p(z) for p in row] for row in self.entries]

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.entries == other.entries

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols})"


def det_grid(rows):
    """Determinant of a square list-of-lists over any commutative ring.

    Laplace expansion along the first remaining row, memoized over column
    subsets, so the cost is O(n 2^n) ring operations instead of n! -- fine
    for the desk-scale orders used here and valid for Poly, BiPoly, jets
    and plain scalars alike.
    """
    n = len(rows)
    if n == 0:
        raise NonSquare("empty matrix")
    for r in rows:
        if len(r) != n:
            raise NonSquare("matrix is not square")
    full = (1 << n) - 1
    memo = {}

    def minor(row, mask):
        if mask == 0:
            return 1
        key = mask
        if key in memo:
            return memo[key]
        total = None
        sign = 1
        for j in range(n):
            bit = 1 << j
            if not mask & bit:
                continue
            entry = rows[row][j]
            sub = minor(row + 1, mask & ~bit)
            term = entry * sub if sign > 0 else -(entry * sub)
            total = term if total is None else total + term
            sign = -sign
        memo[key] = total
        return total

    return minor(0, full)


def polymat_det(M: PolyMatrix, method: str = "auto") -> Poly:
    """Determinant of a square PolyMatrix.

    Over exact scalars, sizes above 4 use fraction-free (Bareiss-style)
    elimination with exact polynomial division to avoid rational blow-up;
    smaller sizes and the float backend use cofactor expansion.
    """
    if M.rows != M.cols:
        raise NonSquare(f"{M.rows}x{M.cols} matrix")
    if method == "bareiss" or (method == "auto" and M.rows > 4 and _is_exact_matrix(M)):
        return _det_bareiss(M)
    out = det_grid(M.entries)
    return out if isinstance(out, Poly) else Poly.const(out)


def _is_exact_matrix(M):
    for row in M.entries:
        for p in row:
            for c in p.coeffs:
                if not isinstance(c, (int, Fraction)):
                    return False
    return True


def _det_bareiss(M):
    n = M.rows
    a = [[M.entries[i][j] for j in range(n)] for i in range(n)]
    sign = 1
    prev = Poly.const(Fraction(1))
    for k in range(n - 1):
        if a[k][k].is_zero():
            pivot_row = next((r for r in range(k + 1, n) if not a[r][k].is_zero()), None)
            if pivot_row is None:
                return Poly()
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[k][k] * a[i][j] - a[i][k] * a[k][j]
                q, r = num.divmod_exact(prev)
                if not r.is_zero():
                    raise NotDivisible("Bareiss division not exact")
                a[i][j] = q
            a[i][k] = Poly()
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def scalar_mat_det(rows):
    """Determinant of a square scalar (or jet) matrix via det_grid."""
    return det_grid([list(r) for r in rows])


def scalar_mat_inverse(mat):
    """Inverse of a square scalar matrix via Gauss-Jordan elimination.

    Works over any field-like scalar (Fraction, complex, Jet).  Raises
    ZeroDivisionError when the matrix is singular over an exact backend;
    float singularity surfaces as inf/nan downstream and is caught by the
    callers' residual checks.
    """
    n = len(mat)
    a = [list(row) for row in mat]
    inv = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    if a and not isinstance(a[0][0], (int, Fraction)):
        inv = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = None
        best = -1.0
        for r in range(col, n):
            v = a[r][col]
            if isinstance(v, (int, Fraction)):
                if v != 0:
                    piv = r
                    break
            else:
                mag = abs(v.val) if isinstance(v, Jet) else abs(v)
                if mag > best:
                    best, piv = mag, r
        if piv is None or (best == 0.0 and not isinstance(a[piv][col], (int, Fraction))):
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        inv[col] = [x / pv for x in inv[col]]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if exact_zero(f):
                continue
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return inv


# ---------------------------------------------------------------------------
# root finding


def poly_roots(p: Poly, rtol: float = 1e-12, maxiter: int = 400):
    """All complex roots of p, with multiplicity, deterministically ordered.

    Simultaneous Aberth-Ehrlich iteration from a fixed circular initial
    configuration; if it fails to settle, falls back to companion-matrix
    eigenvalues followed by Newton polishing.  Roots are returned sorted by
    (real, imag).
    """
    coeffs = [to_complex(c) for c in p.coeffs]
    scale = max((abs(c) for c in coeffs), default=0.0)
    if scale == 0.0:
        raise ZeroPolynomial("cannot root-find the zero polynomial")
    while coeffs and abs(coeffs[-1]) <= 1e-14 * scale:
        coeffs.pop()
    deg = len(coeffs) - 1
    if deg < 1:
        raise ZeroPolynomial("degree < 1 after trimming")
    lead = coeffs[-1]
    monic = [c / lead for c in coeffs]
    for c in monic:
        check_finite(c)
    if deg == 1:
        return [-monic[0]]

    radius = 1.0 + max(abs(c) for c in monic[:-1])
    zs = [
        radius * cmath.exp(2j * math.pi * (k / deg) + 0.4j)
        for k in range(deg)
    ]

    def horner(z):
        pv = monic[-1]
        dv = 0j
        for c in reversed(monic[:-1]):
            dv = dv * z + pv
            pv = pv * z + c
        return pv, dv

    converged = False
    for _ in range(maxiter):
        max_step = 0.0
        for i in range(deg):
            pv, dv = horner(zs[i])
            if dv == 0:
                dv = 1e-30
            ratio = pv / dv
            s = 0j
            for j in range(deg):
                if j != i:
                    dz = zs[i] - zs[j]
                    if dz == 0:
                        dz = 1e-30
                    s += 1.0 / dz
            denom = 1.0 - ratio * s
            if denom == 0:
                denom = 1e-30
            step = ratio / denom
            zs[i] -= step
            max_step = max(max_step, abs(step) / (1.0 + abs(zs[i])))
        if max_step < 5e-15:
            converged = True
            break

    def residual_ok(roots):
        bound = max(rtol, 1e-10)
        for z in roots:
            pv, _ = horner(z)
            size = sum(abs(c) * max(1.0, abs(z)) ** k for k, c in enumerate(monic))
            if abs(pv) > bound * size:
                return False
        return True

    if not converged or not residual_ok(zs):
        # companion-matrix fallback + Newton polish
        zs = list(np.roots(list(reversed(monic))))
        for _ in range(3):
            for i, z in enumerate(zs):
                pv, dv = horner(z)
                if dv != 0:
                    zn = z - pv / dv
                    pn, _ = horner(zn)
                    if abs(pn) <= abs(pv):
                        zs[i] = zn
        if not residual_ok(zs):
            raise NoConvergence(
                f"root finding failed after {maxiter} Aberth iterations "
                "and companion fallback",
                iterations=maxiter,
            )
    zs = [complex(z) for z in zs]
    zs.sort(key=lambda z: (z.real, z.imag))
    return zs


# ---------------------------------------------------------------------------
# q-series expansion


def series_expand(ch, order: int):
    """Coefficients of the q-expansion of a graded character.

    ``ch`` must expose ``sign``, ``num`` and ``den`` (multisets of q-number
    indices representing sign * prod (1-q^a) / prod (1-q^b)); the returned
    list holds the exact integer coefficients of q^0 .. q^order of that
    product, shifted so that index 0 corresponds to q^(ch.q_power) when the
    character carries a Laurent prefactor.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    coeffs = [0] * (order + 1)
    coeffs[0] = 1
    for b in ch.den:
        for s in range(b, order + 1):
            coeffs[s] += coeffs[s - b]
    for a in ch.num:
        for s in range(order, a - 1, -1):
            coeffs[s] -= coeffs[s - a]
    if ch.sign < 0:
        coeffs = [-c for c in coeffs]
    return coeffs
