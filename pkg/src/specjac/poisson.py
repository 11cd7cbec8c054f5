"""Linear Poisson structure of the Lax coefficients, compiled exactly.

The defining bracket is

    {m(z1) (x) m(z2)} = [ r12(z1,z2), m(z1) (x) I + I (x) m(z2) ],
    r12(z1,z2) = ( (z1+z2)/2 t00 + z1 t-+ + z2 t+- ) / (z1 - z2),

with t00 = sum E_ii (x) E_ii and t+- / t-+ the upper / lower exchange
tensors.  Because t00 + t+- + t-+ is the permutation operator, the
commutator numerator vanishes on the diagonal z1 = z2 and the division is
exact; matching bivariate monomials against the coefficient shape then
yields the structure constants {m^(a)_ik, m^(b)_jl} as exact linear forms
in the coefficients (a Lie-Poisson structure).

The module also hosts the grading of coefficient slots, the derivations
D_ik built from brackets with distinguished t-coefficients, and a
numerical check of the gauge-fixed r-matrix identity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import (
    BiPoly,
    Jet,
    LinForm,
    Poly,
    bipoly_div_linear,
    det_grid,
    exact_zero,
    scalar_mat_inverse,
    to_complex,
)
from .curve import _check_order
from .errors import (
    DimensionMismatch,
    DomainError,
    IndexOutOfRange,
    ShapeMismatch,
    SingularGauge,
)
from .lax import (
    CoefficientIndex,
    LaxMatrix,
    all_coefficient_indices,
    char_bipoly,
    flat_index,
    l_degree,
    m_degree,
    mu_matrices,
)

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# structure constants


class PoissonStructure:
    """Structure-constant table of the linear bracket on m-coefficients.

    ``table[(u, v)]`` is the exact linear form {x_u, x_v}; absent pairs
    are zero.  Immutable after compilation and shareable across threads.
    """

    def __init__(self, N, n, table):
        self.N, self.n = N, n
        self.dim = n * N * N
        self.table = table

    def bracket(self, u: int, v: int) -> LinForm:
        return self.table.get((u, v), LinForm())

    def pi_matrix(self, values):
        """Dense bracket tensor Pi_uv evaluated at a coefficient vector."""
        exact = values and isinstance(values[0], Fraction)
        if exact:
            pi = [[Fraction(0)] * self.dim for _ in range(self.dim)]
            for (u, v), form in self.table.items():
                pi[u][v] = form.evaluate(values)
            return pi
        pi = np.zeros((self.dim, self.dim), dtype=complex)
        vals = [to_complex(x) for x in values]
        for (u, v), form in self.table.items():
            pi[u, v] = sum(complex(c) * vals[w] for w, c in form.terms.items())
        return pi

    def antisymmetry_defect(self):
        """Max deviation of table(u,v) + table(v,u) from zero (exact)."""
        worst = LinForm()
        for (u, v), form in self.table.items():
            s = form + self.bracket(v, u)
            if not s.is_zero():
                return s
        return worst


def _phi(a: int, b: int) -> BiPoly:
    """r-matrix weight in front of the exchange at positions (a, b)."""
    if a == b:
        return BiPoly([[0, HALF], [HALF]])  # (z1 + z2) / 2
    if a > b:
        return BiPoly([[0], [Fraction(1)]])  # z1
    return BiPoly([[0, Fraction(1)]])  # z2


def _entry_bipoly(p, q, N, n, which):
    """m_pq(z1) or m_pq(z2) as a BiPoly with basis linear-form coefficients."""
    out = BiPoly()
    for a in range(n):
        ix = CoefficientIndex(p, q, a)
        zp = ix.zpow(N, n)
        form = LinForm.basis(flat_index(ix, N, n))
        if which == 1:
            out = out + BiPoly.monomial(zp, 0, form)
        else:
            out = out + BiPoly.monomial(0, zp, form)
    return out


def structure_constants(N: int, n: int) -> PoissonStructure:
    """Compile the structure-constant table for the (N, n) m-shape space.

    For each pair of entry positions the commutator [r12, Dm] is expanded
    with indeterminate coefficients, divided exactly by (z1 - z2), and the
    surviving bivariate monomials are matched against the degree shape to
    read off the bracket of individual coefficient slots.
    """
    _check_order(N, n)
    table = {}
    for i in range(1, N + 1):
        for k in range(1, N + 1):
            for j in range(1, N + 1):
                for l in range(1, N + 1):
                    num = BiPoly()
                    if i == l:
                        num = num + _phi(i, j) * _entry_bipoly(j, k, N, n, 1)
                        num = num - _phi(l, k) * _entry_bipoly(j, k, N, n, 2)
                    if j == k:
                        num = num + _phi(i, j) * _entry_bipoly(i, l, N, n, 2)
                        num = num - _phi(l, k) * _entry_bipoly(i, l, N, n, 1)
                    if num.is_zero():
                        continue
                    # Orientation: the separated variables must satisfy
                    # {z_i, w_j} = +delta_ij z_i, which fixes the overall
                    # sign of the tensor; the commutator numerator is
                    # divided by (z2 - z1).
                    quot = -bipoly_div_linear(num)
                    for a, b, form in quot.monomials():
                        if form.is_zero():
                            continue
                        a1 = (n - 1 - a) if i <= k else (n - a)
                        a2 = (n - 1 - b) if j <= l else (n - b)
                        if not (0 <= a1 < n) or not (0 <= a2 < n):
                            raise ShapeMismatch(
                                f"bracket monomial z1^{a} z2^{b} of pair "
                                f"({i}{k},{j}{l}) falls outside the shape"
                            )
                        u = flat_index(CoefficientIndex(i, k, a1), N, n)
                        v = flat_index(CoefficientIndex(j, l, a2), N, n)
                        if (u, v) in table:
                            table[(u, v)] = table[(u, v)] + form
                        else:
                            table[(u, v)] = form
    table = {uv: f for uv, f in table.items() if not f.is_zero()}
    return PoissonStructure(N, n, table)


# ---------------------------------------------------------------------------
# functional bracket engine


@dataclass
class Gradient:
    """Value and exact/float partials of a functional at a base point."""

    base: tuple
    value: object
    partials: list

    @classmethod
    def coordinate(cls, base, u: int):
        dim = len(base)
        parts = [Fraction(0)] * dim
        if not isinstance(base[0], Fraction):
            parts = [0j] * dim
        parts[u] = Fraction(1) if isinstance(base[0], Fraction) else 1.0 + 0j
        return cls(tuple(base), base[u], parts)


def bracket_eval(P: PoissonStructure, f: Gradient, g: Gradient):
    """{f, g} = sum_uv (df/dx_u) Pi_uv(x) (dg/dx_v) at the shared base point."""
    if len(f.partials) != P.dim or len(g.partials) != P.dim:
        raise DimensionMismatch(
            f"gradient length {len(f.partials)}/{len(g.partials)} != {P.dim}"
        )
    if tuple(f.base) != tuple(g.base):
        raise DimensionMismatch("gradients taken at different base points")
    x = f.base
    exact = isinstance(x[0], Fraction)
    total = Fraction(0) if exact else 0j
    for (u, v), form in P.table.items():
        fu = f.partials[u]
        gv = g.partials[v]
        if exact_zero(fu) or exact_zero(gv):
            continue
        pi = form.evaluate(x)
        if exact_zero(pi):
            continue
        if exact:
            total += fu * pi * gv
        else:
            total += to_complex(fu) * to_complex(pi) * to_complex(gv)
    return total


def t_gradients(M: LaxMatrix) -> dict:
    """Analytic gradients of every t_k^(alpha) at the instance M.

    Differentiating det(m(z) + w) by one coefficient slot multiplies the
    corresponding cofactor by the slot's z-power; the partials of a given
    t-coefficient are then read off one bivariate monomial.
    """
    N, n = M.N, M.n
    base = tuple(M.coefficient_vector())
    rows = []
    for i in range(N):
        row = []
        for j in range(N):
            e = BiPoly.from_poly_v(M.mat[i, j])
            if i == j:
                e = e + BiPoly.monomial(1, 0, 1)
            row.append(e)
        rows.append(row)
    cof = {}
    for i in range(N):
        for j in range(N):
            sub = [
                [rows[a][b] for b in range(N) if b != j]
                for a in range(N) if a != i
            ]
            d = det_grid(sub) if N > 1 else BiPoly.const(1)
            if not isinstance(d, BiPoly):
                d = BiPoly.const(d)
            if (i + j) % 2:
                d = -d
            cof[(i + 1, j + 1)] = d
    full = char_bipoly(M)
    out = {}
    indices = all_coefficient_indices(N, n)
    for k in range(1, N + 1):
        for alpha in range(k * n):
            zdeg = k * n - 1 - alpha
            value = full.coeff(N - k, zdeg)
            parts = []
            for ix in indices:
                zp = ix.zpow(N, n)
                c = cof[(ix.i, ix.j)].coeff(N - k, zdeg - zp)
                parts.append(c if not isinstance(c, int) else base[0] * 0)
            out[(k, alpha)] = Gradient(base, value, parts)
    return out


def involution_defect(M: LaxMatrix, P: PoissonStructure):
    """Max |{t_k^(i), t_l^(j)}| over all pairs; exactly zero on exact data."""
    grads = t_gradients(M)
    keys = sorted(grads)
    worst = Fraction(0) if isinstance(grads[keys[0]].value, Fraction) else 0.0
    for a in range(len(keys)):
        for b in range(a, len(keys)):
            val = bracket_eval(P, grads[keys[a]], grads[keys[b]])
            mag = abs(val)
            if mag > abs(worst):
                worst = val
    return worst


def centrality_defect(M: LaxMatrix, P: PoissonStructure):
    """Max |{t_k^(alpha), x_v}| over central slots alpha <= n-1 and all v."""
    grads = t_gradients(M)
    x = tuple(M.coefficient_vector())
    worst = Fraction(0) if isinstance(x[0], Fraction) else 0.0
    central = [key for key in grads if key[1] <= M.n - 1]
    for key in central:
        f = grads[key]
        acc = {}
        for (u, v), form in P.table.items():
            fu = f.partials[u]
            if exact_zero(fu):
                continue
            pi = form.evaluate(x)
            if exact_zero(pi):
                continue
            acc[v] = acc.get(v, 0 * fu) + fu * pi
        for v, val in acc.items():
            if abs(val) > abs(worst):
                worst = val
    return worst


def jacobi_defect(P: PoissonStructure, triples):
    """Max cyclic-sum linear form over coordinate triples; exact zeros."""
    worst = LinForm()
    for (u, v, w) in triples:
        acc = LinForm()
        for (a, b, c) in ((u, v, w), (v, w, u), (w, u, v)):
            inner = P.bracket(b, c)
            for p, coef in inner.terms.items():
                acc = acc + P.bracket(a, p) * coef
        if not acc.is_zero():
            return acc
    return worst


def jacobi_triples(P: PoissonStructure, count: int, seed: int = 0, exhaustive_limit: int = 0):
    """Deterministic triple sampler; exhaustive when the space is small."""
    dim = P.dim
    total = dim * (dim - 1) * (dim - 2) // 6
    if exhaustive_limit and total <= exhaustive_limit:
        return [
            (u, v, w)
            for u in range(dim)
            for v in range(u + 1, dim)
            for w in range(v + 1, dim)
        ]
    rng = random.Random(seed)
    return [
        tuple(rng.randrange(dim) for _ in range(3))
        for _ in range(count)
    ]


# ---------------------------------------------------------------------------
# grading


def grade_of(idx: CoefficientIndex, shape: str, N: int, n: int) -> int:
    """Grading of one coefficient slot, with deg z = N and deg w = Nn - 1.

    The slot grading N(n - deg_z + alpha) + i - j - 1 makes every monomial
    of det(l(z) + w) homogeneous; the same formula applies to the m-shape
    with its own entry degrees.
    """
    if not (1 <= idx.i <= N and 1 <= idx.j <= N):
        raise IndexOutOfRange(f"entry ({idx.i},{idx.j}) outside order {N}")
    if shape == "m":
        dz = m_degree(idx.i, idx.j, n)
    elif shape == "l":
        dz = l_degree(idx.i, idx.j, N, n)
    else:
        raise DomainError(f"unknown shape {shape!r}")
    if not (0 <= idx.alpha <= dz):
        raise IndexOutOfRange(f"slot alpha={idx.alpha} outside degree {dz}")
    return N * (n - dz + idx.alpha) + idx.i - idx.j - 1


def t_grade(k: int, alpha: int, N: int, n: int) -> int:
    """Grading of t_k^(alpha); the dominant slot alpha=0 has grade N - k."""
    if not (1 <= k <= N) or not (0 <= alpha <= k * n - 1):
        raise IndexOutOfRange(f"t_{k}^({alpha}) outside its range")
    return N * (alpha + 1) - k


def coefficient_grades(N: int, n: int) -> dict:
    """Grades of all nN^2 m-shape slots, keyed by CoefficientIndex."""
    return {ix: grade_of(ix, "m", N, n) for ix in all_coefficient_indices(N, n)}


# ---------------------------------------------------------------------------
# sparse polynomials in the coefficient symbols (for the D_ik derivations)


class CoeffPoly:
    """Sparse exact polynomial in coordinate symbols x_u.

    Monomials are sorted tuples of (symbol, exponent); just enough ring
    structure for derivations and the grading checks, nothing more.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def var(cls, u: int):
        return cls({((u, 1),): Fraction(1)})

    @classmethod
    def const(cls, c):
        c = Fraction(c)
        return cls({(): c} if c else {})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CoeffPoly.const(other)
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return CoeffPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return CoeffPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    @staticmethod
    def _mul_monomials(m1, m2):
        d = dict(m1)
        for u, e in m2:
            d[u] = d.get(u, 0) + e
        return tuple(sorted(d.items()))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return CoeffPoly()
            return CoeffPoly({m: c * other for m, c in self.terms.items()})
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = self._mul_monomials(m1, m2)
                s = out.get(m, Fraction(0)) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return CoeffPoly(out)

    __rmul__ = __mul__

    def diff(self, u: int):
        out = {}
        for m, c in self.terms.items():
            d = dict(m)
            if u not in d:
                continue
            e = d[u]
            if e == 1:
                del d[u]
            else:
                d[u] = e - 1
            mm = tuple(sorted(d.items()))
            out[mm] = out.get(mm, Fraction(0)) + c * e
        return CoeffPoly(out)

    def variables(self):
        vs = set()
        for m in self.terms:
            vs.update(u for u, _ in m)
        return vs

    def grade_decomposition(self, grades):
        """Split into {grade: CoeffPoly} using per-symbol grades."""
        out = {}
        for m, c in self.terms.items():
            g = sum(grades[u] * e for u, e in m)
            out.setdefault(g, {})[m] = c
        return {g: CoeffPoly(t) for g, t in out.items()}

    def __eq__(self, other):
        return isinstance(other, CoeffPoly) and self.terms == other.terms

    def __repr__(self):
        return f"CoeffPoly({len(self.terms)} terms)"


@lru_cache(maxsize=None)
def _symbolic_char_coeff(N: int, n: int, k: int, alpha: int) -> CoeffPoly:
    """t_k^(alpha) as an exact polynomial in the m-coefficient symbols."""
    rows = []
    for i in range(1, N + 1):
        row = []
        for j in range(1, N + 1):
            e = BiPoly()
            for a in range(n):
                ix = CoefficientIndex(i, j, a)
                e = e + BiPoly.monomial(
                    0, ix.zpow(N, n), CoeffPoly.var(flat_index(ix, N, n))
                )
            if i == j:
                e = e + BiPoly.monomial(1, 0, CoeffPoly.const(1))
            row.append(e)
        rows.append(row)
    det = det_grid(rows)
    c = det.coeff(N - k, k * n - 1 - alpha)
    return c if isinstance(c, CoeffPoly) else CoeffPoly.const(c)


def d_operator_indices(N: int, n: int):
    """(i, k) index grid of the derivations, following the character ranges."""
    return [(i, k) for k in range(1, N) for i in range(1, n * k)]


def deg_D(i: int, k: int, N: int, n: int) -> int:
    """Grading shift of D_ik: (Nn-1)(N-k) - N i."""
    return (N * n - 1) * (N - k) - N * i


def apply_D(P: PoissonStructure, i: int, k: int, f: CoeffPoly) -> CoeffPoly:
    """Derivation D_ik f = { t_(N-k+1)^((N-k+1)n - i - 1), f }.

    Acts through the structure-constant table; linear in the table and a
    derivation in f by construction.
    """
    N, n = P.N, P.n
    if not (1 <= k <= N - 1) or not (1 <= i <= n * k - 1):
        raise IndexOutOfRange(f"D index (i={i}, k={k}) outside its range")
    q = N - k + 1
    alpha = q * n - i - 1
    if not (0 <= alpha <= q * n - 1):
        raise IndexOutOfRange(f"slot alpha={alpha} of t_{q} out of range")
    t = _symbolic_char_coeff(N, n, q, alpha)
    # D x_v = sum_u dt/dx_u * Pi_uv, assembled once per needed v
    needed = f.variables()
    dxv = {v: CoeffPoly() for v in needed}
    dt = {}
    for (u, v), form in P.table.items():
        if v not in dxv:
            continue
        if u not in dt:
            dt[u] = t.diff(u)
        if dt[u].is_zero():
            continue
        lin = CoeffPoly({((w, 1),): c for w, c in form.terms.items()})
        dxv[v] = dxv[v] + dt[u] * lin
    out = CoeffPoly()
    for v in needed:
        df = f.diff(v)
        if not df.is_zero():
            out = out + df * dxv[v]
    return out


# ---------------------------------------------------------------------------
# gauge-fixed r-matrix identity (numerical diagnostic)


def _basis_matrix(N, i, j):
    E = np.zeros((N, N), dtype=complex)
    E[i - 1, j - 1] = 1.0
    return E


def _permutation_tensor(N):
    T = np.zeros((N * N, N * N), dtype=complex)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            T += np.kron(_basis_matrix(N, i, j), _basis_matrix(N, j, i))
    return T


def _rhat(N, z1, z2, s11):
    """r-hat_12(z1, z2) = z2/(z1-z2) t + (z2/s11) sum_jk E_jk U^(N+1-j) (x) E_k1.

    The 1/s11 normalization of the second term comes from E_k1 s^(-1) =
    E_k1 / s11 in the gauge calculation (s is lower triangular); it is a
    central constant of the instance.
    """
    T = _permutation_tensor(N)
    U = np.zeros((N, N), dtype=complex)
    for i in range(1, N):
        U[i, i - 1] = 1.0
    out = (z2 / (z1 - z2)) * T
    Q = np.zeros((N * N, N * N), dtype=complex)
    for j in range(1, N + 1):
        Um = np.linalg.matrix_power(U, N + 1 - j)
        for k in range(1, N + 1):
            Q += np.kron(_basis_matrix(N, j, k) @ Um, _basis_matrix(N, k, 1))
    return out + (z2 / s11) * Q


def _gauge_entries_jets(M: LaxMatrix):
    """l(z) entries as Polys over jets seeded on the m-coefficients."""
    N, n = M.N, M.n
    dim = n * N * N
    vals = [to_complex(v) for v in M.coefficient_vector()]
    jets = [Jet.seed(v, u, dim) for u, v in enumerate(vals)]
    from .lax import m_from_vector

    Mj = m_from_vector(N, n, jets, M.backend)
    mu_minus, mu1 = mu_matrices(Mj)
    rows = [list(mu1)]
    for _ in range(N - 1):
        rows.append(
            [sum(rows[-1][k] * mu_minus[k][j] for k in range(N)) for j in range(N)]
        )
    rows.reverse()
    det = det_grid([list(r) for r in rows])
    dv = det.val if isinstance(det, Jet) else complex(det)
    if abs(dv) < 1e-13:
        raise SingularGauge("gauge matrix numerically singular")
    sinv = scalar_mat_inverse(rows)
    lmat = [[Poly() for _ in range(N)] for _ in range(N)]
    for a in range(N):
        for b in range(N):
            p = Mj.mat[a, b]
            for i in range(N):
                for j in range(N):
                    lmat[i][j] = lmat[i][j] + p * (rows[i][a] * sinv[b][j])
    return lmat, vals


def check_rhat_identity(
    P: PoissonStructure,
    M: LaxMatrix,
    samples: int = 4,
    seed: int = 0,
    fd_step: float | None = None,
) -> float:
    """Max relative residual of the gauge-fixed bracket identity.

    The left side evaluates {l(z1) (x) l(z2)} by the chain rule through
    the gauge construction (exact forward-mode gradients, or central
    finite differences of step fd_step when given); the right side is the
    commutator form with the shifted r-matrix,

        [r-hat_21(z2, z1), I (x) l(z2)] - [r-hat_12(z1, z2), l(z1) (x) I],

    which is the variant of the identity that holds exactly in the
    bracket orientation fixed by the canonical separated variables (the
    two commutators enter with opposite signs, and the non-pole term of
    r-hat carries the central normalization 1/s11).  Sample points keep
    |z1 - z2| > 0.1 to stay away from the pole.
    """
    N, n = P.N, P.n
    if (M.N, M.n) != (N, n):
        raise DimensionMismatch("structure and matrix orders differ")
    dim = P.dim
    vals = [to_complex(v) for v in M.coefficient_vector()]
    pi = P.pi_matrix(vals)
    if fd_step is None:
        lmat, _ = _gauge_entries_jets(M)

        def l_and_grad(z):
            L = np.zeros((N, N), dtype=complex)
            G = np.zeros((N, N, dim), dtype=complex)
            for i in range(N):
                for j in range(N):
                    jv = lmat[i][j](z)
                    if isinstance(jv, Jet):
                        L[i, j] = jv.val
                        G[i, j] = jv.grad
                    else:
                        L[i, j] = complex(jv)
            return L, G

    else:
        from .lax import gauge_fix_l, m_from_vector

        def _l_num(values, z):
            Mf = m_from_vector(N, n, list(values), M.backend)
            lf = gauge_fix_l(Mf)
            return np.array(
                [[to_complex(lf.mat[i, j](z)) for j in range(N)] for i in range(N)]
            )

        def l_and_grad(z):
            L = _l_num(vals, z)
            G = np.zeros((N, N, dim), dtype=complex)
            for u in range(dim):
                dv = list(vals)
                dv[u] = vals[u] + fd_step
                up = _l_num(dv, z)
                dv[u] = vals[u] - fd_step
                dn = _l_num(dv, z)
                G[:, :, u] = (up - dn) / (2 * fd_step)
            return L, G

    from .lax import gauge_fix_l

    s11 = to_complex(gauge_fix_l(M).s11)
    rng = random.Random(seed)
    worst = 0.0
    done = 0
    while done < samples:
        z1 = complex(0.7 + 0.9 * rng.random(), 0.9 * rng.random() - 0.45)
        z2 = complex(0.7 + 0.9 * rng.random(), 0.9 * rng.random() - 0.45)
        if abs(z1 - z2) <= 0.1:
            continue
        done += 1
        L1, G1 = l_and_grad(z1)
        L2, G2 = l_and_grad(z2)
        lhs = np.einsum("iku,uv,jlv->ijkl", G1, pi, G2)
        lhs_mat = lhs.reshape(N * N, N * N)  # [(i,j),(k,l)] = {l_ik(z1), l_jl(z2)}
        eye = np.eye(N, dtype=complex)
        r12 = _rhat(N, z1, z2, s11)
        T = _permutation_tensor(N)
        r21 = T @ _rhat(N, z2, z1, s11) @ T
        rhs = (
            r21 @ np.kron(eye, L2) - np.kron(eye, L2) @ r21
            - (r12 @ np.kron(L1, eye) - np.kron(L1, eye) @ r12)
        )
        scale = max(np.abs(lhs_mat).max(), np.abs(rhs).max(), 1e-30)
        worst = max(worst, float(np.abs(lhs_mat - rhs).max() / scale))
    return worst
