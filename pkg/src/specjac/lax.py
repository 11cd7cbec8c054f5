"""Lax matrix spaces: random m(z), characteristic polynomial, gauge fixing.

The m-shape (the Poisson-compatible space) has entries

    m_ij(z) = m^(0)_ij z^(n-1) + ... + m^(n-1)_ij          for i <= j,
    m_ij(z) = m^(0)_ij z^n     + ... + m^(n-1)_ij z        for i >  j,

so every entry carries exactly n coefficients.  Gauge fixing conjugates by
a lower-triangular constant matrix s built from the leading behaviour of
m(z) at infinity; the result l(z) = s m(z) s^(-1) has the rigid degree
table enforced by :func:`l_degree` and two classes of constant slots (the
subdiagonal leading 1's and the leading coefficient s11 of l_1N).

Coefficient slot convention throughout: alpha = 0 is the *leading* slot of
an entry polynomial, matching the superscripts above.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    EXACT,
    FLOAT,
    BiPoly,
    Poly,
    PolyMatrix,
    det_grid,
    exact_zero,
    scalar_mat_inverse,
    to_complex,
)
from .curve import SpectralCurve, _check_order
from .errors import DegreeViolation, DomainError, SingularGauge


# ---------------------------------------------------------------------------
# coefficient indexing


@dataclass(frozen=True, order=True)
class CoefficientIndex:
    """Slot (i, j, alpha) of an m-shape coefficient; alpha=0 is leading."""

    i: int
    j: int
    alpha: int

    def zpow(self, N: int, n: int) -> int:
        """Power of z this slot multiplies in the entry polynomial."""
        return (n - 1 - self.alpha) if self.i <= self.j else (n - self.alpha)


def all_coefficient_indices(N: int, n: int) -> list[CoefficientIndex]:
    return [
        CoefficientIndex(i, j, a)
        for i in range(1, N + 1)
        for j in range(1, N + 1)
        for a in range(n)
    ]


def flat_index(idx: CoefficientIndex, N: int, n: int) -> int:
    return ((idx.i - 1) * N + (idx.j - 1)) * n + idx.alpha


def index_from_flat(u: int, N: int, n: int) -> CoefficientIndex:
    a = u % n
    ij = u // n
    return CoefficientIndex(ij // N + 1, ij % N + 1, a)


# ---------------------------------------------------------------------------
# matrices


def m_degree(i: int, j: int, n: int) -> int:
    return n - 1 if i <= j else n


def l_degree(i: int, j: int, N: int, n: int) -> int:
    """Entrywise degree bound of the gauge-fixed matrix."""
    if i == 1:
        return n - 1 if j == N else n - 2
    return n if i == j + 1 else n - 1


class LaxMatrix:
    """N x N matrix of polynomials in m-shape or l-shape."""

    __slots__ = ("N", "n", "shape", "mat", "backend", "s11")

    def __init__(self, N, n, shape, mat: PolyMatrix, backend, s11=None):
        _check_order(N, n)
        if shape not in ("m", "l"):
            raise DomainError(f"unknown shape {shape!r}")
        if mat.rows != N or mat.cols != N:
            raise DomainError("matrix size does not match N")
        self.N, self.n = N, n
        self.shape = shape
        self.mat = mat
        self.backend = backend
        self.s11 = s11
        self._check_shape()

    def _check_shape(self):
        N, n = self.N, self.n
        for i in range(1, N + 1):
            for j in range(1, N + 1):
                p = self.mat[i - 1, j - 1]
                bound = m_degree(i, j, n) if self.shape == "m" else l_degree(i, j, N, n)
                if p.degree > bound:
                    raise DegreeViolation(
                        f"entry ({i},{j}) degree {p.degree} exceeds {bound}"
                    )
                if self.shape == "m" and i > j and not exact_zero(p.coeff(0)):
                    raise DegreeViolation(
                        f"lower entry ({i},{j}) has a constant term"
                    )
        if self.shape == "l":
            for i in range(1, N):
                lead = self.mat[i, i - 1].coeff(n)
                if lead != 1:
                    raise DegreeViolation(
                        f"subdiagonal leading coefficient at ({i + 1},{i}) is {lead}, not 1"
                    )
            if self.s11 is None:
                raise DomainError("l-shape requires the stored constant s11")
            if self.mat[0, N - 1].coeff(n - 1) != self.s11:
                raise DegreeViolation("leading coefficient of l_1N differs from s11")

    def entry(self, i: int, j: int) -> Poly:
        """1-based entry access."""
        return self.mat[i - 1, j - 1]

    def coefficient(self, idx: CoefficientIndex):
        return self.entry(idx.i, idx.j).coeff(idx.zpow(self.N, self.n))

    def coefficient_vector(self):
        """All nN^2 m-shape coefficients in CoefficientIndex order."""
        if self.shape != "m":
            raise DomainError("coefficient_vector is defined for m-shape")
        return [self.coefficient(ix) for ix in all_coefficient_indices(self.N, self.n)]

    def to_float(self) -> "LaxMatrix":
        mat = self.mat.map(lambda p: p.map(to_complex))
        s11 = None if self.s11 is None else to_complex(self.s11)
        return LaxMatrix(self.N, self.n, self.shape, mat, FLOAT, s11)

    def free_slots(self):
        """(i, j, zpow) triples of the dynamical coefficients (l-shape)."""
        if self.shape != "l":
            raise DomainError("free_slots enumerates l-shape coefficients")
        return l_free_slots(self.N, self.n)

    def __eq__(self, other):
        return (
            isinstance(other, LaxMatrix)
            and (self.N, self.n, self.shape) == (other.N, other.n, other.shape)
            and self.mat == other.mat
        )

    def __repr__(self):
        return f"LaxMatrix(N={self.N}, n={self.n}, shape={self.shape!r})"


def m_from_vector(N, n, values, backend) -> LaxMatrix:
    """Assemble an m-shape matrix from a flat coefficient vector."""
    entries = []
    for i in range(1, N + 1):
        row = []
        for j in range(1, N + 1):
            coeffs = [0] * (m_degree(i, j, n) + 1)
            for a in range(n):
                ix = CoefficientIndex(i, j, a)
                coeffs[ix.zpow(N, n)] = values[flat_index(ix, N, n)]
            row.append(Poly(coeffs))
        entries.append(row)
    return LaxMatrix(N, n, "m", PolyMatrix(entries), backend)


def l_free_slots(N: int, n: int):
    """Dynamical (i, j, zpow) slots of an l-shape matrix.

    Excludes the subdiagonal leading 1's and the constant leading
    coefficient of l_1N.
    """
    out = []
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            d = l_degree(i, j, N, n)
            for p in range(d + 1):
                if i == j + 1 and p == n:
                    continue  # subdiagonal leading 1
                if (i, j, p) == (1, N, n - 1):
                    continue  # s11
                out.append((i, j, p))
    return out


def free_coefficient_count(N: int, n: int) -> int:
    """Number of dynamical l-shape coefficients; equals n N^2 - N."""
    _check_order(N, n)
    return len(l_free_slots(N, n))


# ---------------------------------------------------------------------------
# sampling


def rand_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-12, 12), rng.randint(1, 9))


def rand_unit_disk(rng: random.Random) -> complex:
    import math

    r = math.sqrt(rng.random())
    phi = 2 * math.pi * rng.random()
    return complex(r * math.cos(phi), r * math.sin(phi))


def sample_m(N: int, n: int, seed: int, backend: str = EXACT) -> LaxMatrix:
    """Random m-shape instance, deterministic for a fixed seed.

    Exact backend draws coefficients uniformly from the small rationals
    p/q with |p| <= 12, 1 <= q <= 9; float backend draws uniformly from
    the unit disk.
    """
    _check_order(N, n)
    rng = random.Random(seed)
    draw = rand_rational if backend == EXACT else rand_unit_disk
    values = [draw(rng) for _ in range(n * N * N)]
    return m_from_vector(N, n, values, backend)


# ---------------------------------------------------------------------------
# characteristic polynomial


def char_bipoly(M: LaxMatrix) -> BiPoly:
    """det(m(z) + w) as a bivariate polynomial (w first, z second)."""
    N = M.N
    rows = []
    for i in range(N):
        row = []
        for j in range(N):
            e = BiPoly.from_poly_v(M.mat[i, j])
            if i == j:
                e = e + BiPoly.monomial(1, 0, 1)
            row.append(e)
        rows.append(row)
    out = det_grid(rows)
    return out if isinstance(out, BiPoly) else BiPoly.const(out)


def char_poly_t(M: LaxMatrix) -> SpectralCurve:
    """Coefficients t_k(z) of det(m(z) + w) = w^N + t_1 w^(N-1) + ... + t_N."""
    N, n = M.N, M.n
    dp = char_bipoly(M)
    t = []
    for k in range(1, N + 1):
        tk = Poly(list(dp.grid[N - k]) if N - k < len(dp.grid) else [])
        if tk.degree > k * n - 1:
            raise DegreeViolation(
                f"t_{k} degree {tk.degree} exceeds {k * n - 1}: malformed input matrix"
            )
        t.append(tk)
    return SpectralCurve(N, n, t)


# ---------------------------------------------------------------------------
# gauge fixing


def mu_matrices(M: LaxMatrix):
    """Leading matrices of m(z) at infinity: (mu_minus, mu_first_row).

    mu_minus collects the z^n coefficients (strictly lower triangular by
    the m-shape); the returned row is the first row of the z^(n-1)
    coefficient matrix, the only part of mu the gauge construction uses.
    """
    N, n = M.N, M.n
    mu_minus = [[M.mat[i, j].coeff(n) for j in range(N)] for i in range(N)]
    mu1 = [M.mat[0, j].coeff(n - 1) for j in range(N)]
    return mu_minus, mu1


def _row_times_mat(row, mat):
    ncols = len(mat[0])
    return [sum(row[k] * mat[k][j] for k in range(len(row))) for j in range(ncols)]


def gauge_matrix_s(M: LaxMatrix) -> PolyMatrix:
    """Constant gauge matrix with rows mu_1 (mu^-)^(N-j); lower triangular."""
    if M.shape != "m":
        raise DomainError("gauge matrix is built from an m-shape matrix")
    N = M.N
    mu_minus, mu1 = mu_matrices(M)
    rows = [list(mu1)]
    for _ in range(N - 1):
        rows.append(_row_times_mat(rows[-1], mu_minus))
    rows.reverse()  # row j is mu1 (mu^-)^(N-j); last row is mu1
    det = det_grid([list(r) for r in rows])
    if exact_zero(det) or (M.backend == FLOAT and abs(to_complex(det)) < 1e-13):
        raise SingularGauge("gauge matrix is singular; resample the instance")
    return PolyMatrix.from_scalars(rows)


def shift_matrix_U(N: int):
    """Subdiagonal shift matrix: 1 at (i+1, i), 0 elsewhere."""
    return [[1 if i == j + 1 else 0 for j in range(N)] for i in range(N)]


def gauge_fix_l(M: LaxMatrix, clamp_tol: float = 1e-8) -> LaxMatrix:
    """Gauge-fixed matrix l(z) = s m(z) s^(-1) in canonical l-shape.

    Over the exact backend the degree table holds identically and is
    asserted; over floats the structurally-zero coefficients are verified
    to be below clamp_tol (relative) and then clamped, so downstream code
    sees an exactly-shaped matrix.
    """
    if M.shape != "m":
        raise DomainError("gauge fixing applies to m-shape matrices")
    N, n = M.N, M.n
    s = gauge_matrix_s(M)
    srows = [[s[i, j].coeff(0) for j in range(N)] for i in range(N)]
    try:
        sinv = scalar_mat_inverse(srows)
    except ZeroDivisionError as exc:
        raise SingularGauge(str(exc)) from None
    lmat = []
    for i in range(N):
        row = []
        for j in range(N):
            acc = Poly()
            for a in range(N):
                if exact_zero(srows[i][a]):
                    continue
                for b in range(N):
                    coef = srows[i][a] * sinv[b][j]
                    if exact_zero(coef):
                        continue
                    acc = acc + M.mat[a, b] * coef
            row.append(acc)
        lmat.append(row)

    scale = max(
        (abs(to_complex(c)) for row in lmat for p in row for c in p.coeffs),
        default=1.0,
    )
    exact = M.backend == EXACT

    def clamp_entry(i, j, p):
        bound = l_degree(i + 1, j + 1, N, n)
        cs = list(p.coeffs)
        for k in range(bound + 1, len(cs)):
            if exact:
                if not exact_zero(cs[k]):
                    raise DegreeViolation(
                        f"l entry ({i + 1},{j + 1}) has nonzero z^{k} coefficient"
                    )
            else:
                if abs(to_complex(cs[k])) > clamp_tol * scale:
                    raise DegreeViolation(
                        f"l entry ({i + 1},{j + 1}) z^{k} coefficient "
                        f"{abs(to_complex(cs[k])):.3e} above clamp tolerance"
                    )
                cs[k] = 0
        return Poly(cs[: bound + 1])

    clamped = [
        [clamp_entry(i, j, lmat[i][j]) for j in range(N)] for i in range(N)
    ]

    # leading z^n matrix must be the shift matrix U
    for i in range(N):
        for j in range(N):
            lead = clamped[i][j].coeff(n)
            want = 1 if i == j + 1 else 0
            if exact:
                if lead != want:
                    raise DegreeViolation(
                        f"leading z^{n} matrix is not the shift matrix at ({i + 1},{j + 1})"
                    )
            elif i == j + 1:
                if abs(to_complex(lead) - 1.0) > clamp_tol:
                    raise DegreeViolation("subdiagonal leading coefficient far from 1")
                cs = list(clamped[i][j].coeffs)
                cs[n] = 1.0 + 0j
                clamped[i][j] = Poly(cs)

    s11 = srows[0][0] if exact else to_complex(clamped[0][N - 1].coeff(n - 1))
    return LaxMatrix(N, n, "l", PolyMatrix(clamped), M.backend, s11=s11)


def sample_gauge_generic(N, n, seed, backend=EXACT, max_tries=64):
    """Sample until the gauge matrix is invertible.

    The seed advances deterministically on rejection; returns
    (m_matrix, l_matrix, rejection_count).
    """
    for t in range(max_tries):
        M = sample_m(N, n, seed + t, backend)
        try:
            return M, gauge_fix_l(M), t
        except SingularGauge:
            continue
    raise SingularGauge(f"no invertible gauge in {max_tries} samples from seed {seed}")
