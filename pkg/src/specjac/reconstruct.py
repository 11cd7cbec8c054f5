"""Inverse map: recover the gauge-fixed Lax matrix from a divisor.

Inputs are the g separated points, the spectral curve, and the constant
parameters (the leading coefficient s11 of l_1N; the subdiagonal leading
coefficients are 1).  The pipeline is:

1.  solve_Xk -- each auxiliary polynomial X_k(w, z) has exactly g unknown
    coefficients supported on the holomorphy region k <= (N-1-l)n - 2;
    the remaining monomials are known: products of the constant slots
    (computed mechanically from the constants-only matrix) for k < N, and
    the monic w^(N-1) plus dominant t-coefficients for k = N.  Vanishing
    at the divisor points gives a square linear system per k.

2.  recover_Lprime -- writing the column-stripped matrix as V(w, z) plus
    the unknown part L'(z) = sum_j z^j L'^(j), the determinant identities
    det L_k = z X_k (k < N), X_N (k = N) are solved stage by stage from
    j = n-1 down to 0.  At stage j the coefficient of w^p z^((N-p-2)n + j)
    is affine in the stage-j entries with all nonlinear contributions
    coming from already-known higher stages, so a first-order jet pass
    through the determinant extracts each stage's linear system
    mechanically.

3.  recover_first_column -- det(l + w) is exactly linear in the first
    column; matching every bivariate coefficient of the curve equation
    gives an overdetermined system whose residual doubles as a
    consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import BiPoly, FLOAT, Jet, Poly, PolyMatrix, det_grid, to_complex
from .curve import SpectralCurve, genus
from .errors import (
    DomainError,
    InconsistentCurve,
    SweepInconsistency,
    ThetaDivisorSingularity,
)
from .lax import LaxMatrix, char_poly_t
from .sov import Divisor, separate


# ---------------------------------------------------------------------------
# monomial supports


@dataclass(frozen=True)
class MonomialSupport:
    """Unknown (regular) and constant-coefficient (exceptional) monomials."""

    N: int
    n: int
    entries: tuple  # (l, k) with k <= (N-1-l)n - 2; exactly g of them
    exceptional: tuple  # (l, (N-l-1)n - 1), one per w-power


def xk_support(N: int, n: int) -> MonomialSupport:
    if N < 2:
        raise DomainError("N must be >= 2")
    if n < 2:
        raise DomainError(
            "reconstruction needs n >= 2: for n = 1 the holomorphy support collapses"
        )
    entries = tuple(
        (l, k) for l in range(N - 1) for k in range((N - 1 - l) * n - 1)
    )
    exceptional = tuple((l, (N - l - 1) * n - 1) for l in range(N - 1))
    assert len(entries) == genus(N, n)
    return MonomialSupport(N, n, entries, exceptional)


@dataclass
class ReconstructionConstants:
    """Non-dynamical inputs of the inverse map."""

    N: int
    n: int
    s11: complex
    t_dominant: list  # dominant coefficients of t_1 .. t_N

    @classmethod
    def from_curve(cls, curve: SpectralCurve, s11):
        t_dom = [
            to_complex(tk.coeff(k * curve.n - 1)) for k, tk in enumerate(curve.t, 1)
        ]
        return cls(curve.N, curve.n, to_complex(s11), t_dom)


def _const_split(N, n, s11):
    """b and d blocks of the constants-only l-shape matrix."""
    b = [Poly() for _ in range(N - 1)]
    b[N - 2] = Poly.monomial(n - 1, s11)
    d = [[Poly() for _ in range(N - 1)] for _ in range(N - 1)]
    for r in range(1, N - 1):
        d[r][r - 1] = Poly.monomial(n, 1.0 + 0j)
    return b, d


def _xk_rows(b, d, k, N):
    """Rows of the X_k determinant: b on top, then (d + w) minus row k."""
    rows_bi = []
    if k < N:
        rows_bi.append([BiPoly.from_poly_v(p) for p in b])
    for r in range(N - 1):
        if k < N and r == k - 1:
            continue
        row = [BiPoly.from_poly_v(d[r][c]) for c in range(N - 1)]
        row[r] = row[r] + BiPoly.monomial(1, 0, 1.0 + 0j)
        rows_bi.append(row)
    return rows_bi


def known_part(constants: ReconstructionConstants, k: int) -> BiPoly:
    """All monomials of X_k outside the unknown support, with their values."""
    N, n = constants.N, constants.n
    if k < N:
        b, d = _const_split(N, n, constants.s11)
        out = det_grid(_xk_rows(b, d, k, N))
        return out if isinstance(out, BiPoly) else BiPoly.const(out)
    out = BiPoly.monomial(N - 1, 0, 1.0 + 0j)
    for l in range(N - 1):
        c = constants.t_dominant[N - 2 - l]  # dominant coefficient of t_(N-1-l)
        out = out + BiPoly.monomial(l, (N - 1 - l) * n - 1, c)
    return out


def forward_Xk(L: LaxMatrix, k: int) -> BiPoly:
    """X_k computed directly from a known l-shape matrix (test oracle)."""
    N = L.N
    b = [L.mat[0, j] for j in range(1, N)]
    d = [[L.mat[i, j] for j in range(1, N)] for i in range(1, N)]
    out = det_grid(_xk_rows(b, d, k, N))
    return out if isinstance(out, BiPoly) else BiPoly.const(out)


def solve_Xk(
    divisor: Divisor,
    constants: ReconstructionConstants,
    k: int,
    cond_tol: float = 1e-10,
    residual_tol: float = 1e-8,
) -> BiPoly:
    """Solve the g x g evaluation system so that X_k vanishes on the divisor."""
    N, n = constants.N, constants.n
    sup = xk_support(N, n)
    g = len(sup.entries)
    if len(divisor) != g:
        raise DomainError(f"divisor has {len(divisor)} points, genus is {g}")
    known = known_part(constants, k)
    A = np.zeros((g, g), dtype=complex)
    rhs = np.zeros(g, dtype=complex)
    for r, (z, w) in enumerate(divisor.points):
        for c, (l, j) in enumerate(sup.entries):
            A[r, c] = w**l * z**j
        rhs[r] = -known(w, z)
    sv = np.linalg.svd(A, compute_uv=False)
    rcond = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    if rcond < cond_tol:
        raise ThetaDivisorSingularity(
            f"X_{k} evaluation matrix has reciprocal condition {rcond:.2e}: "
            "the divisor lies on or near the theta divisor"
        )
    x = np.linalg.solve(A, rhs)
    X = known
    for c, (l, j) in enumerate(sup.entries):
        X = X + BiPoly.monomial(l, j, complex(x[c]))
    scale = max(abs(v) for _, _, v in X.monomials())
    worst = max(abs(X(w, z)) for z, w in divisor.points)
    if worst > residual_tol * max(scale, 1.0):
        raise ThetaDivisorSingularity(
            f"X_{k} residual {worst:.2e} above tolerance after solve"
        )
    return X


# ---------------------------------------------------------------------------
# triangular sweep for L'


def _v_matrix(constants: ReconstructionConstants):
    """V(w, z): the w shift plus the z^n constants, as an N x (N-1) grid."""
    N, n = constants.N, constants.n
    V = [[BiPoly() for _ in range(N - 1)] for _ in range(N)]
    V[0][N - 2] = BiPoly.monomial(0, n, constants.s11)
    for r in range(1, N):
        V[r][r - 1] = V[r][r - 1] + BiPoly.monomial(1, 0, 1.0 + 0j)
        if r >= 2:
            V[r][r - 2] = V[r][r - 2] + BiPoly.monomial(0, n, 1.0 + 0j)
    return V


def _dropped(rows, k, N):
    """L_k convention: drop 1-based row k+1 for k < N, row 1 for k = N."""
    drop = k if k < N else 0
    return [row for r, row in enumerate(rows) if r != drop]


def recover_Lprime(
    Xs: list,
    constants: ReconstructionConstants,
    residual_tol: float = 1e-7,
):
    """All coefficient matrices L'^(0) .. L'^(n-1) from the X_k identities.

    Returns (lprime, partial) where lprime[j] is the complex N x (N-1)
    matrix of z^j coefficients and partial is the N x N PolyMatrix with
    columns 2..N of l(z) filled in (first column zero).
    """
    N, n = constants.N, constants.n
    if len(Xs) != N:
        raise DomainError("need X_1 .. X_N")
    targets = []
    for k in range(1, N + 1):
        Xk = Xs[k - 1]
        targets.append(BiPoly.monomial(0, 1, 1.0 + 0j) * Xk if k < N else Xk)
    V = _v_matrix(constants)
    lprime = [
        [[0j for _ in range(N - 1)] for _ in range(N)] for _ in range(n)
    ]
    for j in range(n - 1, -1, -1):
        slots = [
            (r, c)
            for r in range(N)
            for c in range(N - 1)
            if not (j == 0 and r == 0)  # z | (z b) forces the z^0 row to zero
        ]
        dim = len(slots)
        entries = [[V[r][c] for c in range(N - 1)] for r in range(N)]
        for jj in range(j + 1, n):
            for r in range(N):
                for c in range(N - 1):
                    v = lprime[jj][r][c]
                    if v != 0:
                        entries[r][c] = entries[r][c] + BiPoly.monomial(0, jj, v)
        for s, (r, c) in enumerate(slots):
            entries[r][c] = entries[r][c] + BiPoly.monomial(
                0, j, Jet.seed(0.0, s, dim)
            )
        rows_eq, rhs_eq = [], []
        for k in range(1, N + 1):
            det = det_grid(_dropped(entries, k, N))
            for p in range(N - 1):
                q = (N - p - 2) * n + j
                cval = det.coeff(p, q) if isinstance(det, BiPoly) else 0
                tval = to_complex(targets[k - 1].coeff(p, q))
                if isinstance(cval, Jet):
                    rows_eq.append(cval.grad)
                    rhs_eq.append(tval - cval.val)
                else:
                    rows_eq.append(np.zeros(dim, dtype=complex))
                    rhs_eq.append(tval - to_complex(cval))
        A = np.array(rows_eq)
        bb = np.array(rhs_eq)
        sol, _, rank, _ = np.linalg.lstsq(A, bb, rcond=None)
        if rank < dim:
            raise SweepInconsistency(
                f"stage {j} linear system is rank deficient ({rank} < {dim})"
            )
        res = np.abs(A @ sol - bb).max()
        if res > residual_tol * max(1.0, np.abs(bb).max()):
            raise SweepInconsistency(
                f"stage {j} equations inconsistent: residual {res:.2e}"
            )
        for s, (r, c) in enumerate(slots):
            lprime[j][r][c] = complex(sol[s])

    partial = _assemble_partial(constants, lprime)
    _verify_sweep(partial, constants, targets, residual_tol)
    return lprime, partial


def _assemble_partial(constants, lprime) -> PolyMatrix:
    """Columns 2..N of l(z) from the L' stages (first column left zero)."""
    N, n = constants.N, constants.n
    ent = [[Poly() for _ in range(N)] for _ in range(N)]
    for c in range(N - 1):
        top = [lprime[j][0][c] for j in range(n)]
        if c == N - 2:
            top.append(constants.s11)  # restore the removed s11 z^n term
        ent[0][c + 1] = Poly(top[1:])  # divide z * l_1(c+2) by z
        for r in range(1, N):
            cs = [lprime[j][r][c] for j in range(n)]
            if c == r - 2:
                cs.append(1.0 + 0j)  # subdiagonal leading coefficient
            ent[r][c + 1] = Poly(cs)
    return PolyMatrix(ent)


def _verify_sweep(partial, constants, targets, tol):
    """Re-expand every det L_k from the recovered entries and compare."""
    N, n = constants.N, constants.n
    b = [partial[0, j] for j in range(1, N)]
    d = [[partial[i, j] for j in range(1, N)] for i in range(1, N)]
    # build L(w, z) rows: z*b on top, then d + w on the shifted diagonal
    L = [[BiPoly.from_poly_v(p) * BiPoly.monomial(0, 1, 1.0 + 0j) for p in b]]
    for r in range(N - 1):
        row = [BiPoly.from_poly_v(d[r][c]) for c in range(N - 1)]
        row[r] = row[r] + BiPoly.monomial(1, 0, 1.0 + 0j)
        L.append(row)
    for k in range(1, N + 1):
        det = det_grid(_dropped(L, k, N))
        diff = det - targets[k - 1]
        scale = max((abs(v) for _, _, v in targets[k - 1].monomials()), default=1.0)
        worst = max((abs(to_complex(v)) for _, _, v in diff.monomials()), default=0.0)
        if worst > 100 * tol * max(scale, 1.0):
            raise SweepInconsistency(
                f"recovered matrix fails det L_{k} check: residual {worst:.2e}"
            )


# ---------------------------------------------------------------------------
# first column


def recover_first_column(
    curve: SpectralCurve,
    partial: PolyMatrix,
    residual_tol: float = 1e-7,
) -> list:
    """First-column polynomials l_11 .. l_N1 matching det(l + w) = r(w, z).

    The determinant is exactly linear in the first column, so a single jet
    pass over all unknown coefficients produces the full overdetermined
    linear system; a bad match raises InconsistentCurve.
    """
    N, n = curve.N, curve.n
    slots = []
    for i in range(N):
        if i == 0:
            degs = range(n - 1)  # l_11 has degree n-2
        else:
            degs = range(n)  # l_21 leading 1 is pinned; others degree n-1
        for p in degs:
            slots.append((i, p))
    dim = len(slots)
    col = [BiPoly() for _ in range(N)]
    for s, (i, p) in enumerate(slots):
        col[i] = col[i] + BiPoly.monomial(0, p, Jet.seed(0.0, s, dim))
    col[1] = col[1] + BiPoly.monomial(0, n, 1.0 + 0j)  # subdiagonal leading 1

    rows = []
    for i in range(N):
        row = [col[i]]
        for jcol in range(1, N):
            row.append(BiPoly.from_poly_v(partial[i, jcol]))
        row[i] = row[i] + BiPoly.monomial(1, 0, 1.0 + 0j)
        rows.append(row)
    det = det_grid(rows)

    target = curve.defining_bipoly()
    keys = set()
    for a, b_, _ in det.monomials():
        keys.add((a, b_))
    for a, b_, _ in target.monomials():
        keys.add((a, b_))
    A = np.zeros((len(keys), dim), dtype=complex)
    rhs = np.zeros(len(keys), dtype=complex)
    for r, (a, b_) in enumerate(sorted(keys)):
        cval = det.coeff(a, b_)
        tval = to_complex(target.coeff(a, b_))
        if isinstance(cval, Jet):
            A[r] = cval.grad
            rhs[r] = tval - cval.val
        else:
            rhs[r] = tval - to_complex(cval)
    sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < dim:
        raise InconsistentCurve(f"first-column system rank deficient ({rank} < {dim})")
    res = np.abs(A @ sol - rhs).max()
    if res > residual_tol * max(1.0, np.abs(rhs).max()):
        raise InconsistentCurve(
            f"curve match residual {res:.2e} above tolerance"
        )
    out = []
    for i in range(N):
        cs = [0j] * (n + 1)
        for s, (ii, p) in enumerate(slots):
            if ii == i:
                cs[p] = complex(sol[s])
        if i == 1:
            cs[n] = 1.0 + 0j
        out.append(Poly(cs))
    return out


# ---------------------------------------------------------------------------
# full round trip


def reconstruct_l(
    divisor: Divisor,
    curve: SpectralCurve,
    s11,
) -> LaxMatrix:
    """Recover the full l-shape matrix from divisor + curve + constants."""
    constants = ReconstructionConstants.from_curve(curve, s11)
    Xs = [solve_Xk(divisor, constants, k) for k in range(1, constants.N + 1)]
    _, partial = recover_Lprime(Xs, constants)
    first = recover_first_column(curve, partial)
    N = constants.N
    ent = [[partial[i, j] for j in range(N)] for i in range(N)]
    for i in range(N):
        ent[i][0] = first[i]
    mat = PolyMatrix(ent)
    return LaxMatrix(N, constants.n, "l", mat, FLOAT, s11=to_complex(s11))


def roundtrip(L: LaxMatrix, seed: int = 0) -> float:
    """Separate an l-shape instance and reconstruct it; max relative error
    over all dynamical coefficients (relative to the instance scale)."""
    if L.shape != "l":
        raise DomainError("roundtrip starts from an l-shape matrix")
    Lf = L.to_float() if L.backend != FLOAT else L
    div = separate(Lf, "l", seed)
    curve = char_poly_t(Lf)
    rec = reconstruct_l(div, curve, Lf.s11)
    return matrix_gap(Lf, rec)


def matrix_gap(L1: LaxMatrix, L2: LaxMatrix) -> float:
    """Max coefficient difference over free slots, relative to L1's scale."""
    slots = L1.free_slots()
    vals1 = [to_complex(L1.mat[i - 1, j - 1].coeff(p)) for (i, j, p) in slots]
    vals2 = [to_complex(L2.mat[i - 1, j - 1].coeff(p)) for (i, j, p) in slots]
    scale = max(max(abs(v) for v in vals1), 1e-30)
    return max(abs(a - b) for a, b in zip(vals1, vals2)) / scale
