"""Separation of variables: the matrix Z(z), separated points, brackets.

Splitting the Lax matrix into its first row b(z) (minus the corner) and
lower-right block d(z), the separated coordinates z_i are the g roots of
B(z) = det Z(z) with Z = (b; bd; ...; b d^(N-2)), and each conjugate w_i
is the ratio of two determinants built from the rows b d^k(z_i) and an
auxiliary row vector xi.  Every point lies on the spectral curve of the
instance, and the pair (z_i, w_i) satisfies canonical brackets
{z_i, w_j} = delta_ij z_i, which this module certifies numerically with
implicit-function gradients driven through the exact structure constants.

Bracket verification uses the m-based split; reconstruction downstream
uses the l-based one.  The divisor records which split produced it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import (
    FLOAT,
    Jet,
    Poly,
    PolyMatrix,
    det_grid,
    poly_roots,
    polymat_det,
    to_complex,
)
from .curve import SpectralCurve, genus, relative_residual
from .errors import (
    DegenerateLeading,
    DomainError,
    GenericityFailure,
    MultipleRoot,
    SingularGauge,
)
from .lax import LaxMatrix, gauge_fix_l, m_from_vector, sample_m
from .poisson import PoissonStructure, structure_constants


@lru_cache(maxsize=32)
def structure_constants_cached(N: int, n: int) -> PoissonStructure:
    return structure_constants(N, n)


# ---------------------------------------------------------------------------
# block split and Z(z)


@dataclass
class BlockSplit:
    """First row minus corner (b) and lower-right block (d) of a Lax matrix."""

    N: int
    n: int
    b: list  # N-1 Poly entries
    d: PolyMatrix  # (N-1) x (N-1)

    @classmethod
    def of(cls, L: LaxMatrix) -> "BlockSplit":
        N = L.N
        b = [L.mat[0, j] for j in range(1, N)]
        d = L.mat.submatrix(range(1, N), range(1, N))
        return cls(L.N, L.n, b, d)


def build_Z(split: BlockSplit) -> PolyMatrix:
    """Rows b, bd, ..., b d^(N-2) as an (N-1) x (N-1) polynomial matrix."""
    N = split.N
    rows = [list(split.b)]
    for _ in range(N - 2):
        prev = rows[-1]
        rows.append(
            [
                sum((prev[k] * split.d[k, j] for k in range(N - 1)), Poly())
                for j in range(N - 1)
            ]
        )
    return PolyMatrix(rows)


def det_Z(L: LaxMatrix, lead_tol: float = 1e-9) -> Poly:
    """B(z) = det Z(z); a polynomial of degree exactly the genus.

    Raises DegenerateLeading when the degree-g coefficient (which the
    degree table guarantees formally) vanishes numerically.
    """
    if L.shape != "l":
        raise DomainError("det_Z is specified for l-shape input")
    return _detZ_of_split(BlockSplit.of(L), genus(L.N, L.n), L.backend, lead_tol)


def _detZ_of_split(split: BlockSplit, g: int, backend, lead_tol: float) -> Poly:
    B = polymat_det(build_Z(split))
    if B.degree > g:
        raise DegenerateLeading(
            f"det Z has degree {B.degree} above the genus {g}"
        )
    lead = to_complex(B.coeff(g))
    scale = max((abs(to_complex(c)) for c in B.coeffs), default=0.0)
    if scale == 0.0 or abs(lead) <= lead_tol * scale:
        raise DegenerateLeading("leading coefficient of det Z vanishes")
    return B


# ---------------------------------------------------------------------------
# xi selection and separated points


def choose_xi(
    split: BlockSplit,
    z_i: complex,
    seed: int,
    eps_xi: float = 1e-6,
    max_retries: int = 8,
):
    """Row vector xi making the denominator of the w-formula well separated
    from zero; deterministic retry sequence, relative margin reported."""
    N = split.N
    if N == 2:
        return [1.0 + 0j], 1.0, 0
    rows = _stacked_rows(split, z_i)
    norms = [max(np.linalg.norm(r), 1e-300) for r in rows]
    for attempt in range(max_retries):
        rng = random.Random(seed * 1000003 + attempt * 7919)
        xi = np.array(
            [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(N - 1)]
        )
        xi /= np.linalg.norm(xi)
        mat = np.array(rows + [list(xi)], dtype=complex)
        margin = abs(np.linalg.det(mat)) / float(np.prod(norms))
        if margin >= eps_xi:
            return [complex(c) for c in xi], float(margin), attempt
    raise GenericityFailure(
        f"no admissible xi after {max_retries} tries at z = {z_i}: "
        "the stacked matrix is rank deficient"
    )


def _stacked_rows(split: BlockSplit, z):
    """Numeric rows b(z) d^k(z) for k = 0 .. N-3."""
    N = split.N
    bval = [to_complex(p(z)) for p in split.b]
    dval = [
        [to_complex(split.d[i, j](z)) for j in range(N - 1)] for i in range(N - 1)
    ]
    rows = []
    cur = bval
    for _ in range(N - 2):
        rows.append(list(cur))
        cur = [sum(cur[k] * dval[k][j] for k in range(N - 1)) for j in range(N - 1)]
    return rows


def _w_from_xi(split: BlockSplit, z, xi):
    """w = - det(a rows; xi d) / det(a rows; xi), all evaluated at z."""
    N = split.N
    dval = [
        [to_complex(split.d[i, j](z)) for j in range(N - 1)] for i in range(N - 1)
    ]
    xid = [sum(xi[k] * dval[k][j] for k in range(N - 1)) for j in range(N - 1)]
    if N == 2:
        return -xid[0] / xi[0]
    rows = _stacked_rows(split, z)
    num = np.linalg.det(np.array(rows + [xid], dtype=complex))
    den = np.linalg.det(np.array(rows + [list(xi)], dtype=complex))
    return -num / den


# ---------------------------------------------------------------------------
# divisors


@dataclass
class Divisor:
    """g separated points with provenance and genericity metadata."""

    N: int
    n: int
    points: list  # list of (z, w) complex pairs, sorted by z
    source: dict  # {"which": "m"|"l", "xi": [per-point xi vectors], "seed": int}
    genericity: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    @property
    def zs(self):
        return [p[0] for p in self.points]

    @property
    def ws(self):
        return [p[1] for p in self.points]


def separate(
    L: LaxMatrix,
    which: str = "l",
    seed: int = 0,
    root_sep_tol: float = 1e-6,
    curve: SpectralCurve | None = None,
) -> Divisor:
    """Separated divisor of a Lax matrix instance.

    ``which`` chooses the split convention and must match the shape of L;
    the points satisfy the curve equation of char_poly_t(L), whose
    residuals are recorded per point.
    """
    if which not in ("m", "l"):
        raise DomainError(f"unknown split convention {which!r}")
    if L.shape != which:
        raise DomainError(f"{which}-based separation needs a {which}-shape matrix")
    N, n = L.N, L.n
    g = genus(N, n)
    split = BlockSplit.of(L)
    B = _detZ_of_split(split, g, L.backend, 1e-9)
    roots = poly_roots(B.map(to_complex))
    scale = max(1.0, max(abs(z) for z in roots))
    min_sep = min(
        (abs(roots[i] - roots[j]) for i in range(len(roots)) for j in range(i + 1, len(roots))),
        default=float("inf"),
    )
    if min_sep < root_sep_tol * scale:
        raise MultipleRoot(
            f"det Z roots separated by {min_sep:.3e} < {root_sep_tol:.0e} * scale"
        )
    from .lax import char_poly_t

    if curve is None:
        curve = char_poly_t(L.to_float() if L.backend != FLOAT else L)
    points, xis, margins = [], [], []
    for i, z in enumerate(roots):
        xi, margin, _ = choose_xi(split, z, seed * 65537 + i)
        w = _w_from_xi(split, z, xi)
        points.append((z, w))
        xis.append(xi)
        margins.append(margin)
    res = [relative_residual(curve, w, z) for z, w in points]
    return Divisor(
        N,
        n,
        points,
        {"which": which, "xi": xis, "seed": seed},
        {
            "min_root_separation": float(min_sep),
            "min_xi_margin": float(min(margins)) if margins else 1.0,
        },
        res,
    )


def generic_instance(N, n, seed, backend=FLOAT, max_tries=64):
    """Sample an m-shape instance whose gauge and both separations are
    generic; the seed advances deterministically and the number of
    rejected samples is reported."""
    g = genus(N, n)
    for t in range(max_tries):
        try:
            M = sample_m(N, n, seed + t, backend)
            L = gauge_fix_l(M.to_float() if backend != FLOAT else M)
            Mf = M.to_float() if backend != FLOAT else M
            _ = separate(Mf, "m", seed + t)
            _ = separate(L, "l", seed + t)
            return M, L, t
        except (SingularGauge, MultipleRoot, DegenerateLeading, GenericityFailure):
            continue
    raise GenericityFailure(f"no generic instance in {max_tries} tries from seed {seed}")


# ---------------------------------------------------------------------------
# canonical bracket certification


def _jet_split(M: LaxMatrix):
    """m-shape entries over jets seeded on (coefficients..., z)."""
    N, n = M.N, M.n
    dim = n * N * N
    vals = [to_complex(v) for v in M.coefficient_vector()]
    jets = [Jet.seed(v, u, dim + 1) for u, v in enumerate(vals)]
    Mj = m_from_vector(N, n, jets, FLOAT)
    return BlockSplit.of(Mj), vals, dim


def _jet_rows_at(split: BlockSplit, zjet):
    """Evaluate b, d and the stacked rows a^(k) at a jet-valued z."""
    N = split.N
    b = [p(zjet) for p in split.b]
    d = [[split.d[i, j](zjet) for j in range(N - 1)] for i in range(N - 1)]
    return b, d


def _jet_det(rows):
    return det_grid([list(r) for r in rows])


@dataclass
class BracketReport:
    divisor: Divisor
    zz: np.ndarray
    zw: np.ndarray
    ww: np.ndarray
    r_zz: float
    r_zw: float
    r_ww: float


def canonical_bracket_check(
    M: LaxMatrix,
    seed: int = 0,
    P: PoissonStructure | None = None,
) -> BracketReport:
    """Evaluate all pairwise brackets of the separated variables of M.

    Gradients of z_i come from the implicit function theorem on
    B(z_i; x) = 0; gradients of w_j combine the explicit xi-determinant
    formula with the chain rule through z_j.  The three g x g bracket
    matrices are contracted through the exact structure-constant tensor
    evaluated at the instance.  Residuals are relative: zz and ww against
    the squared coordinate scales, zw entrywise against |z_i|.
    """
    if M.shape != "m":
        raise DomainError("bracket verification uses the m-based split")
    N, n = M.N, M.n
    if P is None:
        P = structure_constants_cached(N, n)
    div = separate(M, "m", seed)
    g = len(div)
    split, vals, dim = _jet_split(M)
    pi = P.pi_matrix(vals)

    gz = np.zeros((g, dim), dtype=complex)
    gw = np.zeros((g, dim), dtype=complex)
    for i, (z_i, _w_i) in enumerate(div.points):
        zjet = Jet.seed(z_i, dim, dim + 1)
        b, d = _jet_rows_at(split, zjet)
        rows = [b]
        for _ in range(N - 2):
            prev = rows[-1]
            rows.append(
                [
                    sum((prev[k] * d[k][j] for k in range(N - 1)))
                    for j in range(N - 1)
                ]
            )
        B = _jet_det([[rows[a][c] for c in range(N - 1)] for a in range(N - 1)])
        dBdz = B.grad[dim]
        dz = -B.grad[:dim] / dBdz
        gz[i] = dz

        xi = div.source["xi"][i]
        xid = [
            sum(xi[k] * d[k][j] for k in range(N - 1)) for j in range(N - 1)
        ]
        stacked = rows[: N - 2]
        num = _jet_det(stacked + [xid]) if N > 2 else xid[0]
        den = _jet_det(stacked + [list(xi)]) if N > 2 else Jet.const(xi[0], dim + 1)
        A = num / den
        # w = -A(z(x), x)
        gw[i] = -(A.grad[:dim] + A.grad[dim] * dz)

    zz = gz @ pi @ gz.T
    zw = gz @ pi @ gw.T
    ww = gw @ pi @ gw.T

    zs = np.array(div.zs)
    ws = np.array(div.ws)
    scale_z = max(1.0, float(np.max(np.abs(zs))))
    scale_w = max(1.0, float(np.max(np.abs(ws))))
    r_zz = float(np.max(np.abs(zz))) / scale_z**2
    r_ww = float(np.max(np.abs(ww))) / scale_w**2
    delta = zw - np.diag(zs)
    r_zw = float(np.max(np.abs(delta) / np.abs(zs)[:, None]))
    return BracketReport(div, zz, zw, ww, r_zz, r_zw, r_ww)


def implicit_vs_fd(
    M: LaxMatrix,
    seed: int = 0,
    n_checks: int = 8,
    h: float = 1e-4,
) -> float:
    """Max relative disagreement between implicit-function gradients of the
    separated z_i and Richardson-extrapolated central finite differences,
    over a deterministic sample of (root, coefficient) pairs."""
    if M.shape != "m":
        raise DomainError("gradient check uses the m-based split")
    N, n = M.N, M.n
    dim = n * N * N
    div = separate(M, "m", seed)
    split, vals, _ = _jet_split(M)

    grads = {}
    for i, (z_i, _) in enumerate(div.points):
        zjet = Jet.seed(z_i, dim, dim + 1)
        b, d = _jet_rows_at(split, zjet)
        rows = [b]
        for _ in range(N - 2):
            prev = rows[-1]
            rows.append(
                [sum((prev[k] * d[k][j] for k in range(N - 1))) for j in range(N - 1)]
            )
        B = _jet_det([[rows[a][c] for c in range(N - 1)] for a in range(N - 1)])
        grads[i] = -B.grad[:dim] / B.grad[dim]

    def root_near(values, target):
        Mp = m_from_vector(N, n, list(values), FLOAT)
        Bp = _detZ_of_split(BlockSplit.of(Mp), genus(N, n), FLOAT, 1e-9)
        rs = poly_roots(Bp)
        return min(rs, key=lambda r: abs(r - target))

    rng = random.Random(seed + 17)
    worst = 0.0
    for _ in range(n_checks):
        i = rng.randrange(len(div))
        u = rng.randrange(dim)
        z_i = div.points[i][0]

        def central(step):
            up = list(vals)
            up[u] = vals[u] + step
            dn = list(vals)
            dn[u] = vals[u] - step
            return (root_near(up, z_i) - root_near(dn, z_i)) / (2 * step)

        d1 = central(h)
        d2 = central(h / 2)
        fd = (4 * d2 - d1) / 3  # Richardson: removes the h^2 term
        ref = grads[i][u]
        denom = max(abs(ref), abs(fd), 1e-12)
        worst = max(worst, abs(fd - ref) / denom)
    return worst


def divisor_gap(d1: Divisor, d2: Divisor) -> float:
    """Max matched distance between two divisors' points (z sorted)."""
    p1 = sorted(d1.points, key=lambda p: (p[0].real, p[0].imag))
    p2 = sorted(d2.points, key=lambda p: (p[0].real, p[0].imag))
    return max(
        abs(a[0] - b[0]) + abs(a[1] - b[1]) for a, b in zip(p1, p2)
    )
