"""Spectral curve data model: defining equation, genus, differential indices.

A spectral curve of order N and pole degree n is the plane curve

    w^N + t_1(z) w^(N-1) + ... + t_N(z) = 0

with deg t_k <= k*n - 1 and deg t_N = N*n - 1 exactly.  Only the index
bookkeeping of the holomorphic differentials is implemented; the
differentials themselves, periods and theta functions are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import BiPoly, Poly, to_complex
from .errors import DegreeViolation, DomainError


def _check_order(N: int, n: int):
    if N < 2:
        raise DomainError(f"matrix order N must be >= 2, got {N}")
    if n < 1:
        raise DomainError(f"degree parameter n must be >= 1, got {n}")


def genus(N: int, n: int) -> int:
    """Genus (N-1)(Nn-2)/2 of the order-(N, n) spectral curve."""
    _check_order(N, n)
    prod = (N - 1) * (N * n - 2)
    assert prod % 2 == 0  # N odd => N-1 even; N even => Nn-2 even
    return prod // 2


@dataclass(frozen=True)
class DifferentialIndex:
    """Index (l, k) of a holomorphic differential w^l z^k / dr_w."""

    l: int
    k: int


def differential_index_set(N: int, n: int) -> list[DifferentialIndex]:
    """All admissible (l, k) in lexicographic order; one per handle."""
    _check_order(N, n)
    out = []
    for l in range(0, N - 1):
        for k in range(0, (N - l - 1) * n - 1):
            out.append(DifferentialIndex(l, k))
    return out


class SpectralCurve:
    """Curve data: order N, degree parameter n, coefficients t_1 .. t_N."""

    __slots__ = ("N", "n", "t")

    def __init__(self, N: int, n: int, t: list[Poly]):
        _check_order(N, n)
        if len(t) != N:
            raise DomainError(f"expected {N} coefficient polynomials, got {len(t)}")
        for k, tk in enumerate(t, start=1):
            if tk.degree > k * n - 1:
                raise DegreeViolation(
                    f"deg t_{k} = {tk.degree} exceeds bound {k * n - 1}"
                )
        if t[-1].degree != N * n - 1:
            raise DegreeViolation(
                f"deg t_{N} must be exactly {N * n - 1}, got {t[-1].degree}"
            )
        self.N = N
        self.n = n
        self.t = list(t)

    @property
    def genus(self) -> int:
        return genus(self.N, self.n)

    def defining_bipoly(self) -> BiPoly:
        """Materialize r(w, z) as a bivariate polynomial (w first)."""
        r = BiPoly.monomial(self.N, 0, 1)
        for k, tk in enumerate(self.t, start=1):
            r = r + BiPoly([[0]] * (self.N - k) + [list(tk.coeffs)])
        return r

    def __eq__(self, other):
        return (
            isinstance(other, SpectralCurve)
            and (self.N, self.n) == (other.N, other.n)
            and self.t == other.t
        )

    def __repr__(self):
        return f"SpectralCurve(N={self.N}, n={self.n}, g={self.genus})"


def curve_residual(c: SpectralCurve, w, z):
    """r(w, z) = w^N + sum_k t_k(z) w^(N-k)."""
    acc = w**c.N
    for k, tk in enumerate(c.t, start=1):
        acc = acc + tk(z) * w ** (c.N - k)
    return acc


def on_curve(c: SpectralCurve, w, z, tol: float = 1e-9) -> bool:
    """Relative residual test |r(w,z)| <= tol * (1 + |w|^N + max_k |t_k(z)|)."""
    return relative_residual(c, w, z) <= tol


def relative_residual(c: SpectralCurve, w, z) -> float:
    wv, zv = to_complex(w), to_complex(z)
    r = curve_residual(c, wv, zv)
    scale = 1.0 + abs(wv) ** c.N + max(abs(to_complex(tk(zv))) for tk in c.t)
    return abs(r) / scale
