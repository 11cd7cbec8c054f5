from fractions import Fraction

import numpy as np
import pytest

from specjac.algebra import Poly, to_complex
from specjac.curve import (
    SpectralCurve,
    curve_residual,
    differential_index_set,
    genus,
    on_curve,
)
from specjac.errors import DegreeViolation, DomainError
from specjac.lax import char_poly_t, sample_m


@pytest.mark.parametrize("N,n,g", [(2, 2, 1), (3, 2, 4), (2, 3, 2)])
def test_genus_values(N, n, g):
    assert genus(N, n) == g


def test_genus_domain():
    with pytest.raises(DomainError):
        genus(1, 2)
    with pytest.raises(DomainError):
        genus(2, 0)


def test_genus_hyperelliptic():
    for n in range(1, 9):
        assert genus(2, n) == n - 1


def test_index_set_small():
    assert [(d.l, d.k) for d in differential_index_set(2, 2)] == [(0, 0)]
    assert [(d.l, d.k) for d in differential_index_set(3, 2)] == [
        (0, 0), (0, 1), (0, 2), (1, 0),
    ]


def test_index_count_equals_genus():
    # oracle: the sum over w-powers of ((N-l-1)n - 1) telescopes to g
    for N in range(2, 6):
        for n in range(1, 6):
            idx = differential_index_set(N, n)
            assert len(idx) == genus(N, n)
            assert len(idx) == sum(m * n - 1 for m in range(1, N))


def test_curve_rejects_wrong_tN_degree():
    t1 = Poly([Fraction(1)])
    tN_bad = Poly([Fraction(1)])  # degree 0, must be 2n-1 = 3
    with pytest.raises(DegreeViolation):
        SpectralCurve(2, 2, [t1, tN_bad])
    too_big = Poly([Fraction(1)] * 6)  # degree 5 > 3
    with pytest.raises(DegreeViolation):
        SpectralCurve(2, 2, [t1, too_big])


def test_residual_simple():
    # N=2, t1 = 0, t2 = -z: r(w, z) = w^2 - z
    c = SpectralCurve(2, 1, [Poly(), Poly([0, Fraction(-1)])])
    assert curve_residual(c, Fraction(1), Fraction(1)) == 0
    assert on_curve(c, 1.0, 1.0)
    assert not on_curve(c, 1.0, 2.0)


def test_residual_at_w_zero_is_tN():
    rng_curve = char_poly_t(sample_m(3, 2, seed=8))
    z0 = Fraction(2, 3)
    assert curve_residual(rng_curve, Fraction(0), z0) == rng_curve.t[-1](z0)


def test_eigenvalues_lie_on_curve():
    # oracle: numpy eigenvalues of m(z0) vs the characteristic curve
    M = sample_m(3, 2, seed=4, backend="float")
    c = char_poly_t(M)
    z0 = 0.73 - 0.21j
    mat = np.array([[to_complex(M.mat[i, j](z0)) for j in range(3)] for i in range(3)])
    for lam in np.linalg.eigvals(mat):
        assert on_curve(c, -lam, z0, tol=1e-9)


def test_defining_bipoly_matches_residual():
    c = char_poly_t(sample_m(2, 2, seed=1))
    r = c.defining_bipoly()
    w0, z0 = Fraction(1, 2), Fraction(-2, 5)
    assert r(w0, z0) == curve_residual(c, w0, z0)
