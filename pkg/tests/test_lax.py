from fractions import Fraction

import pytest

from specjac.algebra import EXACT, FLOAT, Poly, to_complex
from specjac.curve import genus
from specjac.errors import DegreeViolation, DomainError, SingularGauge
from specjac.lax import (
    CoefficientIndex,
    LaxMatrix,
    all_coefficient_indices,
    char_poly_t,
    free_coefficient_count,
    gauge_fix_l,
    gauge_matrix_s,
    l_degree,
    m_from_vector,
    mu_matrices,
    sample_gauge_generic,
    sample_m,
)


def test_sample_shapes_22():
    M = sample_m(2, 2, seed=0)
    # lower entry has the form c0 z^2 + c1 z: no constant term
    m21 = M.mat[1, 0]
    assert m21.coeff(0) == 0
    assert m21.degree <= 2
    # upper entries have degree <= 1
    assert M.mat[0, 1].degree <= 1


def test_sample_shapes_31():
    M = sample_m(3, 1, seed=2)
    for i in range(3):
        for j in range(3):
            if i <= j:
                assert M.mat[i, j].degree <= 0
            else:
                assert M.mat[i, j].coeff(0) == 0
                assert M.mat[i, j].degree <= 1


def test_sample_determinism():
    assert sample_m(3, 2, seed=9) == sample_m(3, 2, seed=9)
    assert sample_m(3, 2, seed=9, backend=FLOAT) == sample_m(3, 2, seed=9, backend=FLOAT)
    assert sample_m(3, 2, seed=9) != sample_m(3, 2, seed=10)


def test_coefficient_indexing_roundtrip():
    N, n = 3, 2
    M = sample_m(N, n, seed=5)
    vec = M.coefficient_vector()
    assert len(vec) == n * N * N
    M2 = m_from_vector(N, n, vec, EXACT)
    assert M2 == M


def test_char_poly_2x2_symbolic():
    M = sample_m(2, 2, seed=11)
    c = char_poly_t(M)
    assert c.t[0] == M.mat[0, 0] + M.mat[1, 1]
    assert c.t[1] == M.mat[0, 0] * M.mat[1, 1] - M.mat[0, 1] * M.mat[1, 0]


@pytest.mark.parametrize("N,n", [(2, 2), (3, 2), (4, 2), (3, 3)])
def test_detm_leading_coefficient_identity(N, n):
    # leading coefficient of t_N carries the sign of the N-cycle pulling
    # the corner entry through the subdiagonal
    M = sample_m(N, n, seed=13)
    c = char_poly_t(M)
    lead = c.t[-1].coeff(N * n - 1)
    prod = M.mat[0, N - 1].coeff(n - 1)
    for j in range(1, N):
        prod *= M.mat[j, j - 1].coeff(n)
    assert lead == (-1) ** (N - 1) * prod


def test_gauge_s_is_lower_triangular_and_2x2_form():
    for seed in (0, 1, 2):
        M, _, _ = sample_gauge_generic(3, 2, seed=seed)
        s = gauge_matrix_s(M)
        for i in range(3):
            for j in range(i + 1, 3):
                assert s[i, j].is_zero()
    M2, _, _ = sample_gauge_generic(2, 2, seed=1)
    mu_minus, mu1 = mu_matrices(M2)
    s = gauge_matrix_s(M2)
    # direct expansion of the definition: row 1 = mu1 mu^-, row 2 = mu1
    assert s[0, 0].coeff(0) == mu1[1] * mu_minus[1][0]
    assert s[0, 1].is_zero()
    assert s[1, 0].coeff(0) == mu1[0]
    assert s[1, 1].coeff(0) == mu1[1]


def test_gauge_det_is_diagonal_product():
    M, _, _ = sample_gauge_generic(4, 2, seed=3)
    s = gauge_matrix_s(M)
    det = Fraction(1)
    for i in range(4):
        det *= s[i, i].coeff(0)
    assert det != 0


def test_singular_gauge_raises():
    # zero out the corner coefficient mu1_N: every diagonal of s vanishes
    N, n = 3, 2
    M = sample_m(N, n, seed=0)
    vec = M.coefficient_vector()
    ix = all_coefficient_indices(N, n).index(CoefficientIndex(1, N, 0))
    vec[ix] = Fraction(0)
    bad = m_from_vector(N, n, vec, EXACT)
    with pytest.raises(SingularGauge):
        gauge_matrix_s(bad)


@pytest.mark.parametrize("N,n", [(2, 2), (3, 2), (4, 2), (3, 3)])
def test_gauge_fix_l_shape_and_invariance(N, n):
    M, L, _ = sample_gauge_generic(N, n, seed=7)
    # degree table is asserted by the LaxMatrix constructor; spot-check row 1
    for j in range(1, N):
        assert L.mat[0, j - 1].degree <= n - 2
    assert L.mat[0, N - 1].degree == n - 1
    # leading z^n matrix equals the shift matrix (exact)
    for i in range(N):
        for j in range(N):
            assert L.mat[i, j].coeff(n) == (1 if i == j + 1 else 0)
    # conjugation invariance of the characteristic polynomial, bit exact
    assert char_poly_t(M) == char_poly_t(L)
    # l_1N leading coefficient is s11 = corner * subdiagonal product of mu
    mu_minus, mu1 = mu_matrices(M)
    s11 = mu1[N - 1]
    for k in range(1, N):
        s11 *= mu_minus[k][k - 1]
    assert L.s11 == s11


def test_gauge_float_clamps_to_shape():
    M = sample_m(3, 2, seed=21, backend=FLOAT)
    L = gauge_fix_l(M)
    assert L.backend == FLOAT
    assert L.mat[1, 0].coeff(2) == 1.0  # subdiagonal leading exactly 1 after clamp
    c1, c2 = char_poly_t(M), char_poly_t(L)
    for p, q in zip(c1.t, c2.t):
        for k in range(max(p.degree, q.degree) + 1):
            assert abs(to_complex(p.coeff(k)) - to_complex(q.coeff(k))) < 1e-10


def test_l_shape_validation():
    M, L, _ = sample_gauge_generic(2, 2, seed=1)
    # breaking the subdiagonal leading coefficient must be rejected
    bad = [[L.mat[i, j] for j in range(2)] for i in range(2)]
    bad[1][0] = bad[1][0] + Poly([0, 0, Fraction(1)])  # now leading != 1
    from specjac.algebra import PolyMatrix

    with pytest.raises(DegreeViolation):
        LaxMatrix(2, 2, "l", PolyMatrix(bad), EXACT, s11=L.s11)


@pytest.mark.parametrize(
    "N,n,count", [(2, 2, 6), (3, 2, 15)]
)
def test_free_coefficient_count_examples(N, n, count):
    assert free_coefficient_count(N, n) == count


def test_free_count_formula_and_identity():
    for N in range(2, 6):
        for n in range(2, 5):
            c = free_coefficient_count(N, n)
            assert c == n * N * N - N
            # matches (non-constant t-coefficients) + genus
            assert c == (n * N * (N + 1) // 2 - 1) + genus(N, n)


def test_degree_table_bounds():
    # spot values of the l-degree table
    assert l_degree(1, 1, 3, 2) == 0
    assert l_degree(1, 3, 3, 2) == 1
    assert l_degree(2, 1, 3, 2) == 2
    assert l_degree(3, 2, 3, 2) == 2
    assert l_degree(2, 2, 3, 2) == 1


def test_domain_errors():
    with pytest.raises(DomainError):
        sample_m(1, 2, seed=0)
    with pytest.raises(DomainError):
        sample_m(2, 0, seed=0)
