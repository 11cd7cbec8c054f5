import random
from fractions import Fraction

import pytest

from specjac.algebra import FLOAT
from specjac.errors import DimensionMismatch, IndexOutOfRange, ShapeMismatch
from specjac.lax import (
    CoefficientIndex,
    all_coefficient_indices,
    flat_index,
    sample_m,
)
from specjac.poisson import (
    CoeffPoly,
    Gradient,
    bracket_eval,
    centrality_defect,
    check_rhat_identity,
    coefficient_grades,
    apply_D,
    deg_D,
    d_operator_indices,
    grade_of,
    involution_defect,
    jacobi_defect,
    jacobi_triples,
    structure_constants,
    t_grade,
    t_gradients,
)


@pytest.fixture(scope="module")
def tables():
    return {(N, n): structure_constants(N, n) for (N, n) in [(2, 1), (2, 2), (3, 2)]}


def test_first_row_block_commutes(tables):
    # {m_1j(z1), m_1k(z2)} = 0 for all j, k >= 2
    for (N, n), P in tables.items():
        for j in range(2, N + 1):
            for k in range(2, N + 1):
                for a in range(n):
                    for b in range(n):
                        u = flat_index(CoefficientIndex(1, j, a), N, n)
                        v = flat_index(CoefficientIndex(1, k, b), N, n)
                        assert P.bracket(u, v).is_zero()


def test_antisymmetry_exact(tables):
    for P in tables.values():
        assert P.antisymmetry_defect().is_zero()
        for (u, v), form in P.table.items():
            assert P.bracket(v, u) == -form


def test_diagonal_restriction_vanishes():
    # the construction itself divides by (z1 - z2); a ShapeMismatch or
    # NotDivisible would fire during compilation if the permutation-operator
    # cancellation failed
    for (N, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 2), (3, 3), (4, 3)]:
        P = structure_constants(N, n)
        assert P.dim == n * N * N


def test_jacobi_exhaustive_small(tables):
    for key in [(2, 1), (2, 2)]:
        P = tables[key]
        triples = jacobi_triples(P, 0, exhaustive_limit=10**6)
        assert len(triples) == P.dim * (P.dim - 1) * (P.dim - 2) // 6
        assert jacobi_defect(P, triples).is_zero()


def test_jacobi_sampled_32(tables):
    P = tables[(3, 2)]
    assert jacobi_defect(P, jacobi_triples(P, 1000, seed=3)).is_zero()


def test_bracket_eval_antisymmetry_and_dims(tables):
    P = tables[(2, 2)]
    M = sample_m(2, 2, seed=1)
    grads = t_gradients(M)
    f = grads[(2, 1)]
    assert bracket_eval(P, f, f) == 0
    short = Gradient(f.base, f.value, f.partials[:-1])
    with pytest.raises(DimensionMismatch):
        bracket_eval(P, f, short)


def test_involution_and_centrality_exact(tables):
    for (N, n), P in tables.items():
        M = sample_m(N, n, seed=6)
        assert involution_defect(M, P) == 0
        assert centrality_defect(M, P) == 0


def test_t_gradients_match_finite_differences(tables):
    # analytic cofactor gradients vs an exact directional difference:
    # t(x + e_u) - t(x) has no higher-order terms in a linear direction
    # only for multilinear entries, so use the exact quotient at two points
    N, n = 2, 2
    P = tables[(N, n)]
    M = sample_m(N, n, seed=3)
    grads = t_gradients(M)
    vec = M.coefficient_vector()
    from specjac.lax import char_poly_t, m_from_vector

    u = 5
    h = Fraction(1, 7)
    up = list(vec)
    up[u] += h
    dn = list(vec)
    dn[u] -= h
    for (k, alpha), g in grads.items():
        c_up = char_poly_t(m_from_vector(N, n, up, "exact"))
        c_dn = char_poly_t(m_from_vector(N, n, dn, "exact"))
        zdeg = k * n - 1 - alpha
        fd = (c_up.t[k - 1].coeff(zdeg) - c_dn.t[k - 1].coeff(zdeg)) / (2 * h)
        # det is at most quadratic in any single entry for N=2, so the
        # central difference is exact
        assert fd == g.partials[u]


# ---------------------------------------------------------------------------
# grading


def test_grade_examples():
    # subdiagonal leading slot has grade 0 (constant)
    assert grade_of(CoefficientIndex(2, 1, 0), "l", 2, 2) == 0
    # t-coefficient grades
    assert t_grade(1, 0, 2, 2) == 1  # dominant: N - k
    for N, n in [(2, 2), (3, 2)]:
        for k in range(1, N + 1):
            assert t_grade(k, 0, N, n) == N - k
            for alpha in range(k * n):
                assert t_grade(k, alpha, N, n) == N * (alpha + 1) - k


def test_grade_out_of_range():
    with pytest.raises(IndexOutOfRange):
        grade_of(CoefficientIndex(1, 1, 5), "m", 2, 2)
    with pytest.raises(IndexOutOfRange):
        t_grade(3, 0, 2, 2)


def test_char_coefficients_are_homogeneous():
    # every t_k^(alpha), as a polynomial in the m-slots, is homogeneous of
    # grade N(alpha+1) - k under the m-shape grading
    from specjac.poisson import _symbolic_char_coeff

    N, n = 3, 2
    grades = {
        flat_index(ix, N, n): g for ix, g in coefficient_grades(N, n).items()
    }
    for k in range(1, N + 1):
        for alpha in range(k * n):
            poly = _symbolic_char_coeff(N, n, k, alpha)
            pieces = poly.grade_decomposition(grades)
            nonzero = [g for g, p in pieces.items() if not p.is_zero()]
            assert nonzero in ([], [t_grade(k, alpha, N, n)])


# ---------------------------------------------------------------------------
# the D_ik derivations


def test_apply_D_on_constant_is_zero():
    P = structure_constants(2, 2)
    assert apply_D(P, 1, 1, CoeffPoly.const(5)).is_zero()


def test_apply_D_index_ranges():
    P = structure_constants(2, 2)
    with pytest.raises(IndexOutOfRange):
        apply_D(P, 2, 1, CoeffPoly.var(0))  # i must be <= n*k - 1 = 1
    with pytest.raises(IndexOutOfRange):
        apply_D(P, 1, 2, CoeffPoly.var(0))  # k <= N - 1 = 1


def test_apply_D_count_equals_genus():
    from specjac.curve import genus

    for N, n in [(2, 2), (3, 2), (2, 4)]:
        assert len(d_operator_indices(N, n)) == genus(N, n)


def test_apply_D_leibniz():
    P = structure_constants(2, 2)
    rng = random.Random(1)
    dim = P.dim

    def rand_poly():
        out = CoeffPoly.const(rng.randint(-3, 3))
        for _ in range(3):
            m = CoeffPoly.var(rng.randrange(dim))
            if rng.random() < 0.5:
                m = m * CoeffPoly.var(rng.randrange(dim))
            out = out + m * Fraction(rng.randint(-4, 4))
        return out

    for (i, k) in d_operator_indices(2, 2):
        for _ in range(4):
            f, g = rand_poly(), rand_poly()
            lhs = apply_D(P, i, k, f * g)
            rhs = apply_D(P, i, k, f) * g + f * apply_D(P, i, k, g)
            assert lhs == rhs


def test_apply_D_grading_shift():
    # for homogeneous f, D_ik f is homogeneous of grade + deg D_ik
    for (N, n) in [(2, 2), (3, 2)]:
        P = structure_constants(N, n)
        grades = {
            flat_index(ix, N, n): g
            for ix, g in coefficient_grades(N, n).items()
        }
        rng = random.Random(7)
        for (i, k) in d_operator_indices(N, n):
            for _ in range(3):
                u = rng.randrange(P.dim)
                v = rng.randrange(P.dim)
                f = CoeffPoly.var(u) * CoeffPoly.var(v)
                base_grade = grades[u] + grades[v]
                out = apply_D(P, i, k, f)
                pieces = out.grade_decomposition(grades)
                nz = [g for g, p in pieces.items() if not p.is_zero()]
                assert nz in ([], [base_grade + deg_D(i, k, N, n)])


def test_deg_D_values():
    assert deg_D(1, 1, 2, 2) == 1
    # (2,3): degrees 3 and 1, so the q prefactor of chi_q is q^-4
    assert [deg_D(i, 1, 2, 3) for i in (1, 2)] == [3, 1]


# ---------------------------------------------------------------------------
# gauge-fixed r-matrix identity


@pytest.mark.parametrize("N,n", [(2, 2), (3, 2)])
def test_rhat_identity_numeric(N, n):
    P = structure_constants(N, n)
    M = sample_m(N, n, seed=4, backend=FLOAT)
    assert check_rhat_identity(P, M, samples=3, seed=0) <= 1e-7


def test_rhat_pole_avoided():
    # the sampler never evaluates with |z1 - z2| <= 0.1; run enough samples
    # to exercise the rejection loop
    P = structure_constants(2, 2)
    M = sample_m(2, 2, seed=8, backend=FLOAT)
    assert check_rhat_identity(P, M, samples=8, seed=5) <= 1e-7


def test_rhat_degrades_with_fd_step():
    P = structure_constants(2, 2)
    M = sample_m(2, 2, seed=4, backend=FLOAT)
    r_coarse = check_rhat_identity(P, M, samples=2, seed=0, fd_step=1e-2)
    r_fine = check_rhat_identity(P, M, samples=2, seed=0, fd_step=1e-4)
    exact = check_rhat_identity(P, M, samples=2, seed=0)
    assert r_coarse > r_fine > exact
