"""specjac: algebraic model of the affine Jacobian of a spectral curve.

Lax matrices with an r-matrix Poisson structure, separation of variables
with numerically certified canonical brackets, divisor-to-matrix
reconstruction, and exact graded characters with the q-Euler
characteristic of the associated complex.
"""

from .algebra import (
    EXACT,
    FLOAT,
    BiPoly,
    Jet,
    LinForm,
    Poly,
    PolyMatrix,
    bipoly_div_linear,
    poly_roots,
    polymat_det,
    series_expand,
)
from .curve import (
    DifferentialIndex,
    SpectralCurve,
    curve_residual,
    differential_index_set,
    genus,
    on_curve,
)
from .euler import (
    GradedCharacter,
    char_series_oracle,
    euler_characteristic,
    euler_limit,
    euler_ratio,
    generator_degrees,
    paper_closed_forms,
    q_euler,
)
from .lax import (
    CoefficientIndex,
    LaxMatrix,
    char_poly_t,
    free_coefficient_count,
    gauge_fix_l,
    gauge_matrix_s,
    sample_m,
)
from .poisson import (
    Gradient,
    PoissonStructure,
    apply_D,
    bracket_eval,
    check_rhat_identity,
    grade_of,
    structure_constants,
)
from .reconstruct import (
    MonomialSupport,
    reconstruct_l,
    recover_first_column,
    recover_Lprime,
    roundtrip,
    solve_Xk,
    xk_support,
)
from .sov import (
    BlockSplit,
    Divisor,
    build_Z,
    canonical_bracket_check,
    choose_xi,
    det_Z,
    separate,
)

__version__ = "0.1.0"
