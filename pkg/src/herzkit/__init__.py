"""Anisotropic mixed-norm Herz space toolkit.

Computable versions of the anisotropic quasi-norm machinery: mixed Lebesgue
and Herz norms on sampled functions, maximal/fractional/singular operators
with Muckenhoupt weight constants, Littlewood-Paley square functions, and
the Hardy-side atomic and molecular decompositions, plus a verification CLI.

A compiled extension accelerates the hot loops when built; a NumPy fallback
is selected automatically otherwise (see ``herzkit.backend_name``).
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .anisotropy import (
    AnisotropicBall,
    AnisotropyVector,
    ball_measure,
    bracket,
    dilate,
    polar_integrate,
    quasi_norm,
    unit_ball_volume,
)
from .herz import (
    BlockDecomposition,
    HerzParams,
    block_decompose,
    block_synthesize,
    herz_norm,
    quasi_triangle_constant,
)
from .hardy_atoms import (
    AtomSpec,
    AtomicDecomposition,
    MoleculeSpec,
    SchwartzWindow,
    atom_check,
    atomic_decompose,
    herz_hardy_norm,
    molecule_check,
    molecule_to_atoms,
    n_index,
    radial_maximal,
    schwartz_seminorm,
)
from .littlewood_paley import (
    LPKernel,
    g_function,
    g_star,
    laplacian_of_gaussian,
    lp_admissibility_check,
    lusin_area,
    mexican_hat,
)
from .mixed_norm import (
    ExponentVector,
    holder_check,
    mixed_lebesgue_norm,
    power_identity_check,
)
from .sampled_function import (
    AnnulusMask,
    Grid,
    SampledFunction,
    annulus_mask,
    quadrature_integral,
    quasi_norm_field,
    truncation_fraction,
)
from .weights_maximal import (
    BallFamily,
    OperatorReport,
    StandardKernel,
    WeightReport,
    ap_constant,
    apq_constant,
    bmo_norm,
    commutator_apply,
    cz_apply,
    estimate_maximal_bound,
    fractional_integral,
    fractional_maximal,
    hilbert_kernel,
    hl_maximal,
    rubio_de_francia,
    validate_kernel,
)
