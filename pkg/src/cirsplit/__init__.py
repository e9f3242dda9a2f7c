"""Pricing under the two-factor CIR model by operator splitting with
complex timesteps on spectral-element grids."""

from .analytics import (
    AffineBondCoeffs,
    Cir2Params,
    bond_price_cir2,
    cir_bond_coeffs,
    cir_semigroup_apply,
    cir_semigroup_quadrature,
    riccati_bond_price,
)
from .diffusion import DiscreteOperator, assemble_diffusion, assemble_diffusion_1d
from .drift import AffineDrift, DriftPropagator, exact_flow, transport
from .krylov import DiffusionPropagator, FactorCache, KrylovConfig, KrylovError, expmv, factor_shifted
from .mesh import (
    GridFunction,
    OutOfDomainError,
    SpectralMesh,
    build_mesh,
    build_mesh_1d,
    interpolate,
    sample,
    write_nodal_csv,
)
from .splitting import (
    EvolveResult,
    Propagator,
    SplittingScheme,
    StageError,
    cdv_fourth_order,
    compose_step,
    evolve,
    lie_trotter,
    scheme_by_name,
    strang,
    validate,
)
from .weighted_space import (
    DegenerateRegionError,
    Region,
    WeightFunction,
    eval_weight,
    weighted_sup_norm,
)
from .experiments import (
    ConvergenceRecord,
    ExperimentConfig,
    emit_csv,
    estimate_slope,
    load_config,
    read_csv,
    run_convergence,
    run_robustness,
    run_selftest,
    run_truncation,
)

__version__ = "0.1.0"
