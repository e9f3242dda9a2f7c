"""Price a two-factor CIR zero-coupon bond three independent ways.

1. the closed-form affine formula,
2. a numerically integrated Riccati system,
3. the PDE solver: split the generator into drift transport and
   diffusion-plus-killing, and compose both flows with the five-stage
   fourth-order scheme whose diffusion stages use complex timesteps.

The three answers agree to within the time-discretization error of the
PDE route, which with only 8 steps is already below 1e-3 pointwise.
"""

import numpy as np

from cirsplit import (
    AffineDrift,
    Cir2Params,
    DiffusionPropagator,
    DriftPropagator,
    KrylovConfig,
    assemble_diffusion,
    bond_price_cir2,
    build_mesh,
    cdv_fourth_order,
    evolve,
    interpolate,
    riccati_bond_price,
    sample,
)

x0, y0 = 0.025, 0.025
params = Cir2Params.benchmark(eps=1.0, horizon=1.0)

closed = bond_price_cir2(params, x0, y0)
riccati = riccati_bond_price(params, x0, y0)
print(f"closed-form price   : {closed:.10f}")
print(f"Riccati ODE price   : {riccati:.10f}   (gap {abs(closed - riccati):.2e})")

mesh = build_mesh(16.0, 16.0, 16, 4)
operator = assemble_diffusion(mesh, params)
drift = DriftPropagator(AffineDrift.from_params(params))
diffusion = DiffusionPropagator(operator, KrylovConfig(m=30))
u0 = sample(mesh, lambda x, y: np.ones_like(x, dtype=complex))

result = evolve(cdv_fourth_order(), drift, diffusion, u0, params.horizon, n=8)
pde = interpolate(result.u, (x0, y0)).real
print(f"PDE price (8 steps) : {pde:.10f}   (gap {abs(pde - closed):.2e})")
print(f"imaginary residue   : {max(d.max_abs_imag for d in result.diagnostics):.2e}")
