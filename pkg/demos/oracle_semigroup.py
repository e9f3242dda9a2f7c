"""The squared-Gaussian semigroup as an exact 1D propagation oracle.

P_t f(x) = E[f((sqrt(x) + sigma*sqrt(t) Y)^2)] maps polynomials to
polynomials and solves u_t = 2 sigma^2 x u_xx + sigma^2 u_x.  Applying the
assembled 1D operator through the Krylov propagator must reproduce those
polynomial images; this is the sharpest end-to-end test of the diffusion
substep, with no splitting involved.
"""

import numpy as np

from cirsplit import (
    KrylovConfig,
    assemble_diffusion_1d,
    build_mesh_1d,
    cir_semigroup_apply,
    cir_semigroup_quadrature,
    expmv,
)

sigma, t = 0.25, 0.4

print("moment images of monomials (coefficients of 1, x, x^2, ...):")
for deg in range(4):
    unit = np.zeros(deg + 1)
    unit[deg] = 1.0
    print(f"  P_t x^{deg} -> {np.round(cir_semigroup_apply(sigma, t, unit), 10)}")

val = cir_semigroup_quadrature(sigma, t, lambda s: s**2, 1.0)
unit = np.array([0.0, 0.0, 1.0])
exact = float(np.polyval(cir_semigroup_apply(sigma, t, unit)[::-1], 1.0))
print(f"Gauss-Hermite check at x=1: {val:.12f} vs moment formula {exact:.12f}")

mesh = build_mesh_1d(16.0, 32, 4)
operator = assemble_diffusion_1d(mesh, sigma)
xs = mesh.node_coords()[:, 0]
inner = xs <= 6.0
print("Krylov propagation of monomials vs the moment formula (x <= 6):")
for deg in range(4):
    num = expmv(operator, (xs**deg).astype(complex), t, KrylovConfig(m=40, tolerance=1e-12))
    unit = np.zeros(deg + 1)
    unit[deg] = 1.0
    ref = np.polyval(cir_semigroup_apply(sigma, t, unit)[::-1], xs)
    rel = np.max(np.abs(num[inner] - ref[inner])) / np.max(np.abs(ref[inner]))
    print(f"  degree {deg}: relative error {rel:.3e}")
