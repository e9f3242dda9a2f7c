"""Assembly of the diffusion-plus-killing generator on spectral-element meshes.

The generator acting in one direction is written in divergence form,

    c(x) u'' + e(x) u'  =  (c(x) u')' - d(x) u'   with d = c' - e,

and discretized weakly with GLL quadrature at the nodes: the mass matrix
is diagonal (lumped), second-order terms are integrated by parts once, and
the boundary flux is dropped (natural treatment).  At x = 0 the coefficient
c vanishes, so nothing is dropped at the degenerate boundary; at the
truncation boundary the do-nothing choice commits an error that the domain
truncation experiment quantifies.

The full 2D operator is the Kronecker sum of the two directional operators
plus the diagonal killing term -(x + y).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .analytics import Cir2Params
from .mesh import SpectralMesh

_token_counter = itertools.count()


@dataclass(eq=False)
class DiscreteOperator:
    """Sparse real matrix acting on nodal value vectors of one mesh.

    ``mesh`` may be None for synthetic operators used in tests.
    """

    matrix: sparse.csr_matrix
    mesh: SpectralMesh | None
    meta: dict = field(default_factory=dict)
    token: int = field(default_factory=lambda: next(_token_counter))

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Matrix-vector product; the real matrix acts on complex vectors."""
        v = np.asarray(v)
        if v.shape != (self.shape[1],):
            raise ValueError(f"expected a vector of length {self.shape[1]}, got {v.shape}")
        return self.matrix @ v

    def dump_coo(self, path) -> None:
        """Text dump in coordinate format: one 'row col value' line per entry."""
        coo = self.matrix.tocoo()
        with open(path, "w", encoding="utf-8") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {float(v)!r}\n")


def _directional_operator(axis, c_fun, d_fun) -> sparse.csr_matrix:
    """Lumped-mass weak discretization of u -> (c u')' - d u' on one axis."""
    n = axis.node_count
    half = 0.5 * axis.element_width
    rows, cols, vals = [], [], []
    dmat = axis.ref_diff / half  # reference derivative scaled to the element
    for e in range(axis.elements):
        sl = axis.element_slice(e)
        xq = axis.nodes[sl]
        wq = axis.ref_weights * half
        block = -dmat.T @ ((wq * c_fun(xq))[:, None] * dmat)
        block -= (wq * d_fun(xq))[:, None] * dmat
        idx = np.arange(sl.start, sl.stop)
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(block.ravel())
    stiff = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    inv_mass = sparse.diags(1.0 / axis.weights)
    return (inv_mass @ stiff).tocsr()


def assemble_diffusion(mesh: SpectralMesh, params: Cir2Params) -> DiscreteOperator:
    """Discrete generator of the 2D diffusion substep.

    Strong form: sigma_x^2/2 * x * u_xx + sigma_x^2/4 * u_x (same in y)
    minus the killing term (x + y) * u.  In divergence form per direction,
    c = sigma^2/2 * x and d = c' - sigma^2/4 = sigma^2/4.
    """
    if mesh.dim != 2:
        raise ValueError("assemble_diffusion expects a 2D mesh")
    ax, ay = mesh.axes
    ops = []
    for axis, sig in ((ax, params.sigma_x), (ay, params.sigma_y)):
        c = 0.5 * sig * sig
        d = 0.25 * sig * sig
        ops.append(_directional_operator(axis, lambda x, c=c: c * x, lambda x, d=d: np.full_like(x, d)))
    ix = sparse.identity(ax.node_count, format="csr")
    iy = sparse.identity(ay.node_count, format="csr")
    killing = sparse.diags(np.add.outer(ax.nodes, ay.nodes).ravel())
    matrix = (sparse.kron(ops[0], iy) + sparse.kron(ix, ops[1]) - killing).tocsr()
    meta = {
        "terms": ("diffusion_x", "diffusion_y", "killing"),
        "sigma_x": params.sigma_x,
        "sigma_y": params.sigma_y,
    }
    return DiscreteOperator(matrix=matrix, mesh=mesh, meta=meta)


def assemble_diffusion_1d(mesh: SpectralMesh, sigma: float, with_killing: bool = False) -> DiscreteOperator:
    """1D generator 2*sigma^2*x*u_xx + sigma^2*u_x, optionally minus x*u.

    This is one coordinate's diffusion part after the substitution
    sigma -> sigma/2; it exists so the squared-Gaussian semigroup can serve
    as an exact propagation oracle in one dimension.
    """
    if mesh.dim != 1:
        raise ValueError("assemble_diffusion_1d expects a 1D mesh")
    axis = mesh.axes[0]
    s2 = sigma * sigma
    # c = 2*sigma^2*x, strong first-order coefficient sigma^2, so d = c' - sigma^2.
    matrix = _directional_operator(
        axis, lambda x: 2.0 * s2 * x, lambda x: np.full_like(x, s2)
    )
    if with_killing:
        matrix = (matrix - sparse.diags(axis.nodes)).tocsr()
    meta = {"terms": ("diffusion",) + (("killing",) if with_killing else ()), "sigma": sigma}
    return DiscreteOperator(matrix=matrix.tocsr(), mesh=mesh, meta=meta)
