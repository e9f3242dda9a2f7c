"""Tensor-product spectral-element meshes and high-order nodal interpolation.

A mesh is a uniform partition of [0, X] (per direction) into E elements,
each carrying degree-p Gauss-Lobatto-Legendre (GLL) nodes.  Element
endpoints are shared, giving E*p + 1 nodes per direction.  Interpolation
uses the second barycentric formula per containing element, which is
stable at the moderate degrees used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import sparse


class OutOfDomainError(ValueError):
    """Raised when a point lies outside the mesh domain beyond tolerance."""


def gauss_lobatto_legendre(degree: int):
    """GLL nodes and quadrature weights on [-1, 1] for a given degree.

    Nodes are the endpoints plus the roots of P'_p; weights are
    2 / (p*(p+1)*P_p(x)^2).  The rule is exact for polynomials of degree
    up to 2p - 1.
    """
    p = int(degree)
    if p < 1:
        raise ValueError("degree must be >= 1")
    if p == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    series = np.zeros(p + 1)
    series[p] = 1.0
    interior = np.sort(npleg.legroots(npleg.legder(series)).real)
    nodes = np.concatenate(([-1.0], interior, [1.0]))
    weights = 2.0 / (p * (p + 1) * npleg.legval(nodes, series) ** 2)
    return nodes, weights


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = np.subtract.outer(nodes, nodes)
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def _differentiation_matrix(nodes: np.ndarray, bary: np.ndarray) -> np.ndarray:
    # Barycentric form with negative-sum diagonal; rows sum to zero exactly.
    diff = np.subtract.outer(nodes, nodes)
    np.fill_diagonal(diff, 1.0)
    d = np.divide.outer(bary, bary).T / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


@dataclass(eq=False)
class Axis:
    """One mesh direction: element layout, global nodes and GLL weights."""

    length: float
    elements: int
    degree: int
    boundaries: np.ndarray  # elements + 1 uniform element boundaries
    nodes: np.ndarray  # elements*degree + 1 strictly increasing nodes
    weights: np.ndarray  # positive, sums to length
    ref_nodes: np.ndarray
    ref_weights: np.ndarray
    ref_bary: np.ndarray
    ref_diff: np.ndarray

    @property
    def node_count(self) -> int:
        return self.elements * self.degree + 1

    @property
    def element_width(self) -> float:
        return self.length / self.elements

    def element_slice(self, e: int) -> slice:
        return slice(e * self.degree, (e + 1) * self.degree + 1)


def _build_axis(length: float, elements: int, degree: int) -> Axis:
    if length <= 0.0:
        raise ValueError("axis length must be positive")
    if elements < 1 or degree < 1:
        raise ValueError("need at least one element of degree >= 1")
    ref_nodes, ref_weights = gauss_lobatto_legendre(degree)
    bary = _barycentric_weights(ref_nodes)
    dmat = _differentiation_matrix(ref_nodes, bary)
    boundaries = np.linspace(0.0, length, elements + 1)
    half = 0.5 * length / elements
    nodes = np.empty(elements * degree + 1)
    weights = np.zeros(elements * degree + 1)
    nodes[0] = boundaries[0]
    for e in range(elements):
        sl = slice(e * degree, (e + 1) * degree + 1)
        mapped = boundaries[e] + (ref_nodes + 1.0) * half
        mapped[0] = boundaries[e]  # shared endpoints taken verbatim
        mapped[-1] = boundaries[e + 1]
        nodes[sl] = mapped
        weights[sl] += ref_weights * half
    return Axis(
        length=float(length),
        elements=int(elements),
        degree=int(degree),
        boundaries=boundaries,
        nodes=nodes,
        weights=weights,
        ref_nodes=ref_nodes,
        ref_weights=ref_weights,
        ref_bary=bary,
        ref_diff=dmat,
    )


class SpectralMesh:
    """Tensor-product GLL mesh on [0, X] (1D) or [0, X] x [0, Y] (2D)."""

    def __init__(self, axes):
        axes = tuple(axes)
        if len(axes) not in (1, 2):
            raise ValueError("only 1D and 2D meshes are supported")
        self.axes = axes
        self._coords = None

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(ax.node_count for ax in self.axes)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    def node_coords(self) -> np.ndarray:
        """(node_count, dim) coordinates in lexicographic order (x major)."""
        if self._coords is None:
            if self.dim == 1:
                self._coords = self.axes[0].nodes[:, None].copy()
            else:
                gx, gy = np.meshgrid(self.axes[0].nodes, self.axes[1].nodes, indexing="ij")
                self._coords = np.column_stack([gx.ravel(), gy.ravel()])
        return self._coords


def build_mesh(x_length: float, y_length: float, elements: int, degree: int) -> SpectralMesh:
    """Uniform 2D spectral-element mesh with the same element count per direction."""
    return SpectralMesh((_build_axis(x_length, elements, degree), _build_axis(y_length, elements, degree)))


def build_mesh_1d(length: float, elements: int, degree: int) -> SpectralMesh:
    return SpectralMesh((_build_axis(length, elements, degree),))


@dataclass(eq=False)
class GridFunction:
    """Nodal coefficient vector on a SpectralMesh, lexicographic node order."""

    mesh: SpectralMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.mesh.node_count,):
            raise ValueError(
                f"expected {self.mesh.node_count} nodal values, got shape {self.values.shape}"
            )

    @property
    def grid(self) -> np.ndarray:
        """Values reshaped to the tensor node layout (view)."""
        return self.values.reshape(self.mesh.shape)

    def copy(self) -> "GridFunction":
        return GridFunction(self.mesh, self.values.copy())


def sample(mesh: SpectralMesh, fn) -> GridFunction:
    """Evaluate a scalar field at every node.

    ``fn`` receives one flat coordinate array per dimension and may return
    either an array of matching shape or a scalar.
    """
    coords = mesh.node_coords()
    vals = np.asarray(fn(*(coords[:, d] for d in range(mesh.dim))))
    if vals.ndim == 0:
        vals = np.full(mesh.node_count, complex(vals) if np.iscomplexobj(vals) else float(vals))
    finite = np.isfinite(np.abs(vals))
    if not np.all(finite):
        idx = int(np.flatnonzero(~finite)[0])
        raise ValueError(f"non-finite sample at node {idx}, coords {tuple(coords[idx])}")
    return GridFunction(mesh, vals)


def _locate(axis: Axis, x: float) -> tuple[int, float]:
    """Containing element and clamped coordinate for a 1D point."""
    tol = 1e-12 * (1.0 + axis.length)
    if x < -tol or x > axis.length + tol:
        raise OutOfDomainError(f"coordinate {x!r} outside [0, {axis.length}]")
    x = min(max(x, 0.0), axis.length)
    e = min(int(x / axis.element_width), axis.elements - 1)
    # Guard against float rounding at element boundaries.
    while e > 0 and x < axis.boundaries[e]:
        e -= 1
    while e < axis.elements - 1 and x > axis.boundaries[e + 1]:
        e += 1
    return e, x


def _cardinal_row(axis: Axis, x: float) -> tuple[int, np.ndarray]:
    """Barycentric Lagrange evaluation weights of all element nodes at x."""
    e, x = _locate(axis, x)
    xi = 2.0 * (x - axis.boundaries[e]) / axis.element_width - 1.0
    dist = xi - axis.ref_nodes
    hit = np.abs(dist) < 1e-14
    if np.any(hit):
        row = np.zeros_like(axis.ref_nodes)
        row[np.argmax(hit)] = 1.0
        return e, row
    row = axis.ref_bary / dist
    return e, row / row.sum()


def interpolate(u: GridFunction, point):
    """Piecewise tensor-polynomial interpolant of ``u`` at a point.

    Exactly reproduces nodal values at nodes and any tensor polynomial of
    per-direction degree <= p up to roundoff.
    """
    mesh = u.mesh
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.shape != (mesh.dim,):
        raise ValueError(f"expected a point with {mesh.dim} coordinates")
    rows = []
    for ax, coord in zip(mesh.axes, point):
        rows.append(_cardinal_row(ax, float(coord)))
    if mesh.dim == 1:
        e, wx = rows[0]
        return complex(wx @ u.values[mesh.axes[0].element_slice(e)])
    (ex, wx), (ey, wy) = rows
    block = u.grid[mesh.axes[0].element_slice(ex), mesh.axes[1].element_slice(ey)]
    return complex(wx @ block @ wy)


def interpolation_matrix_1d(axis: Axis, targets: np.ndarray) -> sparse.csr_matrix:
    """Sparse matrix taking nodal values to interpolant values at targets."""
    targets = np.asarray(targets, dtype=float)
    data, rows, cols = [], [], []
    width = axis.degree + 1
    for i, x in enumerate(targets):
        e, w = _cardinal_row(axis, float(x))
        rows.extend([i] * width)
        cols.extend(range(e * axis.degree, e * axis.degree + width))
        data.extend(w)
    return sparse.csr_matrix(
        (data, (rows, cols)), shape=(len(targets), axis.node_count)
    )


def write_nodal_csv(u: GridFunction, path) -> None:
    """Dump a 2D GridFunction as CSV with columns x,y,re,im (node order)."""
    if u.mesh.dim != 2:
        raise ValueError("CSV export is defined for 2D grid functions")
    coords = u.mesh.node_coords()
    vals = np.asarray(u.values, dtype=complex)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,re,im\n")
        for (x, y), v in zip(coords, vals):
            fh.write(f"{float(x)!r},{float(y)!r},{float(v.real)!r},{float(v.imag)!r}\n")
