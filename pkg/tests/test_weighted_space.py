import numpy as np
import pytest

from cirsplit.mesh import GridFunction, build_mesh, build_mesh_1d, sample
from cirsplit.weighted_space import (
    DegenerateRegionError,
    Region,
    WeightFunction,
    eval_weight,
    weighted_sup_norm,
)


def test_weight_at_origin_is_one():
    assert eval_weight(WeightFunction(6), (0.0, 0.0)) == 1.0


def test_weight_unit_point():
    # (1 + 1)^(6/2) = 8
    assert eval_weight(WeightFunction(6), (1.0, 0.0)) == pytest.approx(8.0, abs=0)


def test_weight_zero_exponent_is_identically_one():
    w = WeightFunction(0)
    for pt in [(0.0, 0.0), (3.0, 4.0), (100.0, 100.0)]:
        assert eval_weight(w, pt) == 1.0


def test_weight_radially_nondecreasing():
    w = WeightFunction(4)
    radii = np.linspace(0.0, 10.0, 50)
    vals = [eval_weight(w, (r, 0.0)) for r in radii]
    assert np.all(np.diff(vals) >= 0.0)
    assert all(v >= 1.0 for v in vals)


def test_weight_rejects_negative_exponent():
    with pytest.raises(ValueError):
        WeightFunction(-1)


@pytest.fixture(scope="module")
def mesh():
    return build_mesh(4.0, 4.0, 4, 3)


def test_norm_of_zero_function(mesh):
    u = GridFunction(mesh, np.zeros(mesh.node_count))
    assert weighted_sup_norm(u, WeightFunction(6)) == 0.0


def test_norm_of_constant_one(mesh):
    # psi >= 1 with equality at the origin node, so the norm is exactly 1.
    u = GridFunction(mesh, np.ones(mesh.node_count))
    assert weighted_sup_norm(u, WeightFunction(6)) == 1.0


def test_norm_of_weight_itself_is_one(mesh):
    w = WeightFunction(6)
    u = GridFunction(mesh, w.values(mesh.node_coords()))
    assert weighted_sup_norm(u, w) == pytest.approx(1.0, rel=1e-14)


def test_homogeneity(mesh):
    rng = np.random.default_rng(7)
    u = GridFunction(mesh, rng.standard_normal(mesh.node_count) + 1j * rng.standard_normal(mesh.node_count))
    w = WeightFunction(4)
    c = 2.5 - 1.25j
    scaled = GridFunction(mesh, c * u.values)
    assert weighted_sup_norm(scaled, w) == pytest.approx(abs(c) * weighted_sup_norm(u, w), rel=1e-13)


def test_triangle_inequality(mesh):
    rng = np.random.default_rng(8)
    w = WeightFunction(2)
    u = GridFunction(mesh, rng.standard_normal(mesh.node_count))
    v = GridFunction(mesh, rng.standard_normal(mesh.node_count))
    s = GridFunction(mesh, u.values + v.values)
    assert weighted_sup_norm(s, w) <= weighted_sup_norm(u, w) + weighted_sup_norm(v, w) + 1e-15


def test_region_monotonicity(mesh):
    rng = np.random.default_rng(9)
    u = GridFunction(mesh, rng.standard_normal(mesh.node_count))
    w = WeightFunction(6)
    small = weighted_sup_norm(u, w, Region.simplex(1.0))
    larger = weighted_sup_norm(u, w, Region.simplex(3.0))
    full = weighted_sup_norm(u, w, Region.full())
    assert small <= larger <= full


def test_refinement_never_decreases_norm():
    # Discrete sup over nodes is a lower bound of the continuum sup.
    w = WeightFunction(6)
    g = lambda x, y: np.sin(1.7 * x) * np.cos(0.9 * y)
    norms = []
    for elements in (2, 4, 8):
        mesh = build_mesh(4.0, 4.0, elements, 3)
        norms.append(weighted_sup_norm(sample(mesh, g), w))
    assert norms[0] <= norms[1] + 1e-15
    assert norms[1] <= norms[2] + 1e-15


def test_empty_region_raises(mesh):
    u = GridFunction(mesh, np.ones(mesh.node_count))
    with pytest.raises(DegenerateRegionError):
        weighted_sup_norm(u, WeightFunction(0), Region.box((100.0, 200.0), (100.0, 200.0)))


def test_region_masks(mesh):
    coords = mesh.node_coords()
    assert Region.full().mask(coords).all()
    simplex = Region.simplex(1.0).mask(coords)
    assert simplex.any() and not simplex.all()
    assert np.all(coords[simplex].sum(axis=1) <= 1.0 + 1e-9)
    box = Region.box((0.0, 2.0), (0.0, 2.0)).mask(coords)
    assert box.any()
    inside = coords[box]
    assert inside[:, 0].max() <= 2.0 + 1e-9


def test_norm_on_1d_mesh():
    mesh = build_mesh_1d(4.0, 4, 3)
    u = GridFunction(mesh, np.ones(mesh.node_count))
    assert weighted_sup_norm(u, WeightFunction(2)) == 1.0
