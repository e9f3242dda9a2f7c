import numpy as np
import pytest
from scipy.integrate import solve_ivp

from cirsplit.analytics import Cir2Params
from cirsplit.drift import AffineDrift, DriftPropagator, exact_flow, transport
from cirsplit.mesh import GridFunction, OutOfDomainError, build_mesh, build_mesh_1d, sample


@pytest.fixture(scope="module")
def cir_drift():
    return AffineDrift.from_params(Cir2Params.benchmark())


def test_from_params_coefficients(cir_drift):
    # a_x = 15.5 * 0.025 - 0.2^2 / 4 = 0.3775, b_x = theta_x
    assert cir_drift.a[0] == pytest.approx(0.3775, abs=1e-15)
    assert cir_drift.b == (15.5, 20.5)


def test_negative_a_rejected():
    with pytest.raises(ValueError):
        AffineDrift(a=(-0.1,), b=(1.0,))


def test_flow_identity_at_zero_time(cir_drift):
    x = np.array([1.0, 2.0])
    assert np.array_equal(exact_flow(cir_drift, x, 0.0), x)


def test_flow_fixed_point(cir_drift):
    fixed = np.array([cir_drift.a[0] / cir_drift.b[0], cir_drift.a[1] / cir_drift.b[1]])
    for t in (0.01, 0.5, 3.0):
        assert exact_flow(cir_drift, fixed, t) == pytest.approx(fixed, rel=1e-14)


def test_flow_matches_adaptive_ode_oracle(cir_drift):
    # independent high-accuracy integration of dx/dt = a - b x
    x0 = np.array([1.0, 1.0])
    t = 0.1
    sol = solve_ivp(
        lambda _t, x: np.array(cir_drift.a) - np.array(cir_drift.b) * x,
        (0.0, t),
        x0,
        method="DOP853",
        rtol=1e-13,
        atol=1e-15,
    )
    ours = exact_flow(cir_drift, x0, t)
    assert np.max(np.abs(ours - sol.y[:, -1])) <= 1e-12


def test_flow_zero_decay_rate_limit():
    drift = AffineDrift(a=(0.5,), b=(0.0,))
    assert exact_flow(drift, np.array([1.0]), 2.0)[0] == pytest.approx(2.0, abs=0)


def test_flow_small_bt_stability():
    # expm1 evaluation stays accurate when b*t is tiny
    a, b, x, t = 0.3, 1e-9, 1.0, 1e-3
    drift = AffineDrift(a=(a,), b=(b,))
    got = exact_flow(drift, np.array([x]), t)[0]
    expected = x * (1.0 - b * t) + a * t  # first-order expansion, error O((bt)^2)
    assert got == pytest.approx(expected, abs=1e-15)


def test_flow_domain_invariance(cir_drift):
    # a >= 0 and X >= a/b: [0, X] is mapped into itself for all t
    xs = np.linspace(0.0, 16.0, 33)
    for t in (0.01, 0.25, 1.0, 10.0):
        pts = np.column_stack([xs, xs])
        mapped = exact_flow(cir_drift, pts, t)
        assert mapped.min() >= 0.0
        assert mapped.max() <= 16.0


def test_transport_zero_time_is_identity(cir_drift):
    mesh = build_mesh(16.0, 16.0, 4, 3)
    rng = np.random.default_rng(11)
    u = GridFunction(mesh, rng.standard_normal(mesh.node_count))
    out = transport(u, cir_drift, 0.0)
    assert np.array_equal(out.values, u.values)
    assert out is not u


def test_transport_preserves_constants(cir_drift):
    mesh = build_mesh(16.0, 16.0, 4, 3)
    u = sample(mesh, lambda x, y: np.full_like(x, 3.25))
    out = transport(u, cir_drift, 0.37)
    assert np.max(np.abs(out.values - 3.25)) <= 1e-12
    # max-norm exactly preserved on constants
    assert np.max(np.abs(out.values)) == pytest.approx(3.25, rel=1e-14)


def test_transport_of_identity_function_1d():
    # transporting f(x) = x gives f(flow(x)) = flow(x), a closed form
    drift = AffineDrift(a=(0.3775,), b=(15.5,))
    mesh = build_mesh_1d(16.0, 8, 4)
    u = sample(mesh, lambda x: x)
    t = 0.21
    out = transport(u, drift, t)
    expected = exact_flow(drift, mesh.node_coords(), t)[:, 0]
    assert np.max(np.abs(out.values - expected)) <= 1e-11


def test_transport_semigroup_on_polynomial_data(cir_drift):
    # affine flow preserves polynomial degree, so composition is exact
    mesh = build_mesh(16.0, 16.0, 8, 4)
    u = sample(mesh, lambda x, y: 1.0 + x + 0.5 * y + 0.25 * x * y + 0.1 * x**2)
    t1, t2 = 0.13, 0.09
    two_steps = transport(transport(u, cir_drift, t1), cir_drift, t2)
    one_step = transport(u, cir_drift, t1 + t2)
    assert np.max(np.abs(two_steps.values - one_step.values)) <= 1e-10


def test_transport_rejects_complex_and_negative_time(cir_drift):
    mesh = build_mesh(16.0, 16.0, 2, 2)
    u = sample(mesh, lambda x, y: x)
    with pytest.raises(ValueError, match="real"):
        transport(u, cir_drift, 0.1 + 0.05j)
    with pytest.raises(ValueError, match="nonnegative"):
        transport(u, cir_drift, -0.1)
    # complex with zero imaginary part degrades gracefully to the real time
    out = transport(u, cir_drift, complex(0.1, 0.0))
    assert np.iscomplexobj(out.values) or out.values.dtype == float


def test_transport_flags_domain_escape():
    # flow pushed toward larger x than the box can hold
    drift = AffineDrift(a=(5.0,), b=(0.0,))
    mesh = build_mesh_1d(1.0, 2, 2)
    u = sample(mesh, lambda x: x)
    with pytest.raises(OutOfDomainError):
        transport(u, drift, 1.0)


def test_drift_propagator_flags():
    prop = DriftPropagator(AffineDrift(a=(0.1,), b=(1.0,)))
    assert prop.real_time_only is True


def test_transport_complex_values(cir_drift):
    mesh = build_mesh(16.0, 16.0, 4, 3)
    u = sample(mesh, lambda x, y: np.exp(-(x + y)) * (1.0 + 0.5j))
    out = transport(u, cir_drift, 0.1)
    assert np.iscomplexobj(out.values)
    # interpolation weights are real, so re/im transport independently
    re_only = transport(GridFunction(mesh, u.values.real), cir_drift, 0.1)
    assert np.max(np.abs(out.values.real - re_only.values)) <= 1e-14
