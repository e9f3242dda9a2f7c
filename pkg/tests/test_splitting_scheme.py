from fractions import Fraction

import numpy as np
import pytest

from cirsplit.splitting import (
    InvalidSchemeError,
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
from conftest import DiagonalPropagator, FailingPropagator, IdentityPropagator


def test_fourth_order_coefficients():
    sch = cdv_fourth_order()
    assert sch.stages == 5
    assert sch.formal_order == 4
    assert sch.alphas[0] == 0
    assert all(a == Fraction(1, 4) for a in sch.alphas[1:])
    assert sch.betas[2] == (Fraction(4, 15), Fraction(-1, 5))
    assert sch.betas[0] == sch.betas[4] == (Fraction(1, 10), Fraction(-1, 30))
    assert sch.betas[1] == sch.betas[3] == (Fraction(4, 15), Fraction(2, 15))


def test_fourth_order_sums_exact():
    sch = cdv_fourth_order()
    assert sum(sch.alphas, Fraction(0)) == 1
    assert sum((re for re, _ in sch.betas), Fraction(0)) == 1
    assert sum((im for _, im in sch.betas), Fraction(0)) == 0
    assert all(re >= 0 for re, _ in sch.betas)
    assert validate(sch) == []


def test_first_and_second_order_schemes_validate():
    lie = lie_trotter()
    assert lie.stages == 1 and lie.formal_order == 1
    assert validate(lie) == []
    st = strang()
    assert st.stages == 2 and st.formal_order == 2
    assert validate(st) == []
    assert not st.uses_complex_times
    assert cdv_fourth_order().uses_complex_times


def test_scheme_lookup():
    assert scheme_by_name("CDV4").name == "cdv4"
    assert scheme_by_name("lie_trotter").name == "lie"
    with pytest.raises(ValueError, match="unknown scheme"):
        scheme_by_name("rk4")


def test_validate_reports_negative_real_part():
    sch = SplittingScheme(
        name="bad",
        alphas=(Fraction(1, 2), Fraction(1, 2)),
        betas=((Fraction(1), Fraction(1)), (Fraction(0), Fraction(-1))),
        formal_order=1,
    )
    report = validate(sch)
    assert report == []  # Re beta = (1, 0) is fine, sums are 1

    sch = SplittingScheme(
        name="bad",
        alphas=(Fraction(1, 2), Fraction(1, 2)),
        betas=((Fraction(1), Fraction(1)), (Fraction(-1), Fraction(-1))),
        formal_order=1,
    )
    report = validate(sch)
    assert any("Re beta_2 < 0" in v for v in report)


def test_validate_reports_bad_sums_and_lengths():
    sch = SplittingScheme(
        name="bad",
        alphas=(Fraction(1, 2), Fraction(2, 5)),
        betas=((Fraction(1), Fraction(0)), (Fraction(0), Fraction(0))),
        formal_order=1,
    )
    assert any("sum(alpha)" in v for v in validate(sch))
    sch = SplittingScheme(
        name="bad",
        alphas=(Fraction(1),),
        betas=((Fraction(1), Fraction(0)), (Fraction(0), Fraction(0))),
        formal_order=1,
    )
    assert any("len(" in v for v in validate(sch))


def test_compose_rejects_invalid_scheme(ones):
    sch = SplittingScheme(
        name="bad", alphas=(Fraction(1, 2),), betas=((Fraction(1), Fraction(0)),), formal_order=1
    )
    with pytest.raises(InvalidSchemeError):
        compose_step(sch, IdentityPropagator(), IdentityPropagator(), ones, 0.1)


def test_zero_dt_is_identity(ones):
    out = compose_step(cdv_fourth_order(), FailingPropagator(), FailingPropagator(), ones, 0.0)
    assert np.array_equal(out.values, ones.values)


def test_identity_propagators_leave_input_unchanged(ones):
    out = compose_step(cdv_fourth_order(), IdentityPropagator(), IdentityPropagator(), ones, 0.7)
    assert np.array_equal(out.values, ones.values)


def test_lie_on_commuting_diagonal_parts(ones, tiny_mesh):
    rng = np.random.default_rng(3)
    a = rng.standard_normal(tiny_mesh.node_count) * 0.5
    b = rng.standard_normal(tiny_mesh.node_count) * 0.5
    dt = 0.37
    out = compose_step(lie_trotter(), DiagonalPropagator(a), DiagonalPropagator(b), ones, dt)
    expected = np.exp((a + b) * dt)
    assert np.max(np.abs(out.values - expected)) <= 1e-14


def test_strang_exact_on_commuting_killing(ones, tiny_mesh):
    # pure killing split: both parts diagonal multipliers, so any consistent
    # scheme reproduces the exact flow
    coords = tiny_mesh.node_coords()
    killing = -(coords[:, 0] + coords[:, 1])
    half = 0.5 * killing
    out = compose_step(strang(), DiagonalPropagator(half), DiagonalPropagator(half), ones, 0.9)
    expected = np.exp(killing * 0.9)
    assert np.max(np.abs(out.values - expected)) <= 1e-14


def test_strang_works_with_real_time_only_diffusion(ones, tiny_mesh):
    # Im beta = 0 throughout, so a real-time-only propagator is acceptable;
    # both parts integrate a full dt in total, hence exp(-0.3 * 2 * dt).
    part = DiagonalPropagator(np.full(tiny_mesh.node_count, -0.3), real_time_only=True)
    out = compose_step(strang(), part, part, ones, 0.5)
    assert np.max(np.abs(out.values - np.exp(-0.3 * 1.0))) <= 1e-14


def test_complex_stage_rejected_by_real_time_only_propagator(ones, tiny_mesh):
    part = DiagonalPropagator(np.full(tiny_mesh.node_count, -0.3))
    real_only = DiagonalPropagator(np.full(tiny_mesh.node_count, -0.3), real_time_only=True)
    with pytest.raises(StageError, match="real times only"):
        compose_step(cdv_fourth_order(), part, real_only, ones, 0.5)


def test_stage_index_attached_to_failures(ones):
    with pytest.raises(StageError, match=r"stage 5 \(diffusion\)") as err:
        compose_step(cdv_fourth_order(), IdentityPropagator(), FailingPropagator(), ones, 0.5)
    assert err.value.stage == 5


def test_evolve_single_step_equals_compose(ones, tiny_mesh):
    rng = np.random.default_rng(4)
    a = rng.standard_normal(tiny_mesh.node_count) * 0.2
    b = rng.standard_normal(tiny_mesh.node_count) * 0.2
    p0, p1 = DiagonalPropagator(a), DiagonalPropagator(b)
    res = evolve(cdv_fourth_order(), p0, p1, ones, 0.8, 1)
    ref = compose_step(cdv_fourth_order(), p0, p1, ones, 0.8)
    assert np.array_equal(res.u.values, ref.values)
    assert len(res.diagnostics) == 1


def test_evolve_commuting_diagonal_exact_for_any_n(ones, tiny_mesh):
    rng = np.random.default_rng(5)
    a = rng.standard_normal(tiny_mesh.node_count) * 0.4
    b = rng.standard_normal(tiny_mesh.node_count) * 0.4
    expected = np.exp(a + b)  # horizon 1
    for n in (1, 3, 8):
        res = evolve(cdv_fourth_order(), DiagonalPropagator(a), DiagonalPropagator(b), ones, 1.0, n)
        assert np.max(np.abs(res.u.values - expected)) <= 5e-13, n


def test_evolve_diagnostics_track_imaginary_part(ones, tiny_mesh):
    rates = np.full(tiny_mesh.node_count, -0.5)
    res = evolve(cdv_fourth_order(), DiagonalPropagator(rates), DiagonalPropagator(rates), ones, 1.0, 4)
    assert len(res.diagnostics) == 4
    assert all(d.max_abs_imag >= 0.0 for d in res.diagnostics)
    assert res.max_abs_imag == res.diagnostics[-1].max_abs_imag


def test_evolve_rejects_bad_arguments(ones):
    p = IdentityPropagator()
    with pytest.raises(ValueError):
        evolve(lie_trotter(), p, p, ones, 1.0, 0)
    with pytest.raises(ValueError):
        evolve(lie_trotter(), p, p, ones, -1.0, 2)
    with pytest.raises(ValueError):
        compose_step(lie_trotter(), p, p, ones, -0.5)
