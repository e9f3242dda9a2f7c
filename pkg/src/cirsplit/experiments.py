"""Experiment harness: convergence, robustness and truncation studies.

Each run evolves the constant-one initial datum over [0, T] with a chosen
splitting scheme, compares against the closed-form bond price at every
node, and records weighted and regionwise errors plus the imaginary
residue of the complex iterate.  Results are written as flat CSV rows so
the plotting tool can consume them directly.
"""

from __future__ import annotations

import configparser
import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields as dataclass_fields
from typing import Optional

import numpy as np

from .analytics import (
    Cir2Params,
    bond_price_cir2,
    cir_semigroup_apply,
    cir_semigroup_quadrature,
    riccati_bond_price,
    squared_gaussian_moment_table,
)
from .diffusion import DiscreteOperator, assemble_diffusion, assemble_diffusion_1d
from .drift import AffineDrift, DriftPropagator, exact_flow
from .krylov import DiffusionPropagator, KrylovConfig, expmv
from .mesh import GridFunction, build_mesh, build_mesh_1d, sample
from .splitting import StageError, evolve, scheme_by_name
from .weighted_space import Region, WeightFunction, weighted_sup_norm

CSV_COLUMNS = (
    "experiment",
    "scheme",
    "epsilon",
    "cutoff",
    "n",
    "dt",
    "err_weighted",
    "err_pointwise_region",
    "im_residue",
    "wall_ms",
)


@dataclass(frozen=True)
class ConvergenceRecord:
    """One CSV row: context columns plus per-run error measurements."""

    experiment: str
    scheme: str
    epsilon: float
    cutoff: float
    n: int
    dt: float
    err_weighted: float
    err_pointwise_region: float
    im_residue: float
    wall_ms: float


@dataclass(frozen=True)
class ExperimentConfig:
    """Defaults reproduce the benchmark setup (eps = 1, T = 1, 4225 DOF)."""

    theta_x: float = 15.5
    mu_x: float = 0.025
    sigma_x_base: float = 0.2
    theta_y: float = 20.5
    mu_y: float = 0.025
    sigma_y_base: float = 0.3
    epsilon: float = 1.0
    horizon: float = 1.0
    cutoff_x: float = 16.0
    cutoff_y: float = 16.0
    elements: int = 16
    degree: int = 4
    scheme: str = "cdv4"
    n_list: tuple = (1, 2, 4, 8, 16, 32)
    krylov_m: int = 30
    krylov_shift: object = "auto"
    krylov_tolerance: float = 1e-10
    krylov_variant: str = "shift-and-invert"
    weight_exponent: int = 6
    region_cut: float = 1.0
    eps_values: tuple = (1.0, 0.125)
    truncation_cutoffs: tuple = (4.0, 8.0, 16.0, 32.0)
    truncation_n: int = 8
    workers: int = 1
    out: str = "results.csv"

    def __post_init__(self):
        if any(n < 1 for n in self.n_list) or list(self.n_list) != sorted(set(self.n_list)):
            raise ValueError("n_list must be strictly increasing positive integers")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        scheme_by_name(self.scheme)  # fail fast on unknown scheme names

    def params(self, epsilon: Optional[float] = None) -> Cir2Params:
        eps = self.epsilon if epsilon is None else float(epsilon)
        return Cir2Params(
            theta_x=self.theta_x,
            mu_x=self.mu_x,
            sigma_x=self.sigma_x_base * eps,
            theta_y=self.theta_y,
            mu_y=self.mu_y,
            sigma_y=self.sigma_y_base * eps,
            eps=eps,
            horizon=self.horizon,
        )

    def krylov(self) -> KrylovConfig:
        return KrylovConfig(
            m=self.krylov_m,
            shift=self.krylov_shift,
            tolerance=self.krylov_tolerance,
            variant=self.krylov_variant,
        )


@dataclass
class ConvergenceResult:
    records: list
    slope: Optional[float]
    failures: list = field(default_factory=list)  # (n, message) pairs


@dataclass
class RobustnessResult:
    results: dict  # epsilon -> ConvergenceResult
    ratios: list  # (n, err_other / err_first) across the epsilon pair


@dataclass
class TruncationResult:
    records: list
    element_width: float
    monotone_blowup: bool
    failures: list = field(default_factory=list)


def estimate_slope(ns, errors, points: int = 3) -> Optional[float]:
    """Least-squares order estimate from the last ``points`` (n, error) pairs.

    Returns the positive slope p of error ~ n^(-p), or None if fewer than
    two usable points exist.
    """
    pairs = [
        (n, e) for n, e in zip(ns, errors) if math.isfinite(e) and e > 0.0
    ]
    if len(pairs) < 2:
        return None
    tail = pairs[-points:]
    log_n = np.log([p[0] for p in tail])
    log_e = np.log([p[1] for p in tail])
    return float(-np.polyfit(log_n, log_e, 1)[0])


def _single_run(cfg: ExperimentConfig, *, experiment: str, epsilon: float,
                cutoff_x: float, cutoff_y: float, elements: int, n: int):
    """Evolve one (scheme, epsilon, cutoff, n) case and measure errors.

    Returns (record, failure_message).  Sub-solver failures produce a row
    with NaN error columns so the CSV shape stays fixed.
    """
    started = time.perf_counter()
    params = cfg.params(epsilon)
    scheme = scheme_by_name(cfg.scheme)
    try:
        mesh = build_mesh(cutoff_x, cutoff_y, elements, cfg.degree)
        op = assemble_diffusion(mesh, params)
        drift_prop = DriftPropagator(AffineDrift.from_params(params))
        diff_prop = DiffusionPropagator(op, cfg.krylov())
        u0 = sample(mesh, lambda x, y: np.ones_like(x, dtype=complex))
        result = evolve(scheme, drift_prop, diff_prop, u0, params.horizon, n)
        coords = mesh.node_coords()
        exact = bond_price_cir2(params, coords[:, 0], coords[:, 1])
        weight = WeightFunction(cfg.weight_exponent)
        err = GridFunction(mesh, result.u.values.real - exact)
        err_weighted = weighted_sup_norm(err, weight, Region.full())
        err_pointwise = weighted_sup_norm(err, WeightFunction(0), Region.simplex(cfg.region_cut))
        # The discarded imaginary part is part of the solution-space error, so
        # it is reported in the same weighted norm as the error itself.
        imag_part = GridFunction(mesh, np.asarray(result.u.values).imag)
        im_residue = weighted_sup_norm(imag_part, weight, Region.full())
        failure = None
    except (StageError, ValueError, RuntimeError) as exc:
        err_weighted = err_pointwise = im_residue = float("nan")
        failure = str(exc)
    wall_ms = (time.perf_counter() - started) * 1e3
    record = ConvergenceRecord(
        experiment=experiment,
        scheme=scheme.name,
        epsilon=float(epsilon),
        cutoff=float(cutoff_x),
        n=int(n),
        dt=params.horizon / n,
        err_weighted=err_weighted,
        err_pointwise_region=err_pointwise,
        im_residue=im_residue,
        wall_ms=wall_ms,
    )
    return record, failure


def _run_many(cfg: ExperimentConfig, cases: list) -> list:
    """Run independent cases, optionally on a thread pool; order preserved."""
    if cfg.workers == 1 or len(cases) == 1:
        return [_single_run(cfg, **case) for case in cases]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(_single_run, cfg, **case) for case in cases]
        return [f.result() for f in futures]


def run_convergence(cfg: ExperimentConfig, *, epsilon: Optional[float] = None,
                    experiment: str = "convergence") -> ConvergenceResult:
    """Error vs number of timesteps on the default mesh, plus a slope fit."""
    eps = cfg.epsilon if epsilon is None else epsilon
    cases = [
        dict(
            experiment=experiment,
            epsilon=eps,
            cutoff_x=cfg.cutoff_x,
            cutoff_y=cfg.cutoff_y,
            elements=cfg.elements,
            n=n,
        )
        for n in cfg.n_list
    ]
    outcomes = _run_many(cfg, cases)
    records = [rec for rec, _ in outcomes]
    failures = [(rec.n, msg) for rec, msg in outcomes if msg is not None]
    slope = estimate_slope([r.n for r in records], [r.err_weighted for r in records])
    return ConvergenceResult(records=records, slope=slope, failures=failures)


def run_robustness(cfg: ExperimentConfig) -> RobustnessResult:
    """Convergence runs for each diffusion scale, with per-n error ratios."""
    results = {
        eps: run_convergence(cfg, epsilon=eps, experiment="robustness")
        for eps in cfg.eps_values
    }
    base_eps = cfg.eps_values[0]
    base = {r.n: r.err_weighted for r in results[base_eps].records}
    ratios = []
    for eps in cfg.eps_values[1:]:
        for rec in results[eps].records:
            if rec.n in base and base[rec.n] > 0:
                ratios.append((rec.n, rec.err_weighted / base[rec.n]))
    return RobustnessResult(results=results, ratios=ratios)


def run_truncation(cfg: ExperimentConfig) -> TruncationResult:
    """Fixed element width, fixed n, growing cutoff; flags monotone blow-up."""
    width = cfg.cutoff_x / cfg.elements
    cases = []
    for cutoff in cfg.truncation_cutoffs:
        elements = round(cutoff / width)
        if not math.isclose(elements * width, cutoff, rel_tol=1e-9):
            raise ValueError(
                f"cutoff {cutoff} is not a multiple of the element width {width}"
            )
        cases.append(
            dict(
                experiment="truncation",
                epsilon=cfg.epsilon,
                cutoff_x=float(cutoff),
                cutoff_y=float(cutoff),
                elements=elements,
                n=cfg.truncation_n,
            )
        )
    outcomes = _run_many(cfg, cases)
    records = [rec for rec, _ in outcomes]
    failures = [(rec.cutoff, msg) for rec, msg in outcomes if msg is not None]
    errs = [r.err_weighted for r in records if math.isfinite(r.err_weighted)]
    blowup = (
        len(errs) == len(records)
        and len(errs) >= 2
        and all(b > a for a, b in zip(errs, errs[1:]))
        and errs[-1] > 2.0 * errs[0]
    )
    return TruncationResult(
        records=records, element_width=width, monotone_blowup=blowup, failures=failures
    )


def emit_csv(records, path) -> None:
    """Write records with the fixed column set; floats use repr round-trip."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.experiment,
                    rec.scheme,
                    repr(rec.epsilon),
                    repr(rec.cutoff),
                    rec.n,
                    repr(rec.dt),
                    repr(rec.err_weighted),
                    repr(rec.err_pointwise_region),
                    repr(rec.im_residue),
                    repr(rec.wall_ms),
                ]
            )


def read_csv(path) -> list:
    """Parse a results CSV back into records (exact float round trip)."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for row in reader:
            records.append(
                ConvergenceRecord(
                    experiment=row["experiment"],
                    scheme=row["scheme"],
                    epsilon=float(row["epsilon"]),
                    cutoff=float(row["cutoff"]),
                    n=int(row["n"]),
                    dt=float(row["dt"]),
                    err_weighted=float(row["err_weighted"]),
                    err_pointwise_region=float(row["err_pointwise_region"]),
                    im_residue=float(row["im_residue"]),
                    wall_ms=float(row["wall_ms"]),
                )
            )
    return records


# -- configuration files ----------------------------------------------------

_CONFIG_SCHEMA = {
    ("model", "theta_x"): ("theta_x", float),
    ("model", "mu_x"): ("mu_x", float),
    ("model", "sigma_x"): ("sigma_x_base", float),
    ("model", "theta_y"): ("theta_y", float),
    ("model", "mu_y"): ("mu_y", float),
    ("model", "sigma_y"): ("sigma_y_base", float),
    ("model", "epsilon"): ("epsilon", float),
    ("model", "horizon"): ("horizon", float),
    ("mesh", "cutoff_x"): ("cutoff_x", float),
    ("mesh", "cutoff_y"): ("cutoff_y", float),
    ("mesh", "elements"): ("elements", int),
    ("mesh", "degree"): ("degree", int),
    ("run", "scheme"): ("scheme", str),
    ("run", "n_list"): ("n_list", lambda s: tuple(int(v) for v in s.split(","))),
    ("run", "workers"): ("workers", int),
    ("krylov", "dimension"): ("krylov_m", int),
    ("krylov", "shift"): ("krylov_shift", lambda s: s if s == "auto" else float(s)),
    ("krylov", "tolerance"): ("krylov_tolerance", float),
    ("krylov", "variant"): ("krylov_variant", str),
    ("norm", "weight_exponent"): ("weight_exponent", int),
    ("norm", "region_cut"): ("region_cut", float),
    ("robustness", "eps_values"): ("eps_values", lambda s: tuple(float(v) for v in s.split(","))),
    ("truncation", "cutoffs"): ("truncation_cutoffs", lambda s: tuple(float(v) for v in s.split(","))),
    ("truncation", "n"): ("truncation_n", int),
    ("output", "path"): ("out", str),
}


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Build a config from an INI-style file plus keyword overrides."""
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
        known = {}
        for (section, key), (attr, conv) in _CONFIG_SCHEMA.items():
            known.setdefault(section, set()).add(key)
            if parser.has_option(section, key):
                values[attr] = conv(parser.get(section, key))
        for section in parser.sections():
            for key in parser.options(section):
                if key not in known.get(section, set()):
                    raise ValueError(f"unknown config entry [{section}] {key}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    valid = {f.name for f in dataclass_fields(ExperimentConfig)}
    unknown = set(values) - valid
    if unknown:
        raise ValueError(f"unknown config overrides: {sorted(unknown)}")
    return ExperimentConfig(**values)


# -- oracle self-test ---------------------------------------------------------

def _check_bond_oracles():
    worst = 0.0
    for eps in (1.0, 0.5, 0.125):
        for horizon in (0.25, 1.0):
            params = Cir2Params.benchmark(eps=eps, horizon=horizon)
            for x0, y0 in ((0.0, 0.0), (0.025, 0.025), (0.5, 1.5), (2.0, 0.1)):
                a = bond_price_cir2(params, x0, y0)
                b = riccati_bond_price(params, x0, y0)
                worst = max(worst, abs(a - b) / abs(b))
    return worst <= 1e-9, f"max relative closed-form vs Riccati gap {worst:.3e}"


def _check_bond_zero_sigma():
    params = Cir2Params(
        theta_x=15.5, mu_x=0.025, sigma_x=0.0,
        theta_y=20.5, mu_y=0.025, sigma_y=0.0,
        eps=0.0, horizon=1.0,
    )
    a = bond_price_cir2(params, 0.1, 0.2)
    b = riccati_bond_price(params, 0.1, 0.2)
    gap = abs(a - b) / abs(b)
    return gap <= 1e-10, f"sigma=0 limit gap {gap:.3e}"


def _check_semigroup_law():
    coeffs = np.array([0.3, -1.2, 0.7, 0.05])
    sigma = 0.4
    t1, t2 = 0.3 + 0.2j, 0.5 - 0.1j
    once = cir_semigroup_apply(sigma, t1 + t2, coeffs)
    twice = cir_semigroup_apply(sigma, t1, cir_semigroup_apply(sigma, t2, coeffs))
    gap = float(np.max(np.abs(once - twice)))
    return gap <= 1e-12, f"semigroup law residual {gap:.3e}"


def _check_moment_pde():
    # d/dt of the moment expansion must match (2 s^2 x d^2 + s^2 d) applied
    # to it: r*c[q, r] == (q+1)*(2q+1)*c[q+1, r-1], an integer identity.
    for n in range(0, 7):
        table = {(xp, tp): c for xp, tp, c in squared_gaussian_moment_table(n)}
        for (q, r), c in table.items():
            if r == 0:
                continue
            rhs = (q + 1) * (2 * q + 1) * table.get((q + 1, r - 1), 0)
            if r * c != rhs:
                return False, f"PDE identity fails at degree {n}, term x^{q} t^{r}"
    return True, "exact for monomial degrees 0..6"


def _check_quadrature_vs_moments():
    sigma, t, x = 0.3, 0.7, 1.3
    worst = 0.0
    for deg in range(5):
        coeffs = np.zeros(deg + 1)
        coeffs[deg] = 1.0
        exact_coeffs = cir_semigroup_apply(sigma, t, coeffs)
        exact = float(np.polyval(exact_coeffs[::-1], x))
        quad = cir_semigroup_quadrature(sigma, t, lambda s, deg=deg: s**deg, x)
        worst = max(worst, abs(quad - exact) / max(1.0, abs(exact)))
    return worst <= 1e-12, f"max quadrature vs moment gap {worst:.3e}"


def _dense_test_operator(size=50, seed=1234):
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((size, size))
    dense = raw - (np.max(np.linalg.eigvals(raw).real) + 0.5) * np.eye(size)
    from scipy import sparse as sp

    return DiscreteOperator(matrix=sp.csr_matrix(dense), mesh=None), dense


def _check_expmv_oracle():
    op, dense = _dense_test_operator()
    rng = np.random.default_rng(99)
    v = rng.standard_normal(dense.shape[0])
    tau = 0.1 - 0.03j
    approx = expmv(op, v, tau, KrylovConfig(m=50, tolerance=1e-10))
    lam, vecs = np.linalg.eig(dense)
    exact = vecs @ (np.exp(tau * lam) * np.linalg.solve(vecs, v.astype(complex)))
    gap = float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
    return gap <= 1e-8, f"expmv vs eigendecomposition gap {gap:.3e}"


def _check_drift_flow():
    from scipy.integrate import solve_ivp

    drift = AffineDrift(a=(0.3775, 0.49), b=(15.5, 20.5))
    x0 = np.array([1.0, 0.3])
    t = 0.1
    ours = exact_flow(drift, x0, t)
    sol = solve_ivp(
        lambda _t, x: np.array(drift.a) - np.array(drift.b) * x,
        (0.0, t),
        x0,
        method="DOP853",
        rtol=1e-13,
        atol=1e-15,
    )
    gap = float(np.max(np.abs(ours - sol.y[:, -1])))
    return gap <= 1e-12, f"flow vs adaptive ODE gap {gap:.3e}"


def _check_1d_propagation():
    sigma, t = 0.25, 0.4
    mesh = build_mesh_1d(16.0, 32, 4)
    op = assemble_diffusion_1d(mesh, sigma)
    cfg = KrylovConfig(m=40, tolerance=1e-12)
    xs = mesh.node_coords()[:, 0]
    inner = xs <= 6.0
    worst = 0.0
    for deg in range(4):
        u0 = xs**deg
        num = expmv(op, u0.astype(complex), t, cfg)
        coeffs = np.zeros(deg + 1)
        coeffs[deg] = 1.0
        exact = np.polyval(cir_semigroup_apply(sigma, t, coeffs)[::-1], xs)
        rel = float(np.max(np.abs(num[inner] - exact[inner])) / np.max(np.abs(exact[inner])))
        worst = max(worst, rel)
    return worst <= 1e-6, f"max relative monomial propagation error {worst:.3e}"


SELFTEST_CHECKS = (
    ("bond closed form vs Riccati", _check_bond_oracles),
    ("bond sigma->0 limit", _check_bond_zero_sigma),
    ("squared-Gaussian semigroup law", _check_semigroup_law),
    ("moment-table PDE identity", _check_moment_pde),
    ("quadrature vs moment formula", _check_quadrature_vs_moments),
    ("expmv vs dense eigendecomposition", _check_expmv_oracle),
    ("drift flow vs adaptive ODE", _check_drift_flow),
    ("1D diffusion of monomials", _check_1d_propagation),
)


def run_selftest():
    """Run all oracle cross-checks; returns (name, passed, detail) triples."""
    results = []
    for name, check in SELFTEST_CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
