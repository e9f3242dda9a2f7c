"""Splitting schemes with real drift stages and complex diffusion stages.

A scheme is a stage list (alpha_k, beta_k), k = 1..s.  One timestep of
size dt composes the two sub-propagators as the operator product

    Q_dt = D(alpha_1*dt) S(beta_1*dt) ... D(alpha_s*dt) S(beta_s*dt),

applied right to left: the stage-s diffusion acts first.  alpha_k are
nonnegative reals (the drift flow only exists forward in time); beta_k may
be complex with nonnegative real part, which is what lifts the classical
order-2 barrier for splittings of parabolic problems.

Coefficients are stored as exact rationals so the consistency conditions
sum(alpha) = sum(beta) = 1 can be checked with zero tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class InvalidSchemeError(ValueError):
    """Raised when composing with a scheme that fails validation."""


class StageError(RuntimeError):
    """Sub-solver failure, annotated with the (1-based) stage index."""

    def __init__(self, stage: int, part: str, message: str):
        super().__init__(f"stage {stage} ({part}): {message}")
        self.stage = stage
        self.part = part


class Propagator:
    """One split flow: maps (grid function, stage time) to a grid function.

    ``real_time_only`` marks propagators defined only for nonnegative real
    stage times (the drift transport).  tau = 0 must act as the identity.
    """

    real_time_only = False

    def apply(self, u, tau):
        raise NotImplementedError


@dataclass(frozen=True)
class SplittingScheme:
    """Stage weights of a splitting scheme of some formal order.

    ``alphas`` are exact rationals, ``betas`` pairs (re, im) of exact
    rationals.  Use :attr:`alpha_floats` / :attr:`beta_complexes` at
    numerical call sites.
    """

    name: str
    alphas: tuple
    betas: tuple
    formal_order: int

    @property
    def stages(self) -> int:
        return len(self.alphas)

    @property
    def alpha_floats(self) -> np.ndarray:
        return np.array([float(a) for a in self.alphas])

    @property
    def beta_complexes(self) -> np.ndarray:
        return np.array([complex(float(re), float(im)) for re, im in self.betas])

    @property
    def uses_complex_times(self) -> bool:
        return any(im != 0 for _re, im in self.betas)


def lie_trotter() -> SplittingScheme:
    """First-order splitting: full diffusion step then full drift step."""
    return SplittingScheme(
        name="lie",
        alphas=(Fraction(1),),
        betas=((Fraction(1), Fraction(0)),),
        formal_order=1,
    )


def strang() -> SplittingScheme:
    """Second-order symmetric splitting, drift-diffusion-drift arrangement."""
    return SplittingScheme(
        name="strang",
        alphas=(Fraction(1, 2), Fraction(1, 2)),
        betas=((Fraction(1), Fraction(0)), (Fraction(0), Fraction(0))),
        formal_order=2,
    )


def cdv_fourth_order() -> SplittingScheme:
    """Five-stage fourth-order splitting with complex diffusion stages.

    alpha = (0, 1/4, 1/4, 1/4, 1/4) and
    beta  = (1/10 - i/30, 4/15 + 2i/15, 4/15 - i/5, 4/15 + 2i/15, 1/10 - i/30).
    All Re beta_k > 0, and both stage sums equal 1 exactly.
    """
    b_outer = (Fraction(1, 10), Fraction(-1, 30))
    b_inner = (Fraction(4, 15), Fraction(2, 15))
    b_mid = (Fraction(4, 15), Fraction(-1, 5))
    return SplittingScheme(
        name="cdv4",
        alphas=(Fraction(0), Fraction(1, 4), Fraction(1, 4), Fraction(1, 4), Fraction(1, 4)),
        betas=(b_outer, b_inner, b_mid, b_inner, b_outer),
        formal_order=4,
    )


BUILTIN_SCHEMES = {
    "lie": lie_trotter,
    "lie_trotter": lie_trotter,
    "strang": strang,
    "cdv4": cdv_fourth_order,
    "cdv_fourth_order": cdv_fourth_order,
}


def scheme_by_name(name: str) -> SplittingScheme:
    try:
        return BUILTIN_SCHEMES[name.lower()]()
    except KeyError:
        raise ValueError(
            f"unknown scheme {name!r}; choose from {sorted(set(BUILTIN_SCHEMES))}"
        ) from None


def validate(scheme: SplittingScheme) -> list[str]:
    """Check the scheme invariants; returns one message per violation.

    Performed in exact rational arithmetic, so the sum conditions carry no
    tolerance.  An empty list means the scheme is admissible.
    """
    violations = []
    if len(scheme.alphas) != len(scheme.betas):
        violations.append(
            f"len(alphas)={len(scheme.alphas)} != len(betas)={len(scheme.betas)}"
        )
    if len(scheme.alphas) < 1:
        violations.append("scheme must have at least one stage")
    for k, a in enumerate(scheme.alphas, start=1):
        if a < 0:
            violations.append(f"alpha_{k} < 0")
    for k, (re, _im) in enumerate(scheme.betas, start=1):
        if re < 0:
            violations.append(f"Re beta_{k} < 0")
    if scheme.alphas and sum(scheme.alphas, Fraction(0)) != 1:
        violations.append("sum(alpha) != 1")
    if scheme.betas:
        re_sum = sum((re for re, _ in scheme.betas), Fraction(0))
        im_sum = sum((im for _, im in scheme.betas), Fraction(0))
        if re_sum != 1 or im_sum != 0:
            violations.append("sum(beta) != 1")
    return violations


def _apply_stage(prop: Propagator, u, tau, stage: int, part: str):
    if prop.real_time_only and isinstance(tau, complex) and tau.imag != 0.0:
        raise StageError(stage, part, f"propagator accepts real times only, got {tau}")
    try:
        out = prop.apply(u, tau)
    except StageError:
        raise
    except Exception as exc:  # attach the stage index to sub-solver failures
        raise StageError(stage, part, str(exc)) from exc
    return out


def compose_step(scheme: SplittingScheme, drift: Propagator, diffusion: Propagator, u, dt: float):
    """Apply one composed step Q_dt to ``u``.

    Stages run from k = s down to k = 1 (rightmost operator factor first):
    diffusion over beta_k*dt, then drift over alpha_k*dt.  Zero-magnitude
    stages are skipped, which in particular drops the final drift stage of
    the fourth-order scheme (alpha_1 = 0).
    """
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    violations = validate(scheme)
    if violations:
        raise InvalidSchemeError("; ".join(violations))
    alphas = scheme.alpha_floats
    betas = scheme.beta_complexes
    for k in reversed(range(scheme.stages)):
        tau_diff = betas[k] * dt
        if tau_diff != 0:
            tau = complex(tau_diff)
            if tau.imag == 0.0:
                tau = tau.real  # keep real stages in real arithmetic
            u = _apply_stage(diffusion, u, tau, k + 1, "diffusion")
        tau_drift = float(alphas[k]) * dt
        if tau_drift != 0.0:
            u = _apply_stage(drift, u, tau_drift, k + 1, "drift")
    return u


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    max_abs_imag: float
    max_abs: float


@dataclass
class EvolveResult:
    u: object  # GridFunction
    diagnostics: list = field(default_factory=list)

    @property
    def max_abs_imag(self) -> float:
        """Imaginary residue of the final iterate."""
        return self.diagnostics[-1].max_abs_imag if self.diagnostics else 0.0


def evolve(scheme: SplittingScheme, drift: Propagator, diffusion: Propagator, u0, horizon: float, n: int) -> EvolveResult:
    """March u0 over [0, horizon] with n composed steps of size horizon/n."""
    if n < 1:
        raise ValueError("need at least one timestep")
    if horizon < 0.0:
        raise ValueError("horizon must be nonnegative")
    dt = horizon / n
    u = u0
    diagnostics = []
    for step in range(1, n + 1):
        u = compose_step(scheme, drift, diffusion, u, dt)
        vals = np.asarray(u.values)
        diagnostics.append(
            StepDiagnostics(
                step=step,
                max_abs_imag=float(np.max(np.abs(vals.imag))) if np.iscomplexobj(vals) else 0.0,
                max_abs=float(np.max(np.abs(vals))),
            )
        )
    return EvolveResult(u=u, diagnostics=diagnostics)
