"""Time integration of the population flow and stationarity detection.

The system is smooth and non-stiff at the intended parameter scale, so a
classical fourth-order Runge-Kutta scheme with a fixed step is used. The
scheme preserves the two linear first integrals (total population and mean
income) to roundoff; both drifts are monitored along every trajectory and
integration aborts if they leave the allowed band, which is the symptom of
an overly large step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientTables
from .dynamics import _rhs_core, rhs
from .errors import ConfigError, ConservationError, ContractError, StepSizeError

__all__ = ["IntegrationOptions", "StationaryResult", "step", "evolve_to_stationary"]

# Negative entries smaller than this are roundoff and get clamped to zero;
# anything larger means the step size is too big for the dynamics.
_NEGATIVE_ROUNDOFF = 1e-14


@dataclass(frozen=True)
class IntegrationOptions:
    """Step size, horizon and tolerances for :func:`evolve_to_stationary`.

    ``stationarity_tol`` bounds the sup-norm of the derivative at the
    accepted stationary state; ``drift_tol`` bounds how far the conserved
    total population and mean income may wander before the run is aborted.
    """

    dt: float = 0.5
    max_time: float = 1e6
    stationarity_tol: float = 1e-9
    drift_tol: float = 1e-8

    def __post_init__(self):
        for name in ("dt", "max_time", "stationarity_tol", "drift_tol"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0.0:
                raise ConfigError(f"{name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True, eq=False)
class StationaryResult:
    """Outcome of an integration run.

    ``converged`` is True iff the derivative sup-norm fell below the
    stationarity tolerance before the horizon; ``residual`` is that
    sup-norm at the final state either way. ``max_sum_drift`` and
    ``max_mu_drift`` are the largest observed deviations of the total
    population from 1 and of the mean income from its initial value.
    ``samples`` holds (time, state) pairs when trajectory sampling was
    requested, and is empty otherwise.
    """

    state: np.ndarray
    final_time: float
    residual: float
    converged: bool
    mu: float
    n_steps: int
    max_sum_drift: float
    max_mu_drift: float
    samples: list = field(default_factory=list)


def _clamp_negatives(x: np.ndarray, dt: float) -> np.ndarray:
    low = x.min()
    if low < 0.0:
        if low < -_NEGATIVE_ROUNDOFF:
            j, a = np.unravel_index(int(x.argmin()), x.shape)
            raise StepSizeError(
                f"step dt={dt} drove group (class {j + 1}, sector {a + 1}) to "
                f"{low:.3e}; reduce the step size")
        np.clip(x, 0.0, None, out=x)
    return x


def _rk4_advance(x: np.ndarray, tables: CoefficientTables, dt: float,
                 k1: np.ndarray) -> np.ndarray:
    k2 = _rhs_core(x + (0.5 * dt) * k1, tables)
    k3 = _rhs_core(x + (0.5 * dt) * k2, tables)
    k4 = _rhs_core(x + dt * k3, tables)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _clamp_negatives(out, dt)


def step(x: np.ndarray, tables: CoefficientTables, dt: float) -> np.ndarray:
    """One fourth-order Runge-Kutta step of length ``dt``.

    Negative output entries within roundoff of zero are clamped to zero;
    a genuinely negative entry raises :class:`StepSizeError` naming the
    offending group.
    """
    if not np.isfinite(dt) or dt <= 0.0:
        raise ContractError(f"dt must be positive and finite, got {dt!r}")
    k1 = rhs(x, tables)
    return _rk4_advance(np.asarray(x, dtype=float), tables, dt, k1)


def evolve_to_stationary(x0: np.ndarray, tables: CoefficientTables,
                         opts: IntegrationOptions | None = None,
                         sample_stride: int | None = None) -> StationaryResult:
    """Integrate from ``x0`` until the derivative sup-norm drops below tolerance.

    ``x0`` must be a nonnegative state summing to 1 within 1e-12. Reaching
    ``max_time`` without meeting the tolerance is reported through
    ``converged=False``, not raised. Drift of the conserved quantities
    beyond ``drift_tol`` raises :class:`ConservationError`.

    With ``sample_stride=s`` every s-th accepted state (plus the initial
    and final ones) is recorded in the result's ``samples``.
    """
    opts = opts or IntegrationOptions()
    if sample_stride is not None and sample_stride < 1:
        raise ContractError("sample_stride must be a positive integer")

    x = np.array(x0, dtype=float)
    if x.shape != (tables.n, tables.m):
        raise ContractError(f"x0 must have shape {(tables.n, tables.m)}, got {x.shape}")
    if not np.all(np.isfinite(x)) or x.min() < 0.0:
        raise ContractError("x0 must be finite and nonnegative")
    if abs(x.sum() - 1.0) > 1e-12:
        raise ContractError(f"x0 must sum to 1 within 1e-12, got {x.sum()!r}")

    r = tables.incomes
    mu0 = float(r @ x.sum(axis=1))
    dt = float(opts.dt)
    tol = float(opts.stationarity_tol)
    drift_tol = float(opts.drift_tol)

    t = 0.0
    n_steps = 0
    max_sum_drift = 0.0
    max_mu_drift = 0.0
    samples: list[tuple[float, np.ndarray]] = []

    while True:
        sum_drift = abs(float(x.sum()) - 1.0)
        mu_drift = abs(float(r @ x.sum(axis=1)) - mu0)
        if sum_drift > max_sum_drift:
            max_sum_drift = sum_drift
        if mu_drift > max_mu_drift:
            max_mu_drift = mu_drift
        if sum_drift > drift_tol or mu_drift > drift_tol:
            raise ConservationError(
                f"conserved quantities drifted at t={t}: |sum-1|={sum_drift:.3e}, "
                f"|mu-mu0|={mu_drift:.3e} exceed drift_tol={drift_tol}; "
                "the step size is likely too large")

        k1 = _rhs_core(x, tables)
        residual = float(np.abs(k1).max())
        if not np.isfinite(residual):
            raise ContractError(f"derivative became non-finite at t={t}")

        if sample_stride is not None and n_steps % sample_stride == 0:
            samples.append((t, x.copy()))

        if residual <= tol:
            converged = True
            break
        if t >= opts.max_time:
            converged = False
            break

        x = _rk4_advance(x, tables, dt, k1)
        t += dt
        n_steps += 1

    if sample_stride is not None and (not samples or samples[-1][0] != t):
        samples.append((t, x.copy()))

    return StationaryResult(
        state=x,
        final_time=t,
        residual=residual,
        converged=converged,
        mu=float(r @ x.sum(axis=1)),
        n_steps=n_steps,
        max_sum_drift=max_sum_drift,
        max_mu_drift=max_mu_drift,
        samples=samples,
    )
