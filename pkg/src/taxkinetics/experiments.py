"""End-to-end studies: scenario runs, evasion sweeps and comparisons.

Every experiment here is deterministic: no randomness enters anywhere, so
identical inputs reproduce results bit for bit. Sweep points are mutually
independent (they share nothing but immutable inputs) and are simply run
in sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coefficients import build_tables
from .config import ModelConfig
from .errors import ConfigError, ContractError, FitError, SweepError
from .integrate import IntegrationOptions, StationaryResult, evolve_to_stationary
from .metrics import MetricsReport, metrics_report, total_evasion_level

__all__ = [
    "InitialConditionSpec",
    "SweepRow",
    "SpreadComparison",
    "build_initial_state",
    "run_scenario",
    "evasion_sweep",
    "fit_quadratic_through_origin",
    "compare_compliance_vs_evasion",
    "spread_comparison",
]

_MODES = ("uniform", "explicit", "class-profile")


@dataclass(frozen=True, eq=False)
class InitialConditionSpec:
    """How to build the initial state.

    Modes:

    * ``uniform``: every class holds the same population, split across
      sectors by the configured shares.
    * ``explicit``: ``x0`` is the full (n, m) state. It must lie on the
      simplex and every class must be split across sectors in the
      configured proportions, since sector totals are conserved and all
      reported comparisons assume the configured split.
    * ``class-profile``: a per-class profile ``profile`` (normalised
      internally) is spread across sectors by the configured shares.
      If ``target_mu`` is given, the profile is exponentially reweighted
      so the initial mean income matches it exactly.
    """

    mode: str = "uniform"
    x0: np.ndarray | None = None
    profile: np.ndarray | None = None
    target_mu: float | None = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"ic mode must be one of {_MODES}, got {self.mode!r}")
        if self.mode == "explicit" and self.x0 is None:
            raise ConfigError("explicit ic mode requires x0")
        if self.mode == "class-profile" and self.profile is None:
            raise ConfigError("class-profile ic mode requires a profile")


def _tilt_to_mean(profile: np.ndarray, incomes: np.ndarray, target: float) -> np.ndarray:
    """Exponentially reweight a normalised profile to the requested mean income."""
    lo_income = incomes[profile > 0][0]
    hi_income = incomes[profile > 0][-1]
    if not (lo_income < target < hi_income):
        raise ConfigError(
            f"target_mu={target} is not attainable: the profile only supports "
            f"means strictly between {lo_income} and {hi_income}")

    scale = incomes / incomes[-1]

    def mean_at(s: float) -> float:
        u = profile * np.exp(s * scale)
        u /= u.sum()
        return float(u @ incomes)

    lo, hi = -1.0, 1.0
    while mean_at(lo) > target:
        lo *= 2.0
    while mean_at(hi) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_at(mid) < target:
            lo = mid
        else:
            hi = mid
    u = profile * np.exp(0.5 * (lo + hi) * scale)
    return u / u.sum()


def build_initial_state(spec: InitialConditionSpec, config: ModelConfig) -> np.ndarray:
    """Materialise the (n, m) initial state described by ``spec``."""
    n, m = config.n, config.m
    w = config.sector_shares

    if spec.mode == "uniform":
        return np.outer(np.full(n, 1.0 / n), w)

    if spec.mode == "explicit":
        x = np.asarray(spec.x0, dtype=float)
        if x.shape != (n, m):
            raise ConfigError(f"explicit x0 must have shape {(n, m)}, got {x.shape}")
        if not np.all(np.isfinite(x)) or x.min() < 0.0:
            raise ConfigError("explicit x0 must be finite and nonnegative")
        if abs(x.sum() - 1.0) > 1e-12:
            raise ConfigError(f"explicit x0 must sum to 1, got {x.sum()!r}")
        class_pop = x.sum(axis=1)
        expected = class_pop[:, None] * w[None, :]
        if np.abs(x - expected).max() > 1e-9:
            raise ConfigError(
                "explicit x0 must split every class across sectors in the "
                "configured sector_shares proportions")
        return x

    u = np.asarray(spec.profile, dtype=float)
    if u.shape != (n,):
        raise ConfigError(f"profile must have length {n}, got shape {u.shape}")
    if not np.all(np.isfinite(u)) or u.min() < 0.0 or u.sum() <= 0.0:
        raise ConfigError("profile must be nonnegative with positive total")
    u = u / u.sum()
    if spec.target_mu is not None:
        u = _tilt_to_mean(u, config.incomes, float(spec.target_mu))
    return np.outer(u, w)


def run_scenario(config: ModelConfig,
                 ic: InitialConditionSpec | None = None,
                 opts: IntegrationOptions | None = None,
                 sample_stride: int | None = None) -> tuple[StationaryResult, MetricsReport]:
    """Build tables, integrate to stationarity and report metrics."""
    ic = ic or InitialConditionSpec()
    tables = build_tables(config)
    x0 = build_initial_state(ic, config)
    result = evolve_to_stationary(x0, tables, opts, sample_stride=sample_stride)
    return result, metrics_report(result.state, config)


@dataclass(frozen=True)
class SweepRow:
    """One point of an evasion sweep. All quantities are fractions, not percent."""

    eta: float
    theta_ev: tuple[float, float, float]
    income_gap: float
    gini_total: float
    converged: bool
    residual: float


def _require_equal_thirds(config: ModelConfig, what: str):
    if config.m != 3:
        raise SweepError(f"{what} requires exactly 3 sectors, config has {config.m}")
    if np.abs(config.sector_shares - 1.0 / 3.0).max() > 1e-9:
        raise SweepError(f"{what} requires equal one-third sector shares")


def evasion_sweep(config: ModelConfig, eta_list,
                  ic: InitialConditionSpec | None = None,
                  opts: IntegrationOptions | None = None) -> list[SweepRow]:
    """Income gap and Gini across a graded-evasion family of scenarios.

    For each total evasion level ``eta`` the three sectors pay fractions
    ``(1, 1 - eta, 1 - 2 eta)`` of their due taxes, so the configured level
    is exactly ``eta``. All points start from the same initial condition;
    rows come back ordered by ``eta``.
    """
    _require_equal_thirds(config, "evasion_sweep")
    etas = [float(e) for e in eta_list]
    for e in etas:
        if not np.isfinite(e) or e < 0.0 or e > 0.5:
            raise SweepError(
                f"evasion level {e} is outside [0, 0.5]; the least compliant "
                "sector would pay a negative fraction")

    rows = []
    for e in sorted(etas):
        profile = (1.0, 1.0 - e, 1.0 - 2.0 * e)
        cfg = replace(config, theta_ev=np.array(profile))
        result, report = run_scenario(cfg, ic, opts)
        rows.append(SweepRow(
            eta=e,
            theta_ev=profile,
            income_gap=report.income_gap,
            gini_total=report.gini_total,
            converged=result.converged,
            residual=result.residual,
        ))
    return rows


def fit_quadratic_through_origin(points) -> tuple[float, float]:
    """Least-squares fit of ``d = a*eta**2 + b*eta`` with no constant term.

    ``points`` is an iterable of (eta, d) pairs, at least two of which must
    have distinct positive eta. Solves the 2x2 normal equations directly.
    """
    pts = [(float(e), float(d)) for e, d in points]
    if any(not (np.isfinite(e) and np.isfinite(d)) for e, d in pts):
        raise ContractError("fit points must be finite")
    if any(e < 0.0 for e, _ in pts):
        raise ContractError("evasion levels must be nonnegative")
    if len({e for e, _ in pts if e > 0.0}) < 2:
        raise FitError("need at least 2 points with distinct positive evasion levels")

    e = np.array([q[0] for q in pts])
    d = np.array([q[1] for q in pts])
    s2, s3, s4 = float(np.sum(e**2)), float(np.sum(e**3)), float(np.sum(e**4))
    det = s4 * s2 - s3 * s3
    if not np.isfinite(det) or det <= 0.0:
        raise FitError(f"normal equations are singular (determinant {det!r})")
    rhs_a = float(np.sum(e**2 * d))
    rhs_b = float(np.sum(e * d))
    a = (rhs_a * s2 - rhs_b * s3) / det
    b = (rhs_b * s4 - rhs_a * s3) / det
    return a, b


def compare_compliance_vs_evasion(config: ModelConfig,
                                  ic: InitialConditionSpec | None = None,
                                  opts: IntegrationOptions | None = None) -> np.ndarray:
    """Per-class population difference between evasion and full compliance.

    Runs the given configuration and its fully compliant twin from the same
    initial condition and returns the difference of the stationary class
    marginals (evasion minus compliance). The entries sum to zero.
    """
    compliant = replace(config, theta_ev=np.ones(config.m))
    _, rep_ev = run_scenario(config, ic, opts)
    _, rep_cp = run_scenario(compliant, ic, opts)
    return rep_ev.class_marginals - rep_cp.class_marginals


@dataclass(frozen=True, eq=False)
class SpreadComparison:
    """Gini indices under widespread versus concentrated evasion at equal total level."""

    evasion_level: float
    widespread_theta: tuple[float, float, float]
    concentrated_theta: tuple[float, float, float]
    widespread_gini: float
    concentrated_gini: float
    widespread_sector_gini: np.ndarray
    concentrated_sector_gini: np.ndarray


def spread_comparison(config: ModelConfig,
                      ic: InitialConditionSpec | None = None,
                      opts: IntegrationOptions | None = None) -> SpreadComparison:
    """Compare evasion spread out over two sectors against the same total
    evasion concentrated in one sector.

    Both scenarios keep one sector fully honest and elude one sixth of all
    due taxes; they differ only in how that sixth is distributed. Returns
    total and per-sector Gini indices of both stationary states.
    """
    _require_equal_thirds(config, "spread_comparison")
    wide = (1.0, 0.75, 0.75)
    conc = (1.0, 1.0, 0.5)
    shares = config.sector_shares
    level = total_evasion_level(shares, wide)
    assert abs(level - total_evasion_level(shares, conc)) < 1e-12

    _, rep_wide = run_scenario(replace(config, theta_ev=np.array(wide)), ic, opts)
    _, rep_conc = run_scenario(replace(config, theta_ev=np.array(conc)), ic, opts)
    return SpreadComparison(
        evasion_level=level,
        widespread_theta=wide,
        concentrated_theta=conc,
        widespread_gini=rep_wide.gini_total,
        concentrated_gini=rep_conc.gini_total,
        widespread_sector_gini=rep_wide.gini_per_sector,
        concentrated_sector_gini=rep_conc.gini_per_sector,
    )
