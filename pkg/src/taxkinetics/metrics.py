"""Summary statistics of a population state: marginals, Gini indices, income gap.

The Gini index is the discrete mean-absolute-difference form over the class
incomes, taken on class marginals (within-class dispersion is not part of
the model). Sector-resolved metrics treat each sector's column as its own
distribution; a sector whose population share is numerically zero gets NaN
metrics rather than failing the whole report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .config import ModelConfig
from .errors import ContractError, DistributionError

__all__ = ["MetricsReport", "gini", "total_evasion_level", "metrics_report"]

_EMPTY_SECTOR = 1e-12


def gini(weights, incomes) -> float:
    """Gini index of a discrete distribution of ``weights`` over ``incomes``.

    Half the population-weighted mean absolute income difference, relative
    to the mean income. Weights are normalised internally, so only their
    proportions matter; the result is invariant under rescaling of all
    incomes and lies in [0, 1).
    """
    w = np.asarray(weights, dtype=float)
    r = np.asarray(incomes, dtype=float)
    if w.shape != r.shape or w.ndim != 1 or w.size == 0:
        raise DistributionError("weights and incomes must be equal-length vectors")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(r))):
        raise DistributionError("weights and incomes must be finite")
    if np.any(w < 0.0):
        raise DistributionError("weights must be nonnegative")
    total = float(w.sum())
    if total <= 0.0:
        raise DistributionError("total weight must be positive")
    if np.any(r <= 0.0):
        raise DistributionError("incomes must be strictly positive")
    wn = w / total
    mean = float(wn @ r)
    mad = float(wn @ np.abs(np.subtract.outer(r, r)) @ wn)
    return mad / (2.0 * mean)


def total_evasion_level(sector_shares, theta_ev) -> float:
    """Population-weighted fraction of due taxes that goes unpaid."""
    w = np.asarray(sector_shares, dtype=float)
    th = np.asarray(theta_ev, dtype=float)
    if w.shape != th.shape or w.ndim != 1:
        raise ContractError("sector_shares and theta_ev must be equal-length vectors")
    return float(w @ (1.0 - th))


@dataclass(frozen=True, eq=False)
class MetricsReport:
    """All reported statistics of one population state.

    ``income_gap`` is the relative excess of the mean income of the least
    compliant sector over the honest one; it is NaN whenever either sector
    is empty. Sector entries of ``sector_mean_income`` and
    ``gini_per_sector`` are NaN for empty sectors as well.
    """

    class_marginals: np.ndarray
    sector_marginals: np.ndarray
    mu_total: float
    sector_mean_income: np.ndarray
    gini_total: float
    gini_per_sector: np.ndarray
    income_gap: float

    def to_dict(self) -> dict:
        """Flat JSON-safe record; NaN (undefined sector metrics) becomes null."""
        def scrub(v):
            if isinstance(v, float):
                return None if math.isnan(v) else v
            return [scrub(float(u)) for u in v]

        return {
            "class_marginals": scrub(self.class_marginals),
            "sector_marginals": scrub(self.sector_marginals),
            "mu_total": scrub(self.mu_total),
            "sector_mean_income": scrub(self.sector_mean_income),
            "gini_total": scrub(self.gini_total),
            "gini_per_sector": scrub(self.gini_per_sector),
            "income_gap": scrub(self.income_gap),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def metrics_report(x: np.ndarray, config: ModelConfig) -> MetricsReport:
    """Compute the full metrics report for a state on the simplex.

    The configuration orders sectors from most to least compliant, so the
    income gap compares the last sector against the first.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (config.n, config.m):
        raise ContractError(f"state must have shape {(config.n, config.m)}, got {x.shape}")
    if not np.all(np.isfinite(x)) or x.min() < -1e-9:
        raise ContractError("state must be finite and nonnegative")
    if abs(x.sum() - 1.0) > 1e-6:
        raise ContractError(f"state must lie on the simplex, sums to {x.sum()!r}")

    r = config.incomes
    class_marg = x.sum(axis=1)
    sector_marg = x.sum(axis=0)
    mu_total = float(r @ class_marg)

    sector_mean = np.full(config.m, np.nan)
    sector_gini = np.full(config.m, np.nan)
    for a in range(config.m):
        if sector_marg[a] > _EMPTY_SECTOR:
            sector_mean[a] = float(r @ x[:, a]) / sector_marg[a]
            sector_gini[a] = gini(np.clip(x[:, a], 0.0, None), r)

    if np.isnan(sector_mean[0]) or np.isnan(sector_mean[-1]):
        gap = float("nan")
    else:
        gap = (sector_mean[-1] - sector_mean[0]) / sector_mean[0]

    return MetricsReport(
        class_marginals=class_marg,
        sector_marginals=sector_marg,
        mu_total=mu_total,
        sector_mean_income=sector_mean,
        gini_total=gini(np.clip(class_marg, 0.0, None), r),
        gini_per_sector=sector_gini,
        income_gap=float(gap),
    )
