"""Model configuration: parameters of the income-exchange system and their invariants.

All vectors are validated and frozen at construction time, so a ``ModelConfig``
that exists is a valid one. Income classes are indexed 0..n-1 internally
(class 0 is the poorest); file formats and reports use 1-based labels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = ["ModelConfig", "default_config"]


def _as_readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ModelConfig:
    """Complete parameter set of the model.

    Parameters
    ----------
    incomes:
        Average income of each class, strictly increasing, all positive.
    theta_ev:
        Fraction of due taxes actually paid by each compliance sector,
        each in [0, 1]. Sectors must be ordered from most to least
        compliant (non-increasing), so that the income-gap metric
        compares the worst evaders against the honest sector.
    sector_shares:
        Population fraction of each sector; nonnegative, summing to 1.
    exchange_amount:
        Amount of money handed over in a single transaction. Must be
        strictly smaller than every gap between consecutive class
        incomes; a warning is issued above 20% of the smallest gap,
        where transition probabilities start approaching their bounds.
    tau_min, tau_max:
        Endpoints of the linear progressive tax schedule. Either both
        are given, or an explicit ``tax_rates`` vector is supplied.
    tax_rates:
        Optional explicit per-class tax rates in [0, 1]; takes precedence
        over ``tau_min``/``tau_max``.
    """

    incomes: np.ndarray
    theta_ev: np.ndarray
    sector_shares: np.ndarray
    exchange_amount: float = 1.0
    tau_min: float | None = None
    tau_max: float | None = None
    tax_rates: np.ndarray | None = field(default=None)

    def __post_init__(self):
        r = _as_readonly(self.incomes)
        th = _as_readonly(self.theta_ev)
        w = _as_readonly(self.sector_shares)
        object.__setattr__(self, "incomes", r)
        object.__setattr__(self, "theta_ev", th)
        object.__setattr__(self, "sector_shares", w)
        if self.tax_rates is not None:
            object.__setattr__(self, "tax_rates", _as_readonly(self.tax_rates))
        self._validate()

    @property
    def n(self) -> int:
        """Number of income classes."""
        return self.incomes.shape[0]

    @property
    def m(self) -> int:
        """Number of compliance sectors."""
        return self.theta_ev.shape[0]

    @property
    def min_gap(self) -> float:
        return float(np.diff(self.incomes).min())

    def _validate(self):
        r, th, w = self.incomes, self.theta_ev, self.sector_shares
        if r.ndim != 1 or r.shape[0] < 2:
            raise ConfigError("incomes must be a vector with at least 2 classes")
        if not np.all(np.isfinite(r)) or np.any(r <= 0.0):
            raise ConfigError("incomes must be finite and strictly positive")
        if np.any(np.diff(r) <= 0.0):
            raise ConfigError("incomes must be strictly increasing")

        s = float(self.exchange_amount)
        if not np.isfinite(s) or s <= 0.0:
            raise ConfigError("exchange_amount must be a positive finite number")
        gap = self.min_gap
        if s >= gap:
            raise ConfigError(
                f"exchange_amount {s} must be smaller than the smallest "
                f"income gap {gap} (exchanged amounts must be small against class spacing)"
            )
        if s > 0.2 * gap:
            warnings.warn(
                f"exchange_amount {s} exceeds 20% of the smallest income gap {gap}; "
                "transition probabilities may be close to their admissible bounds",
                UserWarning,
                stacklevel=3,
            )

        if th.ndim != 1 or th.shape[0] < 1:
            raise ConfigError("theta_ev must be a vector with at least 1 sector")
        if not np.all(np.isfinite(th)) or np.any(th < 0.0) or np.any(th > 1.0):
            raise ConfigError("each theta_ev entry must lie in [0, 1]")
        if np.any(np.diff(th) > 0.0):
            raise ConfigError(
                "theta_ev must be non-increasing (sectors ordered from most "
                "to least compliant)"
            )

        if w.shape != th.shape:
            raise ConfigError("sector_shares must have one entry per sector")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise ConfigError("sector_shares must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ConfigError(f"sector_shares must sum to 1, got {float(w.sum())!r}")

        if self.tax_rates is not None:
            tau = self.tax_rates
            if tau.shape != r.shape:
                raise ConfigError("tax_rates must have one entry per income class")
            if not np.all(np.isfinite(tau)) or np.any(tau < 0.0) or np.any(tau > 1.0):
                raise ConfigError("each tax rate must lie in [0, 1]")
        else:
            if self.tau_min is None or self.tau_max is None:
                raise ConfigError("either tax_rates or both tau_min and tau_max must be given")
            lo, hi = float(self.tau_min), float(self.tau_max)
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ConfigError("tau_min and tau_max must be finite")
            if not (0.0 <= lo <= hi <= 1.0):
                raise ConfigError(f"need 0 <= tau_min <= tau_max <= 1, got ({lo}, {hi})")


def default_config() -> ModelConfig:
    """Baseline nine-class, three-sector configuration.

    Incomes 10, 20, ..., 90; unit exchange amount; tax rates growing
    linearly from 10% to 45%; one third of the population in each of an
    honest, a half-paying and a quarter-paying sector.
    """
    return ModelConfig(
        incomes=10.0 * np.arange(1, 10),
        theta_ev=np.array([1.0, 0.5, 0.25]),
        sector_shares=np.full(3, 1.0 / 3.0),
        exchange_amount=1.0,
        tau_min=0.10,
        tau_max=0.45,
    )
