"""Construction of the model's interaction coefficients.

Each encounter between an individual of class ``h`` and one of class ``k``
results in the class-``h`` party paying the fixed amount with probability
``payment[h, k]``, the class-``k`` party paying with probability
``payment[k, h]``, or no exchange. A receiver of class ``k`` in sector
``a`` surrenders the fraction ``effective_tax[k, a]`` of what it receives.

From these tables the per-encounter transition probabilities between
population groups are assembled, either entry by entry
(:func:`direct_coefficient`), as a dense tensor
(:func:`direct_coefficient_tensor`), or through the independent
per-payment bookkeeping route (:func:`coefficient_tensor_via_increments`)
used for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ModelConfig
from .errors import ConfigError, ContractError

__all__ = [
    "CoefficientTables",
    "build_tax_rates",
    "resolve_tax_rates",
    "build_payment_matrix",
    "build_effective_tax_table",
    "build_tables",
    "direct_coefficient",
    "direct_coefficient_tensor",
    "payment_increments",
    "coefficient_tensor_via_increments",
]


def build_tax_rates(config: ModelConfig) -> np.ndarray:
    """Linear progressive tax schedule between ``tau_min`` and ``tau_max``.

    Class ``j`` (0-based) pays rate ``tau_min + j/(n-1) * (tau_max - tau_min)``.
    """
    if config.tau_min is None or config.tau_max is None:
        raise ConfigError("build_tax_rates needs tau_min and tau_max; "
                          "this config carries an explicit tax_rates vector")
    n = config.n
    lo, hi = float(config.tau_min), float(config.tau_max)
    return lo + (np.arange(n) / (n - 1)) * (hi - lo)


def resolve_tax_rates(config: ModelConfig) -> np.ndarray:
    """Per-class tax rates: the explicit vector if given, else the linear schedule."""
    if config.tax_rates is not None:
        return np.asarray(config.tax_rates, dtype=float)
    return build_tax_rates(config)


def build_payment_matrix(config: ModelConfig) -> np.ndarray:
    """Probability ``p[h, k]`` that the class-``h`` party pays in an encounter with class ``k``.

    The base value ``min(r_h, r_k) / (4 r_max)`` reflects that poorer
    individuals both pay and earn less. It is then overwritten, in order, by
    the special cases: within-class encounters for the interior classes, any
    encounter with the poorest class (they are preferentially paid), payments
    by the richest class, and finally the hard zeroes: the poorest class
    never pays and the richest class is never paid. The overlapping cell
    (richest payer, poorest receiver) receives the same value from both of
    its rules.
    """
    r = config.incomes
    n = config.n
    top = r[-1]
    p = np.minimum.outer(r, r) / (4.0 * top)
    for j in range(1, n - 1):
        p[j, j] = r[j] / (2.0 * top)
    p[1:, 0] = r[0] / (2.0 * top)
    p[n - 1, : n - 1] = r[: n - 1] / (2.0 * top)
    p[0, :] = 0.0
    p[:, n - 1] = 0.0
    return p


def build_effective_tax_table(config: ModelConfig, tax_rates: np.ndarray) -> np.ndarray:
    """Fraction ``theta[k, a]`` of a received amount that a class-``k``, sector-``a`` receiver pays as tax."""
    tau = np.asarray(tax_rates, dtype=float)
    if tau.shape != (config.n,):
        raise ConfigError("tax_rates must have one entry per income class")
    return np.outer(tau, config.theta_ev)


@dataclass(frozen=True, eq=False)
class CoefficientTables:
    """Immutable precomputed tables consumed by the dynamics.

    ``payment`` is the n-by-n payer probability matrix, ``effective_tax`` the
    n-by-m table of tax fractions actually paid, and ``gap_inv`` the
    reciprocals of the consecutive income gaps. ``incomes`` and
    ``exchange_amount`` are carried along because every transition
    probability scales with the exchanged amount relative to the gaps.
    Instances are safe to share across threads.
    """

    payment: np.ndarray
    effective_tax: np.ndarray
    gap_inv: np.ndarray
    incomes: np.ndarray
    exchange_amount: float

    def __post_init__(self):
        for name in ("payment", "effective_tax", "gap_inv", "incomes"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.incomes.shape[0]

    @property
    def m(self) -> int:
        return self.effective_tax.shape[1]


def build_tables(config: ModelConfig) -> CoefficientTables:
    """Assemble all coefficient tables for a validated configuration."""
    tau = resolve_tax_rates(config)
    return CoefficientTables(
        payment=build_payment_matrix(config),
        effective_tax=build_effective_tax_table(config, tau),
        gap_inv=1.0 / np.diff(config.incomes),
        incomes=config.incomes,
        exchange_amount=float(config.exchange_amount),
    )


def _check_indices(tables: CoefficientTables, classes, sectors):
    n, m = tables.n, tables.m
    for c in classes:
        if not 0 <= c < n:
            raise ContractError(f"class index {c} out of range [0, {n})")
    for s in sectors:
        if not 0 <= s < m:
            raise ContractError(f"sector index {s} out of range [0, {m})")


def direct_coefficient(j: int, a: int, h: int, b: int, k: int, g: int,
                       tables: CoefficientTables) -> float:
    """Probability that one exchange moves an (h, b)-individual into group (j, a).

    The exchange is with a (k, g)-counterpart. All indices are 0-based.
    Individuals never change sector and never move by more than one class,
    so the value is zero unless ``b == a`` and ``h`` is within one of ``j``.
    A payer steps down by the net amount handed over (what the receiver
    keeps after tax), a receiver steps up by the same net amount; the
    boundary classes keep their roles, the poorest never paying and the
    richest never receiving.
    """
    _check_indices(tables, (j, h, k), (a, b, g))
    if b != a:
        return 0.0
    n = tables.n
    p = tables.payment
    theta = tables.effective_tax
    gi = tables.gap_inv
    s = tables.exchange_amount
    if h == j + 1 and j <= n - 2 and k <= n - 2:
        return p[h, k] * s * (1.0 - theta[k, g]) * gi[j]
    if h == j:
        c = 1.0
        if j <= n - 2 and k >= 1:
            c -= p[k, j] * s * (1.0 - theta[j, a]) * gi[j]
        if j >= 1 and k <= n - 2:
            c -= p[j, k] * s * (1.0 - theta[k, g]) * gi[j - 1]
        return c
    if h == j - 1 and j >= 1 and k >= 1:
        return p[k, j - 1] * s * (1.0 - theta[j - 1, a]) * gi[j - 1]
    return 0.0


def direct_coefficient_tensor(tables: CoefficientTables) -> np.ndarray:
    """Dense array of all direct-exchange transition probabilities.

    Shape (n, m, n, m, n, m), indexed [target class, target sector,
    source class, source sector, counterpart class, counterpart sector].
    Equals :func:`direct_coefficient` entry by entry.
    """
    n, m = tables.n, tables.m
    p = tables.payment
    theta = tables.effective_tax
    gi = tables.gap_inv
    s = tables.exchange_amount
    kept = 1.0 - theta  # share of the amount the receiver keeps, by (class, sector)

    # up_exit[j, a, k]: rate at which a (j, a)-individual leaves upward after
    # being paid by a class-k payer; zero for the top class.
    up_exit = np.zeros((n, m, n))
    up_exit[:-1] = s * kept[:-1, :, None] * p.T[:-1, None, :] * gi[:, None, None]
    # down_exit[j, k, g]: rate at which a class-j payer leaves downward after
    # paying a (k, g)-receiver; zero for the bottom class.
    down_exit = np.zeros((n, n, m))
    down_exit[1:] = s * p[1:, :, None] * kept[None, :, :] * gi[:, None, None]

    tensor = np.zeros((n, m, n, m, n, m))
    idx = np.arange(n)
    for a in range(m):
        tensor[idx, a, idx, a] = 1.0 - up_exit[:, a, :, None] - down_exit
        tensor[idx[:-1], a, idx[1:], a] = down_exit[1:]
        tensor[idx[1:], a, idx[:-1], a] = up_exit[:-1, a, :, None]
    return tensor


def payment_increments(payer_class: int, payer_sector: int,
                       receiver_class: int, receiver_sector: int,
                       tables: CoefficientTables) -> list[tuple[tuple[int, int], tuple[int, int], tuple[int, int], float]]:
    """Group-population increments caused by one payment event.

    One payment from (payer_class, payer_sector) to (receiver_class,
    receiver_sector) shifts, per unit encounter, probability mass in up to
    four groups: the payer partially migrates one class down and the
    receiver one class up, each migration draining its source group. The
    returned tuples are ``(target, source, counterpart, value)`` with
    (class, sector) pairs, and their values sum to zero.
    """
    _check_indices(tables, (payer_class, receiver_class), (payer_sector, receiver_sector))
    prob = tables.payment[payer_class, receiver_class]
    if prob == 0.0:
        return []
    s = tables.exchange_amount
    gi = tables.gap_inv
    amount = prob * s * (1.0 - tables.effective_tax[receiver_class, receiver_sector])
    payer = (payer_class, payer_sector)
    receiver = (receiver_class, receiver_sector)
    out = []
    if payer_class >= 1:
        shift = amount * gi[payer_class - 1]
        out.append(((payer_class - 1, payer_sector), payer, receiver, shift))
        out.append((payer, payer, receiver, -shift))
    if receiver_class <= tables.n - 2:
        shift = amount * gi[receiver_class]
        out.append(((receiver_class + 1, receiver_sector), receiver, payer, shift))
        out.append((receiver, receiver, payer, -shift))
    return out


def coefficient_tensor_via_increments(tables: CoefficientTables) -> np.ndarray:
    """Rebuild the direct-transition tensor from per-payment increments.

    Independent validation route: start from the identity (an individual
    stays in its group unless something happens) and scatter in the
    increments of every possible payment event. Must agree with
    :func:`direct_coefficient_tensor` to roundoff.
    """
    n, m = tables.n, tables.m
    tensor = np.zeros((n, m, n, m, n, m))
    idx = np.arange(n)
    for a in range(m):
        tensor[idx, a, idx, a, :, :] = 1.0
    for pc in range(n):
        for rc in range(n):
            if tables.payment[pc, rc] == 0.0:
                continue
            for ps in range(m):
                for rs in range(m):
                    for (tj, ta), (sj, sa), (cj, ca), val in payment_increments(
                            pc, ps, rc, rs, tables):
                        tensor[tj, ta, sj, sa, cj, ca] += val
    return tensor
