"""Right-hand side of the population-flow ODE system.

The state is an (n, m) array ``x`` of population fractions, rows indexing
income classes (poorest first) and columns indexing compliance sectors.
Group fractions change through two channels: direct pairwise money
exchanges, and the collection of taxes on every exchange followed by
uniform redistribution of the proceeds. Both channels only ever move
individuals to an adjacent income class and never across sectors.

:func:`rhs` evaluates the field through factored per-class flow
intensities in O(n^2 + n m). :func:`rhs_naive_oracle` evaluates the same
field by materialising every per-encounter coefficient and summing over
all ordered pairs of groups; it exists purely as an independent check.
"""

from __future__ import annotations

import numpy as np

from .coefficients import CoefficientTables, coefficient_tensor_via_increments
from .errors import ContractError, OracleSizeError, SingularStateError

__all__ = ["rhs", "rhs_naive_oracle", "redistribution_term", "redistribution_tensor"]

# Above this many groups the dense (n*m)^3 reference tensors get unreasonable.
_ORACLE_GROUP_LIMIT = 100


def _check_state(x: np.ndarray, tables: CoefficientTables) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (tables.n, tables.m):
        raise ContractError(
            f"state must have shape {(tables.n, tables.m)}, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ContractError("state contains non-finite entries")
    return x


def rhs(x: np.ndarray, tables: CoefficientTables) -> np.ndarray:
    """Time derivative of every group fraction at state ``x``.

    Both the total population and the population-weighted mean income are
    first integrals of this field: the returned array sums to zero, and its
    income-weighted sum is zero, for any state with positive total mass.
    """
    x = _check_state(x, tables)
    return _rhs_core(x, tables)


def _rhs_core(x: np.ndarray, tables: CoefficientTables) -> np.ndarray:
    # Validation-free path used inside integration loops.
    p = tables.payment
    theta = tables.effective_tax
    gi = tables.gap_inv
    s = tables.exchange_amount

    class_pop = x.sum(axis=1)
    total = class_pop.sum()
    if total <= 0.0:
        raise SingularStateError("total population mass must be positive")
    below_top = total - class_pop[-1]  # only classes below the top benefit from redistribution

    kept = ((1.0 - theta) * x).sum(axis=1)   # post-tax share kept by receivers, per class
    taxed = (theta * x).sum(axis=1)          # share surrendered as tax, per class
    pay_net = s * (p @ kept)                 # net outpayment intensity of each payer class
    pay_tax = s * (p @ taxed)                # tax triggered by each payer class
    recv = s * (p.T @ class_pop)             # gross receiving intensity of each class
    tax_pool = class_pop @ pay_tax           # total tax collected per unit time

    # Flows across the gap between classes g and g+1, per sector.
    up = x[:-1] * (1.0 - theta[:-1]) * (recv[:-1] * gi)[:, None]
    down = x[1:] * (pay_net[1:] * gi)[:, None]
    lift = (tax_pool / total) * x[:-1] * gi[:, None]
    tax_down = (below_top / total) * x[1:] * (pay_tax[1:] * gi)[:, None]

    dx = np.zeros_like(x)
    dx[1:] += up + lift
    dx[:-1] -= up + lift
    dx[:-1] += down + tax_down
    dx[1:] -= down + tax_down
    return dx


def redistribution_term(j: int, a: int, h: int, b: int, k: int, g: int,
                        x: np.ndarray, tables: CoefficientTables) -> float:
    """State-dependent variation of group (j, a) from taxation and redistribution.

    Evaluated for one encounter between an (h, b)-payer and a (k, g)-receiver.
    The receiver's tax is redistributed uniformly over the classes below the
    top one, lifting the whole distribution, while the payer is pushed one
    class down by the taxed part of its payment. Indices are 0-based; the
    value is zero whenever the payer probability ``payment[h, k]`` vanishes,
    which in particular covers the poorest class as payer.
    """
    x = _check_state(x, tables)
    n = tables.n
    r = tables.incomes
    prob = tables.payment[h, k]
    if prob == 0.0:
        return 0.0
    total = float(x.sum())
    if total <= 0.0:
        raise SingularStateError("total population mass must be positive")
    below_top = float(x[:-1].sum())
    pref = prob * tables.exchange_amount * tables.effective_tax[k, g]

    spread = 0.0
    if j >= 1:
        spread += x[j - 1, a] / (r[j] - r[j - 1])
    if j <= n - 2:
        spread -= x[j, a] / (r[j + 1] - r[j])
    spread *= pref / total

    shift = 0.0
    if a == b:
        if j <= n - 2 and h == j + 1:
            shift += 1.0 / (r[h] - r[j])
        if j >= 1 and h == j:
            shift -= 1.0 / (r[h] - r[j - 1])
    shift *= pref * below_top / total

    return spread + shift


def redistribution_tensor(x: np.ndarray, tables: CoefficientTables) -> np.ndarray:
    """Dense array of all taxation/redistribution variations at state ``x``.

    Shape and index order match :func:`direct_coefficient_tensor`; equals
    :func:`redistribution_term` entry by entry. Summing over the target
    axes gives zero for every (source, counterpart) pair: taxation and
    redistribution only move individuals around.
    """
    x = _check_state(x, tables)
    n, m = tables.n, tables.m
    gi = tables.gap_inv
    total = float(x.sum())
    if total <= 0.0:
        raise SingularStateError("total population mass must be positive")
    below_top = float(x[:-1].sum())

    # pref[h, k, g]: taxed amount per encounter of an h-payer with a (k, g)-receiver
    pref = tables.exchange_amount * tables.payment[:, :, None] * tables.effective_tax[None, :, :]

    spread = np.zeros((n, m))
    spread[1:] += x[:-1] * gi[:, None]
    spread[:-1] -= x[:-1] * gi[:, None]

    shift = np.zeros((n, n))
    idx = np.arange(n - 1)
    shift[idx, idx + 1] = gi            # payer one class above the target moves down into it
    shift[idx + 1, idx + 1] -= gi       # and drains its own group
    same_sector = np.eye(m)

    t1 = (spread / total)[:, :, None, None, None, None] * pref[None, None, :, None, :, :]
    t2 = (below_top / total) * (
        shift[:, None, :, None, None, None]
        * same_sector[None, :, None, :, None, None]
        * pref[None, None, :, None, :, :]
    )
    return t1 + t2


def rhs_naive_oracle(x: np.ndarray, tables: CoefficientTables) -> np.ndarray:
    """Brute-force reference evaluation of the same derivative as :func:`rhs`.

    Materialises the full transition tensor, rebuilt from per-payment
    increments rather than from the closed-form entries, adds the dense
    redistribution tensor, and contracts it against all ordered pairs of
    group fractions. Cubic in the number of groups; refuses instances
    with more than 100 groups.
    """
    x = _check_state(x, tables)
    n, m = tables.n, tables.m
    if n * m > _ORACLE_GROUP_LIMIT:
        raise OracleSizeError(
            f"instance has {n * m} groups; the brute-force evaluator only "
            f"accepts up to {_ORACLE_GROUP_LIMIT}")
    coeff = coefficient_tensor_via_increments(tables) + redistribution_tensor(x, tables)
    gain = np.einsum("jahbkg,hb,kg->ja", coeff, x, x)
    return gain - x * x.sum()
