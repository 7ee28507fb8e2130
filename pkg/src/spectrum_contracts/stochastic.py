"""Poisson tail probabilities and the utility and cost functions built on them.

Active-user counts are modeled as Poisson random variables. A transmitter
holding ``w`` channels serves ``min(X, w)`` users, so its expected service
rate is ``U(lam, w) = sum_{k=1..w} P(X_lam >= k)``. The base station's cost
of selling ``m`` of its ``M`` channels is the expected service it gives up,
``C(m) = U_BS(M) - U_BS(M - m)``.

Tail probabilities are accumulated from the probability mass recurrence
``term(i+1) = term(i) * lam / (i + 1)`` starting at ``exp(-lam)``, with
compensated summation, which avoids factorials entirely. Means large enough
to underflow ``exp(-lam)`` fall back to per-term evaluation in log space.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "poisson_pmf",
    "poisson_tail",
    "uav_utility",
    "utility_table",
    "mbs_cost",
    "cost_table",
    "saturation_channels",
]

# exp(-mean) underflows to 0.0 past this point; switch to log space there.
_LOG_SPACE_MEAN = 700.0


def _check_mean(mean: float) -> float:
    mean = float(mean)
    if not math.isfinite(mean) or mean <= 0.0:
        raise ValueError(f"mean must be a positive finite number, got {mean}")
    return mean


def _check_count(value: int, name: str) -> int:
    if isinstance(value, (bool, np.bool_)):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, float) or isinstance(value, np.floating):
        if not float(value).is_integer():
            raise ValueError(f"{name} must be an integer, got {value!r}")
        value = int(value)
    value = int(value)
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    return value


def _log_pmf(mean: float, k: int) -> float:
    return -mean + k * math.log(mean) - math.lgamma(k + 1)


def poisson_pmf(mean: float, k: int) -> float:
    """Probability that a Poisson variable with the given mean equals k.

    Args:
        mean: Mean active-user count; positive and finite.
        k: Non-negative integer outcome.

    Returns:
        P(X = k), evaluated without forming factorials.

    Raises:
        ValueError: If the mean is not positive and finite, or k < 0.
    """
    mean = _check_mean(mean)
    k = _check_count(k, "k")
    if mean > _LOG_SPACE_MEAN:
        return math.exp(_log_pmf(mean, k))
    term = math.exp(-mean)
    for i in range(k):
        term *= mean / (i + 1)
    return term


def _cdf_below(mean: float, k: int) -> float:
    """Compensated sum of pmf terms for outcomes 0..k-1."""
    if k <= 0:
        return 0.0
    if mean > _LOG_SPACE_MEAN:
        return math.fsum(math.exp(_log_pmf(mean, i)) for i in range(k))
    term = math.exp(-mean)
    total = term
    comp = 0.0
    for i in range(1, k):
        term *= mean / i
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _tail_above(mean: float, k: int) -> float:
    """Compensated sum of pmf terms for outcomes k, k+1, ... to convergence."""
    term = poisson_pmf(mean, k)
    total = term
    comp = 0.0
    i = k
    # Terms decay geometrically once i >= mean; stop when they stop mattering.
    while term > 0.0 and (term > total * 1e-18 or i < mean + 2):
        i += 1
        term *= mean / i
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return min(total, 1.0)


def poisson_tail(mean: float, k: int) -> float:
    """Upper tail P(X >= k) for a Poisson variable with the given mean.

    For k at or below the mean the tail is computed as one minus the lower
    cumulative sum; above the mean the upper sum is accumulated directly,
    which keeps the result strictly positive and strictly decreasing in k
    far into the tail.

    Args:
        mean: Mean active-user count; positive and finite.
        k: Non-negative integer threshold.

    Returns:
        P(X >= k) in [0, 1]. Equals 1.0 for k = 0.

    Raises:
        ValueError: If the mean is not positive and finite, or k < 0.
    """
    mean = _check_mean(mean)
    k = _check_count(k, "k")
    if k == 0:
        return 1.0
    if k <= mean:
        return max(1.0 - _cdf_below(mean, k), 0.0)
    return _tail_above(mean, k)


def uav_utility(mean: float, channels: int) -> float:
    """Expected users served by an operator of the given type holding channels.

    Equals ``sum_{k=1..w} P(X >= k)``: the expected value of ``min(X, w)``.
    Zero channels serve nobody; as the channel count grows the utility
    saturates at the mean itself.

    Args:
        mean: Type of the operator (mean active-user count).
        channels: Number of channels held, w >= 0.

    Returns:
        U(mean, channels), non-negative, strictly below the mean.

    Raises:
        ValueError: Propagated from tail evaluation on bad inputs.
    """
    channels = _check_count(channels, "channels")
    return float(utility_table(mean, channels)[channels])


def utility_table(mean: float, max_channels: int) -> np.ndarray:
    """Utilities U(mean, 0..max_channels) in one cumulative pass.

    Args:
        mean: Type of the operator.
        max_channels: Largest channel count to tabulate.

    Returns:
        Array of length max_channels + 1 with entry w equal to U(mean, w).
    """
    mean = _check_mean(mean)
    max_channels = _check_count(max_channels, "max_channels")
    table = np.zeros(max_channels + 1)
    if max_channels == 0:
        return table
    log_space = mean > _LOG_SPACE_MEAN
    term = math.exp(-mean) if not log_space else math.exp(_log_pmf(mean, 0))
    cdf = term
    cdf_comp = 0.0
    total = 0.0
    total_comp = 0.0
    for w in range(1, max_channels + 1):
        tail = max(1.0 - cdf, 0.0)
        y = tail - total_comp
        t = total + y
        total_comp = (t - total) - y
        total = t
        table[w] = total
        if log_space:
            term = math.exp(_log_pmf(mean, w))
        else:
            term *= mean / w
        y = term - cdf_comp
        t = cdf + y
        cdf_comp = (t - cdf) - y
        cdf = t
    return table


def mbs_cost(sold: int, total: int, load: float) -> float:
    """Expected service the base station loses by selling channels.

    Selling ``m`` of ``M`` channels removes the tail terms
    ``P(X_BS >= M-m+1) .. P(X_BS >= M)`` from the station's utility.

    Args:
        sold: Channels sold, 0 <= sold <= total.
        total: Total channels M at the base station.
        load: Mean active-user count at the base station.

    Returns:
        C(sold) >= 0, strictly increasing and convex in sold.

    Raises:
        ValueError: If sold exceeds total or any input is out of domain.
    """
    sold = _check_count(sold, "sold")
    total = _check_count(total, "total")
    load = _check_mean(load)
    if sold > total:
        raise ValueError(f"sold channels ({sold}) exceed the total ({total})")
    return math.fsum(poisson_tail(load, k) for k in range(total - sold + 1, total + 1))


def cost_table(total: int, load: float) -> np.ndarray:
    """Costs C(0..total) for a base station with the given size and load.

    Args:
        total: Total channels M.
        load: Mean active-user count at the base station.

    Returns:
        Array of length total + 1; entry m equals mbs_cost(m, total, load).
    """
    total = _check_count(total, "total")
    load = _check_mean(load)
    tails = [poisson_tail(load, k) for k in range(1, total + 1)]
    table = np.zeros(total + 1)
    for m in range(1, total + 1):
        table[m] = math.fsum(tails[total - m:])
    return table


def saturation_channels(mean: float, tol: float = 1e-12) -> int:
    """Smallest channel count whose tail probability drops below tol.

    Past this point every additional channel changes a utility by less than
    tol, so solvers can cap per-type choices here without moving an optimum
    resolved at coarser tolerance.

    Args:
        mean: Type whose saturation point is sought.
        tol: Tail threshold; defaults to 1e-12.

    Returns:
        The smallest k >= 1 with P(X >= k) < tol.
    """
    mean = _check_mean(mean)
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    # The tail at ceil(mean) is order one; step forward from there.
    k = 1
    while poisson_tail(mean, k) >= tol:
        k += 1
    return k
