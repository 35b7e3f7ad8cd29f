"""Joint feedback-bit and power control against an average interference cap.

The analytical average interference of link ``i`` with ``B_i`` feedback
bits and power ``P_i`` is bounded by::

    sigma0_i * P_i * n_t / (n_t - 1) * 2 ** (-B_i / (n_t - 1))

Minimum powers are optimal (lower power never needs more bits), so the
control problem reduces to spending the fewest total bits that bring the
summed bound under the cap. ``greedy_allocate`` does this one bit at a
time; ``exhaustive_allocate`` is the brute-force reference.
"""

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, InfeasibleError

DEFAULT_BIT_CAP = 32
# relative slack on the feasibility test; absorbs rounding at the boundary
FEASIBILITY_RTOL = 1e-12


class Shortcut(str, enum.Enum):
    NONE = "none"
    LOOSE_AIC = "loose_aic"
    ZERO_AIC_INFEASIBLE = "zero_aic_infeasible"


@dataclass(frozen=True)
class Allocation:
    bits: tuple
    powers: tuple
    sigma_cross: tuple
    n_t: int
    bound_value: float
    cost: float

    @property
    def total_bits(self):
        return sum(self.bits)

    def recompute_bound(self):
        return interference_bound(self.bits, self.powers, self.sigma_cross, self.n_t)


@dataclass(frozen=True)
class ControlResult:
    allocation: Allocation
    iterations: int
    shortcut: Shortcut = Shortcut.NONE
    candidates: int = 0  # allocations evaluated (exhaustive search only)


def _check_nt(n_t):
    if n_t < 3:
        raise DomainError(
            f"n_t={n_t}: the interference bound needs n_t >= 3 "
            "(the residual leakage term has a Beta(1, n_t - 2) law)"
        )


def interference_term(sigma_cross_i, p_i, b_i, n_t):
    """Average-interference bound contributed by one link."""
    _check_nt(n_t)
    if b_i < 0:
        raise DomainError("bits must be nonnegative")
    return sigma_cross_i * p_i * n_t / (n_t - 1) * 2.0 ** (-b_i / (n_t - 1))


def feedback_gain(sigma_cross_i, p_star_i, b_i, n_t):
    """Bound reduction from granting one more bit to a link at ``b_i`` bits."""
    _check_nt(n_t)
    base = sigma_cross_i * p_star_i * n_t / (n_t - 1)
    return base * (2.0 ** (-b_i / (n_t - 1)) - 2.0 ** (-(b_i + 1) / (n_t - 1)))


def interference_bound(bits, powers, sigma_cross, n_t):
    return math.fsum(
        interference_term(s, p, b, n_t) for s, p, b in zip(sigma_cross, powers, bits)
    )


def total_cost(allocation, mu, phi):
    return mu * sum(allocation.bits) + phi * math.fsum(allocation.powers)


def _make_allocation(bits, powers, sigma_cross, n_t, mu, phi):
    bits = tuple(int(b) for b in bits)
    powers = tuple(float(p) for p in powers)
    bound = interference_bound(bits, powers, sigma_cross, n_t)
    cost = mu * sum(bits) + phi * math.fsum(powers)
    return Allocation(bits, powers, tuple(sigma_cross), n_t, bound, cost)


def _feasible(bound, aic):
    return bound <= aic * (1.0 + FEASIBILITY_RTOL)


def _validate(p_star, sigma_cross, n_t, aic):
    _check_nt(n_t)
    if len(p_star) != len(sigma_cross) or not p_star:
        raise DomainError("p_star and sigma_cross must be nonempty and equal length")
    if not all(p > 0 for p in p_star) or not all(s > 0 for s in sigma_cross):
        raise DomainError("powers and cross-channel variances must be positive")
    if not aic >= 0:
        raise DomainError(f"aic must be nonnegative, got {aic!r}")
    if aic == 0:
        raise InfeasibleError(
            "aic = 0 needs perfect interference CSI (unbounded feedback bits)",
            reason=Shortcut.ZERO_AIC_INFEASIBLE,
        )


def zero_feedback_interference(p_star, sigma_cross, n_t):
    """Bound with every link at zero feedback bits (the loose-cap threshold)."""
    return interference_bound([0] * len(p_star), p_star, sigma_cross, n_t)


def greedy_allocate(p_star, sigma_cross, n_t, aic, bit_cap=DEFAULT_BIT_CAP, mu=1.0, phi=0.0):
    """Add bits one at a time to the link with the largest feedback gain.

    Ties go to the lowest link index. Powers stay at ``p_star``.
    """
    p_star = [float(p) for p in p_star]
    sigma_cross = [float(s) for s in sigma_cross]
    _validate(p_star, sigma_cross, n_t, aic)
    k = len(p_star)
    bits = [0] * k
    bound0 = zero_feedback_interference(p_star, sigma_cross, n_t)
    if _feasible(bound0, aic):
        alloc = _make_allocation(bits, p_star, sigma_cross, n_t, mu, phi)
        return ControlResult(alloc, iterations=0, shortcut=Shortcut.LOOSE_AIC)

    terms = [interference_term(s, p, 0, n_t) for s, p in zip(sigma_cross, p_star)]
    iterations = 0
    while not _feasible(math.fsum(terms), aic):
        if iterations >= bit_cap:
            raise InfeasibleError(
                f"aic={aic} needs more than {bit_cap} feedback bits", reason="bit_cap"
            )
        gains = [feedback_gain(sigma_cross[i], p_star[i], bits[i], n_t) for i in range(k)]
        best = max(range(k), key=lambda i: (gains[i], -i))
        bits[best] += 1
        terms[best] = interference_term(sigma_cross[best], p_star[best], bits[best], n_t)
        iterations += 1
    alloc = _make_allocation(bits, p_star, sigma_cross, n_t, mu, phi)
    return ControlResult(alloc, iterations=iterations)


def compositions(total, parts):
    """All ways to write ``total`` as ``parts`` nonnegative ints, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def exhaustive_allocate(p_star, sigma_cross, n_t, aic, bit_cap=DEFAULT_BIT_CAP, mu=1.0, phi=0.0):
    """Minimum-total-bit allocation by enumeration over growing bit budgets.

    Among allocations with the minimum total, the lexicographically smallest
    is returned.
    """
    p_star = [float(p) for p in p_star]
    sigma_cross = [float(s) for s in sigma_cross]
    _validate(p_star, sigma_cross, n_t, aic)
    k = len(p_star)
    # per-link term tables avoid recomputing powers of two inside the search
    table = [
        [interference_term(sigma_cross[i], p_star[i], b, n_t) for b in range(bit_cap + 1)]
        for i in range(k)
    ]
    evaluated = 0
    for total in range(bit_cap + 1):
        for bits in compositions(total, k):
            evaluated += 1
            if _feasible(math.fsum(table[i][b] for i, b in enumerate(bits)), aic):
                alloc = _make_allocation(bits, p_star, sigma_cross, n_t, mu, phi)
                shortcut = Shortcut.LOOSE_AIC if total == 0 else Shortcut.NONE
                return ControlResult(alloc, iterations=total, shortcut=shortcut,
                                     candidates=evaluated)
    raise InfeasibleError(f"no allocation within {bit_cap} total bits meets aic={aic}",
                          reason="bit_cap")


def min_safe_distance(p_star, n_t, aic, alpha):
    """Distance beyond which zero feedback bits already satisfy the cap.

    With uniform cross variance ``d ** -alpha`` the zero-bit bound equals
    ``aic`` exactly at the returned ``d``.
    """
    _check_nt(n_t)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if aic == 0:
        raise InfeasibleError("aic = 0: no finite distance suffices",
                              reason=Shortcut.ZERO_AIC_INFEASIBLE)
    if not aic > 0:
        raise DomainError("aic must be nonnegative")
    load = n_t / (n_t - 1) * math.fsum(p_star)
    return (load / aic) ** (1.0 / alpha)


def control_for_config(config, method="greedy", powers=None):
    """Run greedy or exhaustive control on a scenario at its own ``aic``."""
    from .delay_power import min_powers

    if powers is None:
        powers = [s.p_star for s in min_powers(config)]
    fn = greedy_allocate if method == "greedy" else exhaustive_allocate
    return fn(powers, config.sigma_cross, config.n_t, config.aic,
              bit_cap=config.bit_cap, mu=config.mu, phi=config.phi)
