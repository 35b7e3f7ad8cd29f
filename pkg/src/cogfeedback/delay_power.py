"""Delay requirement -> rate threshold -> minimum transmit power."""

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError
from .numerics import bisect_increasing, scaled_exp_integral_e1

POWER_BRACKET_LO = 1e-9
POWER_BRACKET_HI = 1.0
POWER_BRACKET_CAP = 2.0 ** 60
SOLVE_RTOL = 1e-12


@dataclass(frozen=True)
class LinkDelaySpec:
    lam: float  # packets / interval
    d: float  # intervals
    n_b: float  # bits / packet
    t: float  # seconds / interval

    def __post_init__(self):
        for name in ("lam", "d", "n_b", "t"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"LinkDelaySpec.{name} must be positive, got {v!r}")


@dataclass(frozen=True)
class PowerSolution:
    p_star: float  # watts
    r_bar: float  # bits / second


def link_specs(config):
    return [
        LinkDelaySpec(lam=config.lambdas[i], d=config.delays[i], n_b=config.n_b, t=config.t)
        for i in range(config.k)
    ]


def rate_threshold(spec):
    """Minimum average rate (bits/s) that meets the mean delay target."""
    dl = spec.d * spec.lam
    b = 2.0 * dl + 2.0
    disc = b * b - 8.0 * dl
    assert disc >= 0.0, "discriminant must be nonnegative for positive d*lambda"
    packets = (b + math.sqrt(disc)) / (4.0 * spec.d)
    return packets * spec.n_b / spec.t


def avg_rate(p, sigma_sq, w, log_base=2.0):
    """Ergodic rate of a Rayleigh link with exponential SNR of mean ``p * sigma_sq``.

    ``log_base=2`` gives bits/s; ``math.e`` gives nats/s.
    """
    if not p > 0:
        raise DomainError(f"power must be positive, got {p!r}")
    if not sigma_sq > 0 or not w > 0:
        raise DomainError("sigma_sq and w must be positive")
    x = 1.0 / (p * sigma_sq)
    return w * scaled_exp_integral_e1(x) / math.log(log_base)


def min_power(spec, sigma_sq, w, log_base=2.0):
    """Smallest power whose ergodic rate reaches ``rate_threshold(spec)``."""
    r_bar = rate_threshold(spec)
    if not r_bar > 0:
        raise DomainError("rate threshold must be positive")

    def normalized(p):
        return avg_rate(p, sigma_sq, w, log_base) / r_bar

    lo, hi = POWER_BRACKET_LO, POWER_BRACKET_HI
    if normalized(lo) > 1.0:
        raise DomainError(f"rate threshold {r_bar} met below the bracket floor {lo} W")
    while normalized(hi) < 1.0:
        lo = hi
        hi *= 2.0
        if hi > POWER_BRACKET_CAP:
            raise ConvergenceError(f"no power below {POWER_BRACKET_CAP:g} W reaches {r_bar} bits/s")
    p_star = bisect_increasing(normalized, 1.0, lo, hi, SOLVE_RTOL)
    return PowerSolution(p_star=p_star, r_bar=r_bar)


def min_powers(config):
    """``PowerSolution`` for every link of a scenario."""
    return [
        min_power(spec, config.sigma_direct[i], config.w, config.log_base)
        for i, spec in enumerate(link_specs(config))
    ]
