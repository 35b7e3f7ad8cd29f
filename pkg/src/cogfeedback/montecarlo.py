"""Monte Carlo validation: zero-forcing beams, realized interference and queues."""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (
    MAX_CODEBOOK_BITS,
    batch_quantize,
    build_codebook,
    quantize,
    sample_realization,
)
from .delay_power import avg_rate
from .errors import DomainError, InstabilityError, ResourceLimitError
from .numerics import (
    batch_null_space_unit_vectors,
    make_rng,
    null_space_unit_vector,
    sample_complex_gaussian,
    sample_isotropic_unit,
)

Z_95 = 1.959963984540054
ZF_TOL = 1e-9
MAX_CHUNK = 2000
# complex entries allowed in one chunk's largest codebook tensor
CHUNK_BUDGET = 2 ** 21


@dataclass(frozen=True)
class IntervalRecord:
    sum_interference: float
    interference: np.ndarray  # per link, |sqrt(P) g^H w|^2
    interference_eq5: np.ndarray  # per link, P ||g||^2 a |s^H w|^2
    rate: np.ndarray  # bits/s
    snr: np.ndarray
    a: np.ndarray
    s_overlap: np.ndarray  # |s^H w|^2, nan where s is undefined
    zf_residual: float  # max |c^H w| over all zero-forcing constraints


@dataclass(frozen=True)
class TrialStats:
    mean_sum_interference: float
    ci_halfwidth: float
    mean_interference: tuple
    mean_rate: tuple
    mean_snr: tuple
    mean_quant_error: tuple
    n_trials: int
    seed: int
    max_zf_residual: float
    mean_delay: tuple = None


def _check_allocation(config, bits, powers):
    if len(bits) != config.k or len(powers) != config.k:
        raise DomainError(f"need {config.k} bits and powers")
    if any(b < 0 for b in bits) or any(not p > 0 for p in powers):
        raise DomainError("bits must be >= 0 and powers > 0")
    for b in bits:
        if b > MAX_CODEBOOK_BITS:
            raise ResourceLimitError(f"codebook of 2^{b} entries exceeds cap 2^{MAX_CODEBOOK_BITS}")
        if config.l + (1 if b > 0 else 0) > config.n_t - 1:
            raise DomainError("too many zero-forcing constraints for n_t antennas")


def simulate_interval(config, bits, powers, rng):
    """One transmission interval for every link, built from the scalar primitives."""
    _check_allocation(config, bits, powers)
    rng = make_rng(rng)
    chan = sample_realization(config, rng)
    k = config.k
    interf = np.zeros(k)
    interf5 = np.zeros(k)
    snr = np.zeros(k)
    a = np.zeros(k)
    s_ov = np.full(k, np.nan)
    residual = 0.0
    for i in range(k):
        q = quantize(chan.cross[i], build_codebook(config.n_t, bits[i], rng))
        constraints = list(chan.intra[i])
        if bits[i] > 0:
            constraints.insert(0, q.codeword)
        w = null_space_unit_vector(constraints, rng, dim=config.n_t)
        for c in constraints:
            residual = max(residual, abs(np.vdot(c, w)))
        g = chan.cross[i]
        interf[i] = powers[i] * abs(np.vdot(g, w)) ** 2
        if q.s is not None:
            s_ov[i] = abs(np.vdot(q.s, w)) ** 2
        if bits[i] == 0:
            # no codeword constraint, so the decomposition does not apply
            interf5[i] = interf[i]
        elif q.s is not None:
            interf5[i] = powers[i] * np.vdot(g, g).real * q.a * s_ov[i]
        snr[i] = powers[i] * abs(np.vdot(chan.direct[i], w)) ** 2
        a[i] = q.a
    if residual > ZF_TOL:
        raise AssertionError(f"zero-forcing leakage {residual:.3g} exceeds {ZF_TOL}")
    rate = config.w * np.log2(1.0 + snr)
    return IntervalRecord(
        sum_interference=float(interf.sum()), interference=interf, interference_eq5=interf5,
        rate=rate, snr=snr, a=a, s_overlap=s_ov, zf_residual=residual,
    )


def simulate_batch(config, bits, powers, n, rng):
    """Vectorised ``simulate_interval`` over ``n`` independent intervals.

    Returns a dict of arrays: ``interference`` ``(n, k)``, ``snr`` ``(n, k)``,
    ``a`` ``(n, k)`` and the scalar ``zf_residual``.
    """
    _check_allocation(config, bits, powers)
    n_t, k, l = config.n_t, config.k, config.l
    interf = np.empty((n, k))
    snr = np.empty((n, k))
    a = np.empty((n, k))
    residual = 0.0
    for i in range(k):
        h = sample_complex_gaussian(n_t, config.sigma_direct[i], rng, size=n)
        g = sample_complex_gaussian(n_t, config.sigma_cross[i], rng, size=n)
        intra = np.stack(
            [sample_complex_gaussian(n_t, config.intra_variance(i, j), rng, size=n) for j in range(l)],
            axis=1,
        ) if l else np.zeros((n, 0, n_t), dtype=complex)
        books = sample_isotropic_unit(n_t, rng, size=n * 2 ** bits[i]).reshape(n, 2 ** bits[i], n_t)
        codeword, a[:, i] = batch_quantize(g, books)
        if bits[i] > 0:
            cons = np.concatenate([codeword[:, None, :], intra], axis=1)
        else:
            cons = intra
        if cons.shape[1]:
            w = batch_null_space_unit_vectors(cons, rng)
            residual = max(residual, float(np.abs(np.einsum("nmd,nd->nm", cons.conj(), w)).max()))
        else:
            w = sample_isotropic_unit(n_t, rng, size=n)
        interf[:, i] = powers[i] * np.abs(np.sum(g.conj() * w, axis=1)) ** 2
        snr[:, i] = powers[i] * np.abs(np.sum(h.conj() * w, axis=1)) ** 2
    return {"interference": interf, "snr": snr, "a": a, "zf_residual": residual}


def chunk_size(bits, n_t):
    return max(1, min(MAX_CHUNK, CHUNK_BUDGET // (2 ** max(bits) * n_t)))


def _run_chunk(args):
    config, bits, powers, n, seed_seq = args
    return simulate_batch(config, bits, powers, n, np.random.default_rng(seed_seq))


def run_interference_mc(config, bits, powers, n_trials, seed, workers=1):
    """Average ``n_trials`` simulated intervals.

    Trials are split into fixed-size chunks, each seeded from
    ``SeedSequence(seed).spawn``; results do not depend on ``workers``.
    """
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    bits = [int(b) for b in bits]
    powers = [float(p) for p in powers]
    size = chunk_size(bits, config.n_t)
    n_chunks = -(-n_trials // size)
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    jobs = [
        (config, bits, powers, min(size, n_trials - c * size), seeds[c])
        for c in range(n_chunks)
    ]
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    interf = np.concatenate([p["interference"] for p in parts])
    snr = np.concatenate([p["snr"] for p in parts])
    a = np.concatenate([p["a"] for p in parts])
    total = interf.sum(axis=1)
    mean = float(total.mean())
    half = Z_95 * float(total.std(ddof=1)) / math.sqrt(n_trials) if n_trials > 1 else math.inf
    rate = config.w * np.log2(1.0 + snr)
    return TrialStats(
        mean_sum_interference=mean,
        ci_halfwidth=half,
        mean_interference=tuple(float(v) for v in interf.mean(axis=0)),
        mean_rate=tuple(float(v) for v in rate.mean(axis=0)),
        mean_snr=tuple(float(v) for v in snr.mean(axis=0)),
        mean_quant_error=tuple(float(v) for v in a.mean(axis=0)),
        n_trials=n_trials,
        seed=seed,
        max_zf_residual=max(p["zf_residual"] for p in parts),
    )


def run_queue_sim(spec, p, sigma_sq, w, n_intervals, seed, warmup=0.1):
    """Mean packet delay (intervals) of a FIFO fluid-bit queue over a fading link.

    Each interval Poisson(lambda) packets of ``n_b`` bits arrive and up to
    ``w * log2(1 + gamma) * t`` bits are served, with gamma exponential of
    mean ``p * sigma_sq``. A packet served within its arrival interval has
    delay 1. Packets arriving in the first ``warmup`` fraction are dropped
    from the average, as are packets still queued at the end.
    """
    if n_intervals < 2:
        raise DomainError("n_intervals must be >= 2")
    service = avg_rate(p, sigma_sq, w)
    if service <= spec.lam * spec.n_b / spec.t:
        raise InstabilityError(
            f"ergodic rate {service:.6g} bits/s does not exceed the arrival load "
            f"{spec.lam * spec.n_b / spec.t:.6g} bits/s"
        )
    rng = make_rng(seed)
    arrivals = rng.poisson(spec.lam, n_intervals)
    gamma = rng.exponential(p * sigma_sq, n_intervals)
    capacity = w * np.log2(1.0 + gamma) * spec.t
    arrived_bits = arrivals * float(spec.n_b)
    backlog = np.fromiter(
        itertools.accumulate(arrived_bits - capacity, lambda q, x: max(0.0, q + x), initial=0.0),
        dtype=float, count=n_intervals + 1,
    )[1:]
    cum_arrived = np.cumsum(arrived_bits)
    cum_served = cum_arrived - backlog
    arrival_slot = np.repeat(np.arange(n_intervals), arrivals)
    last_bit = spec.n_b * np.arange(1, arrival_slot.size + 1, dtype=float)
    departure = np.searchsorted(cum_served, last_bit - 1e-6 * spec.n_b, side="left")
    keep = (departure < n_intervals) & (arrival_slot >= int(warmup * n_intervals))
    if not keep.any():
        raise DomainError("no packets departed after warm-up; increase n_intervals")
    return float(np.mean(departure[keep] - arrival_slot[keep] + 1))
