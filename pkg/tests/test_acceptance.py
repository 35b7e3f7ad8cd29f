"""Exit criteria for the build; one PASS/FAIL line per criterion in the summary."""

import math
import time
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from cogfeedback.channel import batch_quantize, build_codebook, quantize
from cogfeedback.cli import main
from cogfeedback.control import (
    Shortcut,
    exhaustive_allocate,
    greedy_allocate,
    min_safe_distance,
    zero_feedback_interference,
)
from cogfeedback.delay_power import avg_rate, link_specs, min_power
from cogfeedback.errors import InfeasibleError, InstabilityError
from cogfeedback.montecarlo import run_interference_mc, run_queue_sim
from cogfeedback.numerics import null_space_unit_vector, sample_complex_gaussian, sample_isotropic_unit
from conftest import ACCEPTANCE_LINES

AICS = (0.01, 0.02, 0.03, 0.04)
TOTALS = {0.01: 16, 0.02: 8, 0.03: 4, 0.04: 1}
SPLITS = {0.01: (1, 6, 9), 0.02: (0, 3, 5), 0.03: (0, 1, 3), 0.04: (0, 0, 1)}


def report(number, title, ok, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
    assert ok, detail


def test_1_table1_totals(paper_config, paper_powers):
    start = time.perf_counter()
    got = {}
    for aic in AICS:
        ga = greedy_allocate(paper_powers, paper_config.sigma_cross, paper_config.n_t, aic)
        ea = exhaustive_allocate(paper_powers, paper_config.sigma_cross, paper_config.n_t, aic)
        got[aic] = (ga.allocation.total_bits, ea.allocation.total_bits)
    elapsed = time.perf_counter() - start
    ok = all(got[a] == (TOTALS[a], TOTALS[a]) for a in AICS) and elapsed < 1.0
    report(1, "Table 1 totals", ok, f"(GA, EA) totals {got}, {elapsed:.3f}s")


def test_2_table1_splits(paper_config, paper_powers):
    got = {a: greedy_allocate(paper_powers, paper_config.sigma_cross, 4, a).allocation.bits
           for a in AICS}
    mismatched = {a: got[a] for a in AICS if got[a] != SPLITS[a]}
    if mismatched:
        warnings.warn(f"GA per-link splits differ from the published table: {mismatched}")
    totals_ok = all(sum(got[a]) == TOTALS[a] for a in AICS)
    detail = "all splits match" if not mismatched else f"soft mismatch {mismatched}"
    report(2, "Table 1 per-link splits (soft)", totals_ok, detail)


def random_instance(rng):
    k = int(rng.integers(1, 4))
    n_t = int(rng.integers(3, 9))
    sigma = list(10 ** rng.uniform(-4, -2, k))
    power = list(10 ** rng.uniform(0, 2, k))
    bound0 = zero_feedback_interference(power, sigma, n_t)
    aic = bound0 * 2.0 ** (-rng.uniform(0, 14) / (n_t - 1))
    return power, sigma, n_t, aic


def test_3_greedy_matches_exhaustive():
    rng = np.random.default_rng(20130301)
    start = time.perf_counter()
    checked = agree = 0
    while checked < 500:
        power, sigma, n_t, aic = random_instance(rng)
        try:
            ea = exhaustive_allocate(power, sigma, n_t, aic, bit_cap=14)
        except InfeasibleError:
            continue
        ga = greedy_allocate(power, sigma, n_t, aic, bit_cap=14)
        checked += 1
        agree += ga.allocation.total_bits == ea.allocation.total_bits
    elapsed = time.perf_counter() - start
    report(3, "GA-EA optimality equivalence", agree == 500 and elapsed < 30,
           f"{agree}/{checked} instances agree, {elapsed:.1f}s")


@pytest.mark.slow
def test_4_interference_bound(paper_config, paper_powers):
    rows = []
    ok = True
    for aic in AICS:
        means = {}
        for label, fn in (("GA", greedy_allocate), ("EA", exhaustive_allocate)):
            al = fn(paper_powers, paper_config.sigma_cross, 4, aic).allocation
            st = run_interference_mc(paper_config, al.bits, paper_powers, 100_000, seed=2013)
            m, h, b = st.mean_sum_interference, st.ci_halfwidth, al.bound_value
            ok &= m <= b + 3 * h and m >= 0.5 * b and m <= aic + 3 * h
            means[label] = m
            rows.append(f"{label}@{aic}: {m:.5f}/{b:.5f}")
        ok &= abs(means["GA"] - means["EA"]) <= 0.10 * max(means.values())
    report(4, "Interference bound validity/tightness, GA~EA", ok, "; ".join(rows))


def min_beta_mean(n_t, bits):
    value, _ = quad(lambda x: (1.0 - x ** (n_t - 1)) ** (2 ** bits), 0.0, 1.0, epsabs=1e-13)
    return value


def test_5_distributional_oracles(paper_config):
    rng = np.random.default_rng(55)
    n, n_t = 100_000, 4
    notes = []
    g = sample_complex_gaussian(n_t, 0.0005, rng, size=n)
    energy = np.mean(np.sum(np.abs(g) ** 2, axis=1))
    ok = abs(energy / (n_t * 0.0005) - 1) <= 0.02
    notes.append(f"E|g|^2 ratio {energy / (n_t * 0.0005):.4f}")
    for bits in (1, 3, 6):
        books = sample_isotropic_unit(n_t, rng, size=n * 2 ** bits).reshape(n, 2 ** bits, n_t)
        _, a = batch_quantize(g, books)
        bound, oracle = 2.0 ** (-bits / (n_t - 1)), min_beta_mean(n_t, bits)
        ok &= a.mean() <= bound and abs(a.mean() / oracle - 1) <= 0.05
        notes.append(f"E[a|B={bits}]={a.mean():.4f} (oracle {oracle:.4f}, bound {bound:.4f})")
    overlap = []
    for _ in range(n):
        q = quantize(sample_complex_gaussian(n_t, 1.0, rng), build_codebook(n_t, 2, rng))
        w = null_space_unit_vector([q.codeword], rng)
        overlap.append(abs(np.vdot(q.s, w)) ** 2)
    ok &= abs(np.mean(overlap) * (n_t - 1) - 1) <= 0.03
    notes.append(f"E|s^H w|^2={np.mean(overlap):.4f}")
    report(5, "Distributional oracles", ok, "; ".join(notes))


def test_6_ergodic_rate_closed_form():
    rng = np.random.default_rng(66)
    w = 5e4
    errs = []
    for _ in range(5):
        p, s = 10 ** rng.uniform(0, 2), 10 ** rng.uniform(-3, -1)
        gamma = rng.exponential(p * s, 1_000_000)
        mc = np.mean(w * np.log2(1 + gamma))
        errs.append(abs(mc / avg_rate(p, s, w) - 1))
    report(6, "Ergodic rate closed form", max(errs) <= 5e-3,
           f"max relative error {max(errs):.2e}")


@pytest.mark.slow
def test_7_delay_sufficiency(paper_config):
    notes = []
    ok = True
    violated = False
    for i, spec in enumerate(link_specs(paper_config)):
        sigma = paper_config.sigma_direct[i]
        p = min_power(spec, sigma, paper_config.w, paper_config.log_base).p_star
        d = run_queue_sim(spec, p, sigma, paper_config.w, 1_000_000, seed=100 + i)
        ok &= d <= 1.15 * spec.d
        try:
            half = run_queue_sim(spec, 0.5 * p, sigma, paper_config.w, 1_000_000, seed=200 + i)
            violated |= half > 1.15 * spec.d
        except InstabilityError:
            half = math.inf
            violated = True
        notes.append(f"link {i + 1}: {d:.3f} <= {1.15 * spec.d:.2f} (half power {half:.3g})")
    report(7, "Delay sufficiency", ok and violated, "; ".join(notes))


def test_8_extreme_cases(paper_config, paper_powers):
    sigma = paper_config.sigma_cross
    bound0 = zero_feedback_interference(paper_powers, sigma, 4)
    loose = greedy_allocate(paper_powers, sigma, 4, bound0 * 1.5)
    ok = loose.allocation.bits == (0, 0, 0) and loose.shortcut is Shortcut.LOOSE_AIC
    try:
        greedy_allocate(paper_powers, sigma, 4, 0.0)
        ok = False
    except InfeasibleError as exc:
        ok &= exc.reason is Shortcut.ZERO_AIC_INFEASIBLE
    d = min_safe_distance(paper_powers, 4, 0.02, paper_config.alpha)
    round_trip = zero_feedback_interference(paper_powers, [d ** -paper_config.alpha] * 3, 4)
    ok &= abs(round_trip / 0.02 - 1) <= 1e-9
    report(8, "Extreme cases", ok, f"I0={bound0:.5f}, d={d:.4f}, round trip {round_trip:.12g}")


def test_9_determinism(tmp_path):
    same = True
    for cmd in (["reproduce-table1"], ["reproduce-fig2", "--trials", "5000"],
                ["queue-check", "--intervals", "100000"]):
        outs = []
        for j in range(2):
            path = tmp_path / f"{cmd[0]}-{j}.csv"
            assert main(cmd + ["--seed", "11", "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        same &= outs[0] == outs[1]
    report(9, "Determinism", same, "byte-identical CSV for table1, fig2, queue-check")
