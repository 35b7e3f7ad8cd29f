"""Command-line entry point.

Exit codes: 0 success, 1 usage/config error, 2 infeasible control problem,
3 numerical failure.
"""

import argparse
import csv
import io
import sys

from . import __version__
from .config import load_config
from .control import exhaustive_allocate, greedy_allocate, zero_feedback_interference
from .delay_power import link_specs, min_power, min_powers
from .errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    DomainError,
    InfeasibleError,
    InstabilityError,
    ResourceLimitError,
)
from .montecarlo import run_interference_mc, run_queue_sim

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3
DEFAULT_AICS = (0.01, 0.02, 0.03, 0.04)
DELAY_SLACK = 1.15
METHODS = (("GA", greedy_allocate), ("EA", exhaustive_allocate))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _aic_list(text):
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --aic-list {text!r}")
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("--aic-list needs nonnegative numbers")
    return vals


def _positive_int(text):
    n = int(float(text))
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def write_csv(path, command, config, header, rows, **meta):
    """Write rows with '#' metadata lines; returns the text."""
    buf = io.StringIO()
    buf.write(f"# tool=cogfeedback version={__version__}\n")
    buf.write(f"# command={command}\n")
    buf.write(f"# config={config.name} config_hash={config.digest()}\n")
    for key in sorted(meta):
        buf.write(f"# {key}={_fmt(meta[key])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def print_table(header, rows, out=None):
    out = out or sys.stdout
    cells = [[str(h) for h in header]] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(header))]
    for j, r in enumerate(cells):
        print("  ".join(s.rjust(w) for s, w in zip(r, widths)), file=out)
        if j == 0:
            print("  ".join("-" * w for w in widths), file=out)


def _powers(config):
    return [s.p_star for s in min_powers(config)]


def _allocation_rows(config, aics, powers):
    """(row, infeasible?) for every (aic, method) pair."""
    rows = []
    infeasible = False
    k = config.k
    for aic in aics:
        for label, fn in METHODS:
            try:
                res = fn(powers, config.sigma_cross, config.n_t, aic,
                         bit_cap=config.bit_cap, mu=config.mu, phi=config.phi)
            except InfeasibleError as exc:
                infeasible = True
                tag = getattr(exc.reason, "value", exc.reason) or "infeasible"
                rows.append([aic, label] + ["infeasible"] * (k + 3) + [tag])
                continue
            al = res.allocation
            rows.append([aic, label, *al.bits, al.total_bits, al.bound_value, al.cost,
                         res.shortcut.value])
    return rows, infeasible


def cmd_control(args, config):
    sols = min_powers(config)
    powers = [s.p_star for s in sols]
    print(f"scenario {config.name}: n_t={config.n_t} k={config.k} rate_unit={config.rate_unit}")
    print_table(["link", "r_bar_bps", "p_star"],
                [[i + 1, s.r_bar, s.p_star] for i, s in enumerate(sols)])
    print(f"zero-feedback interference bound: {_fmt(zero_feedback_interference(powers, config.sigma_cross, config.n_t))}")
    aics = args.aic_list or (config.aic,)
    rows, infeasible = _allocation_rows(config, aics, powers)
    header = ["aic", "method"] + [f"b{i + 1}" for i in range(config.k)] + [
        "total_bits", "bound", "cost", "shortcut"]
    print()
    print_table(header, rows)
    write_csv(args.out, "control", config, header, rows)
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def cmd_reproduce_table1(args, config):
    powers = _powers(config)
    aics = list(args.aic_list or DEFAULT_AICS)
    loose = zero_feedback_interference(powers, config.sigma_cross, config.n_t)
    if not args.aic_list:
        aics.append(loose)
    rows, infeasible = _allocation_rows(config, aics, powers)
    header = ["aic", "method"] + [f"b{i + 1}" for i in range(config.k)] + [
        "total_bits", "bound", "cost", "shortcut"]
    print_table(header, rows)
    write_csv(args.out, "reproduce-table1", config, header, rows, zero_feedback_bound=loose)
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def _mc_rows(args, config, aics, methods):
    powers = _powers(config)
    rows = []
    for aic in aics:
        for label, fn in methods:
            res = fn(powers, config.sigma_cross, config.n_t, aic,
                     bit_cap=config.bit_cap, mu=config.mu, phi=config.phi)
            al = res.allocation
            st = run_interference_mc(config, al.bits, powers, args.trials, args.seed,
                                     workers=args.workers)
            rows.append((aic, label, al, st))
    return rows


def cmd_reproduce_fig2(args, config):
    aics = args.aic_list or DEFAULT_AICS
    results = _mc_rows(args, config, aics, METHODS)
    header = ["aic", "method", "empirical_mean_interference", "ci_halfwidth", "analytical_bound"]
    rows = [[aic, label, st.mean_sum_interference, st.ci_halfwidth, al.bound_value]
            for aic, label, al, st in results]
    print_table(header, rows)
    write_csv(args.out, "reproduce-fig2", config, header, rows, seed=args.seed, trials=args.trials)
    return EXIT_OK


def cmd_mc(args, config):
    aics = args.aic_list or (config.aic,)
    results = _mc_rows(args, config, aics, METHODS[:1])
    k = config.k
    header = (["aic", "method"] + [f"b{i + 1}" for i in range(k)]
              + ["empirical_mean_interference", "ci_halfwidth", "analytical_bound"]
              + [f"mean_rate_{i + 1}" for i in range(k)]
              + [f"mean_snr_{i + 1}" for i in range(k)]
              + [f"mean_quant_error_{i + 1}" for i in range(k)]
              + ["max_zf_residual"])
    rows = [[aic, label, *al.bits, st.mean_sum_interference, st.ci_halfwidth, al.bound_value,
             *st.mean_rate, *st.mean_snr, *st.mean_quant_error, st.max_zf_residual]
            for aic, label, al, st in results]
    print_table(header[: 5 + k], [r[: 5 + k] for r in rows])
    write_csv(args.out, "mc", config, header, rows, seed=args.seed, trials=args.trials)
    return EXIT_OK


def queue_check_rows(config, n_intervals, seed, power_scale=1.0, delay_scale=1.0):
    rows = []
    for i, spec in enumerate(link_specs(config)):
        spec = type(spec)(lam=spec.lam, d=spec.d * delay_scale, n_b=spec.n_b, t=spec.t)
        sol = min_power(spec, config.sigma_direct[i], config.w, config.log_base)
        p = sol.p_star * power_scale
        budget = DELAY_SLACK * spec.d
        try:
            delay = run_queue_sim(spec, p, config.sigma_direct[i], config.w, n_intervals, seed + i)
            status = "pass" if delay <= budget else "fail"
        except InstabilityError:
            delay, status = float("inf"), "unstable"
        rows.append([i + 1, spec.lam, spec.d, sol.r_bar, sol.p_star, p, delay, budget, status])
    return rows


def cmd_queue_check(args, config):
    rows = queue_check_rows(config, args.intervals, args.seed, args.power_scale, args.delay_scale)
    header = ["link", "lambda", "delay_budget", "r_bar_bps", "p_star", "power",
              "mean_delay", "threshold", "status"]
    print_table(header, rows)
    write_csv(args.out, "queue-check", config, header, rows, seed=args.seed,
              intervals=args.intervals, power_scale=args.power_scale,
              delay_scale=args.delay_scale)
    return EXIT_OK


COMMANDS = {
    "control": cmd_control,
    "mc": cmd_mc,
    "reproduce-table1": cmd_reproduce_table1,
    "reproduce-fig2": cmd_reproduce_fig2,
    "queue-check": cmd_queue_check,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML scenario (default: bundled)")
    common.add_argument("--seed", type=int, default=2013)
    common.add_argument("--trials", type=_positive_int, default=100_000)
    common.add_argument("--aic-list", type=_aic_list, metavar="a,b,c")
    common.add_argument("--out", metavar="PATH", help="write CSV here")
    common.add_argument("--intervals", type=_positive_int, default=1_000_000)
    common.add_argument("--power-scale", type=float, default=1.0, metavar="X")
    common.add_argument("--delay-scale", type=float, default=1.0, metavar="X")
    common.add_argument("--workers", type=_positive_int, default=1)

    parser = _Parser(prog="cogfeedback", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.power_scale <= 0 or args.delay_scale <= 0:
            raise DomainError("--power-scale and --delay-scale must be positive")
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConvergenceError, BracketError, ResourceLimitError, InstabilityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
