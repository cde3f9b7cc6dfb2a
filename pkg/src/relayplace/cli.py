"""Command-line front end.  Exit codes: 0 ok, 1 solver failure, 2 bad input."""

from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from . import io as rio
from .deploy import compare, deploy, monte_carlo_compare
from .mdp import MdpConfig, MdpDiagnostic, ceil_index, solve
from .placement import PlacementProblem, rate_vs_N_table, solve_placement
from .single_relay import (
    solve_exponential_node_power,
    solve_modified_powerlaw_node_power,
    solve_powerlaw_node_power,
)

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _parse_sweep(text: str):
    try:
        start, stop, count = text.split(":")
        values = np.linspace(float(start), float(stop), int(count))
    except ValueError as exc:
        raise InputError(f"--sweep expects start:stop:count, got {text!r}") from exc
    if len(values) < 1:
        raise InputError("--sweep needs count >= 1")
    return values


def _parse_list(text: str, flag: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"{flag} expects a comma-separated list of numbers") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        rio.write_text(out, text)
    else:
        sys.stdout.write(text)


def _require(args, flag: str, attr: str):
    v = getattr(args, attr)
    if v is None:
        raise InputError(f"{flag} is required here")
    return v


def _reject(args, flags: dict, context: str):
    for flag, attr in flags.items():
        if getattr(args, attr, None) not in (None, False):
            raise InputError(f"{flag} does not apply to {context}")


def _positive(value, flag: str):
    if not value > 0:
        raise InputError(f"{flag} must be > 0")
    return value


# -- single-relay -------------------------------------------------------------


def cmd_single_relay(args) -> int:
    snr = _positive(args.pt_over_sigma2, "--pt-over-sigma2")
    if args.model == "exp":
        _reject(args, {"--eta": "eta", "--b-over-l": "b_over_l"}, "--model exp")
        if args.sweep:
            values, key = _parse_sweep(args.sweep), "lambda"
        else:
            values, key = [_positive(_require(args, "--lambda", "lam"), "--lambda")], "lambda"
        if any(v <= 0 for v in values):
            raise InputError("--lambda must be > 0")
        solver = lambda v: solve_exponential_node_power(v, snr)  # noqa: E731
    else:
        _reject(args, {"--lambda": "lam"}, f"--model {args.model}")
        if args.sweep:
            values = _parse_sweep(args.sweep)
        else:
            values = [_require(args, "--eta", "eta")]
        if any(v <= 1 for v in values):
            raise InputError("--eta must be > 1")
        key = "eta"
        if args.model == "powerlaw":
            _reject(args, {"--b-over-l": "b_over_l"}, "--model powerlaw")
            solver = lambda v: solve_powerlaw_node_power(v, snr)  # noqa: E731
        else:
            b = _require(args, "--b-over-l", "b_over_l")
            if not 0 < b < 0.5:
                raise InputError("--b-over-l must lie in (0, 0.5)")
            solver = lambda v: solve_modified_powerlaw_node_power(v, b, snr)  # noqa: E731

    sols = [(float(v), solver(float(v))) for v in values]
    as_csv = args.format == "csv" or (args.sweep and args.format is None)
    if as_csv:
        text = rio.csv_text((key, "x_star", "alpha_star", "R_star"), ((v, s.x_star, s.alpha_star, s.R_star) for v, s in sols))
    elif len(sols) == 1:
        text = rio.json_text({key: sols[0][0], **sols[0][1].to_dict()})
    else:
        text = rio.json_text([{key: v, **s.to_dict()} for v, s in sols])
    _emit(text, args.out)
    return EXIT_OK


# -- place --------------------------------------------------------------------


def _placement_record(N: int, lam: float, snr: float) -> dict:
    if N == 0:
        return {
            "N": 0,
            "lambda": lam,
            "y_over_L": [],
            "z": [],
            "objective": math.exp(lam),
            "G": 1.0,
            "rate": 0.5 * math.log2(1.0 + snr / math.exp(lam)),
            "converged": True,
        }
    sol = solve_placement(PlacementProblem(N, lam))
    if not sol.converged:
        raise RuntimeError(f"placement did not converge for N={N}, lambda={lam}")
    return {
        "N": N,
        "lambda": lam,
        "y_over_L": sol.y_over_L,
        "z": sol.z,
        "objective": sol.objective,
        "G": sol.G,
        "rate": sol.rate(snr, 1.0),
        "converged": sol.converged,
    }


def cmd_place(args) -> int:
    snr = _positive(args.pt_over_sigma2, "--pt-over-sigma2")
    lams = _parse_list(args.lambdas, "--lambdas") if args.lambdas else [_require(args, "--lambda", "lam")]
    for lam in lams:
        _positive(lam, "--lambda")
    if args.n_max is not None:
        if args.n_max < 1:
            raise InputError("--n-max must be >= 1")
        rows = []
        for lam in lams:
            for N, rate, G, sol in rate_vs_N_table(lam, args.n_max, snr, 1.0):
                rows.append((lam, N, rate, G, ";".join(rio.fmt(v) for v in sol.y_over_L)))
        if args.format == "json":
            text = rio.json_text([dict(zip(("lambda", "N", "R_star", "G", "y_over_L"), r)) for r in rows])
        else:
            text = rio.csv_text(("lambda", "N", "R_star", "G", "y_over_L"), rows)
        _emit(text, args.out)
        return EXIT_OK
    N = _require(args, "--n", "n")
    if N < 0:
        raise InputError("--n must be >= 0")
    recs = [_placement_record(N, lam, snr) for lam in lams]
    if args.format == "csv":
        text = rio.csv_text(
            ("lambda", "N", "R_star", "G", "y_over_L"),
            ((r["lambda"], r["N"], r["rate"], r["G"], ";".join(rio.fmt(v) for v in r["y_over_L"])) for r in recs),
        )
    else:
        text = rio.json_text(recs[0] if len(recs) == 1 else recs)
    _emit(text, args.out)
    return EXIT_OK


# -- mdp ----------------------------------------------------------------------


def _mdp_config(args) -> MdpConfig:
    Lam = _positive(_require(args, "--Lambda", "Lambda"), "--Lambda")
    xi = _positive(_require(args, "--xi", "xi"), "--xi")
    try:
        return MdpConfig(
            Lambda=Lam,
            xi=xi,
            state_step=args.state_step,
            action_step=args.action_step,
            tol=args.tol,
            next_state=args.next_state,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _solve_policy(cfg: MdpConfig):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MdpDiagnostic)
        sol = solve(cfg)
    if not sol.converged:
        raise RuntimeError(f"value iteration did not converge within {cfg.iter_cap} iterations")
    return sol


def cmd_mdp(args) -> int:
    cfg = _mdp_config(args)
    sol = _solve_policy(cfg)
    if args.format == "json":
        text = rio.json_text({**sol.metadata(), "s": sol.s, "J": sol.J, "a_star": sol.policy})
        _emit(text, args.out)
    else:
        _emit(rio.policy_csv(sol), args.out)
        if args.out:
            rio.write_json(args.out + ".meta.json", sol.metadata())
    return EXIT_OK


# -- deploy -------------------------------------------------------------------


def _interactive(sol, stdin, stdout) -> int:
    """Text advisor: prints the next distance; reads ``continue d`` or ``end``."""
    n = sol.config.n_states
    Lam = sol.config.Lambda
    k = n - 1
    walked = 0.0
    relays = []

    def advise():
        stdout.write(f"state {rio.fmt((k + 1) / n)} next {rio.fmt(sol.policy[k])}\n")
        stdout.flush()

    advise()
    for line in stdin:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "end":
            stdout.write(f"done relays {len(relays)} at {' '.join(rio.fmt(y) for y in relays)}\n".rstrip() + "\n")
            return EXIT_OK
        if parts[0] == "continue" and len(parts) == 2:
            try:
                d = float(parts[1])
            except ValueError:
                stdout.write(f"error: bad distance {parts[1]!r}\n")
                continue
            if d < 0:
                stdout.write("error: distance must be >= 0\n")
                continue
            walked += d
            relays.append(walked)
            x = (k + 1) / n * math.exp(Lam * d)
            k = int(ceil_index(x / (1.0 + x), n))
            advise()
            continue
        stdout.write("error: expected 'continue <distance>' or 'end'\n")
    return EXIT_OK


def cmd_deploy(args) -> int:
    cfg = _mdp_config(args)
    if args.interactive:
        _reject(args, {"--length": "length", "--samples": "samples"}, "--interactive")
        return _interactive(_solve_policy(cfg), sys.stdin, sys.stdout)
    if (args.length is None) == (args.samples is None):
        raise InputError("give exactly one of --length or --samples")
    if args.length is not None:
        _positive(args.length, "--length")
        sol = _solve_policy(cfg)
        tr = compare(sol, args.length) if args.compare else deploy(sol, args.length)
        text = rio.json_text(
            {
                "line_length": tr.line_length,
                "placements": tr.placements,
                "states": tr.states,
                "relay_count": tr.relay_count,
                "H_sequential": tr.H_sequential,
                "H_offline": tr.H_offline,
                "e_percent": tr.e_percent,
            }
        )
        _emit(text, args.out)
        return EXIT_OK
    if args.samples < 1:
        raise InputError("--samples must be >= 1")
    if args.seed < 0:
        raise InputError("--seed must be >= 0")
    sol = _solve_policy(cfg)
    rep = monte_carlo_compare(sol, cfg.Lambda, cfg.xi, args.samples, args.seed, workers=args.workers)
    if args.out:
        rio.write_trace_csv(args.out, rep.records)
    if args.report:
        rio.write_report_json(args.report, rep)
    if not args.out and not args.report:
        sys.stdout.write(rio.report_json(rep))
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relayplace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))

    sr = sub.add_parser("single-relay", help="one relay, per-node power limit")
    sr.add_argument("--model", choices=("exp", "powerlaw", "modified"), required=True)
    sr.add_argument("--lambda", dest="lam", type=float)
    sr.add_argument("--eta", type=float)
    sr.add_argument("--b-over-l", dest="b_over_l", type=float)
    sr.add_argument("--pt-over-sigma2", dest="pt_over_sigma2", type=float, default=1.0)
    sr.add_argument("--sweep", help="start:stop:count over lambda or eta")
    common(sr)
    sr.set_defaults(func=cmd_single_relay)

    pl = sub.add_parser("place", help="N relays, total power budget")
    pl.add_argument("--lambda", dest="lam", type=float)
    pl.add_argument("--lambdas", help="comma-separated lambda values")
    pl.add_argument("--n", type=int)
    pl.add_argument("--n-max", dest="n_max", type=int, help="tabulate N = 1..n-max")
    pl.add_argument("--pt-over-sigma2", dest="pt_over_sigma2", type=float, default=1.0)
    common(pl)
    pl.set_defaults(func=cmd_place)

    def mdp_flags(sp):
        sp.add_argument("--Lambda", dest="Lambda", type=float)
        sp.add_argument("--xi", type=float)
        sp.add_argument("--state-step", dest="state_step", type=float, default=0.01)
        sp.add_argument("--action-step", dest="action_step", type=float, default=0.001)
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--next-state", dest="next_state", choices=("ceil", "interp"), default="ceil")

    md = sub.add_parser("mdp", help="solve the sequential placement MDP")
    mdp_flags(md)
    common(md)
    md.set_defaults(func=cmd_mdp)

    dp = sub.add_parser("deploy", help="deploy with a solved policy")
    mdp_flags(dp)
    dp.add_argument("--length", type=float, help="one line of this length")
    dp.add_argument("--compare", action="store_true", help="also solve the offline placement for --length")
    dp.add_argument("--samples", type=int, help="random lengths, Exponential(mean 1)")
    dp.add_argument("--seed", type=int, default=0)
    dp.add_argument("--workers", type=int, default=1)
    dp.add_argument("--report", help="report JSON path (with --samples)")
    dp.add_argument("--interactive", action="store_true", help="read 'continue d' / 'end' from stdin")
    common(dp)
    dp.set_defaults(func=cmd_deploy)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"relayplace: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RuntimeError, ArithmeticError) as exc:
        print(f"relayplace: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
