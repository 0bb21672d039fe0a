"""Command-line front end: ``ipdyn {ip,discord,evolve,kinks,verify,sweep}``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 invalid state, 4 bad channel specification.

Any long option may also be given in a ``--config`` file of ``key=value``
lines (``#`` starts a comment); options on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import dynamics, ip, verify
from .channels import ChannelFamily, parse_channel_spec
from .discord import discord
from .errors import ChannelSpecError, ConstantIP, InvalidState, ParamOutOfRange, UnknownChannel
from .states import XState, is_valid, parse_state_literal, to_density_matrix, validate

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_INVALID_STATE = 3
EXIT_CHANNEL = 4

CSV_COLUMNS = ("t", "r", "s", "c1", "c2", "c3", "ip", "branch")
SWEEP_COLUMNS = ("c1", "c2", "c3", "hasKink", "tStar")
COMMANDS = ("ip", "discord", "evolve", "kinks", "verify", "sweep")


class UsageError(Exception):
    """Malformed command-line or config input (exit code 2)."""


def fmt(x: float) -> str:
    """12 significant digits, locale independent, with ``-0`` folded to ``0``."""
    x = float(x)
    if x == 0.0:
        x = 0.0
    return f"{x:.12g}"


def _state(text: str) -> XState:
    try:
        st = parse_state_literal(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    problems = validate(st)
    if problems:
        raise InvalidState("; ".join(str(p) for p in problems))
    return st


def _grid(family: ChannelFamily, tmax, points: int) -> np.ndarray:
    if points < 1:
        raise UsageError("--points must be at least 1")
    if points == 1:
        return np.zeros(1)
    tmax = family.default_tmax() if tmax is None else tmax
    if not (tmax > 0 and math.isfinite(tmax)):
        raise UsageError("--tmax must be positive")
    return np.linspace(0.0, tmax, points)


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# --- commands -------------------------------------------------------------------


def cmd_ip(args) -> int:
    st = _state(args.state)
    br = ip.ip_xstate(st)
    print(f"ip: {fmt(br.value)}")
    print(f"branch: {br.active}")
    print(f"M11: {fmt(br.m11)}  M22: {fmt(br.m22)}  M33: {fmt(br.m33)}")
    print(f"route: {br.route}")
    if args.oracle:
        rho = to_density_matrix(st)
        general = ip.ip_general(rho)
        brute, direction = ip.ip_bruteforce(rho, coarse_grid=args.oracle_grid)
        routes = [br.value, general, brute]
        print(f"general: {fmt(general)}")
        print(f"bruteforce: {fmt(brute)}  direction: ({', '.join(fmt(x) for x in direction)})")
        if st.is_bell_diagonal:
            bell = ip.ip_bell_diagonal(st.c)
            routes.append(bell)
            print(f"bell closed form: {fmt(bell)}")
        print(f"max route discrepancy: {max(routes) - min(routes):.3e}")
    return EXIT_OK


def cmd_discord(args) -> int:
    st = _state(args.state)
    res = discord(to_density_matrix(st), side=args.side, grid=args.discord_grid)
    print(f"discord: {fmt(res.value)}")
    print(f"measured side: {res.side}")
    print(f"optimal direction: theta={fmt(res.argmin.theta)} phi={fmt(res.argmin.phi)}")
    return EXIT_OK


def write_trajectory_csv(tr: dynamics.Trajectory, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    with_discord = tr.discord_values is not None
    writer.writerow(CSV_COLUMNS + (("discord",) if with_discord else ()))
    for k, t in enumerate(tr.times):
        row = [fmt(t), *(fmt(v) for v in tr.states[k].as_tuple()), fmt(tr.ip_values[k]), tr.branches[k]]
        if with_discord:
            row.append(fmt(tr.discord_values[k]))
        writer.writerow(row)


def _trajectory(args) -> dynamics.Trajectory:
    st = _state(args.state)
    fam = parse_channel_spec(args.channel)
    return dynamics.evolve(
        fam, st, _grid(fam, args.tmax, args.points), with_discord=args.discord, discord_side=args.side
    )


def cmd_evolve(args) -> int:
    tr = _trajectory(args)
    with _output(args.output) as fh:
        write_trajectory_csv(tr, fh)
    return EXIT_OK


def _print_events(events, symbol: str, label: str) -> None:
    if not events:
        print(f"{label}: no sudden change")
        return
    for ev in events:
        print(
            f"{label}: sudden change at {symbol}* = {fmt(ev.t_star)}  "
            f"slopes {fmt(ev.left_slope)} -> {fmt(ev.right_slope)}  "
            f"branch {ev.branch_before} -> {ev.branch_after}"
        )


def cmd_kinks(args) -> int:
    tr = _trajectory(args)
    if len(tr) < 3:
        raise UsageError("kink detection needs at least 3 grid points")
    fam = tr.family
    symbol = fam.time_symbol
    events = dynamics.detect_kinks(tr, slope_jump_threshold=args.threshold)
    _print_events(events, symbol, "ip")
    try:
        predicted = dynamics.predict_first_kink(fam, tr.initial)
    except ConstantIP as exc:
        predicted = None
        print(f"prediction: constant IP ({exc})")
    else:
        if predicted is not None:
            line = f"prediction: {symbol}* = {fmt(predicted)}"
            if events:
                line += f"  difference {abs(events[0].t_star - predicted):.3e}"
            print(line)
    if fam.name == "amplitude" and tr.initial.is_bell_diagonal:
        holds = dynamics.predict_amplitude_kink(tr.initial.c)
        print(f"prediction: sufficient condition |c3| < max(|c1|, |c2|) {'holds' if holds else 'fails'}")
    if fam.name == "bath":
        print(dynamics.BATH_CAPTION_NOTE)
    if args.discord:
        _print_events(dynamics.detect_discord_kinks(tr), symbol, "discord")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    results = verify.run_all(seed=args.seed, samples=args.samples, canary=args.canary)
    print(f"seed {args.seed}, samples {args.samples}")
    print(verify.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED


def parse_sweep_grid(text: str) -> dict:
    """Parse ``"c1=a:b:n,c2=v,c3=a:b:n"`` into value arrays per correlation."""
    axes = {}
    for item in filter(None, (x.strip() for x in text.split(","))):
        key, eq, rng = item.partition("=")
        key = key.strip()
        if not eq or key not in ("c1", "c2", "c3") or key in axes:
            raise UsageError(f"bad sweep axis {item!r}")
        parts = rng.split(":")
        try:
            if len(parts) == 1:
                axes[key] = np.array([float(parts[0])])
            elif len(parts) == 3:
                n = int(parts[2])
                if n < 1:
                    raise ValueError
                axes[key] = np.linspace(float(parts[0]), float(parts[1]), n)
            else:
                raise ValueError
        except ValueError as exc:
            raise UsageError(f"bad sweep range {item!r}; expected a:b:n or a single value") from exc
    missing = {"c1", "c2", "c3"} - set(axes)
    if missing:
        raise UsageError(f"sweep grid lacks {sorted(missing)}")
    return axes


def cmd_sweep(args) -> int:
    fam = parse_channel_spec(args.channel)
    axes = parse_sweep_grid(args.grid)
    times = _grid(fam, args.tmax, args.points)
    if len(times) < 3:
        raise UsageError("kink detection needs at least 3 grid points")
    skipped = 0
    with _output(args.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for c1 in axes["c1"]:
            for c2 in axes["c2"]:
                for c3 in axes["c3"]:
                    st = XState.bell(float(c1), float(c2), float(c3))
                    if not is_valid(st):
                        skipped += 1
                        continue
                    events = dynamics.detect_kinks(dynamics.evolve(fam, st, times), args.threshold)
                    t_star = fmt(events[0].t_star) if events else ""
                    writer.writerow([fmt(c1), fmt(c2), fmt(c3), int(bool(events)), t_star])
    print(f"skipped {skipped} invalid grid points", file=sys.stderr)
    return EXIT_OK


# --- argument parsing -------------------------------------------------------------


def _add_trajectory_options(p: argparse.ArgumentParser, state: bool = True) -> None:
    if state:
        p.add_argument("state", help='state literal "c1,c2,c3" or "r,s,c1,c2,c3"')
    p.add_argument("--channel", required=True, help='channel spec, e.g. "phase:tau=1" or "colored:a=1,tau=0.5"')
    p.add_argument("--tmax", type=float, default=None, help="end of the time grid (default depends on channel)")
    p.add_argument("--points", type=int, default=2001, help="number of grid points (default 2001)")
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipdyn", description="Interferometric power of two-qubit X states under noise.")
    parser.add_argument("--config", help="file of key=value defaults; command-line flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ip", help="IP of a state and its branch values")
    p.add_argument("state", help='state literal "c1,c2,c3" or "r,s,c1,c2,c3"')
    p.add_argument("--oracle", action="store_true", help="also run the general and brute-force routes")
    p.add_argument("--oracle-grid", type=int, default=64, help="brute-force coarse grid size (squared points)")
    p.set_defaults(func=cmd_ip)

    p = sub.add_parser("discord", help="quantum discord of a state")
    p.add_argument("state", help='state literal "c1,c2,c3" or "r,s,c1,c2,c3"')
    p.add_argument("--side", choices=("A", "B"), default="A", help="measured qubit")
    p.add_argument("--discord-grid", type=int, default=64, help="polar-angle points of the coarse scan")
    p.set_defaults(func=cmd_discord)

    p = sub.add_parser("evolve", help="CSV trajectory under a channel family")
    _add_trajectory_options(p)
    p.add_argument("--discord", action="store_true", help="add a discord column")
    p.add_argument("--side", choices=("A", "B"), default="A", help="measured qubit for discord")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("kinks", help="sudden changes along a trajectory")
    _add_trajectory_options(p)
    p.add_argument("--discord", action="store_true", help="also look for discord sudden changes")
    p.add_argument("--side", choices=("A", "B"), default="A", help="measured qubit for discord")
    p.add_argument("--threshold", type=float, default=dynamics.SLOPE_JUMP_THRESHOLD, help="minimum slope jump")
    p.set_defaults(func=cmd_kinks)

    p = sub.add_parser("verify", help="run the seeded verification suites")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--samples", type=int, default=1000, help="random samples per suite (default 1000)")
    p.add_argument("--canary", action="store_true", help="plant a sign error to check the harness fails")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="kink map over a grid of Bell-diagonal states")
    _add_trajectory_options(p, state=False)
    p.add_argument("--grid", required=True, help='e.g. "c1=0.4,c2=0.2,c3=0:0.5:11"')
    p.add_argument("--threshold", type=float, default=dynamics.SLOPE_JUMP_THRESHOLD, help="minimum slope jump")
    p.set_defaults(func=cmd_sweep)
    return parser


def read_config(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq or not key.strip():
            raise UsageError(f"{path}:{n}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _config_argv(parser: argparse.ArgumentParser, command: str, config: dict) -> list:
    """Translate config entries into leading command-line tokens for ``command``."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    by_dest = {a.dest: a for a in sub._actions}
    tokens = []
    for key, value in config.items():
        action = by_dest.get(key)
        if action is None or key in ("help", "func"):
            raise UsageError(f"config key {key!r} does not apply to {command!r}")
        if not action.option_strings:
            continue  # positionals come from the command line only
        flag = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"config key {key!r} expects a boolean")
        else:
            tokens.extend([flag, value])
    return tokens


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    try:
        known, _ = pre.parse_known_args(argv)
        pos = next((i for i, a in enumerate(argv) if a in COMMANDS), None)
        if known.config and pos is not None:
            config = read_config(known.config)
            # config tokens go first so explicit flags parsed later override them
            argv = argv[: pos + 1] + _config_argv(parser, argv[pos], config) + argv[pos + 1 :]
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidState as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EXIT_INVALID_STATE
    except (UnknownChannel, ChannelSpecError) as exc:
        print(f"channel error: {exc}", file=sys.stderr)
        return EXIT_CHANNEL
    except (ParamOutOfRange, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
