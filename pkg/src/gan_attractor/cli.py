"""Command-line front end: configure, run, and emit results as CSV + JSON.

Subcommands: ``basins`` (basin-of-attraction experiment), ``capacity``
(bits-per-weight tables), ``check-f`` (characteristic admissibility report),
``ff-verify`` (feed-forward equivalence check), ``simulate`` (single
trajectory dump).

Every CSV written to a file gets a JSON sidecar with the full configuration,
seed, version, and wall-clock duration, so any emitted number can be
reproduced byte-for-byte.  Numeric fields use shortest round-trip formatting.

Exit codes: 0 success, 1 configuration error (the diagnostic names the
offending key), 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import time
from typing import Optional

import numpy as np

from . import __version__
from .capacity import BracketError, CapacityParams, alpha_critical, capacity_interacting, \
    capacity_simple, entropy_bits
from .characteristic import CharacteristicSpec, check_conditions, estimate_moments
from .core import GanSpec, build_network, hamming_distance, perturb_state, random_pattern_set
from .dynamics import run_to_attractor, step_sync
from .experiments import BasinConfig, basin_curve, verify_ff_equivalence
from .learning import LearnConfig, hebb_weights
from .seeding import RunSeed

ENV_THREADS = "GAN_ATTRACTOR_THREADS"


class ConfigError(Exception):
    """Bad flag, key, or value; message names the offender."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(out: Optional[str], header, rows, record: dict) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w") as fh:
        fh.write(text)
    sidecar = os.path.splitext(out)[0] + ".json"
    with open(sidecar, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_record(config: dict, seed: int, t0: float) -> dict:
    return {"config": config, "seed": seed, "version": __version__,
            "duration_ms": (time.monotonic() - t0) * 1000.0}


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(ENV_THREADS)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a flat key/value object")
    return data


def _apply_config_file(args, parser_defaults: dict) -> None:
    """Flags override file keys: file values fill only arguments left at default."""
    if not getattr(args, "config", None):
        return
    data = _load_config_file(args.config)
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in parser_defaults:
            raise ConfigError(f"config: unknown key {key!r}")
        if getattr(args, dest) == parser_defaults[dest]:
            setattr(args, dest, value)


def _characteristic_from_args(args) -> CharacteristicSpec:
    kind = args.kind
    try:
        if kind == "linear":
            if not args.coeffs:
                raise ConfigError("kind=linear requires --coeffs")
            return CharacteristicSpec.linear([float(c) for c in args.coeffs.split(",")])
        if kind in ("correlation", "grandmother"):
            if not args.template:
                raise ConfigError(f"kind={kind} requires --template")
            bits = [int(b) for b in args.template.split(",")]
            return CharacteristicSpec(kind, template=tuple(bits))
        if kind == "boolean-table":
            if not args.table:
                raise ConfigError("kind=boolean-table requires --table")
            return CharacteristicSpec.boolean_table([float(v) for v in args.table.split(",")])
        return CharacteristicSpec(kind)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _cmd_basins(args) -> int:
    seed = RunSeed(args.seed)
    learn = LearnConfig(mode=args.learn, kappa=args.kappa, max_epochs=args.max_epochs)
    grid = tuple(float(d) for d in args.d0_grid.split(",")) if args.d0_grid else None
    try:
        config = BasinConfig(n_neurons=args.n, seed=seed, q_vars=args.q, alpha=args.alpha,
                             d0_grid=grid, n_sets=args.sets, model=args.model, learn=learn,
                             characteristic=_characteristic_from_args(args),
                             max_iters=args.max_iters, rho=args.rho)
    except ValueError as exc:
        raise ConfigError(str(exc))
    t0 = time.monotonic()
    curve = basin_curve(config, workers=_threads(args))
    rows = [(r.d0, r.mean_df, r.stderr_df, r.n_trials) for r in curve.rows]
    record = _run_record(_config_dict(config), args.seed, t0)
    record["excluded_sets"] = curve.excluded_sets
    record["cycle_counts"] = list(curve.cycle_counts)
    _write_csv(args.out, ("d0", "mean_df", "stderr", "n_trials"), rows, record)
    return 0


def _config_dict(config) -> dict:
    out = dataclasses.asdict(config)
    out["seed"] = config.seed.master
    return out


def _parse_rhos(text: str):
    try:
        return [float(r) for r in text.split(",")]
    except ValueError:
        raise ConfigError(f"rho: expected a comma-separated list of numbers, got {text!r}")


def _cmd_capacity(args) -> int:
    t0 = time.monotonic()
    rows = []
    for rho in _parse_rhos(args.rho):
        try:
            if args.mode == "simple":
                sol = capacity_simple(rho)
                lam, k, var_phi = 0.0, 0.0, rho * (1.0 - rho)
                root, alpha_c, e = sol.root, sol.alpha_c, sol.e_bits
            elif args.mode == "general":
                var_phi = args.var_phi if args.var_phi is not None else rho * (1.0 - rho)
                params = CapacityParams(rho=rho, lam=args.lam, kappa=args.kappa, var_phi=var_phi)
                sol = alpha_critical(params)
                lam, k = args.lam, params.K
                root, alpha_c, e = sol.root, sol.alpha_c, sol.e_bits
            else:  # interacting
                var_phi = args.var_phi if args.var_phi is not None else rho * (1.0 - rho)
                e = capacity_interacting(rho, args.lam, var_phi)
                lam, k = args.lam, 0.0
                root = capacity_simple(rho).root
                alpha_c = _alpha_from_e(e, rho, args.lam)
        except ValueError as exc:
            raise ConfigError(str(exc))  # parameter errors already name the key
        rows.append((rho, lam, k, var_phi, root, alpha_c, e))
    record = _run_record({"mode": args.mode, "rho": args.rho, "lam": args.lam,
                          "kappa": args.kappa, "var_phi": args.var_phi}, 0, t0)
    _write_csv(args.out, ("rho", "lambda", "K", "var_phi", "root", "alpha_c", "E"), rows, record)
    return 0


def _alpha_from_e(e: float, rho: float, lam: float) -> float:
    return e * (1.0 + lam) / entropy_bits(rho)


def _cmd_check_f(args) -> int:
    t0 = time.monotonic()
    spec = _characteristic_from_args(args)
    try:
        moments = estimate_moments(spec, args.q, args.rho, seed=RunSeed(args.seed),
                                   samples=args.samples)
        report = check_conditions(moments, args.n, c=args.c)
    except ValueError as exc:
        raise ConfigError(str(exc))
    rows = [(moments.mean, moments.second_moment, moments.variance,
             report.cond1, report.cond2, report.cond3)]
    record = _run_record({"kind": args.kind, "q": args.q, "n": args.n, "rho": args.rho,
                          "c": args.c, "method": moments.method}, args.seed, t0)
    _write_csv(args.out, ("mean", "second_moment", "variance", "cond1", "cond2", "cond3"),
               rows, record)
    return 0


def _cmd_ff_verify(args) -> int:
    t0 = time.monotonic()
    seed = RunSeed(args.seed)
    rng = seed.stream(90)
    spec = GanSpec(args.n, args.q,
                   CharacteristicSpec.linear(rng.normal(size=args.q) / args.q),
                   interacting=False)
    w = rng.normal(size=(args.q, args.n, args.n)) / np.sqrt(args.n)
    for a in range(args.q):
        np.fill_diagonal(w[a], 0.0)
    net = build_network(spec, w)
    worst = verify_ff_equivalence(net, args.trials, seed)
    record = _run_record({"n": args.n, "q": args.q, "trials": args.trials}, args.seed, t0)
    _write_csv(args.out, ("n", "q", "trials", "max_abs_diff"),
               [(args.n, args.q, args.trials, worst)], record)
    return 0


def _cmd_simulate(args) -> int:
    t0 = time.monotonic()
    seed = RunSeed(args.seed)
    spec = GanSpec(args.n, args.q, _characteristic_from_args(args), interacting=False)
    patterns = random_pattern_set(args.n, args.q, args.p, args.rho, seed.stream(1))
    weights = hebb_weights(patterns, spec, LearnConfig(mode=args.learn, kappa=args.kappa,
                                                       max_epochs=args.max_epochs))
    net = build_network(spec, weights)
    reference = patterns.bits[0]
    start = perturb_state(reference, args.d0, seed.stream(2))
    state = start
    prev = None
    rows = [(0, hamming_distance(state, reference))]
    for step in range(1, args.max_iters + 1):
        nxt = step_sync(net, state)
        rows.append((step, hamming_distance(nxt, reference)))
        if np.array_equal(nxt, state) or (prev is not None and np.array_equal(nxt, prev)):
            break
        prev = state
        state = nxt
    res = run_to_attractor(net, start, reference, args.max_iters)
    record = _run_record({"n": args.n, "q": args.q, "p": args.p, "d0": args.d0,
                          "learn": args.learn, "rho": args.rho, "kind": args.kind,
                          "max_iters": args.max_iters}, args.seed, t0)
    record["cycle_length"] = res.cycle_length
    record["iterations"] = res.iterations
    record["d_f"] = res.d_f
    _write_csv(args.out, ("step", "distance"), rows, record)
    return 0


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0,
                     help="master seed (fixed default, never wall clock)")
    sub.add_argument("--out", default=None, help="CSV path ('-' or omit for stdout)")
    sub.add_argument("--config", default=None, help="flat JSON key/value config file")
    sub.add_argument("--threads", type=int, default=None,
                     help=f"worker threads (default: {ENV_THREADS} or cpu count)")


def _add_characteristic_flags(sub):
    sub.add_argument("--kind", default="parity",
                     choices=["parity", "linear", "correlation", "grandmother",
                              "boolean-table", "io-code"])
    sub.add_argument("--coeffs", default=None, help="comma list, linear kind")
    sub.add_argument("--template", default=None, help="comma bit list, correlation/grandmother")
    sub.add_argument("--table", default=None, help="comma list of 2^Q values, boolean-table")


def build_parser() -> _Parser:
    parser = _Parser(prog="gan-attractor",
                     description="attractor networks of multi-bit neurons: "
                                 "simulation and capacity analysis")
    subs = parser.add_subparsers(dest="command", required=True)

    b = subs.add_parser("basins", help="basin-of-attraction experiment")
    b.add_argument("--model", default="gan", choices=["gan", "multistate"])
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--q", type=int, default=2)
    b.add_argument("--alpha", type=float, default=0.05)
    b.add_argument("--sets", type=int, default=100)
    b.add_argument("--rho", type=float, default=0.5)
    b.add_argument("--d0-grid", default=None, help="comma list; default depends on model")
    b.add_argument("--learn", default="centered-hebb",
                   choices=["literal-hebb", "centered-hebb", "perceptron"])
    b.add_argument("--kappa", type=float, default=0.0)
    b.add_argument("--max-epochs", type=int, default=200)
    b.add_argument("--max-iters", type=int, default=100)
    _add_characteristic_flags(b)
    _add_common(b)
    b.set_defaults(func=_cmd_basins)

    c = subs.add_parser("capacity", help="bits-per-weight tables")
    c.add_argument("--mode", default="simple", choices=["simple", "general", "interacting"])
    c.add_argument("--rho", default="0.5", help="comma-separated list")
    c.add_argument("--lam", type=float, default=0.0, help="internal load Q/N")
    c.add_argument("--kappa", type=float, default=0.0, help="raw margin demand")
    c.add_argument("--var-phi", type=float, default=None,
                   help="characteristic variance (default rho(1-rho))")
    _add_common(c)
    c.set_defaults(func=_cmd_capacity)

    f = subs.add_parser("check-f", help="characteristic admissibility report")
    f.add_argument("--q", type=int, required=True)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--rho", type=float, default=0.5)
    f.add_argument("--c", type=float, default=0.1, help="tolerance factor for 'much less than'")
    f.add_argument("--samples", type=int, default=None)
    _add_characteristic_flags(f)
    _add_common(f)
    f.set_defaults(func=_cmd_check_f)

    v = subs.add_parser("ff-verify", help="feed-forward equivalence check")
    v.add_argument("--n", type=int, default=20)
    v.add_argument("--q", type=int, default=5)
    v.add_argument("--trials", type=int, default=100)
    _add_common(v)
    v.set_defaults(func=_cmd_ff_verify)

    s = subs.add_parser("simulate", help="single trajectory dump")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--q", type=int, default=2)
    s.add_argument("--p", type=int, default=5)
    s.add_argument("--d0", type=float, default=0.1)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--learn", default="centered-hebb",
                   choices=["literal-hebb", "centered-hebb"])
    s.add_argument("--kappa", type=float, default=0.0)
    s.add_argument("--max-epochs", type=int, default=200)
    s.add_argument("--max-iters", type=int, default=50)
    _add_characteristic_flags(s)
    _add_common(s)
    s.set_defaults(func=_cmd_simulate)

    for sub in (b, c, f, v, s):
        sub.set_defaults(_defaults={a.dest: a.default for a in sub._actions})

    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args, args._defaults)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("run with --help for usage", file=sys.stderr)
        return 1
    except BracketError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
