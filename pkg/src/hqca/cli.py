"""Command-line front end: compile, run, walk and verify over instance files.

Exit codes: 0 success, 1 verification failure, 2 input error.  Output is
deterministic for a fixed instance file and seed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .builder import build_initial, parse_instance_file, work_window
from .circuit import InstanceParseError
from .engine import (Ambiguous, StepBudget, clock_value, run, verify_uog,
                     write_trace)
from .state import validate_config
from .symbols import format_dimension_audit
from .verify import (VerificationReport, check_claim_b, check_clock_counter,
                     check_comparator, check_work_oracle,
                     cross_check_backends)
from .walk import (WalkDistribution, WalkLine, distribution_dump, evolve,
                   limiting_distribution, time_averaged_distribution)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2


def _out_path(path: str) -> str:
    """Relative output files land in $HQCA_OUT when it is set."""
    base = os.environ.get("HQCA_OUT")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _load(path):
    try:
        return parse_instance_file(path)
    except InstanceParseError as err:
        print(f"error: {path}: {err}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT_ERROR)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT_ERROR)


def _build(instance):
    try:
        return build_initial(instance.spec)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT_ERROR)


def cmd_compile(args) -> int:
    instance = _load(args.instance)
    state = _build(instance)
    print(state.snapshot())
    print(format_dimension_audit(instance.spec.tier))
    report = validate_config(state)
    if not report.ok:
        print(f"invalid configuration: {report}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print("configuration valid")
    return EXIT_OK


def cmd_run(args) -> int:
    instance = _load(args.instance)
    state = _build(instance)
    budget = StepBudget(args.budget or instance.options.get("budget", 10 ** 6),
                        "dead_end")
    try:
        traj = run(state, budget, keep_states=args.keep_states,
                   snapshot_every=args.snapshot_every
                   or instance.options.get("snapshot_every"))
    except Ambiguous as err:
        print(f"error: ambiguous transition: {err}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    if args.trace:
        with open(_out_path(args.trace), "w", encoding="utf-8") as fh:
            write_trace(traj, fh)
    ck = clock_value(traj.final)
    print(f"steps={traj.n_steps} status={traj.stop_reason}"
          f" clock={ck if ck is not None else '-'}")
    for label in sorted(traj.markers):
        if label in ("28", "30"):
            for t in traj.markers[label]:
                print(f"marker Rx rule {label} at step {t}")
    return EXIT_OK


def cmd_walk(args) -> int:
    instance = _load(args.instance)
    opts = instance.options
    if args.samples == 0:
        print("error: --samples must be positive", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.length:
        l = args.length
    else:
        state = _build(instance)
        budget = StepBudget(opts.get("budget", 10 ** 6), "dead_end")
        traj = run(state, budget, keep_states=False)
        l = traj.n_steps + 1
    line = WalkLine(l)
    rng = np.random.default_rng(args.seed if args.seed is not None
                                else opts.get("seed", 0))
    print(f"line l={l}")
    if args.tau is not None:
        amps = evolve(line, args.tau)
        print(f"p_tau tau={args.tau}")
        print(distribution_dump(WalkDistribution(np.abs(amps) ** 2)))
    tau_star = args.tau_star if args.tau_star is not None else \
        opts.get("tau_star", 100.0 * l)
    samples = args.samples or opts.get("samples", 10 ** 4)
    avg = time_averaged_distribution(line, tau_star, samples, rng)
    pi = limiting_distribution(line)
    tv = avg.total_variation(pi)
    far = float(avg.probabilities[np.arange(l) > (1 - args.fraction) * l].sum())
    print(f"tau_star={tau_star} samples={samples}")
    print(f"tv_to_limiting={tv:.6f}")
    print(f"p_star(F={args.fraction})={far:.6f} deficit={args.fraction - far:.6f}")
    if args.dump:
        print(distribution_dump(avg))
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = _load(args.instance)
    spec = instance.spec
    suites = ("uog", "oracle", "clock", "comparator", "backends")
    wanted = suites if args.suite == "all" else (args.suite,)
    if args.suite != "all" and args.suite not in suites:
        print(f"error: unknown suite {args.suite!r}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    report = VerificationReport()
    budget = StepBudget(instance.options.get("budget", 200_000), "dead_end")
    if {"uog", "oracle"} & set(wanted):
        state = _build(instance)
        traj = run(state, budget, keep_states=True, check_uog=True)
        window = work_window(spec.tier, spec.circuit.n_qubits,
                             spec.circuit.depth)
        if "uog" in wanted:
            uog = verify_uog(traj, work_window=window)
            report.add(
                _as_check("uog", uog.ok,
                          f"states={uog.checked_states}",
                          violations=[str(v) for v in uog.violations]))
        if "oracle" in wanted:
            work_in = _work_input(spec)
            if spec.tier in ("I", "II"):
                report.add(check_work_oracle(traj, spec.circuit, work_in,
                                             window, spec.tier))
            else:
                report.add(check_claim_b(traj, spec.circuit, work_in, window))
    if "clock" in wanted:
        report.add(check_clock_counter(args.l_bits))
    if "comparator" in wanted:
        report.add(check_comparator(min(args.l_bits, 4)))
    if "backends" in wanted:
        if 2 ** (build_initial(spec).L) <= 1 << 16:
            report.add(cross_check_backends(spec, steps=500))
        else:
            print("backends suite skipped: chain too long for the dense"
                  " backend", file=sys.stderr)
    print(report.format())
    return EXIT_OK if report.ok else EXIT_VERIFY_FAILED


def _work_input(spec) -> np.ndarray:
    n = spec.circuit.n_qubits
    if spec.work is None:
        v = np.zeros(2 ** n, dtype=complex)
        v[0] = 1.0
        return v
    if isinstance(spec.work, str):
        v = np.zeros(2 ** n, dtype=complex)
        v[int(spec.work, 2)] = 1.0
        return v
    return np.asarray(spec.work, dtype=complex)


def _as_check(name, passed, measured, violations=()):
    from .verify import CheckResult
    return CheckResult(name, passed, measured, "clean", list(violations))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hqca",
        description="layered qudit-chain automaton simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="build and print the initial state")
    p.add_argument("instance")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="drive the unique forward trajectory")
    p.add_argument("instance")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--snapshot-every", type=int, default=None)
    p.add_argument("--trace", help="write a trace file")
    p.add_argument("--keep-states", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("walk", help="quantum-walk distributions and bounds")
    p.add_argument("instance")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--tau-star", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--length", type=int, default=None,
                   help="line length (skip the trajectory run)")
    p.add_argument("--dump", action="store_true")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("instance")
    p.add_argument("--suite", default="all",
                   help="uog | oracle | clock | comparator | backends | all")
    p.add_argument("--l-bits", type=int, default=4)
    p.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as err:  # input helpers bail out with an exit code
        return err.code if isinstance(err.code, int) else EXIT_INPUT_ERROR
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
