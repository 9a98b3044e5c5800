"""Independent oracles and end-to-end checks for the chain constructions.

Each check compares engine behaviour against a second computational path
that shares no code with the rule engine: dense circuit algebra for the
work qubits, plain integer arithmetic for the clock, exhaustive sweeps for
the comparator, and a full 2^L statevector for the data register.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .builder import BuildSpec, build_initial
from .circuit import CircuitProgram, apply_circuit_power, apply_rounds_prefix
from .engine import (DeadEnd, StepBudget, Trajectory, clock_value, run,
                     step_forward)
from .rules import rule_set
from .state import ChainState, WorkState, as_dense_vector
from .symbols import BULLET, C, C2, CP, D, P, T, TURN

FIDELITY_TOL = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: object
    tolerance: object
    details: list = field(default_factory=list)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"CHECK {self.name} {verdict} {self.measured} {self.tolerance}"


@dataclass
class VerificationReport:
    results: list = field(default_factory=list)

    def add(self, result: CheckResult):
        self.results.append(result)
        return result

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def format(self) -> str:
        lines = [r.line() for r in self.results]
        for r in self.results:
            if not r.passed:
                lines.extend(f"  {d}" for d in r.details[:10])
        return "\n".join(lines)


def _fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def _work_vector(state: ChainState, window) -> np.ndarray:
    if state.dense:
        raise ValueError("work-oracle checks expect the hybrid backend")
    if state.work.support != tuple(window):
        raise ValueError(f"work support {state.work.support} is not the"
                         f" expected window {tuple(window)}")
    return state.work.amps


# -- work-qubit oracle ---------------------------------------------------------


def check_work_oracle(traj: Trajectory, circuit: CircuitProgram,
                      work_in: np.ndarray, window,
                      tier: str) -> CheckResult:
    """Compare the work register against dense circuit algebra at every
    point with a predicted value: oscillation ends and the final state for
    tier I (round prefixes), reset completions for tier II (circuit powers).
    """
    if traj.states is None:
        raise ValueError("needs a trajectory with kept states")
    worst = 1.0
    details = []
    checkpoints = []
    if tier == "I":
        gate_turns = traj.markers.get("4a", ())
        for t in sorted(traj.marker_steps("6a", "6b")):
            rounds_done = sum(1 for g in gate_turns if g < t)
            checkpoints.append((t + 1, ("rounds", rounds_done)))
        checkpoints.append((traj.n_steps, ("rounds", len(gate_turns))))
    elif tier == "II":
        for x, t in enumerate(traj.markers.get("13b", ()), start=1):
            checkpoints.append((t + 1, ("power", x)))
    else:
        raise ValueError("use check_claim_b for the clocked tiers")
    for t, (kind, count) in checkpoints:
        if kind == "rounds":
            expect = apply_rounds_prefix(work_in.copy(), circuit, count)
        else:
            expect = apply_circuit_power(work_in.copy(), circuit, count)
        got = _work_vector(traj.state(t), window)
        f = _fidelity(expect, got)
        worst = min(worst, f)
        if f < 1.0 - FIDELITY_TOL:
            details.append(f"t={t} {kind}={count}: fidelity {f:.3e}")
    return CheckResult("work_oracle", worst >= 1.0 - FIDELITY_TOL,
                       f"min_fidelity={worst:.12f}", f">={1 - FIDELITY_TOL}",
                       details)


def check_claim_b(traj: Trajectory, circuit: CircuitProgram,
                  work_in: np.ndarray, window) -> CheckResult:
    """Wherever the clock pointer shows C with the clock reading k, the work
    register must equal the k-th circuit power of the input."""
    if traj.states is None:
        raise ValueError("needs a trajectory with kept states")
    worst = 1.0
    checked = []
    details = []
    cache = {0: work_in.copy()}
    for t, st in enumerate(traj.states):
        if "C" not in st.rows[CP]:
            continue
        k = clock_value(st)
        if k is None:
            details.append(f"t={t}: malformed clock")
            continue
        if k not in cache:
            prev = max(x for x in cache if x <= k)
            v = cache[prev]
            for _ in range(k - prev):
                v = apply_circuit_power(v.copy(), circuit, 1)
            cache[k] = v
        f = _fidelity(cache[k], _work_vector(st, window))
        worst = min(worst, f)
        checked.append((t, k))
        if f < 1.0 - FIDELITY_TOL:
            details.append(f"t={t} k={k}: fidelity {f:.3e}")
    passed = bool(checked) and worst >= 1.0 - FIDELITY_TOL
    return CheckResult(
        "claim_b", passed,
        f"states={len(checked)} k_max={max((k for _, k in checked), default=None)}"
        f" min_fidelity={worst:.12f}",
        f">={1 - FIDELITY_TOL}", details)


# -- standalone clock harness ----------------------------------------------------


def build_clock_chain(bits: str, pointer: str = "L") -> ChainState:
    """Clock and pointer registers alone, under turn sentinels.

    bits is the stored value, most significant first, one chain site per
    bit; the chain gets one extra bullet site on the left.
    """
    l = len(bits) + 1
    if l < 4:
        raise ValueError("need at least 3 clock bits")
    rows = {
        P: tuple([TURN] + [BULLET] * (l - 3) + [TURN, TURN]),
        D: tuple(["0"] * l),
        C: tuple([BULLET] + list(bits)),
        CP: tuple([BULLET] * (l - 1) + [pointer]),
    }
    return ChainState("III", rows, WorkState((), np.ones(1, dtype=complex)))


def clock_increment(bits: str, rules=None):
    """Run one full clock transition; returns (bits', steps, labels).

    bits' is None when the chain dead-ends instead (the all-ones value has
    no successor and the pointer parks at the left edge).
    """
    state = build_clock_chain(bits)
    rs = rules if rules is not None else rule_set("III")
    labels = []
    for _ in range(8 * len(bits) + 8):
        try:
            state, m = step_forward(state, rs)
        except DeadEnd:
            return None, len(labels), labels, state
        labels.append(m.label)
        if state.rows[CP][-1] == "C":
            return "".join(state.rows[C][1:]), len(labels), labels, state
    raise RuntimeError("clock transition did not terminate")


def check_clock_counter(l_bits: int, sweep_limit: int = None) -> CheckResult:
    """Drive the standalone clock through every increment and compare with
    plain integer arithmetic; verify the all-ones saturation behaviour."""
    top = 2 ** l_bits - 1
    limit = top if sweep_limit is None else min(sweep_limit, top)
    details = []
    for v in range(limit):
        got, _steps, _labels, _ = clock_increment(format(v, f"0{l_bits}b"))
        if got is None or int(got, 2) != v + 1:
            details.append(f"{v} -> {got!r}, expected {v + 1}")
    got, _steps, labels, final = clock_increment("1" * l_bits)
    if got is not None:
        details.append(f"all-ones incremented to {got!r}, expected saturation")
    else:
        if final.rows[CP][1] != "L":
            details.append("saturated pointer did not park at the left edge")
        if set(labels) != {"17"}:
            details.append(f"saturation used rules {sorted(set(labels))}")
    return CheckResult(f"clock_counter[{l_bits}b]", not details,
                       f"increments={limit}+saturation", "exact", details)


# -- standalone comparator harness -------------------------------------------------


def build_comparator_chain(clock_bits: str, target_digits: str) -> ChainState:
    """Clock, pointer, target and second clock under turn sentinels, with
    the pointer in C mode at the right end, ready to start a compare sweep.

    clock_bits spans every site but the first; target_digits is the
    zero-padded digit field, right-aligned, with bullets above it.
    """
    l = len(clock_bits) + 1
    s_b = l - len(target_digits)
    if s_b < 2:
        raise ValueError("target digits must leave a bullet column at site 2")
    rows = {
        P: tuple([TURN] + [BULLET] * (l - 3) + [TURN, TURN]),
        D: tuple(["0"] * l),
        C: tuple([BULLET] + list(clock_bits)),
        CP: tuple([BULLET] * (l - 1) + ["C"]),
        T: tuple([BULLET] * s_b + list(target_digits)),
        C2: tuple([BULLET] * (s_b - 1) + ["0"] + ["1"] * (l - s_b)),
    }
    return ChainState("IV", rows, WorkState((), np.ones(1, dtype=complex)))


_VERDICT_MATCH = frozenset(("28", "30"))
_VERDICT_MISMATCH = frozenset(("25", "26"))


def comparator_verdict(clock_bits: str, target_digits: str):
    """Run the compare sweep to its verdict: 'match' (crossed return mode)
    or 'mismatch' (failure flag raised)."""
    state = build_comparator_chain(clock_bits, target_digits)
    rs = rule_set("IV")
    labels = []
    for _ in range(4 * len(clock_bits) + 8):
        state, m = step_forward(state, rs)
        labels.append(m.label)
        if m.label in _VERDICT_MATCH:
            return "match", labels
        if m.label in _VERDICT_MISMATCH:
            return "mismatch", labels
    raise RuntimeError("comparator sweep did not reach a verdict")


def check_comparator(l_bits: int) -> CheckResult:
    """Exhaustive (clock, target) sweep at l_bits digits: the verdict must
    be 'match' exactly on equality."""
    details = []
    for k in range(2 ** l_bits):
        for x in range(2 ** l_bits):
            clock = "0" + format(k, f"0{l_bits}b")
            target = format(x, f"0{l_bits}b")
            verdict, _ = comparator_verdict(clock, target)
            expect = "match" if k == x else "mismatch"
            if verdict != expect:
                details.append(f"k={k} x={x}: {verdict}, expected {expect}")
    # a set clock bit over the target's bullet padding is a mismatch even
    # though every digit column agrees
    verdict, _ = comparator_verdict("01" + "0" * l_bits,
                                    "0" * (l_bits - 1) + "0")
    if verdict != "mismatch":
        details.append("set bit above the bullet column was not flagged")
    return CheckResult(f"comparator[{l_bits}b]", not details,
                       f"pairs={4 ** l_bits}", "exact", details)


# -- backend cross-check -------------------------------------------------------------


def cross_check_backends(spec: BuildSpec, steps: int) -> CheckResult:
    """Run the same trajectory on the hybrid and dense data backends and
    compare configurations and full data-register vectors at every step."""
    hybrid = build_initial(spec)
    if 2 ** hybrid.L > 1 << 20:
        raise ValueError("dense backend cross-check needs a small chain")
    dense = build_initial(BuildSpec(spec.circuit, spec.tier, spec.work,
                                    spec.target_x, spec.bullet_offset,
                                    dense=True))
    rs = rule_set(spec.tier)
    details = []
    worst = 0.0
    for t in range(steps):
        try:
            hybrid, mh = step_forward(hybrid, rs)
        except DeadEnd:
            try:
                step_forward(dense, rs)
                details.append(f"t={t}: hybrid dead-ends, dense does not")
            except DeadEnd:
                pass
            break
        dense, md = step_forward(dense, rs)
        if (mh.label, mh.site) != (md.label, md.site):
            details.append(f"t={t}: hybrid fired {mh.label}@{mh.site},"
                           f" dense fired {md.label}@{md.site}")
            break
        for reg in hybrid.rows:
            if reg == D:
                continue
            if hybrid.rows[reg] != dense.rows[reg]:
                details.append(f"t={t}: register {reg} differs")
        for site in range(1, hybrid.L + 1):
            hb = hybrid.rows[D][site - 1]
            if hb != "?" and hb != dense.data_bit(site):
                details.append(f"t={t}: data bit {site} differs")
        diff = float(np.linalg.norm(as_dense_vector(hybrid)
                                    - as_dense_vector(dense)))
        worst = max(worst, diff)
        if diff > 1e-10:
            details.append(f"t={t}: data vectors differ by {diff:.3e}")
        if details:
            break
    return CheckResult("backend_equivalence", not details,
                       f"steps={t + 1 if steps else 0} max|dv|={worst:.2e}",
                       "<=1e-10", details)


# -- tier-IV freeze ---------------------------------------------------------------


def check_posttarget_freeze(start: ChainState, max_steps: int) -> CheckResult:
    """After the compare sweep succeeds, the data and clock registers and
    the work amplitudes must never change again."""
    frozen = {}
    details = []

    def observer(t, state, match):
        if match is not None and match.label in _VERDICT_MATCH and not frozen:
            frozen["at"] = t
            frozen["d"] = state.rows[D]
            frozen["c"] = state.rows[C]
            frozen["t"] = state.rows[T]
            frozen["work"] = state.work.amps.copy()
            frozen["support"] = state.work.support
            return
        if frozen and t > frozen["at"]:
            if state.rows[D] != frozen["d"]:
                details.append(f"t={t}: data register changed")
            if state.rows[C] != frozen["c"]:
                details.append(f"t={t}: clock register changed")
            if state.rows[T] != frozen["t"]:
                details.append(f"t={t}: target register changed")
            if (state.work.support != frozen["support"]
                    or not np.array_equal(state.work.amps, frozen["work"])):
                details.append(f"t={t}: work state changed")

    traj = run(start, StepBudget(max_steps, "step_limit"), keep_states=False,
               observer=observer)
    n_match = len(traj.marker_steps(*_VERDICT_MATCH))
    if n_match != 1:
        details.append(f"{n_match} compare-success markers, expected 1")
    return CheckResult(
        "posttarget_freeze", not details,
        f"success_at={frozen.get('at')} tail={traj.n_steps - frozen.get('at', 0)}"
        f" stop={traj.stop_reason}", "frozen", details[:10])


# -- tier-III phase structure -----------------------------------------------------


def check_phase_structure(traj: Trajectory) -> CheckResult:
    """Label-sequence shape of a clocked run: a clearing prefix (19.. 20 21),
    then repeating application / hand-off / clock-update blocks."""
    labels = traj.labels
    l = traj.start.L
    details = []
    prefix = labels[:l - 1]
    expect = ["19"] * (l - 3) + ["20", "21"]
    if prefix != expect:
        details.append(f"prefix {prefix[:6]}... != 19^(L-3),20,21")
    handoffs = traj.markers.get("13a", [])
    wakes = traj.markers.get("14", [])
    if len(wakes) > len(handoffs) or len(handoffs) - len(wakes) > 1:
        details.append(f"{len(handoffs)} hand-offs vs {len(wakes)} pointer wakes")
    for a, b in zip(handoffs, wakes):
        if b != a + 1:
            details.append(f"wake at {b} does not follow hand-off at {a}")
            break
    return CheckResult("phase_structure", not details,
                       f"blocks={len(wakes)}", "exact", details)
