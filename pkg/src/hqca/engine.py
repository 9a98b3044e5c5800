"""Trajectory engine: unique-forward stepping, markers, and structure checks.

A valid chain state has exactly one applicable forward rule (or none, at a
dead end) and exactly one reverse rule (the start state of tiers I-III has
none; the tier-IV start state admits a short reverse tail of at most 3L
steps before a dead end).  run() walks the unique forward path, recording
rule labels as markers; long runs can drop full states and keep rolling
digests plus periodic snapshots so that memory stays O(L) per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rules import FORWARD, REVERSE, RuleSet, applicable, apply, rule_set
from .state import ChainState
from .symbols import BULLET, C, CP


class DeadEnd(Exception):
    """No forward rule applies: the walk line ends here."""


class Ambiguous(Exception):
    """More than one rule applies where the construction promises one."""

    def __init__(self, state, matches, direction):
        labels = [(m.label, m.site) for m in matches]
        super().__init__(f"{len(matches)} {direction} matches: {labels}")
        self.state = state
        self.matches = matches


def step_forward(state: ChainState, rules: RuleSet | None = None,
                 promote: bool = False):
    """(successor, match) along the unique forward transition."""
    matches = applicable(state, FORWARD, rules)
    if not matches:
        raise DeadEnd
    if len(matches) > 1:
        raise Ambiguous(state, matches, FORWARD)
    m = matches[0]
    return apply(state, m, promote=promote), m


@dataclass
class StepBudget:
    max_steps: int
    stop_on: str = "dead_end"  # dead_end | clock_equals | step_limit
    clock_target: int = None

    def __post_init__(self):
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.stop_on == "clock_equals" and self.clock_target is None:
            raise ValueError("clock_equals needs a clock_target")


@dataclass
class Trajectory:
    """Forward path from a start state, with step metadata.

    states is populated only when keep_states was set; long runs instead
    carry digests (uint64 per state), sparse snapshots, and markers (rule
    label -> list of step indices; step t is the transition from state t to
    state t+1).
    """

    start: ChainState
    states: list = None
    labels: list = field(default_factory=list)
    sites: list = field(default_factory=list)
    digests: list = field(default_factory=list)
    markers: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)
    final: ChainState = None
    stop_reason: str = None
    support_growth: int = 0
    uog_violations: list = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.labels)

    def __len__(self):
        return self.n_steps + 1

    def state(self, t: int) -> ChainState:
        if self.states is None:
            raise ValueError("states were not kept for this run")
        return self.states[t]

    def marker_steps(self, *labels) -> list:
        out = []
        for lab in labels:
            out.extend(self.markers.get(lab, ()))
        return sorted(out)

    # rule labels behind the named events of a run
    EVENT_LABELS = {
        "turn_gate": ("4a",),
        "turn_move": ("4b",),
        "oscillation_end": ("6a", "6b"),
        "bounce": ("13a", "13b"),
        "clock_wake": ("14",),
        "clock_done": ("15", "16", "20"),
        "clock_handback": ("21",),
        "compare_fail": ("25", "26"),
        "compare_match": ("28", "30"),
        "crossed_mode": ("22",),
    }

    def events(self) -> dict:
        """Named-event view of the markers (event -> sorted step indices)."""
        return {name: self.marker_steps(*labels)
                for name, labels in self.EVENT_LABELS.items()
                if self.marker_steps(*labels)}


def run(start: ChainState, budget: StepBudget, rules: RuleSet | None = None,
        keep_states: bool = True, snapshot_every: int = None,
        check_uog: bool = False, observer=None, promote: bool = False) -> Trajectory:
    """Drive the unique forward path until the budget's stop condition.

    check_uog verifies, on the fly, that every non-final state has exactly
    one forward match, every non-initial state exactly one reverse match,
    and that no configuration digest repeats; violations are recorded, not
    raised.  observer(t, state, match_or_None) is called on every state.
    """
    rs = rules if rules is not None else rule_set(start.tier)
    traj = Trajectory(start, states=[start] if keep_states else None)
    seen = {start.digest()}
    traj.digests.append(start.digest())
    state = start
    support0 = _support_size(start)
    if observer is not None:
        observer(0, state, None)
    for t in range(budget.max_steps):
        matches = applicable(state, FORWARD, rs)
        if not matches:
            traj.stop_reason = "dead_end"
            break
        if len(matches) > 1:
            if check_uog:
                traj.uog_violations.append(
                    (t, f"{len(matches)} forward matches"))
            raise Ambiguous(state, matches, FORWARD)
        m = matches[0]
        state = apply(state, m, promote=promote)
        traj.labels.append(m.label)
        traj.sites.append(m.site)
        traj.markers.setdefault(m.label, []).append(t)
        dg = state.digest()
        if check_uog:
            if dg in seen:
                traj.uog_violations.append((t + 1, "configuration repeats"))
            rev = applicable(state, REVERSE, rs)
            if len(rev) != 1:
                traj.uog_violations.append(
                    (t + 1, f"{len(rev)} reverse matches"))
        seen.add(dg)
        traj.digests.append(dg)
        if keep_states:
            traj.states.append(state)
        if snapshot_every and (t + 1) % snapshot_every == 0:
            traj.snapshots.append((t + 1, state))
        if observer is not None:
            observer(t + 1, state, m)
        # carry sweeps pass through transient bit patterns, so the clock
        # only counts as reading k once the pointer confirms in C mode
        if (budget.stop_on == "clock_equals"
                and "C" in state.rows.get(CP, ())
                and clock_value(state) == budget.clock_target):
            traj.stop_reason = "clock_equals"
            break
    else:
        traj.stop_reason = "step_limit"
    traj.final = state
    traj.support_growth = _support_size(state) - support0
    return traj


def _support_size(state: ChainState) -> int:
    return 0 if state.dense else len(state.work.support)


# -- step-count closed forms ----------------------------------------------------


def predicted_single_pass_steps(n_qubits: int, depth: int) -> int:
    """Forward transitions from the tier-I start state to its dead end."""
    n, k = n_qubits, depth
    return (2 * n * n * k * k - 2 * n * n * k + 4 * n * k * k - n
            + 2 * k * k + 2 * k)


def predicted_oscillation_steps(n_qubits: int, depth: int) -> int:
    """Length of one full right-moving oscillation of the active symbol."""
    return 2 * depth * (n_qubits + 1) + 1


def predicted_cycle_steps(n_qubits: int, depth: int) -> int:
    """Tier-II configuration period: one reset-and-reapply cycle."""
    return 2 * predicted_single_pass_steps(n_qubits, depth) + 2


# -- clock readout ---------------------------------------------------------------


def clock_value(state: ChainState, register: str = C):
    """Integer stored in a clock-style register, or None if malformed.

    The register must be bullets followed by bits; significance increases
    right to left.  Returns None for tiers without the register.
    """
    row = state.rows.get(register)
    if row is None:
        return None
    bits = []
    seen_bit = False
    for s in row:
        if s == BULLET:
            if seen_bit:
                return None
            continue
        if s not in ("0", "1"):
            return None
        seen_bit = True
        bits.append(s)
    if not bits:
        return None
    return int("".join(bits), 2)


# -- structural verification ------------------------------------------------------


@dataclass
class UOGReport:
    checked_states: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        head = f"UOG over {self.checked_states} states: "
        return head + ("clean" if self.ok else f"{len(self.violations)} violations"
                       f" (first: {self.violations[0]})")


def verify_uog(traj: Trajectory, rules: RuleSet | None = None,
               work_window=None) -> UOGReport:
    """Check the walk-line structure of a stored trajectory.

    Conditions: pairwise-distinct configurations, exactly one forward match
    on every non-final state (zero on a dead-end final), exactly one
    reverse match on every non-initial state, and classical data everywhere
    outside the declared work window.
    """
    if traj.states is None:
        return UOGReport(len(traj.digests),
                         list(traj.uog_violations)
                         + _digest_violations(traj.digests))
    violations = list(traj.uog_violations)
    rs = rules if rules is not None else rule_set(traj.start.tier)
    keys = {}
    for t, st in enumerate(traj.states):
        key = st.config_key()
        if key in keys:
            violations.append((t, f"configuration equals state {keys[key]}"))
        keys[key] = t
        fwd = applicable(st, FORWARD, rs)
        if t < traj.n_steps and len(fwd) != 1:
            violations.append((t, f"{len(fwd)} forward matches"))
        if t == traj.n_steps and traj.stop_reason == "dead_end" and fwd:
            violations.append((t, "final state still has forward matches"))
        if t > 0:
            rev = applicable(st, REVERSE, rs)
            if len(rev) != 1:
                violations.append((t, f"{len(rev)} reverse matches"))
        if work_window is not None and not st.dense:
            extra = set(st.work.support) - set(work_window)
            if extra:
                violations.append((t, f"quantum support leaked to {sorted(extra)}"))
    return UOGReport(len(traj.states), violations)


def _digest_violations(digests):
    seen = {}
    out = []
    for t, d in enumerate(digests):
        if d in seen:
            out.append((t, f"digest repeats state {seen[d]}"))
        seen[d] = t
    return out


def restricted_hamiltonian(traj: Trajectory, rules: RuleSet | None = None):
    """Matrix of the rule terms (plus adjoints) on the trajectory basis.

    Entry (s, t) collects `<state_s | term | state_t>` over every rule term
    applied at every window of state t, in both directions.  On a clean
    trajectory this is exactly the path-graph adjacency matrix.  A nonzero
    entry with |s - t| != 1 means a rule leaks off the path and is raised.
    """
    if traj.states is None:
        raise ValueError("restricted_hamiltonian needs kept states")
    rs = rules if rules is not None else rule_set(traj.start.tier)
    states = traj.states
    index = {}
    for t, st in enumerate(states):
        index.setdefault(st.digest(), []).append(t)
    n = len(states)
    h = np.zeros((n, n))
    for t, st in enumerate(states):
        for direction in (FORWARD, REVERSE):
            for m in applicable(st, direction, rs):
                img = apply(st, m)
                for s in index.get(img.digest(), ()):
                    other = states[s]
                    if not other.config_equal(img):
                        continue
                    amp = _work_overlap(other, img)
                    if abs(amp) < 1e-12:
                        continue
                    if abs(s - t) != 1:
                        raise ValueError(
                            f"rule {m.label} maps state {t} to state {s}:"
                            " off-path matrix element")
                    h[s, t] += amp.real
    return h


def _work_overlap(a: ChainState, b: ChainState) -> complex:
    if a.dense or b.dense:
        from .state import as_dense_vector
        return complex(np.vdot(as_dense_vector(a), as_dense_vector(b)))
    return a.work.overlap(b.work)


# -- trace output -------------------------------------------------------------


def write_trace(traj: Trajectory, fh, snapshot_every: int = None):
    """Tab-separated trace: step, rule, site, active after step, clock, digest."""
    from .state import active_sites
    states = traj.states
    for t in range(traj.n_steps):
        if states is not None:
            st = states[t + 1]
            act = active_sites(st)
            active = f"{act[0][1]}:{act[0][2]}" if len(act) == 1 else "?"
            ck = clock_value(st)
            fh.write(f"{t}\t{traj.labels[t]}\t{traj.sites[t]}\t{active}\t"
                     f"{ck if ck is not None else '-'}\t{traj.digests[t + 1]:016x}\n")
        else:
            fh.write(f"{t}\t{traj.labels[t]}\t{traj.sites[t]}\t-\t-\t"
                     f"{traj.digests[t + 1]:016x}\n")
        if (states is not None and snapshot_every
                and (t + 1) % snapshot_every == 0):
            fh.write(states[t + 1].snapshot() + "\n")
