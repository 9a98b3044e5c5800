import numpy as np
import pytest

from hqca import BuildSpec, StepBudget, build_initial, run
from hqca.rules import (FORWARD, REVERSE, NonClassicalGateError, applicable,
                        apply, classical_gate_action, dump_rule_table,
                        rule_set, try_match)
from hqca.state import ChainState, WorkState
from hqca.symbols import BULLET

from conftest import random_state


def test_rule_labels_per_tier():
    assert rule_set("I").labels() == ("1", "2", "3", "4a", "4b", "5a", "5b",
                                      "6a", "6b")
    assert set(rule_set("II").labels()) == set(rule_set("I").labels()) | {
        "7", "8", "9", "10", "11", "12", "13a", "13b"}
    l3 = rule_set("III").labels()
    assert set(l3) >= {"14", "15", "16", "17", "18", "19", "20", "21"}
    l4 = rule_set("IV").labels()
    for lab in ("22", "23a", "23b", "23c", "24a", "24b", "24c", "25", "26",
                "27", "28", "29", "30", "31", "43a", "43b", "44", "50"):
        assert lab in l4


def test_redefinitions_take_effect():
    # the bounce rule rewrites to a left arrow at tier II but to the clock
    # hand-off symbol from tier III on
    assert rule_set("II").by_label["13a"].rhs["P"][0] == ("lit", "←")
    assert rule_set("III").by_label["13a"].rhs["P"][1] == ("lit", "⇓")
    # control returns off C at tier III but off CX at tier IV
    assert rule_set("III").by_label["21"].lhs["CP"][1] == ("lit", "C")
    assert rule_set("IV").by_label["21"].lhs["CP"][1] == ("lit", "CX")


def test_every_rule_side_has_one_active_anchor():
    for tier in ("I", "II", "III", "IV"):
        for rule in rule_set(tier).rules:
            for d in (FORWARD, REVERSE):
                rule.active_anchor(d)  # raises unless exactly one


def test_indexed_scan_equals_full_scan(example_circuit):
    for tier in ("I", "II", "III", "IV"):
        kw = {"target_x": 3} if tier == "IV" else {}
        state = build_initial(BuildSpec(example_circuit, tier, **kw))
        for _ in range(40):
            for d in (FORWARD, REVERSE):
                fast = applicable(state, d)
                slow = applicable(state, d, full_scan=True)
                assert [(m.label, m.site) for m in fast] == \
                       [(m.label, m.site) for m in slow]
            fwd = applicable(state, FORWARD)
            if not fwd:
                break
            state = apply(state, fwd[0])


def test_unique_forward_start(example_circuit):
    s = build_initial(BuildSpec(example_circuit, "I"))
    ms = applicable(s, FORWARD)
    assert [(m.label, m.site) for m in ms] == [("1", 1)]
    assert applicable(s, REVERSE) == []


def test_reversibility_along_trajectory(example_circuit):
    rng = np.random.default_rng(11)
    w = rng.normal(size=8) + 1j * rng.normal(size=8)
    w /= np.linalg.norm(w)
    traj = run(build_initial(BuildSpec(example_circuit, "I", w)),
               StepBudget(200, "dead_end"))
    for t in range(traj.n_steps):
        fwd = applicable(traj.state(t), FORWARD)[0]
        nxt = apply(traj.state(t), fwd)
        rev = applicable(nxt, REVERSE)
        assert len(rev) == 1
        back = apply(nxt, rev[0])
        assert back.state_equal(traj.state(t), tol=1e-12)


def test_reversibility_through_comparator_and_crossed_mode(example_circuit):
    # same round trip over a segment that exercises the clock, the compare
    # sweep, the crossed conversion and the crossed oscillations
    traj = run(build_initial(BuildSpec(example_circuit, "IV", "000",
                                       target_x=3, bullet_offset=3)),
               StepBudget(900, "step_limit"))
    assert set(traj.labels) & {"23a", "26", "27", "30", "49", "22", "31"}
    for t in range(traj.n_steps):
        nxt = traj.state(t + 1)
        rev = applicable(nxt, REVERSE)
        assert len(rev) == 1, (t, traj.labels[t])
        assert apply(nxt, rev[0]).state_equal(traj.state(t), tol=1e-12)


def test_translation_invariance():
    # the same window content matches at any absolute position
    rs = rule_set("I")
    rule1 = rs.by_label["1"]
    for pos in (1, 3, 6):
        p = [BULLET] * 9
        p[pos - 1] = "→"
        p[pos] = "W"
        state = ChainState("I", {"P": tuple(p), "D": tuple(["0"] * 9)},
                           WorkState((), np.ones(1, dtype=complex)))
        assert try_match(rule1, state, pos, FORWARD) is not None
        got = applicable(state, FORWARD)
        assert [(m.label, m.site) for m in got] == [("1", pos)]


def test_classical_gate_action():
    assert classical_gate_action("I", "1", "0") == ("1", "0")
    assert classical_gate_action("S", "1", "0") == ("0", "1")
    assert classical_gate_action("W", "0", "1") == ("0", "1")
    assert classical_gate_action("W", "1", "0") is None
    # confirmed by the matrix: the rotated target has two amplitudes
    from hqca.circuit import basis_state, gate_matrix
    out = gate_matrix("W") @ basis_state("10")
    assert np.sum(np.abs(out) > 1e-12) == 2


def _gate_violation_state():
    # g head about to apply W to classical (1, 0): never happens on valid
    # chains, so the engine must refuse (or promote on request)
    rows = {"P": ("W", "g", BULLET, BULLET),
            "D": ("1", "0", "0", "0")}
    return ChainState("I", rows, WorkState((), np.ones(1, dtype=complex)))


def test_nonclassical_gate_aborts():
    s = _gate_violation_state()
    m = applicable(s, FORWARD)
    assert [x.label for x in m] == ["5a"]
    with pytest.raises(NonClassicalGateError):
        apply(s, m[0])


def test_nonclassical_gate_promotes_on_request():
    s = _gate_violation_state()
    m = applicable(s, FORWARD)[0]
    out = apply(s, m, promote=True)
    assert out.work.support == (1, 2)
    assert out.rows["D"][:2] == ("?", "?")
    from hqca.circuit import basis_state, gate_matrix
    assert np.max(np.abs(out.work.amps
                         - gate_matrix("W") @ basis_state("10"))) < 1e-12


def test_swap_updates_classical_bits():
    rows = {"P": ("S", "g", BULLET, BULLET),
            "D": ("1", "0", "0", "0")}
    s = ChainState("I", rows, WorkState((), np.ones(1, dtype=complex)))
    out = apply(s, applicable(s, FORWARD)[0])
    assert out.rows["D"] == ("0", "1", "0", "0")


def test_stale_match_rejected(example_circuit):
    s = build_initial(BuildSpec(example_circuit, "I"))
    m = applicable(s, FORWARD)[0]
    s2 = apply(s, m)
    from hqca.rules import StaleMatchError
    with pytest.raises(StaleMatchError):
        apply(s2, m)


def test_rule_dump_lines():
    dump = dump_rule_table("IV")
    lines = dump.splitlines()
    assert len(lines) == len(rule_set("IV").rules)
    five_a = next(l for l in lines if l.startswith("5a "))
    assert "[gate:A]" in five_a
    assert "=>" in five_a
    thirty = next(l for l in lines if l.startswith("30 "))
    assert "C2:•/0" in thirty


def test_gate_effects_confined_to_work_window(example_circuit):
    # on a valid run the quantum support never grows and no promotion is
    # needed even with promote enabled
    traj = run(build_initial(BuildSpec(example_circuit, "II")),
               StepBudget(400, "step_limit"), promote=True)
    assert traj.support_growth == 0
    assert traj.final.work.support == (7, 8, 9)
