import numpy as np
import pytest

from hqca import (Ambiguous, BuildSpec, DeadEnd, StepBudget, build_initial,
                  clock_value, predicted_cycle_steps,
                  predicted_oscillation_steps, predicted_single_pass_steps,
                  restricted_hamiltonian, run, step_forward, verify_uog)
from hqca.engine import write_trace

from conftest import small_circuit


def test_single_pass_step_count_small():
    # (N=2, K=1): the closed form gives 10; the engine must dead-end there
    assert predicted_single_pass_steps(2, 1) == 10
    traj = run(build_initial(BuildSpec(small_circuit(2, 1), "I")),
               StepBudget(100, "dead_end"))
    assert traj.n_steps == 10 and traj.stop_reason == "dead_end"


def test_dead_end_raises(example_circuit):
    traj = run(build_initial(BuildSpec(example_circuit, "I")),
               StepBudget(200, "dead_end"))
    with pytest.raises(DeadEnd):
        step_forward(traj.final)


def test_corrupted_state_reported(example_circuit):
    s = build_initial(BuildSpec(example_circuit, "I"))
    row = list(s.rows["P"])
    row[9] = "→"  # second arrow in the bullet field
    bad = s.replace(rows={"P": tuple(row)})
    # never silently picks one: either several matches or none
    try:
        nxt, m = step_forward(bad)
        raise AssertionError("corrupted state stepped silently")
    except (Ambiguous, DeadEnd):
        pass


def test_run_stop_reasons(example_circuit):
    s = build_initial(BuildSpec(example_circuit, "II"))
    t1 = run(s, StepBudget(50, "step_limit"))
    assert t1.stop_reason == "step_limit" and t1.n_steps == 50
    s3 = build_initial(BuildSpec(example_circuit, "III"))
    t3 = run(s3, StepBudget(10 ** 5, "clock_equals", clock_target=2))
    assert t3.stop_reason == "clock_equals"
    assert clock_value(t3.final) == 2


def test_markers_from_labels(example_circuit):
    traj = run(build_initial(BuildSpec(example_circuit, "I")),
               StepBudget(100, "dead_end"))
    osc = predicted_oscillation_steps(3, 2)
    # oscillation boundaries: rules 6a/6b fire on the last step of each
    ends = traj.marker_steps("6a", "6b")
    assert ends == [osc * (i + 1) - 1 for i in range(5)]
    assert traj.markers["4a"] == [8, 76]  # exactly two gate rounds
    assert len(traj.markers["4b"]) == 3


def test_clock_value_readout(example_circuit):
    s = build_initial(BuildSpec(example_circuit, "III"))
    row = tuple(["•"] + ["0"] * 12 + ["1", "1", "0"])
    assert clock_value(s.replace(rows={"C": row})) == 6
    assert clock_value(s.replace(rows={"C": tuple(["•"] + ["0"] * 15)})) == 0
    assert clock_value(s.replace(rows={"C": tuple(["•"] + ["1"] * 15)})) \
        == 2 ** 15 - 1
    malformed = tuple(["•", "1", "•"] + ["0"] * 13)
    assert clock_value(s.replace(rows={"C": malformed})) is None
    assert clock_value(build_initial(BuildSpec(example_circuit, "I"))) is None


def test_verify_uog_clean_and_negative(example_circuit):
    traj = run(build_initial(BuildSpec(example_circuit, "I")),
               StepBudget(200, "dead_end"))
    rep = verify_uog(traj, work_window=range(6, 9))
    assert rep.ok and rep.checked_states == 94
    # duplicated configuration must be flagged
    traj.states[40] = traj.states[12]
    rep2 = verify_uog(traj)
    assert not rep2.ok
    assert any("configuration" in v[1] for v in rep2.violations)


def test_restricted_hamiltonian_is_path_adjacency():
    traj = run(build_initial(BuildSpec(small_circuit(2, 1), "I")),
               StepBudget(50, "dead_end"))
    h = restricted_hamiltonian(traj)
    n = 11
    assert h.shape == (n, n)
    want = np.zeros((n, n))
    for i in range(n - 1):
        want[i, i + 1] = want[i + 1, i] = 1.0
    assert np.max(np.abs(h - want)) < 1e-12


def test_restricted_hamiltonian_clocked_prefix(example_circuit):
    # also symmetric/tridiagonal/0-diagonal on a clocked-tier prefix
    traj = run(build_initial(BuildSpec(example_circuit, "III")),
               StepBudget(120, "step_limit"))
    h = restricted_hamiltonian(traj)
    assert np.array_equal(h, h.T)
    assert np.max(np.abs(np.diag(h))) == 0.0
    off = np.diag(h, 1)
    assert np.max(np.abs(off - 1.0)) < 1e-12
    assert np.max(np.abs(h - np.diag(off, 1) - np.diag(off, -1))) < 1e-12


def test_walk_factorization_matches_rule_hamiltonian():
    # the closed-form walk and the matrix exponential of the rule-generated
    # Hamiltonian drive identical amplitudes over the trajectory basis, with
    # each position carrying its own work state
    from scipy.linalg import expm
    from hqca import CircuitProgram, WalkLine, evolve
    traj = run(build_initial(BuildSpec(CircuitProgram(2, (("W",),)), "I", "10")),
               StepBudget(50, "dead_end"))
    h = restricted_hamiltonian(traj)
    line = WalkLine(len(traj))
    for tau in (0.7, 3.1, 12.0):
        closed = evolve(line, tau)
        dense = expm(1j * h * tau)[:, 0]  # walk Hamiltonian is -adjacency
        assert np.max(np.abs(closed - dense)) < 1e-9
    # position amplitudes plus per-position work states compose the full
    # state: norms add up over the factorized form
    probs = np.abs(evolve(line, 5.0)) ** 2
    assert abs(probs.sum() - 1.0) < 1e-10
    for t in (0, 3, 10):
        assert abs(traj.state(t).work.norm() - 1.0) < 1e-12


def test_clock_monotone_at_completions(example_circuit):
    traj = run(build_initial(BuildSpec(example_circuit, "III")),
               StepBudget(3000, "step_limit"))
    ks = [clock_value(st) for st in traj.states if "C" in st.rows["CP"]]
    assert ks == list(range(len(ks)))  # 0, 1, 2, ... exactly


def test_gate_rounds_every_n_plus_1_oscillations():
    for n, k in ((2, 2), (3, 2), (3, 3)):
        traj = run(build_initial(BuildSpec(small_circuit(n, k), "I")),
                   StepBudget(10 ** 4, "dead_end"))
        osc_len = predicted_oscillation_steps(n, k)
        gate_oscs = [t // osc_len + 1 for t in traj.markers["4a"]]
        assert gate_oscs == [1 + r * (n + 1) for r in range(k)]


def test_restricted_hamiltonian_length_one():
    s = build_initial(BuildSpec(small_circuit(2, 1), "I"))
    traj = run(s, StepBudget(5, "step_limit"))
    traj.states = traj.states[:1]
    traj.labels = []
    traj.sites = []
    h = restricted_hamiltonian(traj)
    assert h.shape == (1, 1) and h[0, 0] == 0.0


def test_streaming_run_matches_full(example_circuit):
    full = run(build_initial(BuildSpec(example_circuit, "I")),
               StepBudget(200, "dead_end"))
    lean = run(build_initial(BuildSpec(example_circuit, "I")),
               StepBudget(200, "dead_end"), keep_states=False,
               snapshot_every=20, check_uog=True)
    assert lean.states is None
    assert lean.labels == full.labels
    assert lean.digests == [s.digest() for s in full.states]
    assert [t for t, _ in lean.snapshots] == [20, 40, 60, 80]
    assert not lean.uog_violations
    snap_t, snap_state = lean.snapshots[1]
    assert snap_state.config_equal(full.state(snap_t))


def test_trace_format(tmp_path, example_circuit):
    traj = run(build_initial(BuildSpec(example_circuit, "I")),
               StepBudget(5, "step_limit"))
    path = tmp_path / "trace.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        write_trace(traj, fh)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5
    first = lines[0].split("\t")
    assert first[0] == "0" and first[1] == "1" and first[2] == "1"
    assert first[3] == "P:→S" and len(first[5]) == 16
    # snapshot blocks interleave at the requested interval
    with open(path, "w", encoding="utf-8") as fh:
        write_trace(traj, fh, snapshot_every=2)
    text = path.read_text(encoding="utf-8")
    assert text.count("P: ") == 2  # snapshots after steps 2 and 4


def test_predicted_cycle(example_circuit):
    assert predicted_cycle_steps(3, 2) == 2 * 93 + 2


def test_step_count_formula_consistency():
    # the closed form equals oscillation accounting:
    # (N(K-1)+K) full oscillations plus a K(N+1)-step half oscillation
    for n in range(2, 8):
        for k in range(1, 6):
            full = (n * (k - 1) + k) * predicted_oscillation_steps(n, k)
            assert predicted_single_pass_steps(n, k) == full + k * (n + 1)


def test_named_events(example_circuit):
    traj = run(build_initial(BuildSpec(example_circuit, "I")),
               StepBudget(200, "dead_end"))
    ev = traj.events()
    assert ev["turn_gate"] == [8, 76]
    assert len(ev["oscillation_end"]) == 5
    assert "compare_fail" not in ev
