"""Repetition: resetting the program without undoing the computation.

Turn sentinels at both chain ends let the arrow bounce: after a full pass
the program walks back left through mirrored rules that never touch the
data register, then reapplies the circuit.  The configuration is exactly
periodic with period 2 T + 2, and the work register accumulates one
circuit application per cycle.

The catch that motivates the clocked construction: states one period apart
have identical configurations, so under continuous dynamics branches with
different application counts interfere and cannot be told apart by any
measurement of the classical registers.
"""

import numpy as np

from hqca import (BuildSpec, StepBudget, apply_circuit_power, build_initial,
                  fidelity, predicted_cycle_steps, run,
                  worked_example_circuit)

circuit = worked_example_circuit()
rng = np.random.default_rng(1)
w = rng.normal(size=8) + 1j * rng.normal(size=8)
w /= np.linalg.norm(w)

period = predicted_cycle_steps(3, 2)
traj = run(build_initial(BuildSpec(circuit, "II", w)),
           StepBudget(5 * period, "step_limit"))

print(f"cycle length: {period}")
for x in range(1, 6):
    st = traj.state(x * period)
    same_config = st.config_equal(traj.start)
    f = fidelity(apply_circuit_power(w.copy(), circuit, x), st.work.amps)
    print(f"after {x} cycles: config == start: {same_config},"
          f" fidelity to U^{x}|w>: {f:.12f}")

print("\nidentical configurations across cycles is the problem:")
print("orthogonal?", not traj.state(period).config_equal(traj.start),
      "-> a clock register is needed to separate the branches")
