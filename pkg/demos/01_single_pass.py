"""A single pass: one circuit application driven by local rewrites.

The chain stores a gate program behind a right-moving arrow.  Each
oscillation of the active symbol walks the mark to the right end of the
program, turns around (as a gate head if the data bit under the turning
point is 1, as a plain move head otherwise), and walks back applying or
skipping gates.  Every oscillation shifts the program one site right; the
data padding is laid out so gates fire exactly when a round is aligned
with the work qubits.
"""

import numpy as np

from hqca import (BuildSpec, StepBudget, build_initial,
                  predicted_oscillation_steps, predicted_single_pass_steps,
                  run, worked_example_circuit)

circuit = worked_example_circuit()
print("program string:", " ".join(circuit.program_string()))

state = build_initial(BuildSpec(circuit, "I", work="010"))
print("\nstart state:")
print(state.snapshot())

traj = run(state, StepBudget(200, "dead_end"))
print(f"\nran {traj.n_steps} steps to a dead end "
      f"(closed form: {predicted_single_pass_steps(3, 2)})")
print(f"one oscillation = {predicted_oscillation_steps(3, 2)} steps; "
      f"oscillation ends at {traj.events()['oscillation_end']}")
print(f"gate oscillations (turn over a 1 bit): {traj.events()['turn_gate']}")

for t in (8, 9, 12, 17, 93):
    print(f"\nstate {t}:")
    print(traj.state(t).snapshot())

print("\nfinal work amplitudes (|010> after both gate rounds):")
print(np.round(traj.final.work.amps, 6))
