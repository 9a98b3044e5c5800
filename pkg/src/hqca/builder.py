"""Initial chain states for the four construction tiers.

Tier I lays the program behind a right arrow and pads the data register so
that turning points see a 1 exactly when a gate round is aligned with the
work qubits.  Tier II wraps the chain in turn sentinels so the program can
reset without undoing gates.  Tier III parks the program at the right end
and adds the clock and clock-pointer registers, pre-loaded so that the only
forward path first zeroes the clock.  Tier IV adds the target register
(binary target count, bullet-padded) and the second clock whose bullet
boundary is tied to the target's, which is what bounds the post-target walk
length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import CircuitProgram, InstanceParseError, parse_circuit_text
from .state import ChainState, DenseData, WorkState
from .symbols import BULLET, C, C2, CP, D, P, QUANTUM, T, TURN


class BuildError(ValueError):
    pass


def chain_length(tier: str, n_qubits: int, depth: int) -> int:
    """Number of chain sites for a depth-K circuit on N qubits."""
    if n_qubits < 2 or depth < 1:
        raise BuildError("need N >= 2 and K >= 1")
    base = (2 * depth - 1) * (n_qubits + 1) + 2
    return base if tier == "I" else base + 2


def work_window(tier: str, n_qubits: int, depth: int) -> range:
    """1-indexed site range of the N work qubits in the data register."""
    start = (depth - 1) * (n_qubits + 1) + 2
    if tier != "I":
        start += 1  # one sentinel site added on the left
    return range(start, start + n_qubits)


@dataclass(frozen=True)
class BuildSpec:
    circuit: CircuitProgram
    tier: str
    work: str | np.ndarray = None  # bitstring or dense 2^N vector; default 0^N
    target_x: int = None           # tier IV only
    bullet_offset: int = 3         # sites between target bullet and its MSB
    dense: bool = False            # use the full-dense data backend

    def work_state(self, support) -> WorkState:
        n = self.circuit.n_qubits
        if self.work is None:
            return WorkState.from_bits(support, "0" * n)
        if isinstance(self.work, str):
            if len(self.work) != n or set(self.work) - {"0", "1"}:
                raise BuildError(f"work bits must be {n} bits")
            return WorkState.from_bits(support, self.work)
        amps = np.asarray(self.work, dtype=complex)
        if amps.shape != (2 ** n,):
            raise BuildError("work vector dimension mismatch")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-9:
            raise BuildError("work vector must be normalized")
        return WorkState(support, amps)


def _data_row_tier_I(n: int, k: int) -> list:
    # (1 0^N)^(K-1) 1 | work | 1 (0^N 1)^(K-1) 0
    row = list(("1" + "0" * n) * (k - 1)) + ["1"]
    row += [QUANTUM] * n
    row += ["1"] + list(("0" * n + "1") * (k - 1)) + ["0"]
    return row


def _program_positions(tier: str, n: int, k: int):
    """(arrow_site, program_start) for the tier's initial program placement."""
    length = chain_length(tier, n, k)
    prog_len = k * (n + 1) - 1
    if tier == "I":
        return 1, 2
    if tier == "II":
        return 2, 3
    # III and IV park the program against the right sentinels
    return None, length - 1 - prog_len


def build_initial(spec: BuildSpec) -> ChainState:
    """The start state of the requested tier; always passes validate_config."""
    n, k = spec.circuit.n_qubits, spec.circuit.depth
    tier = spec.tier
    length = chain_length(tier, n, k)
    program = list(spec.circuit.program_string())
    window = work_window(tier, n, k)
    support = tuple(window)

    if tier == "I":
        p_row = ["→"] + program
        p_row += [BULLET] * (length - len(p_row))
        d_row = _data_row_tier_I(n, k)
        rows = {P: tuple(p_row), D: tuple(d_row)}
    elif tier in ("II", "III", "IV"):
        d_row = ["0"] + _data_row_tier_I(n, k) + ["0"]
        if tier == "II":
            p_row = [TURN, "→"] + program
            p_row += [BULLET] * (length - 1 - len(p_row)) + [TURN]
        else:
            _, start = _program_positions(tier, n, k)
            tail = [TURN, TURN] if tier == "III" else ["←", TURN]
            p_row = ([TURN] + [BULLET] * (start - 2) + program + tail)
        rows = {P: tuple(p_row), D: tuple(d_row)}
    else:
        raise BuildError(f"unknown tier {tier!r}")

    if tier == "III":
        rows[C] = tuple([BULLET, "0"] + ["1"] * (length - 2))
        rows[CP] = tuple([BULLET, "R"] + [BULLET] * (length - 2))
    elif tier == "IV":
        rows[C] = tuple([BULLET] + ["0"] * (length - 1))
        rows[CP] = tuple([BULLET] * (length - 1) + ["X"])
        t_row, bullet_site = target_row(length, spec.target_x, spec.bullet_offset)
        rows[T] = t_row
        rows[C2] = tuple([BULLET] * (bullet_site - 1) + ["0"]
                         + ["1"] * (length - bullet_site))

    assert len(rows[P]) == length
    work = spec.work_state(support)
    state = ChainState(tier, rows, work)
    if spec.dense:
        dense = DenseData.from_bits_and_work(length, rows[D], work)
        state = ChainState(tier, rows, dense)
    return state


def target_row(length: int, x: int, bullet_offset: int):
    """Target register row: bullet padding, zero padding, then binary x.

    The rightmost bullet sits bullet_offset sites left of x's most
    significant 1 (so bullet_offset - 1 zero digits separate them), and the
    digits run down to the last site with significance increasing right to
    left.  Returns (row tuple, bullet site index).
    """
    if x is None:
        raise BuildError("tier IV needs a target count")
    if x < 1:
        raise BuildError(
            "target must be >= 1: the machine applies the circuit once"
            " before its first comparison, so a 0 target can never match")
    if bullet_offset < 1:
        raise BuildError("bullet_offset must be >= 1")
    bits = format(x, "b")
    digit_width = len(bits) + bullet_offset - 1
    bullet_site = length - digit_width
    if digit_width < 2:
        raise BuildError("target digit field must span at least 2 sites;"
                         " increase bullet_offset")
    if bullet_site < 1:
        raise BuildError(
            f"target {x} with bullet_offset {bullet_offset} needs"
            f" {digit_width + 1} sites, chain has {length}")
    digits = bits.rjust(digit_width, "0")
    return tuple([BULLET] * bullet_site + list(digits)), bullet_site


def full_width_offset(length: int, x: int) -> int:
    """Bullet offset that pushes the target's bullet to site 2, giving the
    post-target phase its maximal (exponential-in-L) walk length."""
    return length - 1 - len(format(x, "b"))


# -- instance files -----------------------------------------------------------
#
# Circuit text plus:
#   construction=<I|II|III|IV>
#   target=<int>              (tier IV)
#   bullet_offset=<int>       (tier IV, default 3)
#   dense=<0|1>
# plus free run options (budget, seed, tau, tau_star, samples,
# snapshot_every) that the caller interprets.

_RUN_KEYS = ("budget", "seed", "samples", "snapshot_every")
_RUN_FLOAT_KEYS = ("tau", "tau_star")


@dataclass
class Instance:
    spec: BuildSpec
    options: dict


def parse_instance_text(text: str) -> Instance:
    circuit, work, extra = parse_circuit_text(text)
    tier = "I"
    target = None
    bullet_offset = 3
    dense = False
    options = {}
    for key, (value, lineno) in extra.items():
        if key == "construction":
            if value not in ("I", "II", "III", "IV"):
                raise InstanceParseError(lineno, f"unknown construction {value!r}")
            tier = value
        elif key == "target":
            target = _int_at(value, lineno)
        elif key == "bullet_offset":
            bullet_offset = _int_at(value, lineno)
        elif key == "dense":
            dense = value not in ("0", "false", "no")
        elif key in _RUN_KEYS:
            options[key] = _int_at(value, lineno)
        elif key in _RUN_FLOAT_KEYS:
            try:
                options[key] = float(value)
            except ValueError:
                raise InstanceParseError(lineno, f"expected number, got {value!r}")
        else:
            raise InstanceParseError(lineno, f"unknown key {key!r}")
    if tier == "IV" and target is None:
        raise InstanceParseError(0, "construction IV needs target=<int>")
    spec = BuildSpec(circuit, tier, work, target, bullet_offset, dense)
    return Instance(spec, options)


def parse_instance_file(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance_text(fh.read())


def _int_at(value: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise InstanceParseError(lineno, f"expected integer, got {value!r}")


def worked_example_circuit() -> CircuitProgram:
    """The recurring 2-round, 3-qubit illustration: (S W) then (W S)."""
    return CircuitProgram(3, (("W", "S"), ("S", "W")))
