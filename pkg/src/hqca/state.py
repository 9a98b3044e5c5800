"""Chain states: classical register rows plus a hybrid or dense data backend.

A ChainState is immutable; every transition produces a new state.  The data
register is special: most of its sites provably stay in computational basis
states, so the default (hybrid) backend keeps one classical bit per site and
a small amplitude vector over a quantum-support set, normally the N work
qubits.  A full-dense backend that keeps the whole data register as one 2^L
amplitude vector exists for cross-validation at small L.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import symbols as sym
from .circuit import gate_matrix
from .symbols import CP, D, P, QUANTUM, REGISTERS_BY_TIER

PHASE_TOL = 1e-12
NORM_TOL = 1e-12


class StateError(ValueError):
    pass


def _apply_two_site(amps: np.ndarray, n: int, p0: int, p1: int,
                    mat: np.ndarray) -> np.ndarray:
    """4x4 matrix on axes p0 < p1 of an n-qubit vector (axis 0 = leftmost)."""
    a = amps.reshape([2] * n)
    a = np.moveaxis(a, (p0, p1), (0, 1))
    shape = a.shape
    a = mat @ a.reshape(4, -1)
    a = np.moveaxis(a.reshape(shape), (0, 1), (p0, p1))
    return np.ascontiguousarray(a).reshape(-1)


def phase_aligned_equal(a: np.ndarray, b: np.ndarray, tol: float = PHASE_TOL) -> bool:
    """Vector equality up to a global phase."""
    if a.shape != b.shape:
        return False
    k = int(np.argmax(np.abs(a)))
    if abs(a[k]) < tol:
        return bool(np.max(np.abs(b)) < tol)
    phase = b[k] / a[k]
    if abs(abs(phase) - 1.0) > 1e-9:
        return False
    return bool(np.max(np.abs(a * phase - b)) <= max(tol, 1e-12))


class WorkState:
    """Amplitudes over the quantum-support sites of the data register."""

    __slots__ = ("support", "amps")

    def __init__(self, support, amps):
        self.support = tuple(support)
        self.amps = np.asarray(amps, dtype=complex)
        if self.amps.shape != (2 ** len(self.support),):
            raise StateError(
                f"amplitude dimension {self.amps.shape} does not match"
                f" support of {len(self.support)} sites")

    @classmethod
    def from_bits(cls, support, bits: str) -> "WorkState":
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(support, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def apply_gate(self, kind: str, site_i: int, site_j: int,
                   adjoint: bool = False) -> "WorkState":
        p0 = self.support.index(site_i)
        p1 = self.support.index(site_j)
        if p1 != p0 + 1:
            raise StateError("gate window must cover adjacent support slots")
        out = _apply_two_site(self.amps, len(self.support), p0, p1,
                              gate_matrix(kind, adjoint))
        return WorkState(self.support, out)

    def promote(self, site: int, bit: str) -> "WorkState":
        """Grow the support by one classical site (exploratory mode only)."""
        pos = 0
        while pos < len(self.support) and self.support[pos] < site:
            pos += 1
        if pos < len(self.support) and self.support[pos] == site:
            return self
        e = np.zeros(2, dtype=complex)
        e[int(bit)] = 1.0
        n = len(self.support)
        a = self.amps.reshape([2] * n if n else [1])
        a = np.tensordot(a, e, axes=0)  # new axis appended at the end
        a = np.moveaxis(a.reshape([2] * (n + 1)), n, pos)
        return WorkState(self.support[:pos] + (site,) + self.support[pos:],
                         np.ascontiguousarray(a).reshape(-1))

    def phase_equal(self, other: "WorkState", tol: float = PHASE_TOL) -> bool:
        return self.support == other.support and phase_aligned_equal(
            self.amps, other.amps, tol)

    def overlap(self, other: "WorkState") -> complex:
        if self.support != other.support:
            return 0.0
        return complex(np.vdot(self.amps, other.amps))


class DenseData:
    """Full data register as one 2^L amplitude vector (cross-check backend)."""

    __slots__ = ("n_sites", "amps")

    PURITY_TOL = 1e-10

    def __init__(self, n_sites: int, amps):
        self.n_sites = n_sites
        self.amps = np.asarray(amps, dtype=complex)
        if self.amps.shape != (2 ** n_sites,):
            raise StateError("dense amplitude dimension mismatch")

    @classmethod
    def from_bits_and_work(cls, n_sites: int, bits, work: WorkState) -> "DenseData":
        """Embed classical bits plus a work-state vector at its support sites."""
        amps = np.zeros(2 ** n_sites, dtype=complex)
        base = 0
        for site in range(1, n_sites + 1):
            b = bits[site - 1]
            if b == QUANTUM:
                continue
            base |= int(b) << (n_sites - site)
        for k, a in enumerate(work.amps):
            if a == 0:
                continue
            idx = base
            for pos, site in enumerate(work.support):
                bit = (k >> (len(work.support) - 1 - pos)) & 1
                idx |= bit << (n_sites - site)
            amps[idx] = a
        return cls(n_sites, amps)

    def read_bit(self, site: int) -> str:
        """Classical readout of one site: '0', '1', or '?' when impure."""
        axis = site - 1
        a = self.amps.reshape([2] * self.n_sites)
        a = np.moveaxis(a, axis, 0).reshape(2, -1)
        p1 = float(np.linalg.norm(a[1]) ** 2)
        if p1 < self.PURITY_TOL:
            return "0"
        if p1 > 1.0 - self.PURITY_TOL:
            return "1"
        return QUANTUM

    def apply_gate(self, kind: str, site_i: int, site_j: int,
                   adjoint: bool = False) -> "DenseData":
        out = _apply_two_site(self.amps, self.n_sites, site_i - 1, site_j - 1,
                              gate_matrix(kind, adjoint))
        return DenseData(self.n_sites, out)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


class ChainState:
    """One basis-layer configuration of the chain plus its data amplitudes.

    Immutable and safe to share between threads; all update paths construct
    new states.  Register rows are tuples of symbol tokens, 1-indexed sites
    stored at row[site-1].  The data row holds '?' at quantum-support sites.
    """

    __slots__ = ("tier", "L", "rows", "work", "_digest")

    def __init__(self, tier, rows, work):
        self.tier = tier
        self.rows = dict(rows)
        self.L = len(self.rows[P])
        self.work = work
        self._digest = None
        for reg in REGISTERS_BY_TIER[tier]:
            if reg not in self.rows:
                raise StateError(f"tier {tier} state is missing register {reg}")

    @property
    def dense(self) -> bool:
        return isinstance(self.work, DenseData)

    def row(self, reg: str) -> tuple:
        return self.rows[reg]

    def data_bit(self, site: int) -> str:
        """'0' / '1' for classical data sites, '?' where amplitude lives."""
        if self.dense:
            return self.work.read_bit(site)
        return self.rows[D][site - 1]

    def replace(self, rows=None, work=None) -> "ChainState":
        new_rows = dict(self.rows)
        if rows:
            new_rows.update(rows)
        return ChainState(self.tier, new_rows, work if work is not None else self.work)

    # -- configuration identity -------------------------------------------

    def config_key(self) -> tuple:
        """Hashable classical content; distinct keys mean orthogonal states."""
        if self.dense:
            data = tuple(self.work.read_bit(s) for s in range(1, self.L + 1))
        else:
            data = self.rows[D]
        regs = tuple(self.rows[r] for r in REGISTERS_BY_TIER[self.tier] if r != D)
        return (self.tier, data) + regs

    def digest(self) -> int:
        """64-bit digest of config_key, cached per state."""
        if self._digest is None:
            h = hashlib.blake2b(repr(self.config_key()).encode(), digest_size=8)
            self._digest = int.from_bytes(h.digest(), "big")
        return self._digest

    def config_equal(self, other: "ChainState") -> bool:
        return self.config_key() == other.config_key()

    def state_equal(self, other: "ChainState", tol: float = PHASE_TOL) -> bool:
        """Config equality plus work-vector equality up to global phase."""
        if not self.config_equal(other):
            return False
        if self.dense or other.dense:
            a = as_dense_vector(self)
            b = as_dense_vector(other)
            return phase_aligned_equal(a, b, tol)
        return self.work.phase_equal(other.work, tol)

    # -- snapshot text format ----------------------------------------------

    def snapshot(self) -> str:
        """One line per register, sites separated by single spaces."""
        lines = []
        for reg in REGISTERS_BY_TIER[self.tier]:
            if reg == D:
                cells = [self.data_bit(s) if self.data_bit(s) != QUANTUM else QUANTUM
                         for s in range(1, self.L + 1)]
                if not self.dense:
                    cells = list(self.rows[D])
            else:
                cells = list(self.rows[reg])
            lines.append(f"{reg}: " + " ".join(cells))
        return "\n".join(lines)

    def __repr__(self):
        return f"<ChainState tier {self.tier} L={self.L} digest={self.digest():016x}>"


def as_dense_vector(state: ChainState) -> np.ndarray:
    """Full 2^L data-register vector of either backend."""
    if state.dense:
        return state.work.amps
    return DenseData.from_bits_and_work(state.L, state.rows[D], state.work).amps


# -- active-site bookkeeping -------------------------------------------------


def active_sites(state: ChainState):
    """All (site, register, symbol) with an active symbol, in site order."""
    out = []
    active_p = sym.ACTIVE_P_BY_TIER[state.tier]
    for i, s in enumerate(state.rows[P], start=1):
        if s in active_p:
            out.append((i, P, s))
    if CP in state.rows:
        active_cp = sym.ACTIVE_CP_BY_TIER[state.tier]
        for i, s in enumerate(state.rows[CP], start=1):
            if s in active_cp:
                out.append((i, CP, s))
    return out


def active_site(state: ChainState):
    """The unique active location, or StateError when 0 or several exist."""
    found = active_sites(state)
    if not found:
        raise StateError("no active symbol")
    if len(found) > 1:
        raise StateError(f"multiple active symbols: {found}")
    return found[0]


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(self.violations)


def validate_config(state: ChainState) -> ValidationReport:
    """Structural checks: registers per tier, one active symbol, sane data."""
    v = []
    expected = set(REGISTERS_BY_TIER[state.tier])
    present = set(state.rows)
    for reg in sorted(present - expected):
        v.append(f"register {reg} not allowed at tier {state.tier}")
    for reg in sorted(expected - present):
        v.append(f"register {reg} missing at tier {state.tier}")
    for reg in sorted(expected & present):
        if len(state.rows[reg]) != state.L:
            v.append(f"register {reg} has length {len(state.rows[reg])} != {state.L}")
            continue
        if reg == D and not state.dense:
            bad = [s for s in state.rows[D] if s not in ("0", "1", QUANTUM)]
            if bad:
                v.append(f"data row holds non-bit symbols {sorted(set(bad))}")
        elif reg != D:
            alphabet = set(sym.alphabet(reg, state.tier))
            bad = sorted({s for s in state.rows[reg] if s not in alphabet})
            if bad:
                v.append(f"register {reg} holds out-of-alphabet symbols {bad}")
    n_active = len(active_sites(state))
    if n_active != 1:
        v.append(f"active count {n_active}")
    if not state.dense:
        support = state.work.support
        marked = tuple(i for i, s in enumerate(state.rows[D], start=1) if s == QUANTUM)
        if support != marked:
            v.append(f"quantum support {support} != data-row markers {marked}")
        if any(not 1 <= s <= state.L for s in support):
            v.append("quantum support outside the chain")
    if abs(state.work.norm() - 1.0) > NORM_TOL:
        v.append(f"work norm {state.work.norm()!r} != 1")
    return ValidationReport(v)
