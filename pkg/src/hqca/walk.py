"""Continuous-time quantum walk on a path, in its exact eigenbasis.

The Hamiltonian is minus the adjacency matrix of the path on l positions;
its eigenpairs are known in closed form, so evolution is a single dense
matrix product with no time-stepping error:

    lambda_k = -2 cos(k pi / (l+1)),            k = 1..l
    v_k(t)   = sqrt(2/(l+1)) sin(k (t+1) pi / (l+1)),   t = 0..l-1

The time average of the position distribution converges to the limiting
distribution pi(m) = (2 + [m=0] + [m=l-1]) / (2(l+1)); the deviation decays
like l/tau*, and the probability of landing in the far fraction F of the
line is bounded below by F minus errors of order l/tau* and 1/l.  Those
orders carry unknown constants, so the envelope fitters below measure them
over a sweep instead of assuming them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dst


class WalkLine:
    """Path of l positions with its exact eigendecomposition.

    Evolution goes through the orthonormal type-I sine transform, which is
    exactly this Hamiltonian's eigenbasis, so states of any length evolve
    in O(l log l) without materializing the eigenvector matrix; the dense
    matrix stays available (lazily) for structural tests at small l.
    """

    def __init__(self, l: int):
        if l < 1:
            raise ValueError("need at least one position")
        self.l = l
        k = np.arange(1, l + 1)
        self.eigenvalues = -2.0 * np.cos(k * np.pi / (l + 1))
        self._eigenvectors = None

    @property
    def eigenvectors(self) -> np.ndarray:
        if self._eigenvectors is None:
            k = np.arange(1, self.l + 1)
            t = np.arange(self.l)
            self._eigenvectors = np.sqrt(2.0 / (self.l + 1)) * np.sin(
                np.outer(t + 1, k) * np.pi / (self.l + 1))
        return self._eigenvectors

    def eigenbasis_coeffs(self, start: int) -> np.ndarray:
        """Row <k|start> of the eigenbasis for one position state."""
        k = np.arange(1, self.l + 1)
        return np.sqrt(2.0 / (self.l + 1)) * np.sin(
            k * (start + 1) * np.pi / (self.l + 1))

    def hamiltonian(self) -> np.ndarray:
        """Dense -adjacency matrix (for oracle comparisons)."""
        h = np.zeros((self.l, self.l))
        for i in range(self.l - 1):
            h[i, i + 1] = h[i + 1, i] = -1.0
        return h


def evolve(line: WalkLine, tau: float, start: int = 0) -> np.ndarray:
    """Amplitudes <m| exp(-i H tau) |start> on all positions."""
    coeff = line.eigenbasis_coeffs(start) * np.exp(-1j * line.eigenvalues * tau)
    return dst(coeff, type=1, norm="ortho")


def evolve_many(line: WalkLine, taus, start: int = 0) -> np.ndarray:
    """Amplitude matrix, one column per time point (vectorized evolve)."""
    phases = np.exp(-1j * np.outer(line.eigenvalues, np.asarray(taus)))
    coeffs = phases * line.eigenbasis_coeffs(start)[:, None]
    return dst(coeffs, type=1, norm="ortho", axis=0)


def position_distribution(line: WalkLine, tau: float, start: int = 0) -> np.ndarray:
    return np.abs(evolve(line, tau, start)) ** 2


@dataclass
class WalkDistribution:
    probabilities: np.ndarray
    stderr: np.ndarray = None  # per-position standard error for estimates

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("not a probability distribution")
        self.probabilities = p

    def total_variation(self, other: "WalkDistribution") -> float:
        return 0.5 * float(np.abs(self.probabilities
                                  - other.probabilities).sum())


def limiting_distribution(line: WalkLine) -> WalkDistribution:
    """Infinite-time average of the position distribution from an endpoint."""
    l = line.l
    p = np.full(l, 2.0)
    p[0] += 1.0
    p[-1] += 1.0
    return WalkDistribution(p / (2.0 * (l + 1)))


def time_averaged_distribution(line: WalkLine, tau_star: float, samples: int,
                               rng, start: int = 0) -> WalkDistribution:
    """Monte-Carlo estimate of the tau-uniform average of |psi_m(tau)|^2.

    Sampling in chunks keeps memory at O(l * chunk) for long lines.
    """
    if tau_star < 0 or samples < 1:
        raise ValueError("need tau_star >= 0 and samples >= 1")
    chunk = max(1, 4_000_000 // max(line.l, 1))
    total = np.zeros(line.l)
    total_sq = np.zeros(line.l)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        taus = rng.uniform(0.0, tau_star, size=n)
        probs = np.abs(evolve_many(line, taus, start)) ** 2
        total += probs.sum(axis=1)
        total_sq += (probs ** 2).sum(axis=1)
        done += n
    mean = total / samples
    if samples > 1:
        var = (total_sq - samples * mean ** 2) / (samples - 1)
        err = np.sqrt(np.maximum(var, 0.0) / samples)
    else:
        err = np.zeros(line.l)
    return WalkDistribution(mean / mean.sum(), err)


def exact_time_averaged_distribution(line: WalkLine, tau_star: float,
                                     start: int = 0) -> WalkDistribution:
    """Closed-form quadrature of the time average (no sampling error).

    The average of exp(-i(lambda_j - lambda_k) tau) over tau in [0, tau*]
    integrates to (1 - exp(-i d tau*)) / (i d tau*), so the averaged
    distribution is an exact double sum over eigenpairs; O(l^3) work, fine
    for the sweep sizes used in the run-time analysis.
    """
    lam = line.eigenvalues
    m0 = line.eigenvectors * line.eigenbasis_coeffs(start)
    d = lam[:, None] - lam[None, :]
    kernel = np.ones_like(d, dtype=complex)
    nz = np.abs(d) > 1e-14
    kernel[nz] = (1.0 - np.exp(-1j * d[nz] * tau_star)) / (1j * d[nz] * tau_star)
    p = np.einsum("mj,jk,mk->m", m0, kernel, m0).real
    p = np.maximum(p, 0.0)
    return WalkDistribution(p / p.sum(), np.zeros(line.l))


def success_probability(line: WalkLine, far_fraction: float, tau_star: float,
                        samples: int, rng, start: int = 0):
    """Estimated probability of measuring m > (1 - F) l at a uniform time.

    Returns (p_star, deficit) where deficit = F - p_star is the quantity the
    l/tau* + 1/l envelope bounds.
    """
    if not 0.0 <= far_fraction <= 1.0:
        raise ValueError("far_fraction must lie in [0, 1]")
    if far_fraction == 0.0:
        return 0.0, 0.0
    avg = time_averaged_distribution(line, tau_star, samples, rng, start)
    cut = (1.0 - far_fraction) * line.l
    p_star = float(avg.probabilities[np.arange(line.l) > cut].sum())
    return p_star, far_fraction - p_star


def fit_tv_envelope(lines, tau_factor: float, samples: int, rng):
    """Fit TV(p_bar, pi) <= c * l / tau* over a sweep of line lengths.

    tau* = tau_factor * l for each line.  Returns (c, per-line TVs, relative
    residuals of the one-parameter fit).
    """
    ls, tvs = [], []
    for line in lines:
        tau_star = tau_factor * line.l
        avg = time_averaged_distribution(line, tau_star, samples, rng)
        tvs.append(avg.total_variation(limiting_distribution(line)))
        ls.append(line.l)
    x = np.array([l / (tau_factor * l) for l in ls])  # = 1/tau_factor each
    tvs = np.array(tvs)
    c = float((x @ tvs) / (x @ x))
    residuals = (tvs - c * x) / np.maximum(tvs, 1e-12)
    return c, tvs, residuals


def fit_success_envelope(lines, far_fraction: float, tau_factor: float,
                         samples: int, rng):
    """Least-squares constants (c1, c2) in  F - p* <= c1 l/tau* + c2 / l.

    Negative deficits (p* above F) are clamped to zero for the fit; the
    returned record keeps the raw values for reporting.
    """
    rows, deficits, raw = [], [], []
    for line in lines:
        tau_star = tau_factor * line.l
        _, deficit = success_probability(line, far_fraction, tau_star,
                                         samples, rng)
        rows.append((line.l / tau_star, 1.0 / line.l))
        raw.append(deficit)
        deficits.append(max(deficit, 0.0))
    a = np.array(rows)
    b = np.array(deficits)
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    c1, c2 = (float(max(c, 0.0)) for c in coef)
    return {"c1": c1, "c2": c2, "deficits": raw,
            "bound": [c1 * r[0] + c2 * r[1] for r in rows]}


def simulate_measurement(trajectory, tau: float, rng):
    """Sample a position of the walk over a trajectory's states at time tau.

    Returns (m, state_m, clock value at m).  Reproducible for a fixed rng
    state; independent draws should use spawned generators so results do
    not depend on scheduling.
    """
    l = len(trajectory)
    line = WalkLine(l)
    probs = position_distribution(line, tau)
    m = int(rng.choice(l, p=probs / probs.sum()))
    state = trajectory.state(m)
    from .engine import clock_value
    return m, state, clock_value(state)


def distribution_dump(dist: WalkDistribution) -> str:
    """Text dump: one `m p(m)` line per position."""
    return "\n".join(f"{m} {p:.12g}" for m, p in enumerate(dist.probabilities))
