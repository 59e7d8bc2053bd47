"""Elastic sphere measurements.

A measurement along direction u stretches an elastic between u and -u; the
particle at state v drops orthogonally onto it (elastic coordinate v.u) and
the elastic breaks at a point x drawn from a density rho on [-1, 1].  The
particle ends at u (outcome O1) when the break falls below its coordinate,
at -u (outcome O2) otherwise.  The analytic outcome probabilities are
therefore CDF evaluations of rho at v.u.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr, ndtri

from .geometry import UnitVector3, dot, sample_uniform_array
from .kolmogorov_check import AgreementTable

X_DOMAIN_TOL = 1e-9
CHUNK_TRIALS = 1 << 16  # fixed batch granularity for counter-based streams

# largest double strictly below 1; samples are clamped under it so an
# eigenstate (v.u == 1) can never tie with the break point
_BELOW_ONE = math.nextafter(1.0, -1.0)


class OutcomeLabel(Enum):
    O1 = "O1"  # particle reaches u: price inside the context's interval
    O2 = "O2"  # particle reaches -u

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MeasurementOutcome:
    label: OutcomeLabel
    collapsed_state: UnitVector3
    break_point: float | None = None  # None for analytic evaluation


class RhoDistribution:
    """Break-point density on [-1, 1]; cdf(-1) = 0 and cdf(1) = 1."""

    kind: str = ""

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(d: dict) -> "RhoDistribution":
        kinds = {
            "uniform": UniformRho,
            "delta": DeltaRho,
            "piecewise": PiecewiseConstantRho,
            "truncated_gaussian": TruncatedGaussianRho,
        }
        d = dict(d)
        try:
            cls = kinds[d.pop("kind")]
        except KeyError as exc:
            raise ValueError(f"unknown rho kind: {exc}") from None
        return cls(**d)


@dataclass(frozen=True)
class UniformRho(RhoDistribution):
    """Constant density 1/2: every break point equally likely."""

    kind = "uniform"

    def cdf(self, x):
        if x >= 1.0:
            return 1.0
        if x <= -1.0:
            return 0.0
        return (x + 1.0) / 2.0

    def sample(self, rng, size=None):
        return rng.uniform(-1.0, 1.0, size=size)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class DeltaRho(RhoDistribution):
    """All mass at a single break point x0; the deterministic elastic.

    The CDF is a right-continuous step, so an outcome is fully decided by
    the sign of v.u - x0: the classical, predetermined regime.
    """

    x0: float
    kind = "delta"

    def __post_init__(self):
        if not -1.0 < self.x0 < 1.0:
            raise ValueError("delta break point must lie strictly inside (-1, 1)")

    def cdf(self, x):
        return 1.0 if x >= self.x0 else 0.0

    def sample(self, rng, size=None):
        if size is None:
            return self.x0
        return np.full(size, self.x0)

    def to_dict(self):
        return {"kind": self.kind, "x0": self.x0}


class PiecewiseConstantRho(RhoDistribution):
    """Step density over a partition of [-1, 1].

    ``breakpoints`` are the ascending cell edges and must span the full
    interval (first -1, last 1); ``densities`` holds one nonnegative level
    per cell and is normalized to unit total mass.
    """

    kind = "piecewise"

    def __init__(self, breakpoints, densities):
        bp = np.asarray(breakpoints, dtype=float)
        dens = np.asarray(densities, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if dens.shape != (bp.size - 1,):
            raise ValueError("densities must have one entry per cell")
        if bp[0] != -1.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must span [-1, 1]")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly ascending")
        if dens.min() < 0:
            raise ValueError("densities must be nonnegative")
        mass = dens * np.diff(bp)
        total = mass.sum()
        if total <= 0:
            raise ValueError("density must have positive total mass")
        self.breakpoints = bp
        self.densities = dens / total
        self._cum = np.concatenate([[0.0], np.cumsum(mass / total)])
        self._cum[-1] = 1.0  # pin against cumsum roundoff

    def cdf(self, x):
        if x >= 1.0:
            return 1.0
        if x <= -1.0:
            return 0.0
        i = int(np.searchsorted(self.breakpoints, x, side="right")) - 1
        return float(min(1.0, self._cum[i] + self.densities[i] * (x - self.breakpoints[i])))

    def sample(self, rng, size=None):
        u = rng.random(size)
        idx = np.searchsorted(self._cum, u, side="right") - 1
        idx = np.clip(idx, 0, self.densities.size - 1)
        dens = self.densities[idx]
        x = self.breakpoints[idx] + (u - self._cum[idx]) / np.where(dens > 0, dens, 1.0)
        x = np.minimum(x, _BELOW_ONE)
        return float(x) if size is None else x

    def to_dict(self):
        return {
            "kind": self.kind,
            "breakpoints": self.breakpoints.tolist(),
            "densities": self.densities.tolist(),
        }

    def __repr__(self):
        return (f"PiecewiseConstantRho(breakpoints={self.breakpoints.tolist()}, "
                f"densities={self.densities.tolist()})")

    def __eq__(self, other):
        return (isinstance(other, PiecewiseConstantRho)
                and np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.densities, other.densities))


@dataclass(frozen=True)
class TruncatedGaussianRho(RhoDistribution):
    """Gaussian bump (center, width) renormalized to [-1, 1]."""

    center: float
    width: float
    kind = "truncated_gaussian"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def _bounds(self):
        a = (-1.0 - self.center) / self.width
        b = (1.0 - self.center) / self.width
        return a, b

    def cdf(self, x):
        if x >= 1.0:
            return 1.0
        if x <= -1.0:
            return 0.0
        a, b = self._bounds()
        lo, hi = ndtr(a), ndtr(b)
        return float(min(1.0, max(0.0, (ndtr((x - self.center) / self.width) - lo) / (hi - lo))))

    def sample(self, rng, size=None):
        a, b = self._bounds()
        lo, hi = ndtr(a), ndtr(b)
        u = rng.random(size)
        x = self.center + self.width * ndtri(lo + u * (hi - lo))
        x = np.clip(x, -1.0, _BELOW_ONE)
        return float(x) if size is None else x

    def to_dict(self):
        return {"kind": self.kind, "center": self.center, "width": self.width}


def rho_cdf(rho: RhoDistribution, x: float) -> float:
    """P(break point <= x); x must lie in [-1, 1] up to a 1e-9 clamp."""
    if not -1.0 - X_DOMAIN_TOL <= x <= 1.0 + X_DOMAIN_TOL:
        raise ValueError(f"elastic coordinate {x!r} outside [-1, 1]")
    return rho.cdf(min(1.0, max(-1.0, x)))


def transition_probabilities(rho: RhoDistribution, v: UnitVector3,
                             u: UnitVector3) -> tuple[float, float]:
    """(P[O1], P[O2]) for measuring along u with the particle at v.

    P[O1] is the rho-mass below the particle coordinate v.u; the pair sums
    to 1 exactly by construction.
    """
    p1 = rho_cdf(rho, dot(v, u))
    return p1, 1.0 - p1


def simulate_measurement(rho: RhoDistribution, state: UnitVector3,
                         u: UnitVector3, rng: np.random.Generator) -> MeasurementOutcome:
    """One elastic break: samples the break point and collapses the state.

    Outcome is O1 iff the break lands strictly below the particle coordinate
    v.u; ties go to O2 (measure zero for continuous rho, and the documented
    convention for the deterministic delta elastic).
    """
    x = float(rho.sample(rng))
    d = dot(state, u)
    if x < d:
        return MeasurementOutcome(OutcomeLabel.O1, u, x)
    return MeasurementOutcome(OutcomeLabel.O2, -u, x)


def measurement_counts(rho: RhoDistribution, state: UnitVector3, u: UnitVector3,
                       n_trials: int, seed: int, n_workers: int = 1) -> tuple[int, int]:
    """(count O1, count O2) over independent trials.

    Trials are split into fixed-size chunks; chunk c draws from a generator
    seeded by SeedSequence(seed, spawn_key=(c,)), so trial outcomes depend
    only on (seed, trial index) and never on worker scheduling.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    d = dot(state, u)
    n_chunks = (n_trials + CHUNK_TRIALS - 1) // CHUNK_TRIALS

    def run_chunk(c: int) -> int:
        size = min(CHUNK_TRIALS, n_trials - c * CHUNK_TRIALS)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(c,)))
        x = rho.sample(rng, size=size)
        return int(np.count_nonzero(x < d))

    if n_workers <= 1:
        n1 = sum(run_chunk(c) for c in range(n_chunks))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            n1 = sum(pool.map(run_chunk, range(n_chunks)))
    return n1, n_trials - n1


def measurement_frequency(rho, state, u, n_trials, seed, n_workers=1) -> float:
    """Empirical frequency of O1; converges to transition_probabilities[0]."""
    n1, _ = measurement_counts(rho, state, u, n_trials, seed, n_workers=n_workers)
    return n1 / n_trials


def sequential_agreement(rho: RhoDistribution, u_i: UnitVector3,
                         u_j: UnitVector3) -> float:
    """P[O1] when measuring along u_j with the state prepared at u_i.

    Preparation means a prior measurement along u_i collapsed the state onto
    u_i, so this is the rho CDF at u_i . u_j.
    """
    return rho_cdf(rho, dot(u_i, u_j))


def agreement_table(rho: RhoDistribution, directions: list[UnitVector3]) -> AgreementTable:
    """Pairwise sequential agreement among eigenstate-prepared measurements."""
    n = len(directions)
    if n < 2:
        raise ValueError("need at least two directions")
    q = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            q[i, j] = q[j, i] = sequential_agreement(rho, directions[i], directions[j])
    return AgreementTable(q)


def hidden_state_agreement_table(rho: RhoDistribution, directions: list[UnitVector3],
                                 n_samples: int = 100_000, seed: int = 0) -> AgreementTable:
    """Agreement table of the one-shot classical model.

    A hidden state (uniform initial position v plus one independent break
    point per direction) fixes all outcomes jointly, so the empirical table
    is a mixture of deterministic assignments and always classical.
    """
    n = len(directions)
    if n < 2:
        raise ValueError("need at least two directions")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    v = sample_uniform_array(rng, n_samples)
    dirs = np.array([[d.x, d.y, d.z] for d in directions])
    coords = np.clip(v @ dirs.T, -1.0, 1.0)  # (n_samples, n)
    breaks = rho.sample(rng, size=(n_samples, n))
    outcomes = breaks < coords
    q = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            q[i, j] = q[j, i] = float(np.mean(outcomes[:, i] == outcomes[:, j]))
    return AgreementTable(q)
