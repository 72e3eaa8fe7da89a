"""Distributed power-update rules and the synchronous fixed-point engine.

Three one-step update rules operate on a power vector:

  - target tracking (TPC): each UE scales its power to hit a fixed SINR
    target with equality, clipped at its cap;
  - GEE tracking: target tracking against effective targets that combine the
    minimum SINR with a per-UE throughput-share requirement;
  - dynamic tracking (DTPC): UEs with good channels (low effective
    interference) raise power opportunistically, the rest track their minimum
    SINR.

All three are two-sided scalable maps, hence the synchronous iteration
converges to a unique fixed point from any positive start;
`check_two_sided_scalable` verifies the defining inequality on random
samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import backend
from .model import LN2, LinkMetrics, NetworkSnapshot, check_power, effective_interference, metrics

# Relative-change floor (watts) for the stopping rule, guards zero powers.
CHANGE_FLOOR_W = 1e-15


@dataclass(frozen=True)
class TargetSpec:
    """Per-UE SINR requirements for the GEE-tracking update.

    `effective_targets` merges the hard minimum SINR with the SINR implied by
    each UE's share of the throughput budget: the elementwise max of
    `min_sinr` and ``2^(shares * max_throughput) - 1``.
    """

    min_sinr: np.ndarray
    shares: np.ndarray
    max_throughput: float
    effective_targets: np.ndarray = field(default=None)  # derived unless given

    def __post_init__(self):
        min_sinr = np.ascontiguousarray(self.min_sinr, dtype=np.float64)
        shares = np.ascontiguousarray(self.shares, dtype=np.float64)
        if min_sinr.shape != shares.shape:
            raise ValueError("min_sinr and shares must have the same length")
        if np.any(min_sinr < 0):
            raise ValueError("minimum SINRs must be non-negative")
        if np.any(shares < 0) or np.any(shares > 1):
            raise ValueError("throughput shares must lie in [0, 1]")
        if shares.sum() > 1.0 + 1e-9:
            raise ValueError(f"throughput shares must sum to at most 1, got {shares.sum()}")
        if self.max_throughput < 0:
            raise ValueError("throughput budget must be non-negative")
        derived = np.maximum(min_sinr, np.expm1(shares * self.max_throughput * LN2))
        object.__setattr__(self, "min_sinr", min_sinr)
        object.__setattr__(self, "shares", shares)
        object.__setattr__(self, "effective_targets", derived)

    @classmethod
    def from_min_sinr(cls, min_sinr) -> "TargetSpec":
        """Spec with zero shares: the GEE update degenerates to plain tracking."""
        min_sinr = np.asarray(min_sinr, dtype=np.float64)
        return cls(min_sinr=min_sinr, shares=np.zeros_like(min_sinr), max_throughput=0.0)


@dataclass(frozen=True)
class TargetTracking:
    """Update rule p' = min(cap, targets * effective_interference(p))."""

    targets: np.ndarray

    def __call__(self, snapshot: NetworkSnapshot, p: np.ndarray) -> np.ndarray:
        return np.minimum(snapshot.max_power, self.targets * effective_interference(snapshot, p))


@dataclass(frozen=True)
class DynamicTracking:
    """Update rule p' = min(cap, max(min_sinr * phi, opportunism / phi))."""

    min_sinr: np.ndarray
    opportunism: np.ndarray

    def __call__(self, snapshot: NetworkSnapshot, p: np.ndarray) -> np.ndarray:
        phi = effective_interference(snapshot, p)
        return np.minimum(snapshot.max_power, np.maximum(self.min_sinr * phi, self.opportunism / phi))


UpdateRule = Union[TargetTracking, DynamicTracking, Callable[[np.ndarray], np.ndarray]]


def gee_update(snapshot: NetworkSnapshot, targets: TargetSpec, p) -> np.ndarray:
    """One step of the GEE-tracking update at `p`."""
    p = check_power(snapshot, p)
    return TargetTracking(targets.effective_targets)(snapshot, p)


def tpc_update(snapshot: NetworkSnapshot, min_sinr, p) -> np.ndarray:
    """One step of fixed-target tracking (the zero-share special case)."""
    p = check_power(snapshot, p)
    return TargetTracking(np.asarray(min_sinr, dtype=np.float64))(snapshot, p)


def dtpc_update(snapshot: NetworkSnapshot, min_sinr, opportunism, p) -> np.ndarray:
    """One step of dynamic-target tracking.

    `opportunism` (watts^2) sets the channel-quality threshold below which a
    UE transmits opportunistically instead of tracking its minimum SINR.
    """
    p = check_power(snapshot, p)
    opportunism = np.asarray(opportunism, dtype=np.float64)
    if np.any(opportunism <= 0):
        raise ValueError("opportunism constants must be positive")
    return DynamicTracking(np.asarray(min_sinr, dtype=np.float64), opportunism)(snapshot, p)


def default_opportunism(snapshot: NetworkSnapshot) -> np.ndarray:
    """Default opportunism constants: cap * noise / gain per UE.

    Calibrated so an interference-free UE's opportunistic power equals its
    cap; interference backs it off from there.
    """
    return snapshot.max_power * snapshot.noise_power / snapshot.gains


@dataclass(frozen=True)
class IterationConfig:
    """Stopping rule for the synchronous iteration."""

    tolerance: float = 1e-6
    max_iterations: int = 500
    initial_power: Union[np.ndarray, str, None] = None  # None -> caps / 100

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class IterationTrace:
    """Record of one iteration run: every visited power vector plus metrics."""

    powers: np.ndarray  # (iterations_used + 1, k)
    metrics: list
    converged: bool
    iterations_used: int

    @property
    def final_power(self) -> np.ndarray:
        return self.powers[-1]

    @property
    def final_metrics(self) -> LinkMetrics:
        return self.metrics[-1]


def resolve_initial_power(snapshot: NetworkSnapshot, config: IterationConfig) -> np.ndarray:
    """Materialize the configured starting power vector."""
    initial = config.initial_power
    if initial is None or (isinstance(initial, str) and initial == "default"):
        return snapshot.max_power / 100.0
    if isinstance(initial, str):
        named = {"cap": 1.0, "half_cap": 0.5, "low": 0.01}
        if initial not in named:
            raise ValueError(f"unknown initial-power policy {initial!r}")
        return snapshot.max_power * named[initial]
    p0 = check_power(snapshot, initial)
    if np.any(p0 > snapshot.max_power):
        raise ValueError("initial power exceeds a per-UE cap")
    return p0


def iterate(update: UpdateRule, snapshot: NetworkSnapshot, config: IterationConfig = IterationConfig()) -> IterationTrace:
    """Run the synchronous iteration p(t+1) = f(p(t)) until convergence.

    `update` is one of the rule objects above (fast compiled path) or any
    callable mapping a power vector to the next one while respecting the
    caps. Non-convergence within the iteration budget is reported through
    ``converged=False``, not an error.
    """
    p0 = resolve_initial_power(snapshot, config)
    if isinstance(update, TargetTracking):
        history, converged = backend.kernels.fixed_point_run(
            backend.kernels.UPDATE_TRACKING, snapshot.gains, snapshot.noise_power,
            snapshot.max_power, np.ascontiguousarray(update.targets, dtype=np.float64),
            np.zeros(snapshot.k), p0, config.tolerance, CHANGE_FLOOR_W, config.max_iterations)
    elif isinstance(update, DynamicTracking):
        history, converged = backend.kernels.fixed_point_run(
            backend.kernels.UPDATE_DYNAMIC, snapshot.gains, snapshot.noise_power,
            snapshot.max_power, np.ascontiguousarray(update.min_sinr, dtype=np.float64),
            np.ascontiguousarray(update.opportunism, dtype=np.float64),
            p0, config.tolerance, CHANGE_FLOOR_W, config.max_iterations)
    else:
        rows = [p0]
        converged = False
        for _ in range(config.max_iterations):
            p = rows[-1]
            pnew = check_power(snapshot, update(p))
            rows.append(pnew)
            rel = np.abs(pnew - p) / np.maximum(p, CHANGE_FLOOR_W)
            if rel.max() < config.tolerance:
                converged = True
                break
        history = np.vstack(rows)
    metric_rows = [metrics(snapshot, history[t]) for t in range(history.shape[0])]
    return IterationTrace(
        powers=history,
        metrics=metric_rows,
        converged=bool(converged),
        iterations_used=history.shape[0] - 1,
    )


@dataclass(frozen=True)
class ScalabilityCounterexample:
    """A sampled violation of the two-sided scalability inequality."""

    p: np.ndarray
    p_prime: np.ndarray
    scale: float
    ue: int
    f_p: np.ndarray
    f_p_prime: np.ndarray


def check_two_sided_scalable(update: Callable[[np.ndarray], np.ndarray],
                             snapshot: NetworkSnapshot,
                             trials: int = 1000,
                             seed: int = 0,
                             rel_slack: float = 1e-12):
    """Sample-test the two-sided scalability of an update map.

    Draws p > 0, a > 1 and p' with (1/a) p <= p' <= a p, then checks
    (1/a) f(p) <= f(p') <= a f(p) componentwise. Returns ``(True, None)`` or
    ``(False, counterexample)`` for the first violation found.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    cap = snapshot.max_power
    for _ in range(trials):
        p = cap * 10.0 ** rng.uniform(-5.0, 0.5, size=snapshot.k)
        a = 10.0 ** rng.uniform(0.05, 1.0)
        p_prime = p * a ** rng.uniform(-1.0, 1.0, size=snapshot.k)
        f_p = np.asarray(update(p), dtype=np.float64)
        f_prime = np.asarray(update(p_prime), dtype=np.float64)
        lower = f_p / a
        upper = f_p * a
        ok = (f_prime >= lower * (1.0 - rel_slack)) & (f_prime <= upper * (1.0 + rel_slack))
        if not ok.all():
            ue = int(np.argmin(ok))
            return False, ScalabilityCounterexample(
                p=p, p_prime=p_prime, scale=float(a), ue=ue, f_p=f_p, f_p_prime=f_prime)
    return True, None
