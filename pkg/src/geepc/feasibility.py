"""Closed-form feasibility analysis of target-SINR vectors.

For the matched-filter uplink there is a one-to-one map between an achievable
SINR vector and the power vector meeting it with equality: each UE's share of
the "interference load" is u_i = g_i / (1 + g_i), and the targets are jointly
achievable iff sum(u) < 1 and the resulting powers stay within the caps.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InfeasibleError
from .model import NetworkSnapshot, sinr


def interference_load(targets) -> float:
    """Sum of g/(1+g) over the target vector; must stay below 1."""
    targets = np.asarray(targets, dtype=np.float64)
    return float((targets / (1.0 + targets)).sum())


def power_for_targets(snapshot: NetworkSnapshot, targets) -> np.ndarray:
    """Power vector achieving each target SINR with equality.

    Raises
    ------
    InfeasibleError
        If the load margin ``1 - sum(g/(1+g))`` is not positive (no finite
        power vector can reach the targets regardless of caps).
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (snapshot.k,):
        raise ValueError(f"target vector must have length {snapshot.k}, got shape {targets.shape}")
    if np.any(targets < 0):
        raise ValueError("target SINRs must be non-negative")
    share = targets / (1.0 + targets)
    margin = 1.0 - share.sum()
    if margin <= 0:
        raise InfeasibleError(
            "targets are structurally infeasible: interference load "
            f"{share.sum():.6g} >= 1",
            details={"load": float(share.sum()), "margin": float(margin)},
        )
    return share / snapshot.gains * (snapshot.noise_power / margin)


def is_feasible(snapshot: NetworkSnapshot, targets) -> bool:
    """True iff the targets are achievable within the per-UE power caps."""
    try:
        p = power_for_targets(snapshot, targets)
    except InfeasibleError:
        return False
    return bool(np.all(p <= snapshot.max_power))


def feasibility_report(snapshot: NetworkSnapshot, targets) -> dict:
    """Diagnostics for a target vector: load, margin, powers vs caps."""
    targets = np.asarray(targets, dtype=np.float64)
    load = interference_load(targets)
    report = {"load": load, "margin": 1.0 - load, "structural": load < 1.0}
    if report["structural"]:
        p = power_for_targets(snapshot, targets)
        over = p > snapshot.max_power
        report.update(
            powers=p,
            cap_violations=int(over.sum()),
            worst_headroom=float((snapshot.max_power - p).min()),
            feasible=bool(not over.any()),
        )
    else:
        report.update(feasible=False)
    return report


def max_common_target(snapshot: NetworkSnapshot, rel_tol: float = 1e-6) -> float:
    """Largest uniform target SINR (linear) feasible for every UE.

    Bisection on (0, 1/(k-1)): the load constraint caps any uniform target at
    1/(k-1), and cap constraints can only lower it further. For k = 1 the
    structural bound vanishes and the answer is the cap SNR.
    """
    if snapshot.k == 1:
        return float(snapshot.max_power[0] * snapshot.gains[0] / snapshot.noise_power)
    lo = 0.0
    hi = 1.0 / (snapshot.k - 1)  # load exactly 1, always infeasible
    while (hi - lo) > rel_tol * max(lo, 1e-12):
        mid = 0.5 * (lo + hi)
        if is_feasible(snapshot, np.full(snapshot.k, mid)):
            lo = mid
        else:
            hi = mid
    return lo


__all__ = [
    "interference_load",
    "power_for_targets",
    "is_feasible",
    "feasibility_report",
    "max_common_target",
    "sinr",
]
