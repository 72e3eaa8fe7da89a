"""Centralized reference machinery for the GEE maximum.

The ratio of total throughput to total consumed power is maximized with a
Dinkelbach outer loop: for a weight q, the inner problem maximizes
``throughput(p) - q * total_power(p)`` over the minimum-SINR polytope
intersected with the power box, and q is updated to the achieved ratio until
the subtractive value vanishes. The inner problem is non-convex, so it is
attacked by projected gradient ascent from several starts followed by an
exact-interval coordinate polish; a brute-force grid oracle audits the result
at small UE counts.

From the solution the per-UE throughput shares are extracted; feeding them
back to the distributed GEE-tracking update reproduces the centralized
optimum as the iteration's unique fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import backend
from .exceptions import InfeasibleError, SolverFailureError
from .feasibility import feasibility_report, is_feasible, power_for_targets
from .iteration import DynamicTracking, IterationConfig, default_opportunism, iterate
from .model import LN2, NetworkSnapshot, check_power, metrics


@dataclass(frozen=True)
class SolverOptions:
    """Budgets and tolerances for the Dinkelbach solver."""

    outer_tolerance: float = 1e-8
    max_outer: int = 40
    starts: int = 8
    inner_max_iterations: int = 2000
    inner_xtol: float = 1e-11
    inner_ftol: float = 1e-14
    dykstra_tol: float = 1e-14
    dykstra_sweeps: int = 600
    polish_sweeps: int = 2
    polish_samples: int = 16
    seed: int = 0


@dataclass(frozen=True)
class ShareSolution:
    """Result of the centralized solve.

    `shares` are the per-UE fractions of the throughput budget at the
    optimizer; `gee` is the achieved ratio; `gee_weights` is the recorded
    weight sequence (non-decreasing); `max_throughput` is the budget the
    shares refer to.
    """

    shares: np.ndarray
    gee: float
    power: np.ndarray
    outer_iterations: int
    gee_weights: list
    max_throughput: float
    start_wins: list


@dataclass(frozen=True)
class OracleResult:
    """Best grid point of the brute-force search."""

    best_power: np.ndarray
    best_gee: float
    grid_resolution: int


def subtractive_objective(snapshot: NetworkSnapshot, gee_weight: float, p) -> float:
    """throughput(p) - gee_weight * total_power(p), the Dinkelbach inner objective."""
    m = metrics(snapshot, p)
    return m.total_throughput - gee_weight * m.total_power


def subtractive_gradient(snapshot: NetworkSnapshot, gee_weight: float, p) -> np.ndarray:
    """Analytic gradient of the subtractive objective in the transmit powers."""
    p = check_power(snapshot, p)
    s = p * snapshot.gains
    d = s.sum() + snapshot.noise_power
    inv = 1.0 / (d - s)
    r = inv.sum()
    return snapshot.gains * ((snapshot.k / d) - (r - inv)) / LN2 - gee_weight * snapshot.amp_inefficiency


def constraint_rows(snapshot: NetworkSnapshot, min_sinr) -> tuple:
    """Halfspace form (A, b) of the minimum-SINR constraints: A p >= b.

    UEs with a zero minimum contribute no row.
    """
    min_sinr = np.asarray(min_sinr, dtype=np.float64)
    active = np.flatnonzero(min_sinr > 0)
    a_rows = np.empty((active.size, snapshot.k))
    b = np.empty(active.size)
    for r, i in enumerate(active):
        row = -min_sinr[i] * snapshot.gains
        row[i] = snapshot.gains[i]
        a_rows[r] = row
        b[r] = min_sinr[i] * snapshot.noise_power
    return np.ascontiguousarray(a_rows), b


def project_to_constraints(snapshot: NetworkSnapshot, min_sinr, p,
                           options: SolverOptions = SolverOptions()) -> np.ndarray:
    """Euclidean projection of `p` onto the feasible set, then an exact repair.

    Dykstra's method leaves violations at round-off scale; the repair lifts
    any short UE onto its SINR boundary so the result satisfies the
    constraints to within a few ulps.
    """
    min_sinr = np.asarray(min_sinr, dtype=np.float64)
    a_rows, b = constraint_rows(snapshot, min_sinr)
    rownorm2 = (a_rows ** 2).sum(axis=1)
    x = backend.kernels.dykstra_project(
        np.ascontiguousarray(p, dtype=np.float64), a_rows, b, rownorm2,
        snapshot.max_power, options.dykstra_tol, options.dykstra_sweeps)
    x = np.clip(x, 0.0, snapshot.max_power)
    for _ in range(60):
        s = x * snapshot.gains
        need = min_sinr * (s.sum() - s + snapshot.noise_power) / snapshot.gains
        if np.all(x >= need * (1.0 - 1e-12)):
            break
        x = np.minimum(snapshot.max_power, np.maximum(x, need))
    return x


def _start_points(snapshot: NetworkSnapshot, p_floor: np.ndarray, options: SolverOptions) -> list:
    cap = snapshot.max_power
    starts = [p_floor, cap.copy(), 0.5 * (p_floor + cap)]
    rng = np.random.default_rng(options.seed)
    lo = np.maximum(p_floor, cap * 1e-6)
    n_random = max(options.starts - len(starts), 0)
    for _ in range(n_random):
        u = rng.uniform(0.0, 1.0, size=snapshot.k)
        starts.append(lo * (cap / lo) ** u)
    return starts


def inner_maximize(snapshot: NetworkSnapshot, min_sinr, gee_weight: float,
                   options: SolverOptions = SolverOptions(),
                   extra_starts: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Approximately maximize the subtractive objective under the constraints.

    Multi-start projected gradient ascent plus a coordinate polish; the
    returned point is feasible and no worse than every start point.
    """
    p, _, _ = _inner_maximize_detailed(snapshot, min_sinr, gee_weight, options, extra_starts)
    return p


def _inner_maximize_detailed(snapshot, min_sinr, gee_weight, options, extra_starts=()):
    if gee_weight < 0:
        raise ValueError("the GEE weight must be non-negative")
    min_sinr = np.asarray(min_sinr, dtype=np.float64)
    p_floor = power_for_targets(snapshot, min_sinr)
    if np.any(p_floor > snapshot.max_power):
        raise InfeasibleError("minimum SINRs are infeasible within the caps",
                              details=feasibility_report(snapshot, min_sinr))
    a_rows, b = constraint_rows(snapshot, min_sinr)
    rownorm2 = (a_rows ** 2).sum(axis=1)
    kern = backend.kernels
    starts = _start_points(snapshot, p_floor, options)
    starts.extend(np.asarray(s, dtype=np.float64) for s in extra_starts if s is not None)
    best_p, best_val, best_idx = None, -np.inf, -1
    for idx, start in enumerate(starts):
        x = project_to_constraints(snapshot, min_sinr, start, options)
        x, _, _ = kern.ascent_run(
            snapshot.gains, snapshot.noise_power, snapshot.max_power,
            snapshot.amp_inefficiency, gee_weight, a_rows, b, rownorm2,
            x, options.inner_max_iterations, options.inner_xtol,
            options.inner_ftol, options.dykstra_tol, options.dykstra_sweeps)
        x = kern.coordinate_polish(
            snapshot.gains, snapshot.noise_power, snapshot.max_power,
            snapshot.amp_inefficiency, gee_weight, min_sinr, x,
            options.polish_sweeps, options.polish_samples)
        x = project_to_constraints(snapshot, min_sinr, x, options)
        value = subtractive_objective(snapshot, gee_weight, x)
        if value > best_val:
            best_p, best_val, best_idx = x, value, idx
    return best_p, best_val, best_idx


def compute_max_throughput(snapshot: NetworkSnapshot, min_sinr,
                           opportunism: Optional[np.ndarray] = None,
                           config: Optional[IterationConfig] = None) -> float:
    """Throughput budget: total throughput at the dynamic-tracking fixed point."""
    min_sinr = np.asarray(min_sinr, dtype=np.float64)
    if not is_feasible(snapshot, min_sinr):
        raise InfeasibleError("minimum SINRs are infeasible; no throughput budget exists",
                              details=feasibility_report(snapshot, min_sinr))
    if opportunism is None:
        opportunism = default_opportunism(snapshot)
    if config is None:
        config = IterationConfig(tolerance=1e-9, max_iterations=2000)
    trace = iterate(DynamicTracking(min_sinr, np.asarray(opportunism, dtype=np.float64)),
                    snapshot, config)
    return trace.final_metrics.total_throughput


def dinkelbach_solve(snapshot: NetworkSnapshot, min_sinr, max_throughput: float,
                     options: SolverOptions = SolverOptions()) -> ShareSolution:
    """Maximize the GEE and extract per-UE throughput shares.

    The weight sequence starts at the GEE of the minimum-power point and is
    non-decreasing by construction (the previous optimizer seeds the next
    inner solve). Stops once the subtractive value is below the outer
    tolerance; exhausting `max_outer` raises SolverFailureError.
    """
    min_sinr = np.asarray(min_sinr, dtype=np.float64)
    p_floor = power_for_targets(snapshot, min_sinr)
    if np.any(p_floor > snapshot.max_power):
        raise InfeasibleError("minimum SINRs are infeasible within the caps",
                              details=feasibility_report(snapshot, min_sinr))
    q = metrics(snapshot, p_floor).gee
    weights = [q]
    wins = []
    p_star = p_floor
    converged = False
    outer = 0
    for outer in range(1, options.max_outer + 1):
        p_star, _, win = _inner_maximize_detailed(
            snapshot, min_sinr, q, options,
            extra_starts=(p_star,) if outer > 1 else ())
        wins.append(win)
        m = metrics(snapshot, p_star)
        value = m.total_throughput - q * m.total_power
        if abs(value) < options.outer_tolerance:
            converged = True
            break
        if value < 0:
            # the inner solver found nothing better than the previous point;
            # the remaining gap is numerical noise
            converged = True
            break
        q = m.total_throughput / m.total_power
        weights.append(q)
    if not converged:
        raise SolverFailureError(
            "Dinkelbach loop did not converge within the outer budget",
            diagnostics={"gee_weights": weights, "last_value": value})
    final = metrics(snapshot, p_star)
    weights.append(final.gee)
    budget = max(float(max_throughput), final.total_throughput)
    shares = np.clip(final.throughput / budget, 0.0, 1.0) if budget > 0 else np.zeros(snapshot.k)
    return ShareSolution(
        shares=shares,
        gee=final.gee,
        power=p_star,
        outer_iterations=outer,
        gee_weights=weights,
        max_throughput=budget,
        start_wins=wins,
    )


def _grid_axes(snapshot: NetworkSnapshot, p_floor: np.ndarray, resolution: int) -> list:
    axes = []
    for i in range(snapshot.k):
        cap = snapshot.max_power[i]
        if p_floor[i] > 0:
            lo = min(max(p_floor[i], cap * 1e-12), cap)
            axes.append(np.geomspace(lo, cap, resolution))
        else:
            axes.append(np.concatenate(([0.0], np.geomspace(cap * 1e-9, cap, resolution - 1))))
    return axes


def brute_force_gee(snapshot: NetworkSnapshot, min_sinr, grid_resolution: int = 64) -> OracleResult:
    """Exhaustive grid search for the GEE maximum (UE counts up to 3).

    Axes are geometric between each UE's minimum-power corner and its cap, so
    refining the resolution to ``2 * n - 1`` yields a superset of candidates.
    Grid points violating a minimum SINR are discarded; if none survive an
    InfeasibleError is raised.
    """
    if snapshot.k > 3:
        raise ValueError("the brute-force oracle is limited to k <= 3")
    if grid_resolution < 16:
        raise ValueError("grid_resolution must be at least 16")
    min_sinr = np.asarray(min_sinr, dtype=np.float64)
    p_floor = power_for_targets(snapshot, min_sinr)
    if np.any(p_floor > snapshot.max_power):
        raise InfeasibleError("no grid point can satisfy the minimum SINRs",
                              details=feasibility_report(snapshot, min_sinr))
    axes = _grid_axes(snapshot, p_floor, grid_resolution)
    gains = snapshot.gains
    noise = snapshot.noise_power
    mu = snapshot.amp_inefficiency
    fixed = snapshot.fixed_power
    best_gee = -np.inf
    best_p = None
    # chunk over the first axis to bound memory
    tail = axes[1:]
    tail_grid = np.stack([g.ravel() for g in np.meshgrid(*tail, indexing="ij")], axis=-1) \
        if tail else np.zeros((1, 0))
    for x0 in axes[0]:
        pts = np.empty((tail_grid.shape[0], snapshot.k))
        pts[:, 0] = x0
        if tail:
            pts[:, 1:] = tail_grid
        s = pts * gains
        total = s.sum(axis=1, keepdims=True)
        sinr_vals = s / (total - s + noise)
        ok = np.all(sinr_vals >= min_sinr * (1.0 - 1e-12), axis=1)
        if not ok.any():
            continue
        throughput = (np.log1p(sinr_vals[ok]) / LN2).sum(axis=1)
        power = fixed + (pts[ok] * mu).sum(axis=1)
        gee = throughput / power
        j = int(gee.argmax())
        if gee[j] > best_gee:
            best_gee = float(gee[j])
            best_p = pts[ok][j].copy()
    if best_p is None:
        raise InfeasibleError("every grid point violates a minimum SINR",
                              details=feasibility_report(snapshot, min_sinr))
    return OracleResult(best_power=best_p, best_gee=best_gee, grid_resolution=grid_resolution)


def _gee_at(snapshot: NetworkSnapshot, min_sinr, p) -> Optional[float]:
    m = metrics(snapshot, p)
    if np.any(m.sinr < min_sinr * (1.0 - 1e-12)):
        return None
    return m.gee


def refined_oracle(snapshot: NetworkSnapshot, min_sinr, grid_resolution: int = 64) -> tuple:
    """Oracle value at one refinement step plus an error estimate.

    Returns ``(result, estimate)`` where `result` uses the refined grid
    (2n - 1 points per axis) and `estimate` bounds the remaining grid error:
    the refinement gain plus the largest value drop to an axis neighbor of
    the best point (the one-cell variation that the grid cannot resolve).
    """
    min_sinr = np.asarray(min_sinr, dtype=np.float64)
    coarse = brute_force_gee(snapshot, min_sinr, grid_resolution)
    fine = brute_force_gee(snapshot, min_sinr, 2 * grid_resolution - 1)
    p_floor = power_for_targets(snapshot, min_sinr)
    axes = _grid_axes(snapshot, p_floor, 2 * grid_resolution - 1)
    drop = 0.0
    for i in range(snapshot.k):
        axis = axes[i]
        pos = int(np.searchsorted(axis, fine.best_power[i]))
        pos = min(max(pos, 0), axis.size - 1)
        for j in (pos - 1, pos + 1):
            if j < 0 or j >= axis.size:
                continue
            neighbor = fine.best_power.copy()
            neighbor[i] = axis[j]
            value = _gee_at(snapshot, min_sinr, neighbor)
            if value is not None:
                drop = max(drop, fine.best_gee - value)
    estimate = max((fine.best_gee - coarse.best_gee) + drop, 1e-6 * fine.best_gee, 1e-12)
    return fine, estimate
