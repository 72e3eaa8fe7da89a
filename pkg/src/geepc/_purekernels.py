"""Pure-numpy kernels: fixed-point power iteration and constrained ascent.

This module is the fallback backend. `geepc._kernels` (Cython) mirrors it
function for function; keep the two in lockstep. The parity tests in
tests/test_kernels.py compare both implementations directly.

Conventions shared by both backends:
  - all arrays are contiguous float64 of length k (UE count),
  - the subtractive objective drops the constant circuit-power term:
    F(p) = sum_i log2(1 + sinr_i(p)) - q * sum_i mu_i * p_i,
  - the feasible set is {p: A p >= b} intersected with the box [0, cap],
    where the rows of A encode the minimum-SINR constraints.
"""

import numpy as np

LN2 = 0.6931471805599453

UPDATE_TRACKING = 0  # p' = min(cap, target * phi(p))
UPDATE_DYNAMIC = 1  # p' = min(cap, max(min_sinr * phi(p), opportunism / phi(p)))


def fixed_point_run(kind, gains, noise, cap, targets, opportunism, p0, tol, floor, max_iter):
    """Synchronous power iteration; returns (history, converged).

    `history` has one row per visited power vector, starting at p0. The loop
    stops once the relative max-norm change drops below `tol` (with `floor`
    guarding the denominator) or after `max_iter` updates.
    """
    k = gains.shape[0]
    history = np.empty((max_iter + 1, k))
    history[0] = p0
    converged = False
    steps = max_iter
    for t in range(max_iter):
        p = history[t]
        s = p * gains
        total = s.sum()
        phi = (total - s + noise) / gains
        if kind == UPDATE_TRACKING:
            pnew = targets * phi
        else:
            pnew = np.maximum(targets * phi, opportunism / phi)
        pnew = np.minimum(cap, pnew)
        history[t + 1] = pnew
        rel = np.abs(pnew - p) / np.maximum(p, floor)
        if rel.max() < tol:
            converged = True
            steps = t + 1
            break
    return history[: steps + 1].copy(), converged


def _objective(gains, noise, mu, q, x):
    s = x * gains
    d = s.sum() + noise
    return float((np.log1p(s / (d - s)) / LN2).sum() - q * (mu * x).sum())


def _gradient(gains, noise, mu, q, x):
    s = x * gains
    d = s.sum() + noise
    inv = 1.0 / (d - s)
    r = inv.sum()
    return gains * ((x.shape[0] / d) - (r - inv)) / LN2 - q * mu


def dykstra_project(x0, a_rows, b, rownorm2, cap, tol, max_sweeps):
    """Project x0 onto {x: A x >= b} ∩ [0, cap] (Dykstra's alternating method).

    Returns x0 unchanged when it is already feasible. `rownorm2` holds the
    squared norms of the rows of A.
    """
    m = a_rows.shape[0]
    if m == 0:
        return np.clip(x0, 0.0, cap)
    if np.all(x0 >= 0.0) and np.all(x0 <= cap) and np.all(a_rows @ x0 >= b):
        return x0.copy()
    scale = cap.max()
    x = x0.copy()
    increments = np.zeros((m + 1, x.shape[0]))
    for _ in range(max_sweeps):
        x_prev = x.copy()
        for j in range(m):
            z = x + increments[j]
            gap = b[j] - a_rows[j] @ z
            if gap > 0.0:
                xnew = z + (gap / rownorm2[j]) * a_rows[j]
            else:
                xnew = z
            increments[j] = z - xnew
            x = xnew
        z = x + increments[m]
        xnew = np.clip(z, 0.0, cap)
        increments[m] = z - xnew
        x = xnew
        if np.abs(x - x_prev).max() <= tol * scale:
            break
    return x


def ascent_run(gains, noise, cap, mu, q, a_rows, b, rownorm2, p0,
               max_iter, xtol, ftol, dyk_tol, dyk_sweeps):
    """Projected gradient ascent with backtracking line search.

    Maximizes the subtractive objective over the SINR-constraint polytope
    intersected with the power box. Returns (x, objective, iterations).
    """
    scale = cap.max()
    x = dykstra_project(p0, a_rows, b, rownorm2, cap, dyk_tol, dyk_sweeps)
    f = _objective(gains, noise, mu, q, x)
    alpha = 0.0
    small_steps = 0
    stalls = 0
    iters = 0
    for it in range(max_iter):
        iters = it + 1
        g = _gradient(gains, noise, mu, q, x)
        gmax = np.abs(g).max()
        if gmax == 0.0:
            break
        if alpha == 0.0:
            alpha = 0.25 * scale / gmax
        accepted = False
        cand = x
        fc = f
        for _ in range(40):
            cand = dykstra_project(x + alpha * g, a_rows, b, rownorm2, cap, dyk_tol, dyk_sweeps)
            step = cand - x
            step_max = np.abs(step).max()
            if step_max <= 1e-18 * scale:
                break
            fc = _objective(gains, noise, mu, q, cand)
            slope = float(g @ step)
            if fc >= f + 1e-4 * slope and fc >= f:
                accepted = True
                break
            alpha *= 0.4
        if not accepted:
            break
        gain = fc - f
        step_max = np.abs(cand - x).max()
        x = cand
        f = fc
        alpha = min(alpha * 1.7, 1e12 * scale)
        small_steps = small_steps + 1 if step_max <= xtol * scale else 0
        stalls = stalls + 1 if gain <= ftol * (1.0 + abs(f)) else 0
        if small_steps >= 2 or stalls >= 3:
            break
    return x, f, iters


def _golden_max(eval_at, lo, hi, iters):
    inv_phi = 0.6180339887498949
    a, c = lo, hi
    x1 = c - inv_phi * (c - a)
    x2 = a + inv_phi * (c - a)
    f1 = eval_at(x1)
    f2 = eval_at(x2)
    for _ in range(iters):
        if f1 < f2:
            a = x1
            x1, f1 = x2, f2
            x2 = a + inv_phi * (c - a)
            f2 = eval_at(x2)
        else:
            c = x2
            x2, f2 = x1, f1
            x1 = c - inv_phi * (c - a)
            f1 = eval_at(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def coordinate_polish(gains, noise, cap, mu, q, min_sinr, x0, sweeps, samples):
    """Cyclic exact-interval coordinate ascent, used to refine an ascent result.

    For each UE the feasible interval of its own power (all other powers
    fixed) follows from its own minimum-SINR constraint (lower end), every
    other UE's constraint (upper end), and the cap. The objective is sampled
    geometrically on the interval and the best bracket is refined by golden
    section; this keeps boundary optima exact.
    """
    k = gains.shape[0]
    x = x0.copy()

    def coord_objective(i, value):
        old = x[i]
        x[i] = value
        val = _objective(gains, noise, mu, q, x)
        x[i] = old
        return val

    for _ in range(sweeps):
        for i in range(k):
            s = x * gains
            total = s.sum()
            interf = total - s[i] + noise
            lo = min_sinr[i] * interf / gains[i] if min_sinr[i] > 0.0 else 0.0
            hi = cap[i]
            for j in range(k):
                if j == i or min_sinr[j] <= 0.0:
                    continue
                room = s[j] / min_sinr[j] - noise - (total - s[j] - s[i])
                hi = min(hi, room / gains[i])
            if hi <= lo:
                x[i] = min(max(x[i], lo), cap[i])
                continue
            floor = max(lo, hi * 1e-12)
            cands = [c for c in (lo, x[i]) if lo <= c <= hi]
            ratio = (hi / floor) ** (1.0 / (samples - 1))
            cur = floor
            for _ in range(samples):
                if lo <= cur <= hi:
                    cands.append(cur)
                cur *= ratio
            if not cands:
                continue
            values = [coord_objective(i, c) for c in cands]
            best = max(range(len(cands)), key=values.__getitem__)
            bracket_lo = max((c for c in cands if c < cands[best]), default=lo)
            bracket_hi = min((c for c in cands if c > cands[best]), default=hi)
            xb, fb = _golden_max(lambda v: coord_objective(i, v), bracket_lo, bracket_hi, 30)
            x[i] = xb if fb >= values[best] else cands[best]
    return x
