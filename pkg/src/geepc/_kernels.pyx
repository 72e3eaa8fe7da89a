# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: fixed-point power iteration and constrained ascent.

Mirrors geepc._purekernels function for function; keep the two in lockstep.
The parity tests in tests/test_kernels.py compare both implementations.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, log1p, pow

cnp.import_array()

cdef double LN2 = 0.6931471805599453

UPDATE_TRACKING = 0
UPDATE_DYNAMIC = 1


def fixed_point_run(int kind,
                    const double[::1] gains, double noise,
                    const double[::1] cap,
                    const double[::1] targets,
                    const double[::1] opportunism,
                    const double[::1] p0,
                    double tol, double floor, int max_iter):
    """Synchronous power iteration; returns (history, converged)."""
    cdef Py_ssize_t k = gains.shape[0]
    history_arr = np.empty((max_iter + 1, k))
    cdef double[:, ::1] history = history_arr
    cdef Py_ssize_t i, t
    cdef double total, phi, pnew, rel, relmax, denom
    cdef bint converged = False
    cdef Py_ssize_t steps = max_iter
    for i in range(k):
        history[0, i] = p0[i]
    for t in range(max_iter):
        total = 0.0
        for i in range(k):
            total += history[t, i] * gains[i]
        relmax = 0.0
        for i in range(k):
            phi = (total - history[t, i] * gains[i] + noise) / gains[i]
            if kind == 0:
                pnew = targets[i] * phi
            else:
                pnew = targets[i] * phi
                if opportunism[i] / phi > pnew:
                    pnew = opportunism[i] / phi
            if pnew > cap[i]:
                pnew = cap[i]
            history[t + 1, i] = pnew
            denom = history[t, i]
            if denom < floor:
                denom = floor
            rel = fabs(pnew - history[t, i]) / denom
            if rel > relmax:
                relmax = rel
        if relmax < tol:
            converged = True
            steps = t + 1
            break
    return history_arr[: steps + 1].copy(), converged


cdef double _objective_c(const double[::1] gains, double noise, const double[::1] mu,
                         double q, const double[::1] x) nogil:
    cdef Py_ssize_t k = gains.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0, rate = 0.0, spend = 0.0, s
    for i in range(k):
        total += x[i] * gains[i]
    total += noise
    for i in range(k):
        s = x[i] * gains[i]
        rate += log1p(s / (total - s)) / LN2
        spend += mu[i] * x[i]
    return rate - q * spend


cdef void _gradient_c(const double[::1] gains, double noise, const double[::1] mu,
                      double q, const double[::1] x, double[::1] out) nogil:
    cdef Py_ssize_t k = gains.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0, r = 0.0, s, inv
    for i in range(k):
        total += x[i] * gains[i]
    total += noise
    for i in range(k):
        r += 1.0 / (total - x[i] * gains[i])
    for i in range(k):
        inv = 1.0 / (total - x[i] * gains[i])
        out[i] = gains[i] * ((<double> k) / total - (r - inv)) / LN2 - q * mu[i]


def _objective(gains, noise, mu, q, x):
    """Subtractive objective without the constant circuit term (parity hook)."""
    cdef const double[::1] g = np.ascontiguousarray(gains)
    cdef const double[::1] m = np.ascontiguousarray(mu)
    cdef const double[::1] xx = np.ascontiguousarray(x)
    return _objective_c(g, noise, m, q, xx)


def _gradient(gains, noise, mu, q, x):
    """Gradient of the subtractive objective (parity hook)."""
    out = np.empty_like(np.ascontiguousarray(x))
    cdef const double[::1] g = np.ascontiguousarray(gains)
    cdef const double[::1] m = np.ascontiguousarray(mu)
    cdef const double[::1] xx = np.ascontiguousarray(x)
    cdef double[::1] o = out
    _gradient_c(g, noise, m, q, xx, o)
    return out


def dykstra_project(x0, a_rows, b, rownorm2, cap, double tol, int max_sweeps):
    """Project x0 onto {x: A x >= b} ∩ [0, cap] (Dykstra's alternating method)."""
    cdef const double[::1] x0v = np.ascontiguousarray(x0)
    cdef const double[:, ::1] av = np.ascontiguousarray(a_rows)
    cdef const double[::1] bv = np.ascontiguousarray(b)
    cdef const double[::1] rn = np.ascontiguousarray(rownorm2)
    cdef const double[::1] capv = np.ascontiguousarray(cap)
    cdef Py_ssize_t k = x0v.shape[0]
    cdef Py_ssize_t m = av.shape[0]
    cdef Py_ssize_t i, j, sweep
    cdef double gap, dot, diff, scale, znew, d

    out = np.empty(k)
    cdef double[::1] x = out
    if m == 0:
        for i in range(k):
            znew = x0v[i]
            if znew < 0.0:
                znew = 0.0
            if znew > capv[i]:
                znew = capv[i]
            x[i] = znew
        return out
    cdef bint feasible = True
    for i in range(k):
        if x0v[i] < 0.0 or x0v[i] > capv[i]:
            feasible = False
            break
    if feasible:
        for j in range(m):
            dot = 0.0
            for i in range(k):
                dot += av[j, i] * x0v[i]
            if dot < bv[j]:
                feasible = False
                break
    if feasible:
        for i in range(k):
            x[i] = x0v[i]
        return out

    scale = 0.0
    for i in range(k):
        if capv[i] > scale:
            scale = capv[i]
        x[i] = x0v[i]
    inc_arr = np.zeros((m + 1, k))
    prev_arr = np.empty(k)
    z_arr = np.empty(k)
    cdef double[:, ::1] inc = inc_arr
    cdef double[::1] prev = prev_arr
    cdef double[::1] zv = z_arr
    with nogil:
        for sweep in range(max_sweeps):
            for i in range(k):
                prev[i] = x[i]
            for j in range(m):
                for i in range(k):
                    zv[i] = x[i] + inc[j, i]
                dot = 0.0
                for i in range(k):
                    dot += av[j, i] * zv[i]
                gap = bv[j] - dot
                if gap > 0.0:
                    for i in range(k):
                        x[i] = zv[i] + (gap / rn[j]) * av[j, i]
                else:
                    for i in range(k):
                        x[i] = zv[i]
                for i in range(k):
                    inc[j, i] = zv[i] - x[i]
            for i in range(k):
                zv[i] = x[i] + inc[m, i]
                znew = zv[i]
                if znew < 0.0:
                    znew = 0.0
                if znew > capv[i]:
                    znew = capv[i]
                x[i] = znew
                inc[m, i] = zv[i] - znew
            diff = 0.0
            for i in range(k):
                d = fabs(x[i] - prev[i])
                if d > diff:
                    diff = d
            if diff <= tol * scale:
                break
    return out


def ascent_run(gains, noise, cap, mu, q, a_rows, b, rownorm2, p0,
               int max_iter, double xtol, double ftol, double dyk_tol, int dyk_sweeps):
    """Projected gradient ascent with backtracking; returns (x, objective, iterations)."""
    cdef const double[::1] g_v = np.ascontiguousarray(gains)
    cdef const double[::1] cap_v = np.ascontiguousarray(cap)
    cdef const double[::1] mu_v = np.ascontiguousarray(mu)
    cdef double noise_c = noise
    cdef double q_c = q
    cdef Py_ssize_t k = g_v.shape[0]

    x_arr = dykstra_project(p0, a_rows, b, rownorm2, cap, dyk_tol, dyk_sweeps)
    cdef double[::1] x = x_arr
    grad_arr = np.empty(k)
    cdef double[::1] grad = grad_arr
    trial_arr = np.empty(k)
    cdef double[::1] trial = trial_arr

    cdef double scale = 0.0
    cdef Py_ssize_t i
    for i in range(k):
        if cap_v[i] > scale:
            scale = cap_v[i]

    cdef double f = _objective_c(g_v, noise_c, mu_v, q_c, x)
    cdef double alpha = 0.0
    cdef int small_steps = 0, stalls = 0, iters = 0
    cdef int it, bt
    cdef double gmax, fc, slope, step_max, gain, d
    cdef bint accepted

    for it in range(max_iter):
        iters = it + 1
        _gradient_c(g_v, noise_c, mu_v, q_c, x, grad)
        gmax = 0.0
        for i in range(k):
            d = fabs(grad[i])
            if d > gmax:
                gmax = d
        if gmax == 0.0:
            break
        if alpha == 0.0:
            alpha = 0.25 * scale / gmax
        accepted = False
        fc = f
        cand_arr = None
        for bt in range(40):
            for i in range(k):
                trial[i] = x[i] + alpha * grad[i]
            cand_arr = dykstra_project(trial_arr, a_rows, b, rownorm2, cap, dyk_tol, dyk_sweeps)
            step_max = 0.0
            slope = 0.0
            for i in range(k):
                d = cand_arr[i] - x[i]
                slope += grad[i] * d
                d = fabs(d)
                if d > step_max:
                    step_max = d
            if step_max <= 1e-18 * scale:
                break
            fc = _objective_c(g_v, noise_c, mu_v, q_c, cand_arr)
            if fc >= f + 1e-4 * slope and fc >= f:
                accepted = True
                break
            alpha *= 0.4
        if not accepted:
            break
        gain = fc - f
        step_max = 0.0
        for i in range(k):
            d = fabs(cand_arr[i] - x[i])
            if d > step_max:
                step_max = d
        x_arr = cand_arr
        x = x_arr
        f = fc
        alpha = alpha * 1.7
        if alpha > 1e12 * scale:
            alpha = 1e12 * scale
        small_steps = small_steps + 1 if step_max <= xtol * scale else 0
        stalls = stalls + 1 if gain <= ftol * (1.0 + fabs(f)) else 0
        if small_steps >= 2 or stalls >= 3:
            break
    return x_arr, f, iters


cdef double _coord_objective_c(const double[::1] gains, double noise, const double[::1] mu,
                               double q, double[::1] x, Py_ssize_t idx, double value) nogil:
    cdef double old = x[idx]
    cdef double val
    x[idx] = value
    val = _objective_c(gains, noise, mu, q, x)
    x[idx] = old
    return val


def coordinate_polish(gains, noise, cap, mu, q, min_sinr, x0, int sweeps, int samples):
    """Cyclic exact-interval coordinate ascent, used to refine an ascent result."""
    cdef const double[::1] g_v = np.ascontiguousarray(gains)
    cdef const double[::1] cap_v = np.ascontiguousarray(cap)
    cdef const double[::1] mu_v = np.ascontiguousarray(mu)
    cdef const double[::1] tgt = np.ascontiguousarray(min_sinr)
    cdef double noise_c = noise
    cdef double q_c = q
    cdef Py_ssize_t k = g_v.shape[0]

    out = np.ascontiguousarray(x0).copy()
    cdef double[::1] x = out
    cands_arr = np.empty(samples + 2)
    vals_arr = np.empty(samples + 2)
    cdef double[::1] cands = cands_arr
    cdef double[::1] vals = vals_arr

    cdef Py_ssize_t sweep, i, j, n, best, pos
    cdef double total, interf, lo, hi, room, floor_v, ratio, step
    cdef double a_b, c_b, x1, x2, f1, f2, xb, fb, cur
    cdef double inv_phi = 0.6180339887498949
    cdef int gi

    with nogil:
        for sweep in range(sweeps):
            for i in range(k):
                total = 0.0
                for j in range(k):
                    total += x[j] * g_v[j]
                interf = total - x[i] * g_v[i] + noise_c
                lo = tgt[i] * interf / g_v[i] if tgt[i] > 0.0 else 0.0
                hi = cap_v[i]
                for j in range(k):
                    if j == i or tgt[j] <= 0.0:
                        continue
                    room = x[j] * g_v[j] / tgt[j] - noise_c - (total - x[j] * g_v[j] - x[i] * g_v[i])
                    room = room / g_v[i]
                    if room < hi:
                        hi = room
                if hi <= lo:
                    cur = x[i]
                    if cur < lo:
                        cur = lo
                    if cur > cap_v[i]:
                        cur = cap_v[i]
                    x[i] = cur
                    continue
                floor_v = lo if lo > hi * 1e-12 else hi * 1e-12
                # candidates: lo, current x_i, geometric grid on [floor_v, hi]
                n = 0
                if lo >= lo and lo <= hi:
                    cands[n] = lo
                    n += 1
                if x[i] >= lo and x[i] <= hi:
                    cands[n] = x[i]
                    n += 1
                ratio = pow(hi / floor_v, 1.0 / (samples - 1))
                cur = floor_v
                for gi in range(samples):
                    if cur >= lo and cur <= hi:
                        cands[n] = cur
                        n += 1
                    cur *= ratio
                if n == 0:
                    continue
                best = 0
                for j in range(n):
                    vals[j] = _coord_objective_c(g_v, noise_c, mu_v, q_c, x, i, cands[j])
                    if vals[j] > vals[best]:
                        best = j
                # bracket around the best candidate among the sorted values
                a_b = lo
                c_b = hi
                for j in range(n):
                    if cands[j] < cands[best] and cands[j] > a_b:
                        a_b = cands[j]
                    if cands[j] > cands[best] and cands[j] < c_b:
                        c_b = cands[j]
                x1 = c_b - inv_phi * (c_b - a_b)
                x2 = a_b + inv_phi * (c_b - a_b)
                f1 = _coord_objective_c(g_v, noise_c, mu_v, q_c, x, i, x1)
                f2 = _coord_objective_c(g_v, noise_c, mu_v, q_c, x, i, x2)
                for gi in range(30):
                    if f1 < f2:
                        a_b = x1
                        x1 = x2
                        f1 = f2
                        x2 = a_b + inv_phi * (c_b - a_b)
                        f2 = _coord_objective_c(g_v, noise_c, mu_v, q_c, x, i, x2)
                    else:
                        c_b = x2
                        x2 = x1
                        f2 = f1
                        x1 = c_b - inv_phi * (c_b - a_b)
                        f1 = _coord_objective_c(g_v, noise_c, mu_v, q_c, x, i, x1)
                xb = x1 if f1 >= f2 else x2
                fb = f1 if f1 >= f2 else f2
                if fb >= vals[best]:
                    x[i] = xb
                else:
                    x[i] = cands[best]
    return out
