"""Pure-numpy max-min SINR balancing core.

Same interface as the compiled extension module ``cycache._solver``; used as
an import-time fallback and as the reference side of the backend benchmark.

The solver works on the dual uplink: for a target level gamma_bar the power
vector nu is the fixed point of

    nu_n <- gamma_bar / ( h_n^H ( N0 I + sum_{b in UL(n)} nu_b h_b h_b^H )^{-1} h_n )

iterated jointly (a standard interference function: from any start below
the fixed point the iterates increase monotonically toward it, so a total
exceeding the power cap proves the level infeasible before convergence).
An outer bisection adjusts gamma_bar until sum(nu) matches the budget,
warm-starting each evaluation from the powers of the best feasible level
found so far.  UL(n) lists the streams owned by the users stream n must be
suppressed at, i.e. the transpose of the downlink coupling pattern; this is
what makes the uplink and downlink problems consume identical total power.

Convergence near the interference-limited ceiling needs care: the linear
contraction factor r of the iteration approaches one there, and the naive
residual test |T(nu) - nu| <= eps*nu would fire while the iterate is still
far from the fixed point (the remaining distance is about residual/(1-r)).
The loop therefore (a) accepts only when increment * r/(1-r) is below
tolerance, with r estimated from consecutive componentwise increments, and
(b) accelerates the geometric tail by extrapolating the limit and keeping
the jump only if a verification sweep confirms the extrapolated point still
lies below the fixed point.  If the power target falls inside a level
window thinner than the bisection can resolve, the driver balances at the
exact budget directly with the normalized iteration nu <- P_T q / sum(q),
q = 1/g(nu), whose iterates all meet the power constraint by construction.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_JUMP_EVERY = 8  # sweeps between extrapolation attempts


def _power_iteration(
    H, ul_indptr, ul_indices, N0, gamma_bar, eps_inner, max_inner, cap, nu0=None
):
    """Fixed point at one gamma_bar.

    Returns (nu, converged, over_cap, sweeps).  ``nu0`` may warm-start the
    iteration from any point known to lie below the fixed point (zero, or
    the converged powers of a smaller gamma_bar).
    """
    n, L = H.shape
    eye = N0 * np.eye(L, dtype=np.complex128)
    nu = np.zeros(n) if nu0 is None else np.array(nu0, dtype=float)
    if gamma_bar == 0.0:
        return np.zeros(n), True, False, 0

    def sweep(v):
        out = np.empty(n)
        for i in range(n):
            sel = ul_indices[ul_indptr[i] : ul_indptr[i + 1]]
            M = eye
            if sel.size:
                Hs = H[sel]
                M = eye + (Hs.T * v[sel]) @ Hs.conj()
            x = np.linalg.solve(M, H[i])
            out[i] = gamma_bar / float(np.real(np.vdot(H[i], x)))
        return out

    def tail_converged(d, d_prev, ref):
        # limit estimate: remaining distance <= d * r/(1-r) per coordinate
        if d_prev is None:
            return bool(np.all(d == 0.0))
        if np.any((d_prev == 0.0) & (d > 0.0)):
            return False
        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = np.where(d_prev > 0.0, d / np.where(d_prev > 0, d_prev, 1.0), 0.0)
        r = float(ratios.max(initial=0.0))
        if r >= 1.0:
            return False
        return bool(np.all(d * (r / (1.0 - r)) <= eps_inner * ref))

    s_last = float(nu.sum())
    d_prev = None
    sweeps = 0
    while sweeps < max_inner:
        nu_new = sweep(nu)
        sweeps += 1
        d = np.maximum(nu_new - nu, 0.0)  # monotone up to roundoff
        if tail_converged(d, d_prev, nu_new):
            return nu_new, True, False, sweeps
        total = float(nu_new.sum())
        if total > cap:
            return nu_new, False, True, sweeps
        inc = total - s_last
        inc_prev = float(d_prev.sum()) if d_prev is not None else -1.0
        if (
            sweeps % _JUMP_EVERY == 0
            and inc_prev > 0.0
            and 0.0 < inc < 0.9999 * inc_prev
            and sweeps < max_inner
        ):
            ratio = inc / inc_prev
            nu_hat = nu_new + d * (ratio / (1.0 - ratio))
            nu_chk = sweep(nu_hat)
            sweeps += 1
            if np.all(nu_chk >= nu_hat * (1.0 - 1e-12)):
                # still below the fixed point: jumping is sound
                nu = nu_chk
                s_last = float(nu.sum())
                d_prev = None
                if s_last > cap:
                    return nu, False, True, sweeps
                continue
        nu = nu_new
        s_last = total
        d_prev = d
    return nu, False, False, max_inner


def _filters_and_sinrs(H, ul_indptr, ul_indices, N0, nu):
    """Normalized MMSE receive filters and per-stream uplink SINRs."""
    n, L = H.shape
    eye = N0 * np.eye(L, dtype=np.complex128)
    v = np.empty((n, L), dtype=np.complex128)
    gam = np.empty(n)
    for i in range(n):
        sel = ul_indices[ul_indptr[i] : ul_indptr[i + 1]]
        M = eye
        if sel.size:
            Hs = H[sel]
            M = eye + (Hs.T * nu[sel]) @ Hs.conj()
        x = np.linalg.solve(M, H[i])
        g = float(np.real(np.vdot(H[i], x)))
        nrm = np.linalg.norm(x)
        v[i] = x / nrm if nrm > 0 else 0.0
        gam[i] = nu[i] * g
    return v, gam


def balance_maxmin(
    H,
    ul_indptr,
    ul_indices,
    N0,
    P_T,
    eps_power,
    eps_inner,
    max_inner,
    max_outer,
):
    """Bisection on the balanced SINR level until sum(nu) hits P_T.

    Returns (gamma_bar, nu, v, gamma_ul, outer_iters, inner_iters, converged).
    """
    H = np.ascontiguousarray(H, dtype=np.complex128)
    ul_indptr = np.asarray(ul_indptr, dtype=np.int64)
    ul_indices = np.asarray(ul_indices, dtype=np.int64)
    cap = P_T + eps_power
    inner_total = 0
    # converged powers of the best feasible level so far; every later level
    # sits above it, so it is a valid monotone warm start
    nu_feasible = np.zeros(H.shape[0])

    def evaluate(g, warm):
        nonlocal inner_total
        nu, conv, over, its = _power_iteration(
            H, ul_indptr, ul_indices, N0, g, eps_inner, max_inner, cap, nu0=warm
        )
        inner_total += its
        return nu, conv, over

    lo = 0.0
    hi = P_T * float(np.max(np.sum(np.abs(H) ** 2, axis=1))) / N0
    best = None
    gamma_bar = hi
    nu, conv, over = evaluate(hi, None)
    outer = 1
    if conv and abs(float(nu.sum()) - P_T) <= eps_power:
        best = (hi, nu)
    else:
        for _ in range(max_outer):
            mid = 0.5 * (lo + hi)
            nu, conv, over = evaluate(mid, nu_feasible)
            outer += 1
            total = float(nu.sum())
            if conv and abs(total - P_T) <= eps_power:
                best = (mid, nu)
                break
            if not conv or total > P_T:
                # over budget, or unverified after max_inner: treat as too high
                hi = mid
            else:
                lo = mid
                nu_feasible = nu
            if hi - lo <= 1e-13 * hi:
                break
    converged = best is not None
    if converged:
        gamma_bar, nu = best
    else:
        # The budget falls inside a level window thinner than the bisection
        # can resolve (the balanced level is pinned against the interference
        # ceiling, where the fixed point's contraction factor degenerates).
        # Balance directly at the exact budget with the normalized iteration
        # nu <- P_T * q / sum(q), q_n = 1 / g_n(nu), whose iterates all meet
        # the power constraint by construction.
        nu, spreads = _normalized_balance(
            H, ul_indptr, ul_indices, N0, P_T, eps_inner, max_inner, nu_feasible
        )
        inner_total += spreads
        gamma_bar = 0.0
        converged = nu is not None
        if nu is None:
            nu = nu_feasible
    v, gam = _filters_and_sinrs(H, ul_indptr, ul_indices, N0, nu)
    if best is None and converged:
        gamma_bar = float(gam.min())
    return gamma_bar, nu, v, gam, outer, inner_total, converged


def _normalized_balance(H, ul_indptr, ul_indices, N0, P_T, eps_bal, max_iter, nu0):
    """Balanced powers at exactly sum(nu) = P_T via the normalized iteration.

    Returns (nu, iterations) on success and (None, iterations) when the SINR
    spread has not closed within ``max_iter``.
    """
    n, L = H.shape
    eye = N0 * np.eye(L, dtype=np.complex128)
    total0 = float(np.sum(nu0))
    nu = nu0 * (P_T / total0) if total0 > 0 else np.full(n, P_T / n)

    for it in range(1, max_iter + 1):
        g = np.empty(n)
        for i in range(n):
            sel = ul_indices[ul_indptr[i] : ul_indptr[i + 1]]
            M = eye
            if sel.size:
                Hs = H[sel]
                M = eye + (Hs.T * nu[sel]) @ Hs.conj()
            x = np.linalg.solve(M, H[i])
            g[i] = float(np.real(np.vdot(H[i], x)))
        gam = nu * g
        if gam.max() - gam.min() <= eps_bal * gam.min():
            return nu, it
        q = 1.0 / g
        nu = P_T * q / float(q.sum())
    return None, max_iter
