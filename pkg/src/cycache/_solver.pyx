# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled max-min SINR balancing core.

Mirrors cycache._solver_py.balance_maxmin: warm-started dual-uplink power
fixed point inside a bisection on the balanced SINR level, then normalized
MMSE receive filters.  The fixed point accepts only when the geometric-tail
bound increment * r/(1-r) falls below tolerance (r estimated from
consecutive componentwise increments) and accelerates slow tails by
verified extrapolation jumps; the driver scales the last feasible powers
onto the budget exactly when the target sits in a level window thinner
than bisection can resolve.  Per-stream work is one Hermitian build, one
Cholesky factorization and triangular solves of the L x L
interference-plus-noise matrix, all in C loops.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef double complex cplx

BACKEND = "compiled"

cdef int JUMP_EVERY = 8


cdef int _cholesky(cplx* M, int L) noexcept nogil:
    """In-place lower Cholesky of a Hermitian positive definite matrix."""
    cdef int i, j, k
    cdef double d
    cdef cplx s
    for j in range(L):
        d = M[j * L + j].real
        for k in range(j):
            s = M[j * L + k]
            d -= s.real * s.real + s.imag * s.imag
        if d <= 0.0:
            return -1
        d = sqrt(d)
        M[j * L + j] = d
        for i in range(j + 1, L):
            s = M[i * L + j]
            for k in range(j):
                s -= M[i * L + k] * M[j * L + k].conjugate()
            M[i * L + j] = s / d
    return 0


cdef void _forward(cplx* R, cplx* b, cplx* y, int L) noexcept nogil:
    """Solve R y = b with R lower triangular."""
    cdef int i, k
    cdef cplx s
    for i in range(L):
        s = b[i]
        for k in range(i):
            s -= R[i * L + k] * y[k]
        y[i] = s / R[i * L + i].real


cdef void _backward(cplx* R, cplx* y, cplx* x, int L) noexcept nogil:
    """Solve R^H x = y with R lower triangular."""
    cdef int i, k
    cdef cplx s
    for i in range(L - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, L):
            s -= R[k * L + i].conjugate() * x[k]
        x[i] = s / R[i * L + i].real


cdef double _effective_gain(
    const cplx[:, ::1] H,
    const cnp.int64_t[::1] indptr,
    const cnp.int64_t[::1] indices,
    double N0,
    const double* nu,
    int stream,
    int L,
    cplx* M,
    cplx* y,
) noexcept nogil:
    """h_n^H (N0 I + sum_b nu_b h_b h_b^H)^{-1} h_n via Cholesky.

    Returns a negative value when the factorization fails (cannot happen for
    N0 > 0 and nu >= 0, kept as a guard).
    """
    cdef int i, j
    cdef cnp.int64_t b, p
    cdef double w, g
    cdef cplx hbi
    for i in range(L):
        for j in range(L):
            M[i * L + j] = 0.0
        M[i * L + i] = N0
    for p in range(indptr[stream], indptr[stream + 1]):
        b = indices[p]
        w = nu[b]
        if w == 0.0:
            continue
        # lower triangle of w * h_b h_b^H
        for i in range(L):
            hbi = H[b, i]
            for j in range(i + 1):
                M[i * L + j] += w * hbi * H[b, j].conjugate()
    if _cholesky(M, L) != 0:
        return -1.0
    for i in range(L):
        y[i] = H[stream, i]
    _forward(M, y, y, L)
    g = 0.0
    for i in range(L):
        g += y[i].real * y[i].real + y[i].imag * y[i].imag
    return g


cdef double _sweep(
    const cplx[:, ::1] H,
    const cnp.int64_t[::1] indptr,
    const cnp.int64_t[::1] indices,
    double N0,
    double gamma_bar,
    const double* vin,
    double* vout,
    cplx* M,
    cplx* y,
    int* fail,
) noexcept nogil:
    """One joint update vout = T(vin); returns sum(vout)."""
    cdef int n = H.shape[0]
    cdef int L = H.shape[1]
    cdef int i
    cdef double g, total = 0.0
    for i in range(n):
        g = _effective_gain(H, indptr, indices, N0, vin, i, L, M, y)
        if g <= 0.0:
            fail[0] = 1
            return 0.0
        vout[i] = gamma_bar / g
        total += vout[i]
    return total


cdef int _normalized_balance(
    const cplx[:, ::1] H,
    const cnp.int64_t[::1] indptr,
    const cnp.int64_t[::1] indices,
    double N0,
    double P_T,
    double eps_bal,
    int max_iter,
    double* nu,
    double* q,
    cplx* M,
    cplx* y,
    int* status,
) noexcept nogil:
    """Balanced powers at exactly sum(nu) = P_T via nu <- P_T q / sum(q).

    ``nu`` enters as the starting point (any positive vector; it is scaled
    onto the budget first) and leaves holding the balanced powers.  Every
    iterate meets the power constraint by construction, so only the SINR
    spread needs to close.  status: 0 converged, 2 iteration limit.
    """
    cdef int n = H.shape[0]
    cdef int L = H.shape[1]
    cdef int i, it
    cdef double total, g, gam, gmin, gmax, qsum
    total = 0.0
    for i in range(n):
        total += nu[i]
    if total <= 0.0:
        for i in range(n):
            nu[i] = P_T / n
    else:
        for i in range(n):
            nu[i] *= P_T / total
    for it in range(1, max_iter + 1):
        gmin = -1.0
        gmax = -1.0
        qsum = 0.0
        for i in range(n):
            g = _effective_gain(H, indptr, indices, N0, nu, i, L, M, y)
            if g <= 0.0:
                status[0] = -1
                return it
            gam = nu[i] * g
            if gmin < 0.0 or gam < gmin:
                gmin = gam
            if gam > gmax:
                gmax = gam
            q[i] = 1.0 / g
            qsum += q[i]
        if gmax - gmin <= eps_bal * gmin:
            status[0] = 0
            return it
        for i in range(n):
            nu[i] = P_T * q[i] / qsum
    status[0] = 2
    return max_iter


cdef int _power_iteration(
    const cplx[:, ::1] H,
    const cnp.int64_t[::1] indptr,
    const cnp.int64_t[::1] indices,
    double N0,
    double gamma_bar,
    double eps_inner,
    int max_inner,
    double cap,
    const double* start,
    double* nu,
    double* nu_new,
    double* nu_hat,
    double* nu_chk,
    double* d_cur,
    double* d_prev,
    cplx* M,
    cplx* y,
    int* status,
) noexcept nogil:
    """Fixed point at one gamma_bar, warm-started from ``start``.

    ``start`` must lie (componentwise) below the fixed point, e.g. zero or
    the converged powers of a smaller gamma_bar; iterates then increase
    monotonically, which keeps the over-cap early exit sound.  Convergence
    is claimed only when the geometric-tail bound d * r/(1-r) drops below
    eps_inner * nu (r the worst componentwise increment ratio), which stays
    honest when the contraction factor approaches one near the interference
    ceiling.  status: 0 converged, 1 over cap, 2 sweep limit, -1 failure.
    Returns the number of sweeps performed.
    """
    cdef int n = H.shape[0]
    cdef int i, sweeps = 0
    cdef int fail = 0
    cdef bint have_prev = False, all_zero, ratios_ok, conv, safe
    cdef double total, total2, s_last, inc, inc_prev, r, rr, tail, ratio, boost, di
    for i in range(n):
        nu[i] = start[i]
    if gamma_bar == 0.0:
        for i in range(n):
            nu[i] = 0.0
        status[0] = 0
        return 0
    s_last = 0.0
    for i in range(n):
        s_last += nu[i]
    while sweeps < max_inner:
        total = _sweep(H, indptr, indices, N0, gamma_bar, nu, nu_new, M, y, &fail)
        sweeps += 1
        if fail:
            status[0] = -1
            return sweeps
        all_zero = True
        for i in range(n):
            di = nu_new[i] - nu[i]
            if di < 0.0:  # monotone up to roundoff
                di = 0.0
            d_cur[i] = di
            if di != 0.0:
                all_zero = False
        if all_zero:
            for i in range(n):
                nu[i] = nu_new[i]
            status[0] = 0
            return sweeps
        if have_prev:
            ratios_ok = True
            r = 0.0
            for i in range(n):
                if d_prev[i] <= 0.0:
                    if d_cur[i] > 0.0:
                        ratios_ok = False
                        break
                else:
                    rr = d_cur[i] / d_prev[i]
                    if rr > r:
                        r = rr
            if ratios_ok and r < 1.0:
                tail = r / (1.0 - r)
                conv = True
                for i in range(n):
                    if d_cur[i] * tail > eps_inner * nu_new[i]:
                        conv = False
                        break
                if conv:
                    for i in range(n):
                        nu[i] = nu_new[i]
                    status[0] = 0
                    return sweeps
        if total > cap:
            for i in range(n):
                nu[i] = nu_new[i]
            status[0] = 1
            return sweeps
        inc = total - s_last
        inc_prev = -1.0
        if have_prev:
            inc_prev = 0.0
            for i in range(n):
                inc_prev += d_prev[i]
        if (
            sweeps % JUMP_EVERY == 0
            and inc_prev > 0.0
            and inc > 0.0
            and inc < 0.9999 * inc_prev
            and sweeps < max_inner
        ):
            ratio = inc / inc_prev
            boost = ratio / (1.0 - ratio)
            for i in range(n):
                nu_hat[i] = nu_new[i] + d_cur[i] * boost
            total2 = _sweep(
                H, indptr, indices, N0, gamma_bar, nu_hat, nu_chk, M, y, &fail
            )
            sweeps += 1
            if fail:
                status[0] = -1
                return sweeps
            safe = True
            for i in range(n):
                if nu_chk[i] < nu_hat[i] * (1.0 - 1e-12):
                    safe = False
                    break
            if safe:
                # still below the fixed point: jumping is sound
                for i in range(n):
                    nu[i] = nu_chk[i]
                s_last = total2
                have_prev = False
                if total2 > cap:
                    status[0] = 1
                    return sweeps
                continue
        for i in range(n):
            nu[i] = nu_new[i]
            d_prev[i] = d_cur[i]
        s_last = total
        have_prev = True
    status[0] = 2
    return max_inner


def balance_maxmin(
    H,
    ul_indptr,
    ul_indices,
    double N0,
    double P_T,
    double eps_power,
    double eps_inner,
    int max_inner,
    int max_outer,
):
    """Bisection on the balanced SINR level until sum(nu) hits P_T.

    Returns (gamma_bar, nu, v, gamma_ul, outer_iters, inner_iters, converged).
    """
    cdef const cplx[:, ::1] Hv = np.ascontiguousarray(H, dtype=np.complex128)
    cdef const cnp.int64_t[::1] iptr = np.ascontiguousarray(ul_indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] idx = np.ascontiguousarray(ul_indices, dtype=np.int64)
    cdef int n = Hv.shape[0]
    cdef int L = Hv.shape[1]

    nu_arr = np.zeros(n)
    bufs = np.zeros((5, n))
    Mbuf = np.zeros(L * L, dtype=np.complex128)
    ybuf = np.zeros(L, dtype=np.complex128)
    xbuf = np.zeros(L, dtype=np.complex128)
    cdef double[::1] nu = nu_arr
    cdef double[:, ::1] work = bufs
    cdef cplx[::1] Mv = Mbuf
    cdef cplx[::1] yv = ybuf
    cdef cplx[::1] xv = xbuf
    feas = np.zeros(n)
    cdef double[::1] nu_feasible = feas

    cdef double cap = P_T + eps_power
    cdef double lo = 0.0, hi = 0.0, mid, total, row
    cdef int i, j, status = 0, outer = 0
    cdef cnp.int64_t inner_total = 0
    cdef bint converged = False, rescued = False
    cdef double gamma_bar

    for i in range(n):
        row = 0.0
        for j in range(L):
            row += Hv[i, j].real * Hv[i, j].real + Hv[i, j].imag * Hv[i, j].imag
        if P_T * row / N0 > hi:
            hi = P_T * row / N0

    gamma_bar = hi
    with nogil:
        inner_total += _power_iteration(
            Hv, iptr, idx, N0, hi, eps_inner, max_inner, cap,
            &nu_feasible[0], &nu[0], &work[0, 0], &work[1, 0], &work[2, 0],
            &work[3, 0], &work[4, 0], &Mv[0], &yv[0], &status,
        )
    outer = 1
    if status == -1:
        raise FloatingPointError("interference matrix lost positive definiteness")
    total = 0.0
    for i in range(n):
        total += nu[i]
    if status == 0 and -eps_power <= total - P_T <= eps_power:
        converged = True
    else:
        while outer <= max_outer:
            mid = 0.5 * (lo + hi)
            with nogil:
                inner_total += _power_iteration(
                    Hv, iptr, idx, N0, mid, eps_inner, max_inner, cap,
                    &nu_feasible[0], &nu[0], &work[0, 0], &work[1, 0],
                    &work[2, 0], &work[3, 0], &work[4, 0], &Mv[0], &yv[0],
                    &status,
                )
            outer += 1
            if status == -1:
                raise FloatingPointError("interference matrix lost positive definiteness")
            total = 0.0
            for i in range(n):
                total += nu[i]
            if status == 0 and -eps_power <= total - P_T <= eps_power:
                gamma_bar = mid
                converged = True
                break
            if status != 0 or total > P_T:
                # over budget, or unverified after max_inner: treat as too high
                hi = mid
            else:
                lo = mid
                for i in range(n):
                    nu_feasible[i] = nu[i]
            if hi - lo <= 1e-13 * hi:
                break
        if not converged:
            # The budget falls inside a level window thinner than the
            # bisection can resolve (balanced level pinned against the
            # interference ceiling, where the fixed point's contraction
            # degenerates); balance directly at the exact budget with the
            # normalized iteration, whose iterates all meet the power
            # constraint by construction.
            for i in range(n):
                nu[i] = nu_feasible[i]
            with nogil:
                inner_total += _normalized_balance(
                    Hv, iptr, idx, N0, P_T, eps_inner, max_inner,
                    &nu[0], &work[0, 0], &Mv[0], &yv[0], &status,
                )
            if status == -1:
                raise FloatingPointError(
                    "interference matrix lost positive definiteness"
                )
            if status == 0:
                converged = True
                rescued = True
            else:
                gamma_bar = 0.0

    # Normalized MMSE filters and per-stream uplink SINRs at the solution.
    v_arr = np.zeros((n, L), dtype=np.complex128)
    gam_arr = np.zeros(n)
    cdef cplx[:, ::1] v = v_arr
    cdef double[::1] gam = gam_arr
    cdef double g, nrm
    with nogil:
        for i in range(n):
            g = _effective_gain(Hv, iptr, idx, N0, &nu[0], i, L, &Mv[0], &yv[0])
            gam[i] = nu[i] * g
            # full solve M x = h_i reusing the factorization left in Mv
            for j in range(L):
                xv[j] = Hv[i, j]
            _forward(&Mv[0], &xv[0], &yv[0], L)
            _backward(&Mv[0], &yv[0], &xv[0], L)
            nrm = 0.0
            for j in range(L):
                nrm += xv[j].real * xv[j].real + xv[j].imag * xv[j].imag
            nrm = sqrt(nrm)
            if nrm > 0.0:
                for j in range(L):
                    v[i, j] = xv[j] / nrm
    if rescued:
        gamma_bar = float(gam_arr.min())
    return gamma_bar, nu_arr, v_arr, gam_arr, outer, int(inner_total), converged
