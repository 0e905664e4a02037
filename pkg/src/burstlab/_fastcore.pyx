# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dormand-Prince 5(4) loop with the zoo right-hand sides inlined.

Mirrors the pure-Python stepper in ``burstlab.integrate`` (same tableau,
error controller and event bisection) so the two backends agree to
integration tolerance.  Kernel ids and parameter-vector layouts are fixed by
``burstlab.models``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, fabs, fmax, fmin, isfinite, pow, sqrt

cnp.import_array()

DEF NMAX = 8      # max state dimension
DEF NSTAGE = 7

# Dormand-Prince coefficients (must match burstlab.integrate)
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9

cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

# dense-output interpolation matrix rows (4 columns per stage)
cdef double[7][4] PMAT
PMAT[0][0] = 1.0
PMAT[0][1] = -8048581381.0 / 2820520608.0
PMAT[0][2] = 8663915743.0 / 2820520608.0
PMAT[0][3] = -12715105075.0 / 11282082432.0
PMAT[1][0] = 0.0; PMAT[1][1] = 0.0; PMAT[1][2] = 0.0; PMAT[1][3] = 0.0
PMAT[2][0] = 0.0
PMAT[2][1] = 131558114200.0 / 32700410799.0
PMAT[2][2] = -68118460800.0 / 10900136933.0
PMAT[2][3] = 87487479700.0 / 32700410799.0
PMAT[3][0] = 0.0
PMAT[3][1] = -1754552775.0 / 470086768.0
PMAT[3][2] = 14199869525.0 / 1410260304.0
PMAT[3][3] = -10690763975.0 / 1880347072.0
PMAT[4][0] = 0.0
PMAT[4][1] = 127303824393.0 / 49829197408.0
PMAT[4][2] = -318862633887.0 / 49829197408.0
PMAT[4][3] = 701980252875.0 / 199316789632.0
PMAT[5][0] = 0.0
PMAT[5][1] = -282668133.0 / 205662961.0
PMAT[5][2] = 2019193451.0 / 616988883.0
PMAT[5][3] = -1453857185.0 / 822651844.0
PMAT[6][0] = 0.0
PMAT[6][1] = 40617522.0 / 29380423.0
PMAT[6][2] = -110615467.0 / 29380423.0
PMAT[6][3] = 69997945.0 / 29380423.0

# kernel ids (keep in sync with burstlab.models)
DEF KN_FN = 1
DEF KN_PROTO = 2
DEF KN_FNSNP = 3
DEF KN_TRANSC = 4
DEF KN_PITCHC = 5
DEF KN_ISOLA = 6
DEF KN_CYCLIC = 7
DEF KN_TRANS2 = 8


cdef inline void rhs(int kind, double* p, double* y, double* out) noexcept nogil:
    cdef double x, yy, z, b, r, th, I, I1, I2
    cdef double a, c, al, ga, de, eps, mu, gy, gb, yf, bf
    cdef double A1, A2, A3, r2, F, u, drive, eta, k, beta
    if kind == KN_FN:
        x = y[0]; yy = y[1]; z = y[2]; b = y[3]
        a = p[0]; c = p[1]; al = p[2]; ga = p[3]; de = p[4]; eps = p[5]
        mu = p[6]; gy = p[7]; gb = p[8]; yf = p[9]; bf = p[10]
        out[0] = (yy - (x * x * x - 3.0 * x * x) + a * z) / c
        out[1] = 1.0 - 5.0 * x * x - yy
        out[2] = eps * (al * z + ga * b - de * x)
        out[3] = eps * (mu - gy * (yy - yf) * (yy - yf) - gb * (b - bf) * (b - bf))
    elif kind == KN_PROTO:
        x = y[0]; yy = y[1]; z = y[2]
        a = p[0]; al = p[1]; ga = p[2]; de = p[3]; eps = p[4]; beta = p[5]
        out[0] = yy - (x * x * x - 3.0 * x * x) + a * z
        out[1] = 1.0 - 5.0 * x * x - yy
        out[2] = eps * (al * x + ga * beta - de * z)
    elif kind == KN_FNSNP:
        x = y[0]; yy = y[1]; z = y[2]; b = y[3]
        a = p[0]; c = p[1]; al = p[2]; ga = p[3]; de = p[4]; eps = p[5]
        mu = p[6]; gy = p[7]; gb = p[8]; yf = p[9]; bf = p[10]
        A1 = p[11] * z + p[12]
        A2 = p[13] * z + p[14]
        A3 = p[15] * z + p[16]
        out[0] = yy
        out[1] = -x * x * x + A1 * x + A2 - yy * (A3 - x + x * x)
        out[2] = eps * (al * z + ga * b - de * x)
        out[3] = eps * (mu - gy * (yy - yf) * (yy - yf) - gb * (b - bf) * (b - bf))
    elif kind == KN_TRANSC:
        x = y[0]; yy = y[1]; I = y[2]
        al = p[0]; eps = p[1]; eta = p[2]
        r2 = x * x + yy * yy
        F = (1.0 - r2) * (1.0 + I - r2)
        out[0] = -yy - x * F + eta
        out[1] = x - yy * F
        out[2] = eps * (sqrt(r2) - al)
    elif kind == KN_PITCHC:
        x = y[0]; yy = y[1]; I = y[2]
        al = p[0]; eps = p[1]; eta = p[2]
        r2 = x * x + yy * yy
        F = (1.0 - r2) * (I - (r2 - 1.0) * (r2 - 1.0))
        out[0] = -yy + x * F + eta
        out[1] = x + yy * F
        out[2] = eps * (al - sqrt(r2))
    elif kind == KN_ISOLA:
        r = y[0]; I = y[2]
        c = p[0]; al = p[1]; b = p[2]; eps = p[3]; k = p[4]; eta = p[5]
        u = r - c
        F = r - p[2]
        out[0] = 2.0 * r * (0.01 - u * u * u * u + al * al * (F * F - I * I)) + eta
        out[1] = 1.0
        out[2] = eps * (r - k)
    elif kind == KN_CYCLIC:
        r = y[0]; z = y[2]; b = y[3]
        # rho a c alpha gamma delta eps mu gamma_r gamma_beta r_fold beta_fold rfactor
        u = r - 2.0
        drive = (p[0] - (u * u * u - 3.0 * u * u) + p[1] * z) / p[2]
        if p[12] != 0.0:
            drive *= r
        out[0] = drive
        out[1] = 1.0
        out[2] = p[6] * (p[3] * z + p[4] * b - p[5] * r)
        out[3] = p[6] * (p[7] - p[8] * (r - p[10]) * (r - p[10])
                         - p[9] * (b - p[11]) * (b - p[11]))
    elif kind == KN_TRANS2:
        x = y[0]; yy = y[1]; I1 = y[2]; I2 = y[3]
        c = p[0]; beta = p[1]; k = p[2]; eps = p[3]; eta = p[4]
        out[0] = (x - k) * (yy - beta * x * x * x * x + 3.0 * x * x + I2) / c + eta
        out[1] = 1.0 - 5.0 * x * x - yy
        out[2] = eps * (I2 - 2.0)
        out[3] = -eps * I1


cdef inline double ev_value(double* d, double* y) noexcept nogil:
    # d: [type, i1, i2, value, direction, terminal]
    if d[0] == 0.0:
        return y[<int> d[1]] - d[3]
    return y[<int> d[1]] * cos(y[<int> d[2]]) - d[3]


cdef inline void dense_eval(double t0, double h, double* y0, double* K,
                            int n, double t, double* out) noexcept nogil:
    cdef double x = (t - t0) / h
    cdef double p1 = x, p2 = x * x, p3 = p2 * x, p4 = p3 * x
    cdef int i, s
    cdef double q
    for i in range(n):
        q = 0.0
        for s in range(NSTAGE):
            q += K[s * NMAX + i] * (PMAT[s][0] * p1 + PMAT[s][1] * p2
                                    + PMAT[s][2] * p3 + PMAT[s][3] * p4)
        out[i] = y0[i] + h * q


def run_dopri5(int kind, double[:] pvec, double[:] y0, double t0, double t_end,
               double rtol, double atol, double max_step, double min_step,
               long max_steps, double[:, :] ev_desc):
    """Integrate one kernel; returns (status, ts, ys, ev_t, ev_idx, ev_states).

    status: 0 ok, 1 step underflow, 2 max steps, 3 non-finite state.
    """
    cdef int n = y0.shape[0]
    cdef int n_ev = ev_desc.shape[0]
    cdef double[NMAX] y
    cdef double[NMAX] ynew
    cdef double[NMAX] ytmp
    cdef double[NMAX] yloc
    cdef double[7 * NMAX] K
    cdef double[NMAX] p
    cdef double[16] gprev
    cdef double[16] gnew
    cdef double[64] pbuf
    cdef int i, s, j
    cdef double t = t0, h, err, scale, diff, factor
    cdef long n_steps = 0
    cdef int status = 0

    for i in range(pvec.shape[0]):
        pbuf[i] = pvec[i]
    for i in range(n):
        y[i] = y0[i]

    # storage (grown by doubling)
    cdef long cap = 4096
    ts_arr = np.empty(cap, dtype=np.float64)
    ys_arr = np.empty((cap, n), dtype=np.float64)
    cdef double[:] ts = ts_arr
    cdef double[:, :] ys = ys_arr
    cdef long m = 0

    ev_t_list = []
    ev_idx_list = []
    ev_state_list = []

    ts[0] = t
    for i in range(n):
        ys[0, i] = y[i]
    m = 1

    rhs(kind, pbuf, y, &K[0])
    for i in range(n):
        if not isfinite(K[i]):
            return 3, ts_arr[:1], ys_arr[:1].copy(), np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros((0, n))
    for j in range(n_ev):
        gprev[j] = ev_value(&ev_desc[j, 0], y)

    # initial step: scaled norms of y and f
    cdef double d0 = 0.0, d1 = 0.0, d2
    for i in range(n):
        scale = atol + rtol * fabs(y[i])
        d0 += (y[i] / scale) * (y[i] / scale)
        d1 += (K[i] / scale) * (K[i] / scale)
    d0 = sqrt(d0 / n); d1 = sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    h = fmin(fmin(h, max_step), t_end - t0)

    cdef bint rejected
    cdef double t_new, t_stop, t_ev, a_br, b_br, ga_br, gm, mid
    cdef int hit, terminal_hit

    while t < t_end:
        n_steps += 1
        if n_steps > max_steps:
            status = 2
            break
        h = fmin(fmin(h, max_step), t_end - t)
        if h < min_step:
            status = 1
            break

        # stages (K[0] holds f(t, y))
        for i in range(n):
            ytmp[i] = y[i] + h * A21 * K[i]
        rhs(kind, pbuf, ytmp, &K[1 * NMAX])
        for i in range(n):
            ytmp[i] = y[i] + h * (A31 * K[i] + A32 * K[NMAX + i])
        rhs(kind, pbuf, ytmp, &K[2 * NMAX])
        for i in range(n):
            ytmp[i] = y[i] + h * (A41 * K[i] + A42 * K[NMAX + i] + A43 * K[2 * NMAX + i])
        rhs(kind, pbuf, ytmp, &K[3 * NMAX])
        for i in range(n):
            ytmp[i] = y[i] + h * (A51 * K[i] + A52 * K[NMAX + i] + A53 * K[2 * NMAX + i]
                                  + A54 * K[3 * NMAX + i])
        rhs(kind, pbuf, ytmp, &K[4 * NMAX])
        for i in range(n):
            ytmp[i] = y[i] + h * (A61 * K[i] + A62 * K[NMAX + i] + A63 * K[2 * NMAX + i]
                                  + A64 * K[3 * NMAX + i] + A65 * K[4 * NMAX + i])
        rhs(kind, pbuf, ytmp, &K[5 * NMAX])
        for i in range(n):
            ynew[i] = y[i] + h * (B1 * K[i] + B3 * K[2 * NMAX + i] + B4 * K[3 * NMAX + i]
                                  + B5 * K[4 * NMAX + i] + B6 * K[5 * NMAX + i])
        rhs(kind, pbuf, ynew, &K[6 * NMAX])

        for i in range(n):
            if not isfinite(ynew[i]):
                status = 3
                break
        if status == 3:
            break

        err = 0.0
        for i in range(n):
            scale = atol + rtol * fmax(fabs(y[i]), fabs(ynew[i]))
            diff = h * (E1 * K[i] + E3 * K[2 * NMAX + i] + E4 * K[3 * NMAX + i]
                        + E5 * K[4 * NMAX + i] + E6 * K[5 * NMAX + i] + E7 * K[6 * NMAX + i])
            err += (diff / scale) * (diff / scale)
        err = sqrt(err / n)

        if err > 1.0:
            h *= fmax(0.2, 0.9 * pow(err, -0.2))
            continue

        t_new = t + h
        t_stop = -1.0
        # events: endpoint sign changes, bisection on the dense interpolant
        for j in range(n_ev):
            gnew[j] = ev_value(&ev_desc[j, 0], ynew)
        for j in range(n_ev):
            hit = 0
            if ev_desc[j, 4] >= 0.0 and gprev[j] < 0.0 and gnew[j] >= 0.0:
                hit = 1
            if ev_desc[j, 4] <= 0.0 and gprev[j] > 0.0 and gnew[j] <= 0.0:
                hit = 1
            if hit:
                a_br = t; b_br = t_new; ga_br = gprev[j]
                for s in range(200):
                    mid = 0.5 * (a_br + b_br)
                    dense_eval(t, h, y, &K[0], n, mid, yloc)
                    gm = ev_value(&ev_desc[j, 0], yloc)
                    if fabs(gm) < atol or (b_br - a_br) <= 1e-14 * fmax(1.0, fabs(mid)):
                        break
                    if (ga_br < 0.0) == (gm < 0.0):
                        a_br = mid; ga_br = gm
                    else:
                        b_br = mid
                t_ev = 0.5 * (a_br + b_br) if fabs(gm) >= atol else mid
                dense_eval(t, h, y, &K[0], n, t_ev, yloc)
                ev_t_list.append(t_ev)
                ev_idx_list.append(j)
                ev_state_list.append(np.asarray([yloc[i] for i in range(n)]))
                if ev_desc[j, 5] != 0.0 and (t_stop < 0.0 or t_ev < t_stop):
                    t_stop = t_ev
            gprev[j] = gnew[j]

        if t_stop >= 0.0:
            # drop events past the terminal time, then truncate
            keep = [q for q in range(len(ev_t_list)) if ev_t_list[q] <= t_stop + 1e-15]
            ev_t_list = [ev_t_list[q] for q in keep]
            ev_idx_list = [ev_idx_list[q] for q in keep]
            ev_state_list = [ev_state_list[q] for q in keep]
            if m >= cap:
                cap *= 2
                ts_arr = np.resize(ts_arr, cap)
                ys_arr = np.resize(ys_arr, (cap, n))
                ts = ts_arr; ys = ys_arr
            dense_eval(t, h, y, &K[0], n, t_stop, yloc)
            ts[m] = t_stop
            for i in range(n):
                ys[m, i] = yloc[i]
            m += 1
            break

        t = t_new
        for i in range(n):
            y[i] = ynew[i]
            K[i] = K[6 * NMAX + i]   # FSAL
        if m >= cap:
            cap *= 2
            ts_arr = np.resize(ts_arr, cap)
            ys_arr = np.resize(ys_arr, (cap, n))
            ts = ts_arr; ys = ys_arr
        ts[m] = t
        for i in range(n):
            ys[m, i] = y[i]
        m += 1

        if err == 0.0:
            factor = 10.0
        else:
            factor = fmin(10.0, 0.9 * pow(err, -0.2))
        h *= fmax(0.2, factor)

    ev_t = np.asarray(ev_t_list, dtype=np.float64)
    ev_idx = np.asarray(ev_idx_list, dtype=np.int64)
    if len(ev_state_list):
        ev_states = np.vstack(ev_state_list)
    else:
        ev_states = np.zeros((0, n))
    return status, ts_arr[:m].copy(), ys_arr[:m].copy(), ev_t, ev_idx, ev_states
