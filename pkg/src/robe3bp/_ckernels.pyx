# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernels.

Line-for-line port of ``_pykernels``; see that module for the calling
convention.  The right-hand side is selected through a C function pointer so
both the nonlinear and the constant-coefficient linear systems share one
stepping loop that runs without the GIL.
"""

from libc.math cimport sqrt, pow, fabs
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy

import numpy as np

cdef enum:
    N = 6
    STATUS_OK = 0
    STATUS_SINGULAR = 1
    STATUS_UNDERFLOW = 2
    STATUS_MAX_STEPS = 3

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0
cdef double A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
cdef double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0
cdef double D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0
cdef double D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0

cdef double SAFE = 0.9
cdef double BETA = 0.04
cdef double EXPO1 = 0.2 - 0.04 * 0.75
cdef double FACC1 = 1.0 / 0.2
cdef double FACC2 = 1.0 / 10.0


cdef struct Model:
    double mu
    double n_sq
    double two_n
    double two_k
    double guard
    double m[36]


ctypedef int (*rhs_t)(const Model*, const double*, double*) noexcept nogil


cdef int robe_rhs(const Model* p, const double* y, double* f) noexcept nogil:
    cdef double dx = y[0] + (p.mu - 1.0)
    cdef double r2_sq = dx * dx + y[1] * y[1] + y[2] * y[2]
    cdef double r2 = sqrt(r2_sq)
    cdef double g
    if r2 < p.guard:
        return 1
    g = p.mu / (r2_sq * r2)
    f[0] = y[3]
    f[1] = y[4]
    f[2] = y[5]
    f[3] = p.n_sq * y[0] - p.two_k * (y[0] + p.mu) - g * dx + p.two_n * y[4]
    f[4] = p.n_sq * y[1] - p.two_k * y[1] - g * y[1] - p.two_n * y[3]
    f[5] = -p.two_k * y[2] - g * y[2]
    return 0


cdef int linear_rhs(const Model* p, const double* y, double* f) noexcept nogil:
    cdef int i, j
    cdef double acc
    for i in range(N):
        acc = 0.0
        for j in range(N):
            acc = acc + p.m[N * i + j] * y[j]
        f[i] = acc
    return 0


cdef struct Buffer:
    double* data
    Py_ssize_t rows
    Py_ssize_t cap


cdef int buf_push(Buffer* b, double t, const double* y) noexcept nogil:
    cdef double* grown
    cdef int i
    if b.rows == b.cap:
        b.cap = 2 * b.cap if b.cap > 0 else 256
        grown = <double*> realloc(b.data, b.cap * (N + 1) * sizeof(double))
        if grown == NULL:
            return -1
        b.data = grown
    b.data[b.rows * (N + 1)] = t
    for i in range(N):
        b.data[b.rows * (N + 1) + 1 + i] = y[i]
    b.rows += 1
    return 0


cdef double err_norm(const double* v, const double* sk) noexcept nogil:
    cdef double acc = 0.0
    cdef int i
    for i in range(N):
        acc = acc + (v[i] / sk[i]) * (v[i] / sk[i])
    return sqrt(acc / 6.0)


cdef int dp54(rhs_t rhs, const Model* p, double* y, double t_final, double tol,
              double stride, double h_min, long max_steps, Buffer* out,
              long* n_accept_out, long* n_reject_out) noexcept nogil:
    cdef double atol = tol, rtol = tol
    cdef double k1[N], k2[N], k3[N], k4[N], k5[N], k6[N], k7[N]
    cdef double ys[N], ynew[N], sk[N], errv[N], f1[N]
    cdef double rc2[N], rc3[N], rc4[N], rc5[N], ysample[N]
    cdef double t = 0.0, h, h1, hnew, hmax = t_final, dnf, dny, der2, der12
    cdef double err, fac, fac11, facold = 1e-4, t_new, t_s, th, th1, a, b
    cdef long n_accept = 0, n_reject = 0, j_sample = 1
    cdef int i, status = STATUS_OK, last, reject_last = 0

    if buf_push(out, 0.0, y) < 0:
        return -1
    n_accept_out[0] = 0
    n_reject_out[0] = 0

    if rhs(p, y, k1):
        return STATUS_SINGULAR
    dnf = 0.0
    dny = 0.0
    for i in range(N):
        sk[i] = atol + rtol * fabs(y[i])
        dnf = dnf + (k1[i] / sk[i]) * (k1[i] / sk[i])
        dny = dny + (y[i] / sk[i]) * (y[i] / sk[i])
    if dnf <= 1e-10 or dny <= 1e-10:
        h = 1e-6
    else:
        h = sqrt(dny / dnf) * 0.01
    if h > hmax:
        h = hmax
    for i in range(N):
        ys[i] = y[i] + h * k1[i]
    if rhs(p, ys, f1):
        return STATUS_SINGULAR
    der2 = 0.0
    for i in range(N):
        der2 = der2 + ((f1[i] - k1[i]) / sk[i]) * ((f1[i] - k1[i]) / sk[i])
    der2 = sqrt(der2) / h
    der12 = fabs(der2)
    if sqrt(dnf) > der12:
        der12 = sqrt(dnf)
    if der12 <= 1e-15:
        h1 = fabs(h) * 1e-3
        if h1 < 1e-6:
            h1 = 1e-6
    else:
        h1 = pow(0.01 / der12, 0.2)
    h = 100.0 * fabs(h)
    if h1 < h:
        h = h1
    if hmax < h:
        h = hmax

    while True:
        if n_accept + n_reject >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if h < h_min:
            status = STATUS_UNDERFLOW
            break
        last = 0
        if t + 1.01 * h - t_final > 0.0:
            h = t_final - t
            last = 1

        for i in range(N):
            ys[i] = y[i] + h * A21 * k1[i]
        if rhs(p, ys, k2):
            status = STATUS_SINGULAR
            break
        for i in range(N):
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        if rhs(p, ys, k3):
            status = STATUS_SINGULAR
            break
        for i in range(N):
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        if rhs(p, ys, k4):
            status = STATUS_SINGULAR
            break
        for i in range(N):
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        if rhs(p, ys, k5):
            status = STATUS_SINGULAR
            break
        for i in range(N):
            ys[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                + A65 * k5[i])
        if rhs(p, ys, k6):
            status = STATUS_SINGULAR
            break
        for i in range(N):
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i]
                                  + A76 * k6[i])
        if rhs(p, ynew, k7):
            status = STATUS_SINGULAR
            break

        for i in range(N):
            errv[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                           + E7 * k7[i])
            a = fabs(y[i])
            b = fabs(ynew[i])
            sk[i] = atol + rtol * (a if a > b else b)
        err = err_norm(errv, sk)

        fac11 = pow(err, EXPO1)
        fac = fac11 / pow(facold, BETA)
        fac = fac / SAFE
        if fac > FACC1:
            fac = FACC1
        if fac < FACC2:
            fac = FACC2
        hnew = h / fac

        if err <= 1.0:
            facold = err if err > 1e-4 else 1e-4
            n_accept += 1
            t_new = t_final if last else t + h
            if stride > 0.0:
                t_s = j_sample * stride
                if t_s < t_new:
                    for i in range(N):
                        rc2[i] = ynew[i] - y[i]
                        rc3[i] = h * k1[i] - rc2[i]
                        rc4[i] = rc2[i] - h * k7[i] - rc3[i]
                        rc5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i]
                                      + D6 * k6[i] + D7 * k7[i])
                    while t_s < t_new:
                        th = (t_s - t) / h
                        th1 = 1.0 - th
                        for i in range(N):
                            ysample[i] = y[i] + th * (rc2[i] + th1 * (rc3[i] + th * (
                                rc4[i] + th1 * rc5[i])))
                        if buf_push(out, t_s, ysample) < 0:
                            return -1
                        j_sample += 1
                        t_s = j_sample * stride
            for i in range(N):
                k1[i] = k7[i]
                y[i] = ynew[i]
            t = t_new
            if stride <= 0.0 or last:
                if buf_push(out, t, y) < 0:
                    return -1
            if last:
                break
            if fabs(hnew) > hmax:
                hnew = hmax
            if reject_last:
                if fabs(h) < fabs(hnew):
                    hnew = fabs(h)
                else:
                    hnew = fabs(hnew)
            reject_last = 0
        else:
            fac = fac11 / SAFE
            if fac > FACC1:
                fac = FACC1
            hnew = h / fac
            reject_last = 1
            n_reject += 1
        h = hnew

    n_accept_out[0] = n_accept
    n_reject_out[0] = n_reject
    return status


cdef object _run(rhs_t rhs, Model* p, y0, double t_final, double tol, double stride,
                 double h_min, long max_steps):
    cdef double y[N]
    cdef Buffer out
    cdef long n_accept = 0, n_reject = 0
    cdef int status, i
    cdef double[:, ::1] view
    for i in range(N):
        y[i] = float(y0[i])
    out.data = NULL
    out.rows = 0
    out.cap = 0
    with nogil:
        status = dp54(rhs, p, y, t_final, tol, stride, h_min, max_steps, &out,
                      &n_accept, &n_reject)
    try:
        if status < 0:
            raise MemoryError("trajectory buffer allocation failed")
        arr = np.empty((out.rows, N + 1), dtype=np.float64)
        if out.rows > 0:
            view = arr
            memcpy(&view[0, 0], out.data, out.rows * (N + 1) * sizeof(double))
    finally:
        free(out.data)
    return arr[:, 0].copy(), arr[:, 1:].copy(), status, n_accept, n_reject


def integrate_robe(y0, double mu, double n_sq, double k, double t_final, double tol,
                   double stride, double h_min, long max_steps, double guard):
    cdef Model p
    p.mu = mu
    p.n_sq = n_sq
    p.two_n = 2.0 * sqrt(n_sq)
    p.two_k = 2.0 * k
    p.guard = guard
    return _run(robe_rhs, &p, y0, t_final, tol, stride, h_min, max_steps)


def integrate_linear(y0, matrix, double t_final, double tol, double stride, double h_min,
                     long max_steps):
    cdef Model p
    cdef int i
    flat = np.ascontiguousarray(matrix, dtype=np.float64).ravel()
    if flat.shape[0] != 36:
        raise ValueError("matrix must have 36 entries")
    for i in range(36):
        p.m[i] = flat[i]
    return _run(linear_rhs, &p, y0, t_final, tol, stride, h_min, max_steps)
