"""Pure-Python Dormand-Prince 5(4) kernels.

Reference implementation of the compiled ``_ckernels`` extension; both expose
the same two functions with identical signatures and return conventions:

``integrate_robe(y0, mu, n_sq, k, t_final, tol, stride, h_min, max_steps, guard)``
``integrate_linear(y0, matrix, t_final, tol, stride, h_min, max_steps)``

Each returns ``(ts, ys, status, n_accept, n_reject)`` with ``status`` one of
the ``STATUS_*`` codes below.  ``stride <= 0`` records every accepted step;
otherwise samples are taken on the grid ``j * stride`` from the continuous
extension, and the final state at ``t_final`` is always appended.
"""

import math

import numpy as np

STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_UNDERFLOW = 2
STATUS_MAX_STEPS = 3

# Dormand-Prince 5(4) tableau
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0,
)
A71, A73, A74, A75, A76 = (
    35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0,
)
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
)
# continuous extension (Hairer & Wanner, dopri5 contd5)
D1, D3, D4, D5, D6, D7 = (
    -12715105075.0 / 11282082432.0, 87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0, 701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0, 69997945.0 / 29380423.0,
)

SAFE = 0.9
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75
FACC1 = 1.0 / 0.2
FACC2 = 1.0 / 10.0


class _Singular(Exception):
    pass


def _robe_rhs(mu, n_sq, k, guard):
    two_n = 2.0 * math.sqrt(n_sq)
    mu_m1 = mu - 1.0
    two_k = 2.0 * k

    def rhs(y):
        x, yy, z, vx, vy, vz = y
        dx = x + mu_m1
        r2_sq = dx * dx + yy * yy + z * z
        r2 = math.sqrt(r2_sq)
        if r2 < guard:
            raise _Singular
        g = mu / (r2_sq * r2)
        return [
            vx, vy, vz,
            n_sq * x - two_k * (x + mu) - g * dx + two_n * vy,
            n_sq * yy - two_k * yy - g * yy - two_n * vx,
            -two_k * z - g * z,
        ]

    return rhs


def _linear_rhs(matrix):
    rows = [list(map(float, matrix[6 * i:6 * i + 6])) for i in range(6)]

    def rhs(y):
        return [sum(r[j] * y[j] for j in range(6)) for r in rows]

    return rhs


def _sumsq(v, sk):
    # explicit products: pow(x, 2) is not always the correctly rounded x * x
    acc = 0.0
    for a, b in zip(v, sk):
        r = a / b
        acc = acc + r * r
    return acc


def _norm(v, sk):
    return math.sqrt(_sumsq(v, sk) / 6.0)


def _dp54(rhs, y0, t_final, tol, stride, h_min, max_steps):
    atol = rtol = tol
    y = [float(v) for v in y0]
    t = 0.0
    ts = [0.0]
    ys = [list(y)]
    n_accept = n_reject = 0
    hmax = t_final

    try:
        k1 = rhs(y)
        # initial step guess
        sk = [atol + rtol * abs(v) for v in y]
        dnf = _sumsq(k1, sk)
        dny = _sumsq(y, sk)
        if dnf <= 1e-10 or dny <= 1e-10:
            h = 1e-6
        else:
            h = math.sqrt(dny / dnf) * 0.01
        h = min(h, hmax)
        f1 = rhs([a + h * b for a, b in zip(y, k1)])
        der2 = math.sqrt(_sumsq([a - b for a, b in zip(f1, k1)], sk)) / h
        der12 = max(abs(der2), math.sqrt(dnf))
        if der12 <= 1e-15:
            h1 = max(1e-6, abs(h) * 1e-3)
        else:
            h1 = (0.01 / der12) ** 0.2
        h = min(100.0 * abs(h), h1, hmax)
    except _Singular:
        return _pack(ts, ys, STATUS_SINGULAR, 0, 0)

    facold = 1e-4
    reject_last = False
    j_sample = 1
    status = STATUS_OK

    while True:
        if n_accept + n_reject >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if h < h_min:
            status = STATUS_UNDERFLOW
            break
        last = False
        if t + 1.01 * h - t_final > 0.0:
            h = t_final - t
            last = True
        try:
            y2 = [a + h * A21 * b for a, b in zip(y, k1)]
            k2 = rhs(y2)
            y3 = [a + h * (A31 * b + A32 * c) for a, b, c in zip(y, k1, k2)]
            k3 = rhs(y3)
            y4 = [a + h * (A41 * b + A42 * c + A43 * d) for a, b, c, d in zip(y, k1, k2, k3)]
            k4 = rhs(y4)
            y5 = [
                a + h * (A51 * b + A52 * c + A53 * d + A54 * e)
                for a, b, c, d, e in zip(y, k1, k2, k3, k4)
            ]
            k5 = rhs(y5)
            y6 = [
                a + h * (A61 * b + A62 * c + A63 * d + A64 * e + A65 * f)
                for a, b, c, d, e, f in zip(y, k1, k2, k3, k4, k5)
            ]
            k6 = rhs(y6)
            ynew = [
                a + h * (A71 * b + A73 * d + A74 * e + A75 * f + A76 * g)
                for a, b, d, e, f, g in zip(y, k1, k3, k4, k5, k6)
            ]
            k7 = rhs(ynew)
        except _Singular:
            status = STATUS_SINGULAR
            break

        errv = [
            h * (E1 * b + E3 * d + E4 * e + E5 * f + E6 * g + E7 * w)
            for b, d, e, f, g, w in zip(k1, k3, k4, k5, k6, k7)
        ]
        sk = [atol + rtol * max(abs(a), abs(b)) for a, b in zip(y, ynew)]
        err = _norm(errv, sk)

        fac11 = err ** EXPO1
        fac = fac11 / facold ** BETA
        fac = max(FACC2, min(FACC1, fac / SAFE))
        hnew = h / fac

        if err <= 1.0:
            facold = max(err, 1e-4)
            n_accept += 1
            t_new = t_final if last else t + h
            if stride > 0.0:
                t_s = j_sample * stride
                if t_s < t_new:
                    rc2 = [b - a for a, b in zip(y, ynew)]
                    rc3 = [h * a - b for a, b in zip(k1, rc2)]
                    rc4 = [a - h * b - c for a, b, c in zip(rc2, k7, rc3)]
                    rc5 = [
                        h * (D1 * b + D3 * d + D4 * e + D5 * f + D6 * g + D7 * w)
                        for b, d, e, f, g, w in zip(k1, k3, k4, k5, k6, k7)
                    ]
                    while t_s < t_new:
                        th = (t_s - t) / h
                        th1 = 1.0 - th
                        ys.append([
                            a + th * (b + th1 * (c + th * (d + th1 * e)))
                            for a, b, c, d, e in zip(y, rc2, rc3, rc4, rc5)
                        ])
                        ts.append(t_s)
                        j_sample += 1
                        t_s = j_sample * stride
            k1 = k7
            y = ynew
            t = t_new
            if stride <= 0.0 or last:
                ts.append(t)
                ys.append(list(y))
            if last:
                break
            if abs(hnew) > hmax:
                hnew = hmax
            if reject_last:
                hnew = min(abs(hnew), abs(h))
            reject_last = False
        else:
            hnew = h / min(FACC1, fac11 / SAFE)
            reject_last = True
            n_reject += 1
        h = hnew

    return _pack(ts, ys, status, n_accept, n_reject)


def _pack(ts, ys, status, n_accept, n_reject):
    return (
        np.array(ts, dtype=float),
        np.array(ys, dtype=float).reshape(-1, 6),
        status,
        n_accept,
        n_reject,
    )


def integrate_robe(y0, mu, n_sq, k, t_final, tol, stride, h_min, max_steps, guard):
    return _dp54(_robe_rhs(mu, n_sq, k, guard), y0, t_final, tol, stride, h_min, max_steps)


def integrate_linear(y0, matrix, t_final, tol, stride, h_min, max_steps):
    return _dp54(_linear_rhs(list(np.ravel(matrix))), y0, t_final, tol, stride, h_min, max_steps)
