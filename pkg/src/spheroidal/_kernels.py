"""Jit-compiled numerical kernels.

Three hot loops live here, all compiled with numba (set NUMBA_DISABLE_JIT=1
to run them as plain Python when debugging):

* ``riccati_kernel``   - adaptive Dormand-Prince 5(4) on the real 6-vector
  (Re y, eta=log Im y, phi, log rho, Re y_lam, Im y_lam).  Parametrising
  Im y through eta keeps the flow positive by construction and survives the
  exponentially deep barrier regime at large aspherical parameter.
* ``sturm_kernel``     - the same embedded pair on the complex 4-vector
  (z, z', z_lam, z_lam') for direct Sturm-Liouville shooting; used off the
  real axis and as an independent cross-check of the Riccati route.
* ``tridiag_eigenvalues`` - implicit QL with shifts for symmetric
  tridiagonal matrices (eigenvalues only), EISPACK tql1 style.

Integration always runs forward in an internal variable t; the physical
angle is u = origin + sgn*t, which realises reflected (right-to-left) sweeps
without a second code path.
"""

import math

import numpy as np
from numba import njit

# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

# status codes
OK = 0
MAX_STEPS = 1
BLOW_UP = 2
STEP_UNDERFLOW = 3
RECORD_OVERFLOW = 4


@njit(cache=True, inline="always")
def _v_real(kind, c2, om, mu, u):
    if kind == 0:
        s = math.sin(u)
        s2 = s * s
        return om * om * s2 + c2 / s2 - mu
    return c2


@njit(cache=True)
def riccati_kernel(t0, t1, state, origin, sgn, kind, c2, om, mu,
                   rtol, atol, h0, max_steps, ceiling,
                   record, rec_t, rec_s):
    """Integrate the Riccati 6-vector from t0 to t1 (t1 > t0).

    Returns (status, n_accepted, n_rejected, h_min, n_recorded,
             trapezoid of Im y_lam over u, end state copy).
    """
    s = state.copy()
    t = t0
    nacc = 0
    nrej = 0
    nrec = 0
    hmin = 1e300
    trap = 0.0
    if record:
        rec_t[0] = t
        for j in range(6):
            rec_s[0, j] = s[j]
        nrec = 1

    h = h0
    errold = 1e-4
    k1 = np.empty(6)
    # first derivative
    u = origin + sgn * t
    V = _v_real(kind, c2, om, mu, u)
    imy = math.exp(s[1]) if s[1] > -700.0 else 0.0
    k1[0] = V - s[0] * s[0] + imy * imy
    k1[1] = -2.0 * s[0]
    k1[2] = imy
    k1[3] = s[0]
    k1[4] = -1.0 - 2.0 * (s[0] * s[4] - imy * s[5])
    k1[5] = -2.0 * (s[0] * s[5] + imy * s[4])

    stages = np.empty((7, 6))
    work = np.empty(6)

    while t < t1:
        # distance-to-pole cap: spheroidal potential is singular at u=0
        if kind == 0:
            upos = origin + sgn * t
            if sgn > 0:
                # pole lies behind at u=0; resolution scale is u itself
                cap = 0.2 * upos
            else:
                cap = 0.2 * (upos - 0.0)
            if upos < 0.4 and h > cap:
                h = cap
        if h > t1 - t:
            h = t1 - t
        if h < 1e-15 * (1.0 + abs(t)):
            return STEP_UNDERFLOW, nacc, nrej, hmin, nrec, trap, s

        for j in range(6):
            stages[0, j] = k1[j]

        # stage 2..6 and the two b-combinations
        ok = True
        for st in range(1, 6):
            if st == 1:
                c = 0.2
                for j in range(6):
                    work[j] = s[j] + h * (_A21 * stages[0, j])
            elif st == 2:
                c = 0.3
                for j in range(6):
                    work[j] = s[j] + h * (_A31 * stages[0, j] + _A32 * stages[1, j])
            elif st == 3:
                c = 0.8
                for j in range(6):
                    work[j] = s[j] + h * (_A41 * stages[0, j] + _A42 * stages[1, j]
                                          + _A43 * stages[2, j])
            elif st == 4:
                c = 8.0 / 9.0
                for j in range(6):
                    work[j] = s[j] + h * (_A51 * stages[0, j] + _A52 * stages[1, j]
                                          + _A53 * stages[2, j] + _A54 * stages[3, j])
            else:
                c = 1.0
                for j in range(6):
                    work[j] = s[j] + h * (_A61 * stages[0, j] + _A62 * stages[1, j]
                                          + _A63 * stages[2, j] + _A64 * stages[3, j]
                                          + _A65 * stages[4, j])
            u = origin + sgn * (t + c * h)
            V = _v_real(kind, c2, om, mu, u)
            imy = math.exp(work[1]) if work[1] > -700.0 else 0.0
            stages[st, 0] = V - work[0] * work[0] + imy * imy
            stages[st, 1] = -2.0 * work[0]
            stages[st, 2] = imy
            stages[st, 3] = work[0]
            stages[st, 4] = -1.0 - 2.0 * (work[0] * work[4] - imy * work[5])
            stages[st, 5] = -2.0 * (work[0] * work[5] + imy * work[4])

        for j in range(6):
            work[j] = s[j] + h * (_B1 * stages[0, j] + _B3 * stages[2, j]
                                  + _B4 * stages[3, j] + _B5 * stages[4, j]
                                  + _B6 * stages[5, j])
        u = origin + sgn * (t + h)
        V = _v_real(kind, c2, om, mu, u)
        imy = math.exp(work[1]) if work[1] > -700.0 else 0.0
        stages[6, 0] = V - work[0] * work[0] + imy * imy
        stages[6, 1] = -2.0 * work[0]
        stages[6, 2] = imy
        stages[6, 3] = work[0]
        stages[6, 4] = -1.0 - 2.0 * (work[0] * work[4] - imy * work[5])
        stages[6, 5] = -2.0 * (work[0] * work[5] + imy * work[4])

        errsum = 0.0
        for j in range(6):
            ev = h * (_E1 * stages[0, j] + _E3 * stages[2, j] + _E4 * stages[3, j]
                      + _E5 * stages[4, j] + _E6 * stages[5, j] + _E7 * stages[6, j])
            aj = abs(s[j])
            bj = abs(work[j])
            sc = atol + rtol * (aj if aj > bj else bj)
            errsum += (ev / sc) * (ev / sc)
        err = math.sqrt(errsum / 6.0)

        if err <= 1.0:
            # accepted
            prev_yli = s[5]
            t += h
            for j in range(6):
                s[j] = work[j]
            for j in range(6):
                k1[j] = stages[6, j]
            nacc += 1
            if h < hmin:
                hmin = h
            trap += 0.5 * h * (prev_yli + s[5])
            if abs(s[0]) > ceiling or s[1] > 690.0:
                return BLOW_UP, nacc, nrej, hmin, nrec, trap, s
            if record:
                if nrec >= rec_t.shape[0]:
                    return RECORD_OVERFLOW, nacc, nrej, hmin, nrec, trap, s
                rec_t[nrec] = t
                for j in range(6):
                    rec_s[nrec, j] = s[j]
                nrec += 1
            if err > 1e-30:
                fac = 0.9 * err ** (-0.14) * errold ** 0.08
            else:
                fac = 5.0
            errold = err if err > 1e-4 else 1e-4
        else:
            nrej += 1
            fac = 0.9 * err ** (-0.2)
            if fac < 0.2:
                fac = 0.2
        if fac > 5.0:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        h *= fac
        if nacc + nrej > max_steps:
            return MAX_STEPS, nacc, nrej, hmin, nrec, trap, s

    return OK, nacc, nrej, hmin, nrec, trap, s


@njit(cache=True, inline="always")
def _v_complex(kind, c2, om, mu, u):
    if kind == 0:
        s = math.sin(u)
        s2 = s * s
        return om * om * s2 + c2 / s2 - mu
    return c2


@njit(cache=True)
def sturm_kernel(t0, t1, state, origin, sgn, kind, c2, om, mu,
                 rtol, atol, h0, max_steps,
                 record, rec_t, rec_s, rec_scale):
    """Integrate (z, z', z_lam, z_lam') with z'' = V z, z_lam'' = V z_lam - z.

    The state is rescaled whenever it grows past 1e120; ``scale_log``
    accumulates the removed exponents so that actual z = z_buf * exp(scale).
    Returns (status, n_accepted, n_rejected, n_recorded, scale_log_end,
             sup_log_abs_z, end state).
    """
    s = state.copy()
    t = t0
    nacc = 0
    nrej = 0
    nrec = 0
    scale_log = 0.0
    suplog = math.log(max(abs(s[0]), 1e-300))
    if record:
        rec_t[0] = t
        for j in range(4):
            rec_s[0, j] = s[j]
        rec_scale[0] = scale_log
        nrec = 1

    h = h0
    errold = 1e-4
    stages = np.empty((7, 4), dtype=np.complex128)
    work = np.empty(4, dtype=np.complex128)
    k1 = np.empty(4, dtype=np.complex128)

    u = origin + sgn * t
    V = _v_complex(kind, c2, om, mu, u)
    k1[0] = s[1]
    k1[1] = V * s[0]
    k1[2] = s[3]
    k1[3] = V * s[2] - s[0]

    while t < t1:
        if kind == 0:
            upos = origin + sgn * t
            if upos < 0.4 and h > 0.2 * upos:
                h = 0.2 * upos
        if h > t1 - t:
            h = t1 - t
        if h < 1e-15 * (1.0 + abs(t)):
            return STEP_UNDERFLOW, nacc, nrej, nrec, scale_log, suplog, s

        for j in range(4):
            stages[0, j] = k1[j]
        for st in range(1, 6):
            if st == 1:
                c = 0.2
                for j in range(4):
                    work[j] = s[j] + h * (_A21 * stages[0, j])
            elif st == 2:
                c = 0.3
                for j in range(4):
                    work[j] = s[j] + h * (_A31 * stages[0, j] + _A32 * stages[1, j])
            elif st == 3:
                c = 0.8
                for j in range(4):
                    work[j] = s[j] + h * (_A41 * stages[0, j] + _A42 * stages[1, j]
                                          + _A43 * stages[2, j])
            elif st == 4:
                c = 8.0 / 9.0
                for j in range(4):
                    work[j] = s[j] + h * (_A51 * stages[0, j] + _A52 * stages[1, j]
                                          + _A53 * stages[2, j] + _A54 * stages[3, j])
            else:
                c = 1.0
                for j in range(4):
                    work[j] = s[j] + h * (_A61 * stages[0, j] + _A62 * stages[1, j]
                                          + _A63 * stages[2, j] + _A64 * stages[3, j]
                                          + _A65 * stages[4, j])
            u = origin + sgn * (t + c * h)
            V = _v_complex(kind, c2, om, mu, u)
            stages[st, 0] = work[1]
            stages[st, 1] = V * work[0]
            stages[st, 2] = work[3]
            stages[st, 3] = V * work[2] - work[0]

        for j in range(4):
            work[j] = s[j] + h * (_B1 * stages[0, j] + _B3 * stages[2, j]
                                  + _B4 * stages[3, j] + _B5 * stages[4, j]
                                  + _B6 * stages[5, j])
        u = origin + sgn * (t + h)
        V = _v_complex(kind, c2, om, mu, u)
        stages[6, 0] = work[1]
        stages[6, 1] = V * work[0]
        stages[6, 2] = work[3]
        stages[6, 3] = V * work[2] - work[0]

        errsum = 0.0
        for j in range(4):
            ev = abs(h * (_E1 * stages[0, j] + _E3 * stages[2, j]
                          + _E4 * stages[3, j] + _E5 * stages[4, j]
                          + _E6 * stages[5, j] + _E7 * stages[6, j]))
            aj = abs(s[j])
            bj = abs(work[j])
            sc = atol + rtol * (aj if aj > bj else bj)
            errsum += (ev / sc) * (ev / sc)
        err = math.sqrt(errsum / 4.0)

        if err <= 1.0:
            t += h
            for j in range(4):
                s[j] = work[j]
            for j in range(4):
                k1[j] = stages[6, j]
            nacc += 1
            az = abs(s[0])
            if az > 0.0:
                lg = scale_log + math.log(az)
                if lg > suplog:
                    suplog = lg
            mag = az
            if abs(s[1]) > mag:
                mag = abs(s[1])
            if mag > 1e120:
                inv = 1.0 / mag
                for j in range(4):
                    s[j] *= inv
                for j in range(4):
                    k1[j] *= inv
                scale_log += math.log(mag)
            if record:
                if nrec >= rec_t.shape[0]:
                    return RECORD_OVERFLOW, nacc, nrej, nrec, scale_log, suplog, s
                rec_t[nrec] = t
                for j in range(4):
                    rec_s[nrec, j] = s[j]
                rec_scale[nrec] = scale_log
                nrec += 1
            if err > 1e-30:
                fac = 0.9 * err ** (-0.14) * errold ** 0.08
            else:
                fac = 5.0
            errold = err if err > 1e-4 else 1e-4
        else:
            nrej += 1
            fac = 0.9 * err ** (-0.2)
        if fac > 5.0:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        h *= fac
        if nacc + nrej > max_steps:
            return MAX_STEPS, nacc, nrej, nrec, scale_log, suplog, s

    return OK, nacc, nrej, nrec, scale_log, suplog, s


@njit(cache=True)
def tridiag_eigenvalues(d_in, e_in):
    """Eigenvalues of the symmetric tridiagonal matrix (d, e), ascending.

    Implicit QL with Wilkinson shifts; returns (eigs, status) with status 0
    on success, 1 if an eigenvalue failed to converge in 50 sweeps.
    """
    n = d_in.shape[0]
    d = d_in.copy()
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = e_in[i]
    eps = 2.220446049250313e-16

    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 50:
                return np.sort(d), 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            sg = r if g >= 0 else -r
            g = d[m] - d[l] + e[l] / (g + sg)
            s = 1.0
            c = 1.0
            p = 0.0
            bail = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    bail = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if bail:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(d), 0
