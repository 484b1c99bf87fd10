"""Complex Riccati integration with phase, amplitude and lambda-sensitivity.

The propagated state is (Re y, eta, phi, log rho, y_lambda) with
eta = log Im y, so positivity of Im y holds by construction and the
conservation law rho^2 Im y = w is an arithmetic identity of the flow
(2*(log rho)' + eta' = 0).  The deep-barrier regime, where Im y decays like
exp(-2 integral sqrt(V)), is then representable far below the floating-point
floor of Im y itself.

Initialisation happens either at the singular endpoint u=0 through Frobenius
series (``init_at_singularity``) or at an interior point with WKB data
(``init_wkb``).  Integration may run in either direction; right-to-left
sweeps reuse the forward kernel through the reflection
w(t) = -conj(y(origin - t)), which preserves Im > 0 and all identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (BlowUpError, DomainError, IntegrationError,
                     SeriesTruncationError)
from .potential import (CSC2_SERIES as _CSC2, HALF_PI,
                        SIN2_SERIES as _SIN2, ProblemParams,
                        SpheroidalPotential)

_NTERMS = 18


def as_potential(p):
    """Accept a ProblemParams or any potential object."""
    if isinstance(p, ProblemParams):
        return SpheroidalPotential(p)
    return p


@dataclass
class IntegratorOptions:
    rtol: float = 1e-9
    atol: float = 1e-11
    max_steps: int = 2_000_000
    ceiling: float = 1e15       # blow-up guard on |Re y|
    record: bool = True
    max_record: int = 400_000


@dataclass
class RiccatiState:
    """Riccati data at one angle.

    ``eta`` is authoritative for the imaginary part; ``y`` recombines it.
    ``w`` is the Wronskian rho^2 Im y of the underlying complex solution and
    is constant along a trajectory.
    """

    u: float
    re_y: float
    eta: float
    phase: float
    logRho: float
    yLambda: complex
    w: float

    @property
    def y(self) -> complex:
        return self.re_y + 1j * math.exp(self.eta)

    @property
    def im_y(self) -> float:
        return math.exp(self.eta)

    @classmethod
    def from_y(cls, u: float, y: complex, yLambda: complex = 0j,
               phase: float = 0.0, logRho: float = 0.0,
               w: float | None = None) -> "RiccatiState":
        if y.imag <= 0:
            raise DomainError(f"Im y must be positive, got {y.imag}")
        if w is None:
            w = math.exp(2.0 * logRho) * y.imag
        return cls(u=u, re_y=y.real, eta=math.log(y.imag), phase=phase,
                   logRho=logRho, yLambda=yLambda, w=w)


@dataclass
class Trajectory:
    """Accepted integration samples, ascending in u, plus run statistics."""

    u: np.ndarray
    re_y: np.ndarray
    eta: np.ndarray
    phi: np.ndarray
    logrho: np.ndarray
    ylam: np.ndarray           # complex
    w: float
    pot: object
    steps: int
    rejected: int
    min_step: float
    flow_from: str = "left"    # which end carried the initial data
    imylam_trap: float = 0.0   # kernel trapezoid of Im y_lambda over the sweep

    def __len__(self):
        return len(self.u)

    @property
    def y(self) -> np.ndarray:
        return self.re_y + 1j * np.exp(self.eta)

    @property
    def im_y(self) -> np.ndarray:
        return np.exp(self.eta)

    def state(self, i: int) -> RiccatiState:
        return RiccatiState(u=float(self.u[i]), re_y=float(self.re_y[i]),
                            eta=float(self.eta[i]), phase=float(self.phi[i]),
                            logRho=float(self.logrho[i]),
                            yLambda=complex(self.ylam[i]), w=self.w)

    def end_state(self) -> RiccatiState:
        return self.state(-1 if self.flow_from == "left" else 0)

    def _rhs(self, u, re, im, ylam):
        V = np.asarray(self.pot.v(u), dtype=float)
        dre = V - re * re + im * im
        deta = -2.0 * re
        dphi = im
        dlrho = re
        dylam = -1.0 - 2.0 * (re + 1j * im) * ylam
        return dre, deta, dphi, dlrho, dylam

    def with_midpoints(self):
        """Cubic-Hermite midpoint refinement.

        Returns (u, y, phi, logrho, ylam) arrays on the union of samples and
        interval midpoints; used by enclosure checks (doubling the sampling
        is cheap insurance since the disk data vary smoothly).
        """
        u = self.u
        im = np.exp(self.eta)
        dre, deta, dphi, dlrho, dylam = self._rhs(u, self.re_y, im, self.ylam)

        def hermite(f, df):
            h = np.diff(u)
            f0, f1 = f[:-1], f[1:]
            d0, d1 = df[:-1], df[1:]
            return 0.5 * (f0 + f1) + 0.125 * h * (d0 - d1)

        um = 0.5 * (u[:-1] + u[1:])
        rem = hermite(self.re_y, dre)
        etam = hermite(self.eta, deta)
        phim = hermite(self.phi, dphi)
        lrm = hermite(self.logrho, dlrho)
        ylm = hermite(self.ylam, dylam)

        uu = np.empty(2 * len(u) - 1)
        uu[0::2] = u
        uu[1::2] = um

        def weave(a, b):
            out = np.empty(2 * len(a) - 1, dtype=np.result_type(a, b))
            out[0::2] = a
            out[1::2] = b
            return out

        yy = weave(self.re_y, rem) + 1j * np.exp(weave(self.eta, etam))
        return (uu, yy, weave(self.phi, phim), weave(self.logrho, lrm),
                weave(self.ylam, ylm))

    def wronskian_drift(self) -> float:
        """max |(2 log rho + eta) - (value at start)|; zero in exact arithmetic."""
        q = 2.0 * self.logrho + self.eta
        i0 = 0 if self.flow_from == "left" else len(q) - 1
        return float(np.max(np.abs(q - q[i0])))


# ---------------------------------------------------------------------------
# Frobenius series at the singular endpoint u = 0
# ---------------------------------------------------------------------------

@dataclass
class SeriesInit:
    """Series initialisation data at u_eps.

    ``phi0`` is the absolute phase arg z(u_eps) measured from the u->0 limit
    arg z -> -pi/2, so the phase accumulated on (0, u_eps] equals
    phi0 + pi/2 exactly; ``dphi0_dlam`` is its lambda-derivative.
    """

    state: RiccatiState
    phi0: float
    dphi0_dlam: float
    u_eps: float
    truncation: float


def _potential_series(k: int, om: complex, mu: complex, nterms: int):
    """w_n of V = (k^2-1/4)/u^2 + sum w_n u^(2n)."""
    c2 = k * k - 0.25
    w = np.zeros(nterms, dtype=complex)
    for n in range(min(nterms, len(_CSC2))):
        w[n] += c2 * _CSC2[n]
    w[0] -= mu
    for n in range(1, min(nterms, len(_SIN2) + 1)):
        w[n] += om * om * _SIN2[n - 1]
    return w


def _series_up(k: int, om: complex, mu: complex, nterms: int = _NTERMS):
    """a_j of Y1 = u^(1/2+|k|) sum a_j u^(2j) and their lambda-derivatives."""
    ak = abs(k)
    w = _potential_series(k, om, mu, nterms)
    a = np.zeros(nterms + 1, dtype=complex)
    da = np.zeros(nterms + 1, dtype=complex)
    a[0] = 1.0
    for J in range(1, nterms + 1):
        sa = 0j
        sd = 0j
        for j in range(J):
            if J - 1 - j < nterms:
                sa += w[J - 1 - j] * a[j]
                sd += w[J - 1 - j] * da[j]
        sd -= a[J - 1]          # d w_0 / d lambda = -1
        den = 4.0 * J * (J + ak)
        a[J] = sa / den
        da[J] = sd / den
    return a, da


def _series_second(k: int, om: complex, mu: complex, a, da,
                   nterms: int = _NTERMS):
    """Second Frobenius solution.

    k=0:   Y2 = Y1 log u + sqrt(u) G(u^2), G(0) = 0 (pure log companion),
           Wronskian W(Y1, Y2) = +1.
    k!=0:  Y2 = u^(1/2-|k|) Q(u^2) + C Y1 log u with Q(0) = 1 and the
           resonant coefficient q_|k| set to zero; W(Y1, Y2) = -2|k|.

    Returns (q, dq, C, dC) where for k=0 the pair (q, dq) holds G and C=1 is
    the formal log coefficient (in front of Y1 log u).
    """
    ak = abs(k)
    w = _potential_series(k, om, mu, nterms)
    q = np.zeros(nterms + 1, dtype=complex)
    dq = np.zeros(nterms + 1, dtype=complex)
    if ak == 0:
        for J in range(1, nterms + 1):
            sq = 0j
            sd = 0j
            for j in range(J):
                if J - 1 - j < nterms:
                    sq += w[J - 1 - j] * q[j]
                    sd += w[J - 1 - j] * dq[j]
            sd -= q[J - 1]
            den = 4.0 * J * J
            q[J] = (sq - 4.0 * J * a[J]) / den
            dq[J] = (sd - 4.0 * J * da[J]) / den
        return q, dq, 1.0 + 0j, 0.0 + 0j

    q[0] = 1.0
    C = 0j
    dC = 0j
    for J in range(1, nterms + 1):
        sq = 0j
        sd = 0j
        for j in range(J):
            if J - 1 - j < nterms:
                sq += w[J - 1 - j] * q[j]
                sd += w[J - 1 - j] * dq[j]
        sd -= q[J - 1]
        if J < ak:
            den = 4.0 * J * (J - ak)
            q[J] = sq / den
            dq[J] = sd / den
        elif J == ak:
            # resonance: the log coefficient absorbs the obstruction
            C = sq / (2.0 * ak)
            dC = sd / (2.0 * ak)
            q[J] = 0.0
            dq[J] = 0.0
        else:
            jj = J - ak
            src = 4.0 * jj + 2.0 * ak
            den = 4.0 * J * (J - ak)
            q[J] = (sq - C * a[jj] * src) / den
            dq[J] = (sd - dC * a[jj] * src - C * da[jj] * src) / den
    return q, dq, C, dC


def _poly(coefs: np.ndarray, x: complex) -> complex:
    acc = 0j
    for c in coefs[::-1]:
        acc = acc * x + c
    return acc


def _poly_dx(coefs: np.ndarray, x: complex) -> complex:
    acc = 0j
    for j in range(len(coefs) - 1, 0, -1):
        acc = acc * x + j * coefs[j]
    return acc


def series_solution(u, k: int, om: complex, mu: complex):
    """(Y1, Y1', dY1/dlam, dY1'/dlam) of the boundary-selected solution.

    Valid for complex (om, mu); used both by the Riccati initialiser and by
    the direct Sturm-Liouville shooting.
    """
    a, da = _series_up(k, om, mu)
    r = 0.5 + abs(k)
    x = u * u
    P, dP = _poly(a, x), _poly(da, x)
    Px, dPx = _poly_dx(a, x), _poly_dx(da, x)
    ur = u ** r
    Y1 = ur * P
    Y1p = ur / u * (r * P + 2.0 * x * Px)
    dY1 = ur * dP
    dY1p = ur / u * (r * dP + 2.0 * x * dPx)
    trunc = abs(a[-1] * x ** _NTERMS) / max(abs(P), 1e-300)
    return Y1, Y1p, dY1, dY1p, trunc


def singular_series_pair(p: ProblemParams, u_eps: float):
    """(Y1, Y1', Y2, Y2') and lambda-derivatives at u_eps, plus truncation.

    Y1 is the boundary-selected solution; Y2 the Frobenius companion (with
    its log term: always for k=0, at the resonant order u^(1/2+|k|) log u
    for k != 0).  The pair Wronskian is exactly +1 (k=0) or -2|k| (k != 0).
    """
    if not (0.0 < u_eps < 1.2):
        raise DomainError("u_eps must lie in (0, 1.2)")
    k, om, lam = p.normalized().real_parts()
    mu = lam - 2.0 * om * k + 0.25
    ak = abs(k)
    a, da = _series_up(k, om, mu)
    q, dq, C, dC = _series_second(k, om, mu, a, da)
    x = u_eps * u_eps
    L = math.log(u_eps)
    r1 = 0.5 + ak

    P, dP = _poly(a, x).real, _poly(da, x).real
    Px, dPx = _poly_dx(a, x).real, _poly_dx(da, x).real
    Q, dQ = _poly(q, x).real, _poly(dq, x).real
    Qx, dQx = _poly_dx(q, x).real, _poly_dx(dq, x).real

    ur1 = u_eps ** r1
    Y1 = ur1 * P
    Y1p = ur1 / u_eps * (r1 * P + 2.0 * x * Px)
    dY1 = ur1 * dP
    dY1p = ur1 / u_eps * (r1 * dP + 2.0 * x * dPx)

    if ak == 0:
        # Y2 = Y1 log u + sqrt(u) Q(u^2), Q(0)=0
        Y2 = Y1 * L + ur1 * Q
        Y2p = Y1p * L + Y1 / u_eps + ur1 / u_eps * (0.5 * Q + 2.0 * x * Qx)
        dY2 = dY1 * L + ur1 * dQ
        dY2p = (dY1p * L + dY1 / u_eps
                + ur1 / u_eps * (0.5 * dQ + 2.0 * x * dQx))
        Cr = dCr = 0.0
    else:
        r2 = 0.5 - ak
        ur2 = u_eps ** r2
        Cr, dCr = C.real, dC.real
        Y2 = ur2 * Q + Cr * Y1 * L
        Y2p = (ur2 / u_eps * (r2 * Q + 2.0 * x * Qx)
               + Cr * (Y1p * L + Y1 / u_eps))
        dY2 = ur2 * dQ + dCr * Y1 * L + Cr * dY1 * L
        dY2p = (ur2 / u_eps * (r2 * dQ + 2.0 * x * dQx)
                + dCr * (Y1p * L + Y1 / u_eps)
                + Cr * (dY1p * L + dY1 / u_eps))

    trunc = abs(a[-1]) * x ** _NTERMS / max(abs(P), 1e-300)
    trunc = max(trunc, abs(q[-1]) * x ** _NTERMS / max(abs(Q), 1e-3))
    if trunc > 1e-12:
        raise SeriesTruncationError(
            f"series truncation {trunc:.2e} at u_eps={u_eps:.2e}; "
            f"use a smaller u_eps")
    return (Y1, Y1p, Y2, Y2p), (dY1, dY1p, dY2, dY2p), trunc


def singular_series_init(p: ProblemParams, u_eps: float) -> SeriesInit:
    """Riccati data at u_eps for z = Y1 + i Y2 (k=0) / z = Y1 - i Y2 (k!=0),
    signed so the Wronskian w = Im(conj(z) z') is positive (1 resp. 2|k|).

    In both cases arg z -> -pi/2 as u -> 0, so the phase accumulated on
    (0, u_eps] equals phi0 + pi/2 exactly, phi0 = arg z(u_eps); for k=0
    Im y(u_eps) ~ 1/(u (1+log^2 u)), for k != 0 Im y ~ 2|k| u^(2|k|-1).
    """
    (Y1, Y1p, Y2, Y2p), (dY1, dY1p, dY2, dY2p), trunc = \
        singular_series_pair(p, u_eps)
    sgn = 1.0 if p.k == 0 else -1.0
    z = Y1 + 1j * sgn * Y2
    zp = Y1p + 1j * sgn * Y2p
    dz = dY1 + 1j * sgn * dY2
    dzp = dY1p + 1j * sgn * dY2p
    y = zp / z
    ylam = (dzp * z - zp * dz) / (z * z)
    phi0 = math.atan2(sgn * Y2, Y1)
    dphi0 = (dz / z).imag
    state = RiccatiState.from_y(u_eps, y, yLambda=ylam, w=y.imag)
    return SeriesInit(state=state, phi0=phi0, dphi0_dlam=dphi0,
                      u_eps=u_eps, truncation=trunc)


def boundary_log_derivative(p: ProblemParams, u_eps: float) -> float:
    """Y1'/Y1 at u_eps for the boundary-selected solution.

    Leading behavior (1/2+|k|)/u_eps for k != 0 and 1/(2 u_eps) for k=0,
    per the indicial exponents.
    """
    (Y1, Y1p, _, _), _, _ = singular_series_pair(p, u_eps)
    return Y1p / Y1


def _linear_track(u0: float, u1: float, y: float, yp: float, dy: float,
                  dyp: float, pot, rtol: float, atol: float):
    """Integrate one real Sturm-Liouville solution (with lambda-derivative)
    in linear form, error-controlled and rescaled relative to itself.

    Returns (Y, Y', dY, dY', log_scale): actual values carry exp(log_scale).
    """
    mag = max(abs(y), abs(yp), 1e-300)
    state = np.array([y / mag, yp / mag, dy / mag, dyp / mag],
                     dtype=np.complex128)
    kind = pot.kernel_kind
    c2, om, mu = pot.kernel_args()
    h0 = min(1e-4, (u1 - u0) / 100.0)
    if kind == 0:
        h0 = min(h0, 0.1 * u0)
    dummy_t = np.empty(2)
    dummy_s = np.empty((2, 4), dtype=np.complex128)
    dummy_sc = np.empty(2)
    out = _kernels.sturm_kernel(u0, u1, state, 0.0, 1.0, kind,
                                complex(c2), complex(om), complex(mu),
                                rtol, atol, h0, 2_000_000,
                                False, dummy_t, dummy_s, dummy_sc)
    status, nacc, nrej, nrec, scale_log, suplog, s_end = out
    if status != _kernels.OK:
        raise IntegrationError(
            _STATUS_MSG.get(status, f"status {status}") + " (linear track)")
    return (s_end[0].real, s_end[1].real, s_end[2].real, s_end[3].real,
            scale_log + math.log(mag))


def wall_switch_init(p: ProblemParams, u_eps: float) -> SeriesInit:
    """Initial data for k != 0: carry the Frobenius pair through the
    positive-potential wall in linear form, then hand over to the Riccati
    representation at the first sign change of V (or at pi/2 if V stays
    positive).

    In the wall the selected solution Y1 is exponentially small against Y2;
    propagating y = z'/z there cannot keep the pair separated, while two
    independently error-controlled linear tracks can.  The accumulated phase
    on (0, u_switch] is arg z + pi/2 exactly since Y1 > 0 on the wall.
    """
    pot = SpheroidalPotential(p)
    (Y1, Y1p, Y2, Y2p), (dY1, dY1p, dY2, dY2p), trunc = \
        singular_series_pair(p, u_eps)
    du_sw = 0.0     # d u_sw / d lambda (switch-point motion)
    if float(pot.v(u_eps)) <= 0.0:
        u_sw = u_eps
        s1 = math.log(max(abs(Y1), abs(Y1p)))
        s2 = math.log(max(abs(Y2), abs(Y2p)))
        t1 = (Y1 / math.exp(s1), Y1p / math.exp(s1),
              dY1 / math.exp(s1), dY1p / math.exp(s1), s1)
        t2 = (Y2 / math.exp(s2), Y2p / math.exp(s2),
              dY2 / math.exp(s2), dY2p / math.exp(s2), s2)
    else:
        u_sw = first_potential_zero(p)
        if u_sw is None or u_sw <= u_eps:
            u_sw = HALF_PI
        else:
            # V(u_sw; lambda) = 0 with dV/dlambda = -1
            du_sw = 1.0 / float(pot.dv(u_sw))
        t1 = _linear_track(u_eps, u_sw, Y1, Y1p, dY1, dY1p, pot, 1e-12, 1e-14)
        t2 = _linear_track(u_eps, u_sw, Y2, Y2p, dY2, dY2p, pot, 1e-12, 1e-14)

    y1, y1p, d1, d1p, s1 = t1
    y2, y2p, d2, d2p, s2 = t2
    if y1 <= 0.0:
        # convexity keeps the selected solution positive where V > 0
        raise IntegrationError("selected solution lost positivity in the wall")

    # Rebalance the pair before entering the oscillatory region: the
    # combination z = Y1 - i s Y2 counts nodes for any s > 0 (the grid
    # crossings of arg z are the zeros of Y1 and the u->0 limit -pi/2 is
    # unchanged); choosing s = amplitude(Y1)/amplitude(Y2) keeps |z| free of
    # deep dips so Im y stays integrable at ordinary step sizes.  The
    # amplitude proxy weights Y against Y'/q with the well wavenumber scale.
    k, om, lam = p.normalized().real_parts()
    mu = lam - 2.0 * om * k + 0.25
    q = math.sqrt(1.0 + abs(mu))
    dq_dlam = (1.0 if mu >= 0 else -1.0) / (2.0 * q)
    a2 = (q * y1) ** 2 + y1p ** 2
    b2 = (q * y2) ** 2 + y2p ** 2
    rb = math.sqrt(a2 / b2)     # = s * exp(s2 - s1)
    # d log s / d lambda: the fixed-u part plus the switch-point motion
    # (s is evaluated at u_sw(lambda); Y'' = V Y enters the u-derivative)
    v_sw = float(pot.v(u_sw))
    dla = ((q * q * y1 * d1 + y1p * d1p + q * dq_dlam * y1 * y1) / a2
           + du_sw * (q * q + v_sw) * y1 * y1p / a2)
    dlb = ((q * q * y2 * d2 + y2p * d2p + q * dq_dlam * y2 * y2) / b2
           + du_sw * (q * q + v_sw) * y2 * y2p / b2)
    dlog_s = dla - dlb

    # zeta = exp(-s1) * (Y1 - i s Y2); the exp(s1) scale cancels everywhere
    zeta = y1 - 1j * rb * y2
    zetap = y1p - 1j * rb * y2p
    zl = d1 - 1j * rb * (d2 + dlog_s * y2)
    zlp = d1p - 1j * rb * (d2p + dlog_s * y2p)
    y = zetap / zeta
    ylam = (zlp * zeta - zetap * zl) / (zeta * zeta)
    what = rb * (y2 * y1p - y1 * y2p)   # Im(conj(zeta) zeta')
    if what <= 0.0:
        raise IntegrationError("pair Wronskian lost positivity in the wall")
    eta = math.log(what) - math.log(abs(zeta) ** 2)
    phi0 = math.atan2(-rb * y2, y1)
    dphi0 = (zl / zeta).imag
    state = RiccatiState(u=u_sw, re_y=y.real, eta=eta, phase=0.0, logRho=0.0,
                         yLambda=ylam, w=math.exp(eta))
    return SeriesInit(state=state, phi0=phi0, dphi0_dlam=dphi0,
                      u_eps=u_eps, truncation=trunc)


def first_potential_zero(p: ProblemParams) -> float | None:
    """Leftmost zero of V in (0, pi/2] for k != 0 (closed form), else None."""
    k, om, lam = p.normalized().real_parts()
    c2 = k * k - 0.25
    mu = lam - 2.0 * om * k + 0.25
    if c2 <= 0 or mu <= 0:
        return None
    if om == 0.0:
        s2 = c2 / mu
    else:
        disc = mu * mu - 4.0 * om * om * c2
        if disc <= 0:
            return None
        s2 = (mu - math.sqrt(disc)) / (2.0 * om * om)
    if not (0.0 < s2 < 1.0):
        return None
    return math.asin(math.sqrt(s2))


def default_u_eps(p: ProblemParams) -> float:
    """Series offset for shooting.

    For k != 0 the offset must sit close enough to the wall turning point
    that the pair ratio Y2/Y1 ~ (u_minus/u_eps)^(2 sqrt(k^2-1/4)) stays
    within the linear tracks' error headroom; for k=0 the pair is log-close
    and only series convergence matters.
    """
    k, om, lam = p.normalized().real_parts()
    scale = abs(lam - 2.0 * om * k + 0.25) + abs(om) + 10.0
    if k == 0:
        return min(1e-4, 0.02 / math.sqrt(scale))
    um = first_potential_zero(p)
    if um is None:
        return min(1e-2, 0.2 / math.sqrt(scale))
    c2 = k * k - 0.25
    frac = 10.0 ** (-6.0 / (2.0 * math.sqrt(c2)))
    return max(1e-7, um * frac)


def init_at_singularity(p: ProblemParams, u_eps: float | None = None) -> RiccatiState:
    """Riccati state at u_eps constructed from the Frobenius series."""
    if u_eps is None:
        u_eps = default_u_eps(p)
    return singular_series_init(p, u_eps).state


def init_wkb(p: ProblemParams, u0: float) -> RiccatiState:
    """WKB initial data y(u0) = i sqrt|V| - V'/(4V), with rho(u0) = 1.

    The lambda-sensitivity is the exact derivative of this condition,
    y_lam = i/(2 sqrt|V|) - V'/(4 V^2).
    """
    pot = as_potential(p)
    V = float(pot.v(u0))
    if V >= 0:
        raise DomainError(f"init_wkb requires V(u0) < 0, got V={V:.6g}")
    Vp = float(pot.dv(u0))
    sq = math.sqrt(-V)
    y = 1j * sq - Vp / (4.0 * V)
    ylam = 1j / (2.0 * sq) - Vp / (4.0 * V * V)
    return RiccatiState.from_y(u0, y, yLambda=ylam, w=sq)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

_STATUS_MSG = {
    _kernels.MAX_STEPS: "step budget exhausted",
    _kernels.STEP_UNDERFLOW: "step size underflow",
}


def integrate(s0: RiccatiState, u_target: float, p,
              opts: IntegratorOptions | None = None) -> Trajectory:
    """Propagate a Riccati state to u_target (either direction).

    Direction is inferred from u_target relative to s0.u.  Backward sweeps
    are computed as the reflected-conjugated forward problem and returned in
    ascending-u order with original-orientation values.
    """
    opts = opts or IntegratorOptions()
    pot = as_potential(p)
    if u_target == s0.u:
        raise DomainError("u_target must differ from the initial angle")
    backward = u_target < s0.u
    if getattr(pot, "singular_at_zero", False):
        # the spheroidal domain is (0, pi/2]
        if backward and u_target <= 0.0:
            raise DomainError("u_target must stay positive")
        if not backward and u_target > HALF_PI + 1e-12:
            raise DomainError("u_target must not exceed pi/2")

    kind = pot.kernel_kind
    c2, om, mu = pot.kernel_args()

    if backward:
        origin, sgn = s0.u, -1.0
        t0, t1 = 0.0, s0.u - u_target
        state = np.array([-s0.re_y, s0.eta, 0.0, 0.0,
                          -s0.yLambda.real, s0.yLambda.imag])
    else:
        origin, sgn = 0.0, 1.0
        t0, t1 = s0.u, u_target
        state = np.array([s0.re_y, s0.eta, 0.0, 0.0,
                          s0.yLambda.real, s0.yLambda.imag])

    span = t1 - t0
    h0 = min(1e-4, span / 100.0)
    if kind == 0:
        h0 = min(h0, 0.1 * (origin + sgn * t0))

    nrec_cap = opts.max_record if opts.record else 2
    for attempt in range(2):
        rec_t = np.empty(nrec_cap)
        rec_s = np.empty((nrec_cap, 6))
        out = _kernels.riccati_kernel(
            t0, t1, state, origin, sgn, kind, c2, om, mu,
            opts.rtol, opts.atol, h0, opts.max_steps, opts.ceiling,
            opts.record, rec_t, rec_s)
        status = out[0]
        if status != _kernels.RECORD_OVERFLOW:
            break
        nrec_cap *= 8
    status, nacc, nrej, hmin, nrec, trap, s_end = out
    if status == _kernels.BLOW_UP:
        raise BlowUpError(f"|y| exceeded ceiling {opts.ceiling:g} near "
                          f"u={origin + sgn * (t0 + 0):.6g}")
    if status != _kernels.OK:
        raise IntegrationError(_STATUS_MSG.get(status, f"status {status}"))

    if opts.record:
        ts = rec_t[:nrec]
        ss = rec_s[:nrec]
    else:
        ts = np.array([t0, t1])
        ss = np.vstack([state, s_end])

    if backward:
        u = origin - ts
        order = np.argsort(u)
        u = u[order]
        ss = ss[order]
        re_y = -ss[:, 0]
        phi = s0.phase - ss[:, 2]
        logrho = s0.logRho + ss[:, 3]
        ylam = -ss[:, 4] + 1j * ss[:, 5]   # y_lam = -conj(w_lam)
        flow = "right"
    else:
        u = ts
        re_y = ss[:, 0]
        phi = s0.phase + ss[:, 2]
        logrho = s0.logRho + ss[:, 3]
        ylam = ss[:, 4] + 1j * ss[:, 5]
        flow = "left"

    return Trajectory(u=u, re_y=re_y, eta=ss[:, 1], phi=phi, logrho=logrho,
                      ylam=ylam, w=s0.w, pot=pot, steps=int(nacc),
                      rejected=int(nrej), min_step=float(hmin),
                      flow_from=flow, imylam_trap=float(trap))


def sensitivity_integral(traj: Trajectory) -> float:
    """integral of Im y_lambda over the trajectory's u-interval.

    Trapezoid on accepted samples, Richardson-extrapolated against the
    Hermite-midpoint refinement.  This equals d/dlambda of the accumulated
    phase over the same interval.
    """
    im = traj.ylam.imag
    coarse = float(np.trapezoid(im, traj.u))
    uu, _, _, _, ylm = traj.with_midpoints()
    fine = float(np.trapezoid(ylm.imag, uu))
    return (4.0 * fine - coarse) / 3.0
