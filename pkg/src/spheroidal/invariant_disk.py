"""Invariant-disk enclosures for the complex Riccati flow.

Given a real profile alpha (continuous, piecewise C^1) on a flow interval,
define

    sigma = exp(2 int alpha),   U = V - alpha^2 - alpha',
    T     = T0 exp(TV log|sigma^2 U| / 2),
    beta  = sqrt|U|/2 (T + 1/T),  R = sqrt|U|/2 (T - 1/T),  m = alpha + i beta.

If U <= 0 on the interval and |y - m| <= R holds at the flow start, it holds
along the whole flow.  Three profiles are built in: the WKB profile
alpha = -V'/(4V) for the semiclassical regime, a constant alpha = sqrt|V0|
for the quantum regime, and the log-pole profile matched to the 1/(4u^2)
singularity.  Flows may run right-to-left; the reflected trajectory
w = -conj(y) is what the disk then encloses, which in original coordinates
flips the sign of the center's real part.

"Certified" here means: lemma hypotheses and the conclusion are verified at
sample resolution with stated tolerances (no directed rounding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisError
from .potential import k_functional, l_functional
from .riccati import Trajectory, as_potential


# ---------------------------------------------------------------------------
# flow geometry
# ---------------------------------------------------------------------------

class FlowPotential:
    """Potential seen along the flow coordinate t in [0, L].

    flow_from='left':  u = a + t;  flow_from='right': u = b - t.
    The reflected problem is the one solved by w(t) = -conj(y(u)).
    """

    def __init__(self, pot, a: float, b: float, flow_from: str = "left"):
        if b <= a:
            raise DomainError("empty flow interval")
        self.pot = pot
        self.a = a
        self.b = b
        self.L = b - a
        if flow_from == "left":
            self.origin, self.sgn = a, 1.0
        elif flow_from == "right":
            self.origin, self.sgn = b, -1.0
        else:
            raise DomainError("flow_from must be 'left' or 'right'")
        self.flow_from = flow_from

    def u_of_t(self, t):
        return self.origin + self.sgn * np.asarray(t, dtype=float)

    def t_of_u(self, u):
        return self.sgn * (np.asarray(u, dtype=float) - self.origin)

    def v(self, t):
        return self.pot.v(self.u_of_t(t))

    def dv(self, t):
        return self.sgn * np.asarray(self.pot.dv(self.u_of_t(t)))

    def d2v(self, t):
        return self.pot.d2v(self.u_of_t(t))


# ---------------------------------------------------------------------------
# alpha profiles
# ---------------------------------------------------------------------------

@dataclass
class AlphaProfile:
    """Profile in flow coordinates.

    kind='wkb'      : alpha = -V'/(4V) (flow potential derivatives)
    kind='constant' : alpha = value
    kind='pole'     : the log-pole profile with the pole at t = pole_t
                      (distance from flow start); requires pole distances < 1
    kind='custom'   : user callables alpha(t), dalpha(t)
    """

    kind: str
    value: float = 0.0
    pole_t: float = 0.0
    alpha_fn: object = None
    dalpha_fn: object = None

    @staticmethod
    def wkb() -> "AlphaProfile":
        return AlphaProfile(kind="wkb")

    @staticmethod
    def constant(value: float) -> "AlphaProfile":
        return AlphaProfile(kind="constant", value=value)

    @staticmethod
    def pole(pole_t: float) -> "AlphaProfile":
        return AlphaProfile(kind="pole", pole_t=pole_t)

    @staticmethod
    def custom(alpha_fn, dalpha_fn) -> "AlphaProfile":
        return AlphaProfile(kind="custom", alpha_fn=alpha_fn,
                            dalpha_fn=dalpha_fn)


def _pole_alpha(v):
    lg = np.log(v)
    return -0.5 / v - lg / (v * (1.0 + lg * lg))


def _pole_dalpha_dv(v):
    lg = np.log(v)
    one = 1.0 + lg * lg
    return 0.5 / (v * v) - (1.0 - lg - lg * lg - lg ** 3) / (v * v * one * one)


def _profile_terms(profile: AlphaProfile, fp: FlowPotential, t):
    """(alpha, alpha', log sigma) at flow points t (arrays)."""
    t = np.asarray(t, dtype=float)
    if profile.kind == "wkb":
        V = np.asarray(fp.v(t), dtype=float)
        Vp = np.asarray(fp.dv(t), dtype=float)
        Vpp = np.asarray(fp.d2v(t), dtype=float)
        alpha = -Vp / (4.0 * V)
        dalpha = -Vpp / (4.0 * V) + Vp * Vp / (4.0 * V * V)
        v0 = float(fp.v(0.0))
        logsig = 0.5 * (math.log(abs(v0)) - np.log(np.abs(V)))
        return alpha, dalpha, logsig
    if profile.kind == "constant":
        c = profile.value
        return (np.full_like(t, c), np.zeros_like(t), 2.0 * c * t)
    if profile.kind == "pole":
        v = profile.pole_t - t
        if np.any(v <= 0):
            raise DomainError("flow point beyond the pole")
        if profile.pole_t >= 1.0:
            raise DomainError("pole profile requires pole distance < 1")
        lg = np.log(v)
        v0 = profile.pole_t
        lg0 = math.log(v0)
        # alpha(t) is the lemma's profile in the pole distance v; the flow
        # derivative picks up dv/dt = -1
        alpha = _pole_alpha(v)
        dalpha = -_pole_dalpha_dv(v)
        logsig = (np.log(v * (1.0 + lg * lg))
                  - math.log(v0 * (1.0 + lg0 * lg0)))
        return alpha, dalpha, logsig
    if profile.kind == "custom":
        alpha = np.asarray([profile.alpha_fn(x) for x in np.atleast_1d(t)])
        dalpha = np.asarray([profile.dalpha_fn(x) for x in np.atleast_1d(t)])
        return alpha, dalpha, None       # sigma integrated numerically
    raise DomainError(f"unknown profile kind {profile.kind!r}")


# ---------------------------------------------------------------------------
# total variation of log|sigma^2 U|
# ---------------------------------------------------------------------------

class _TvCurve:
    """Exact-between-extrema cumulative total variation of a sampled smooth
    function, with extremum locations refined by golden-section search."""

    def __init__(self, g_fn, t_grid: np.ndarray, g_grid: np.ndarray):
        self.g_fn = g_fn
        ext_t = [t_grid[0]]
        ext_g = [g_grid[0]]
        d = np.diff(g_grid)
        for i in range(1, len(d)):
            if d[i - 1] == 0.0 or (d[i - 1] > 0) != (d[i] > 0):
                tt, gg = self._refine(t_grid[i - 1], t_grid[i + 1],
                                      maximize=d[i - 1] > 0)
                ext_t.append(tt)
                ext_g.append(gg)
        ext_t.append(t_grid[-1])
        ext_g.append(g_grid[-1])
        self.ext_t = np.asarray(ext_t)
        self.ext_g = np.asarray(ext_g)
        self.cum = np.concatenate([[0.0],
                                   np.cumsum(np.abs(np.diff(self.ext_g)))])

    def _refine(self, lo, hi, maximize):
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        s = 1.0 if maximize else -1.0
        c = hi - gr * (hi - lo)
        d = lo + gr * (hi - lo)
        fc, fd = s * self.g_fn(c), s * self.g_fn(d)
        for _ in range(60):
            if fc > fd:
                hi, d, fd = d, c, fc
                c = hi - gr * (hi - lo)
                fc = s * self.g_fn(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + gr * (hi - lo)
                fd = s * self.g_fn(d)
            if hi - lo < 1e-12 * (1.0 + abs(lo)):
                break
        tt = 0.5 * (lo + hi)
        return tt, self.g_fn(tt)

    @property
    def total(self) -> float:
        return float(self.cum[-1])

    def cum_at(self, t) -> np.ndarray:
        """Cumulative TV on [0, t); exact within each monotone segment."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.ext_t, t, side="right") - 1,
                      0, len(self.ext_t) - 2)
        g_here = np.asarray([self.g_fn(x) for x in t])
        return self.cum[idx] + np.abs(g_here - self.ext_g[idx])


# ---------------------------------------------------------------------------
# disk estimate
# ---------------------------------------------------------------------------

@dataclass
class DiskEstimate:
    interval: tuple[float, float]
    flow_from: str
    profile: AlphaProfile
    T0: float
    t_grid: np.ndarray
    u_grid: np.ndarray
    alpha: np.ndarray
    sigma: np.ndarray
    U: np.ndarray
    T: np.ndarray
    beta: np.ndarray
    R: np.ndarray
    center: np.ndarray          # complex, original orientation
    tv_total: float
    certified: bool = False
    _fp: FlowPotential = None
    _tv: _TvCurve = None
    _logsig_fn: object = None

    def evaluate(self, u) -> tuple[np.ndarray, np.ndarray]:
        """(center m(u), radius R(u)) in original orientation."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        t = self._fp.t_of_u(u)
        alpha, dalpha, logsig = _profile_terms(self.profile, self._fp, t)
        if logsig is None:
            logsig = self._logsig_fn(t)
        V = np.asarray(self._fp.v(t), dtype=float)
        U = V - alpha * alpha - dalpha
        T = self.T0 * np.exp(0.5 * self._tv.cum_at(t))
        squ = np.sqrt(np.abs(U))
        beta = 0.5 * squ * (T + 1.0 / T)
        R = 0.5 * squ * (T - 1.0 / T)
        sgn = 1.0 if self.flow_from == "left" else -1.0
        return sgn * alpha + 1j * beta, R

    @property
    def flow_start_u(self) -> float:
        return self.interval[0] if self.flow_from == "left" else self.interval[1]


def build_disk(profile: AlphaProfile, p, interval: tuple[float, float],
               T0: float, flow_from: str = "left",
               n_grid: int = 2001) -> DiskEstimate:
    """Populate a DiskEstimate; raises HypothesisError("U <= 0") with the
    first offending u if the profile fails the sign hypothesis.

    TV of log|sigma^2 U| uses the closed-form sigma of the named profiles
    and extremum localization by scan plus golden-section refinement;
    custom profiles integrate sigma numerically with a 10x refinement
    consistency check.
    """
    if T0 < 1.0:
        raise DomainError("T0 must be >= 1")
    a, b = interval
    fp = FlowPotential(as_potential(p), a, b, flow_from)
    # keep strictly inside the domain: the spheroidal potential is singular
    # at u=0 and pole profiles are singular at the pole end
    t_lo = 0.0
    t_hi = fp.L
    if profile.kind == "pole":
        t_hi = min(t_hi, profile.pole_t * (1.0 - 1e-9))
    t = np.linspace(t_lo, t_hi, n_grid)
    alpha, dalpha, logsig = _profile_terms(profile, fp, t)
    logsig_fn = None
    if logsig is None:
        # custom: cumulative trapezoid for log sigma, 10x refinement check
        tf = np.linspace(t_lo, t_hi, 10 * (n_grid - 1) + 1)
        af, _, _ = _profile_terms(profile, fp, tf)
        cumf = np.concatenate([[0.0], np.cumsum(
            (af[1:] + af[:-1]) * 0.5 * np.diff(tf))]) * 2.0
        cum = cumf[::10]
        coarse = np.concatenate([[0.0], np.cumsum(
            (alpha[1:] + alpha[:-1]) * 0.5 * np.diff(t))]) * 2.0
        if np.max(np.abs(coarse - cum)) > 1e-9 * (1.0 + np.max(np.abs(cum))):
            raise DomainError("custom profile sigma integral not converged; "
                              "supply a smoother alpha or denser grid")
        logsig = cum
        logsig_fn = lambda tt: np.interp(tt, t, cum)

    V = np.asarray(fp.v(t), dtype=float)
    U = V - alpha * alpha - dalpha
    imax = int(np.argmax(U))
    if U[imax] > 0.0:
        raise HypothesisError("U <= 0", where=float(fp.u_of_t(t[imax])),
                              detail=f"U={U[imax]:.3g}")

    # |U| is floored so a degenerate profile (alpha an exact real Riccati
    # solution, U = 0, R = 0) yields a constant g and zero total variation
    g_grid = logsig * 2.0 + np.log(np.maximum(np.abs(U), 1e-280))

    def g_fn(tt):
        aa, da, ls = _profile_terms(profile, fp, np.asarray([tt]))
        if ls is None:
            ls = logsig_fn(np.asarray([tt]))
        vv = float(fp.v(np.asarray([tt]))[0])
        uu = vv - aa[0] * aa[0] - da[0]
        return 2.0 * float(ls[0]) + math.log(max(abs(uu), 1e-280))

    tv = _TvCurve(g_fn, t, g_grid)
    T = T0 * np.exp(0.5 * tv.cum_at(t))
    squ = np.sqrt(np.abs(U))
    beta = 0.5 * squ * (T + 1.0 / T)
    R = 0.5 * squ * (T - 1.0 / T)
    sgn = 1.0 if flow_from == "left" else -1.0
    center = sgn * alpha + 1j * beta
    return DiskEstimate(interval=(a, b), flow_from=flow_from, profile=profile,
                        T0=T0, t_grid=t, u_grid=fp.u_of_t(t), alpha=alpha,
                        sigma=np.exp(logsig), U=U, T=T, beta=beta, R=R,
                        center=center, tv_total=tv.total, _fp=fp, _tv=tv,
                        _logsig_fn=logsig_fn)


@dataclass
class ContainmentReport:
    passed: bool
    certified: bool
    min_slack: float
    first_violation_u: float | None
    initial_slack: float
    n_checked: int


def certify_containment(disk: DiskEstimate, traj: Trajectory,
                        rel_tol: float = 0.0) -> ContainmentReport:
    """Check |y(u) - m(u)| <= R(u) at trajectory samples plus midpoints.

    Also evaluates the flow-start containment (the lemma's initial
    condition); ``certified`` requires it together with all sample checks
    (U <= 0 already held, or build_disk would have raised).
    """
    a, b = disk.interval
    uu, yy, _, _, _ = traj.with_midpoints()
    lo = np.searchsorted(uu, a * (1 + 1e-14))
    hi = np.searchsorted(uu, b * (1 - 1e-14), side="right")
    uu = uu[lo:hi]
    yy = yy[lo:hi]
    if len(uu) == 0:
        raise DomainError("trajectory does not cover the disk interval")
    center, R = disk.evaluate(uu)
    slack = R - np.abs(yy - center) + rel_tol * R
    i_min = int(np.argmin(slack))
    passed = bool(slack[i_min] >= 0.0)
    i0 = 0 if disk.flow_from == "left" else len(uu) - 1
    initial_slack = float(slack[i0])
    report = ContainmentReport(
        passed=passed, certified=passed and initial_slack >= 0.0,
        min_slack=float(slack[i_min]),
        first_violation_u=None if passed else float(uu[i_min]),
        initial_slack=initial_slack, n_checked=len(uu))
    disk.certified = report.certified
    return report


# ---------------------------------------------------------------------------
# named enclosures
# ---------------------------------------------------------------------------

def _check_monotone_flow(fp: FlowPotential, increasing: bool | None,
                         n: int = 513) -> None:
    t = np.linspace(0.0, fp.L, n)
    dv = np.asarray(fp.dv(t), dtype=float)
    if increasing is None:
        if dv[1:-1].max() > 0 and dv[1:-1].min() < 0:
            raise HypothesisError("monotonicity of V",
                                  where=float(fp.u_of_t(t[int(np.argmax(dv))])))
    elif increasing:
        if dv[1:-1].min() < 0:
            raise HypothesisError(
                "V monotone increasing along the flow",
                where=float(fp.u_of_t(t[1 + int(np.argmin(dv[1:-1]))])))


@dataclass
class WkbEnclosure:
    """Certified semiclassical bounds: |y - i sqrt|V| + V'/(4V)| <= dev(u)
    and Im y >= sqrt|V|/10, valid when K <= 1 with exact-WKB initial data."""

    interval: tuple[float, float]
    flow_from: str
    K: float
    T0: float
    _pot: object = None

    def wkb_value(self, u) -> np.ndarray:
        V = np.asarray(self._pot.v(u), dtype=float)
        Vp = np.asarray(self._pot.dv(u), dtype=float)
        return -Vp / (4.0 * V) + 1j * np.sqrt(-V)

    def deviation_bound(self, u) -> np.ndarray:
        V = np.asarray(self._pot.v(u), dtype=float)
        return 20.0 * np.sqrt(-V) * self.K

    def im_lower(self, u) -> np.ndarray:
        V = np.asarray(self._pot.v(u), dtype=float)
        return np.sqrt(-V) / 10.0

    def verify(self, traj: Trajectory) -> dict:
        a, b = self.interval
        uu, yy, _, _, _ = traj.with_midpoints()
        sel = (uu >= a) & (uu <= b)
        uu, yy = uu[sel], yy[sel]
        dev = np.abs(yy - self.wkb_value(uu))
        bound = self.deviation_bound(uu)
        im_ok = yy.imag >= self.im_lower(uu)
        dev_ok = dev <= bound
        return {"passed": bool(np.all(im_ok) and np.all(dev_ok)),
                "deviation_ok": bool(np.all(dev_ok)),
                "im_lower_ok": bool(np.all(im_ok)),
                "max_dev_ratio": float(np.max(dev / bound)),
                "min_im_ratio": float(np.min(yy.imag / self.im_lower(uu))),
                "n_checked": int(len(uu))}


def wkb_enclosure(interval: tuple[float, float], p,
                  flow_from: str = "left") -> WkbEnclosure:
    """Theorem-grade WKB bounds on a negative, monotone interval with K<=1.

    Raises HypothesisError naming the failed condition (negativity,
    monotonicity, or K <= 1).
    """
    pot = as_potential(p)
    a, b = interval
    fp = FlowPotential(pot, a, b, flow_from)
    _check_monotone_flow(fp, increasing=True)
    K = k_functional(pot, a, b)      # also checks V < 0 and monotonicity
    if K > 1.0:
        raise HypothesisError("K <= 1", detail=f"K={K:.4g}")
    return WkbEnclosure(interval=(a, b), flow_from=flow_from, K=K,
                        T0=1.0 + K, _pot=pot)


@dataclass
class QuantumEnclosure:
    """Constant-profile bounds |y| <= c2 sqrt(sup|V|) and
    Im y >= |V0|/(c2 sqrt(sup|V|)) on a negative monotone interval."""

    interval: tuple[float, float]
    flow_from: str
    c1: float
    kappa: float
    c2: float
    v0: float          # V at the flow start
    sup_abs_v: float
    T0: float
    _pot: object = None

    def abs_bound(self) -> float:
        return self.c2 * math.sqrt(self.sup_abs_v)

    def im_lower(self) -> float:
        return abs(self.v0) / (self.c2 * math.sqrt(self.sup_abs_v))

    def verify(self, traj: Trajectory) -> dict:
        a, b = self.interval
        # initial-data hypothesis at the raw sample nearest the flow start,
        # against |V| at that same abscissa
        u0 = a if self.flow_from == "left" else b
        i0 = int(np.argmin(np.abs(traj.u - u0)))
        y0 = complex(traj.y[i0])
        sq0 = math.sqrt(abs(float(self._pot.v(float(traj.u[i0])))))
        init_ok = (abs(y0) <= self.c1 * sq0 * (1 + 1e-9)
                   and y0.imag >= sq0 / self.c1 * (1 - 1e-9))
        uu, yy, _, _, _ = traj.with_midpoints()
        sel = (uu >= a) & (uu <= b)
        yy = yy[sel]
        abs_ok = bool(np.all(np.abs(yy) <= self.abs_bound()))
        im_ok = bool(np.all(yy.imag >= self.im_lower()))
        return {"passed": init_ok and abs_ok and im_ok,
                "initial_ok": init_ok, "abs_ok": abs_ok, "im_ok": im_ok,
                "max_abs_ratio": float(np.max(np.abs(yy)) / self.abs_bound()),
                "min_im_ratio": float(np.min(yy.imag) / self.im_lower()),
                "n_checked": int(len(yy))}


def quantum_enclosure(interval: tuple[float, float], p, c1: float,
                      kappa: float, flow_from: str = "left") -> QuantumEnclosure:
    """Theorem-grade constant-profile bounds with
    c2 = 8 c1 (1+c1)^2 e^(2 kappa) + 1 and T0 = 2 c1 (1+c1)^2."""
    if c1 < 1.0:
        raise DomainError("c1 must be >= 1")
    pot = as_potential(p)
    a, b = interval
    fp = FlowPotential(pot, a, b, flow_from)
    t = np.linspace(0.0, fp.L, 1025)
    V = np.asarray(fp.v(t), dtype=float)
    # the window typically ends exactly at a sign change of V; allow the
    # root-finding residual there
    tol = 1e-9 * (1.0 + float(np.max(np.abs(V))))
    if V.max() > tol:
        raise HypothesisError("V < 0", where=float(fp.u_of_t(t[int(np.argmax(V))])))
    _check_monotone_flow(fp, increasing=None)
    v0 = float(V[0])
    if math.sqrt(-v0) * fp.L > kappa * (1 + 1e-12):
        raise HypothesisError("sqrt|V0| (b-a) <= kappa",
                              detail=f"{math.sqrt(-v0) * fp.L:.4g} > {kappa:.4g}")
    c2 = 8.0 * c1 * (1.0 + c1) ** 2 * math.exp(2.0 * kappa) + 1.0
    return QuantumEnclosure(interval=(a, b), flow_from=flow_from, c1=c1,
                            kappa=kappa, c2=c2, v0=v0,
                            sup_abs_v=float(np.max(np.abs(V))),
                            T0=2.0 * c1 * (1.0 + c1) ** 2, _pot=pot)


@dataclass
class PoleEnclosure:
    """Log-pole bounds with the constant 64 C^3 near the 1/(4 dist^2) pole.

    For pole_at='left' the pole sits at u=0, data enter at u = b = dist_max;
    bounds hold on (0, b].  All three bounds carry (1 + log^2 dist_max)
    factors exactly as stated.
    """

    interval: tuple[float, float]
    pole_at: str
    C: float
    dist_max: float
    B_sup: float
    B_cond: float
    T0: float

    def _dist(self, u):
        a, b = self.interval
        u = np.asarray(u, dtype=float)
        return u if self.pole_at == "left" else (b - u) + 0.0

    def abs_bound(self, u) -> np.ndarray:
        return 64.0 * self.C ** 3 / self._dist(u)

    def im_upper(self, u) -> np.ndarray:
        d = self._dist(u)
        f = 1.0 + math.log(self.dist_max) ** 2
        return 64.0 * self.C ** 3 * f / (d * np.log(d) ** 2)

    def im_lower(self, u) -> np.ndarray:
        d = self._dist(u)
        f = 1.0 + math.log(self.dist_max) ** 2
        return 1.0 / (64.0 * self.C ** 3 * f) / (d * np.log(d) ** 2)

    def phase_tail_bound(self, x: float) -> float:
        """Upper bound for the integral of Im y over pole distances < x."""
        if not (0.0 < x < 1.0):
            raise DomainError("tail bound needs 0 < x < 1")
        f = 1.0 + math.log(self.dist_max) ** 2
        return 64.0 * self.C ** 3 * f * (-1.0 / math.log(x))

    def verify(self, traj: Trajectory) -> dict:
        a, b = self.interval
        uu, yy, _, _, _ = traj.with_midpoints()
        sel = (uu >= a) & (uu <= b)
        uu, yy = uu[sel], yy[sel]
        abs_ok = bool(np.all(np.abs(yy) <= self.abs_bound(uu)))
        hi_ok = bool(np.all(yy.imag <= self.im_upper(uu)))
        lo_ok = bool(np.all(yy.imag >= self.im_lower(uu)))
        return {"passed": abs_ok and hi_ok and lo_ok, "abs_ok": abs_ok,
                "im_upper_ok": hi_ok, "im_lower_ok": lo_ok,
                "n_checked": int(len(uu))}


def pole_enclosure(interval: tuple[float, float], p, C: float,
                   pole_at: str = "left") -> PoleEnclosure:
    """Bounds near the quadratic pole (V = -1/(4 d^2) + B with d the pole
    distance), checking B's monotonicity and the smallness condition
    dist_max^2 (1+log^2 dist_max)^2 sup|B| <= 1/8 plus C >= 1 and the
    initial-data inequalities at the far end.
    """
    if C < 1.0:
        raise DomainError("C must be >= 1")
    pot = as_potential(p)
    a, b = interval
    if pole_at == "left":
        dist_max = b
        grid = np.geomspace(max(a, 1e-12), b, 2001)
        d = grid
    elif pole_at == "right":
        dist_max = b - a
        grid = b - np.geomspace(1e-12 * (b - a), b - a, 2001)[::-1]
        d = b - grid
    else:
        raise DomainError("pole_at must be 'left' or 'right'")
    if dist_max >= 1.0:
        raise DomainError("pole enclosure requires pole distance < 1")
    if pole_at == "left" and hasattr(pot, "b_regular"):
        # cancellation-free route for the spheroidal singularity at u=0
        B = np.asarray(pot.b_regular(grid), dtype=float)
    else:
        B = np.asarray(pot.v(grid), dtype=float) + 0.25 / (d * d)
    dB = np.diff(B)
    tol = 1e-9 * (1.0 + np.max(np.abs(B)))
    if dB.max() > tol and dB.min() < -tol:
        raise HypothesisError("B monotone",
                              where=float(grid[int(np.argmax(dB))]))
    b_sup = float(np.max(np.abs(B)))
    b_cond = dist_max ** 2 * (1.0 + math.log(dist_max) ** 2) ** 2 * b_sup
    if b_cond > 0.125:
        raise HypothesisError("dist^2 (1+log^2 dist)^2 |B| <= 1/8",
                              detail=f"{b_cond:.4g} > 0.125")
    T0 = 2.0 * C * (1.0 + C) ** 2 * (1.0 + math.log(dist_max) ** 2)
    return PoleEnclosure(interval=(a, b), pole_at=pole_at, C=C,
                         dist_max=dist_max, B_sup=b_sup, B_cond=b_cond, T0=T0)


# ---------------------------------------------------------------------------
# convexity estimates (V >= 0)
# ---------------------------------------------------------------------------

@dataclass
class ConvexityReport:
    bound_log: float        # log of the rho lower bound
    min_slack_log: float    # min over samples of log rho - bound_log
    sup_ok: bool            # sup rho <= rho(u) 2|y0|/Im y0 along the way
    passed: bool

    @property
    def bound(self) -> float:
        return math.exp(self.bound_log) if self.bound_log < 700 else math.inf

    def __float__(self) -> float:
        return self.bound


def convexity_lower_bound(traj: Trajectory, interval: tuple[float, float],
                          p, tol: float = 1e-9) -> ConvexityReport:
    """rho >= rho_0 Im y_0/|y_0| on a positive monotone-increasing segment,
    plus the corollary sup rho <= rho(u) 2 |y_0| / Im y_0.

    All checks run in log amplitude, so exponentially growing rho is safe.
    """
    pot = as_potential(p)
    a, b = interval
    fp = FlowPotential(pot, a, b, "left")
    t = np.linspace(0.0, fp.L, 513)
    V = np.asarray(fp.v(t), dtype=float)
    vtol = 1e-9 * (1.0 + float(np.max(np.abs(V))))
    if V.min() < -vtol:
        raise HypothesisError("V >= 0", where=float(fp.u_of_t(t[int(np.argmin(V))])))
    _check_monotone_flow(fp, increasing=True)

    sel = (traj.u >= a) & (traj.u <= b)
    if not np.any(sel):
        raise DomainError("trajectory does not cover the interval")
    lr = traj.logrho[sel]
    yy = traj.y[sel]
    y0 = yy[0]
    lr0 = float(lr[0])
    bound_log = lr0 + math.log(y0.imag / abs(y0))
    slack = lr - bound_log
    run_max = np.maximum.accumulate(lr)
    sup_log = math.log(2.0 * abs(y0) / y0.imag)
    sup_ok = bool(np.all(run_max <= lr + sup_log + tol))
    return ConvexityReport(bound_log=bound_log,
                           min_slack_log=float(np.min(slack)),
                           sup_ok=sup_ok,
                           passed=bool(np.min(slack) >= -tol) and sup_ok)


@dataclass
class ConvexityIntegralReport:
    lhs_over_sup: float     # integral of rho^2 divided by sup rho^2
    L: float                # the rhs coefficient
    lhs_log: float          # log of the integral of rho^2
    rhs_log: float          # log of L sup rho^2
    passed: bool


def convexity_integral_bound(traj: Trajectory, interval: tuple[float, float],
                             p, tol: float = 1e-9) -> ConvexityIntegralReport:
    """integral rho^2 <= L sup rho^2 with L from the l-functional.

    Both sides are scaled by sup rho^2 internally (rho grows exponentially
    in the classically forbidden region); the log values of the unscaled
    sides are reported.
    """
    pot = as_potential(p)
    a, b = interval
    L = l_functional(pot, a, b) if b > a else 0.0
    sel = (traj.u >= a) & (traj.u <= b)
    uu = traj.u[sel]
    lr = traj.logrho[sel]
    if len(uu) < 2:
        # zero-length (or sub-sample) interval: the integral vanishes
        if b - a > 1e-6 * (1.0 + abs(a)):
            raise DomainError("trajectory does not cover the interval")
        return ConvexityIntegralReport(0.0, L, -math.inf, math.inf, True)
    m = float(np.max(lr))
    lhs_rel = float(np.trapezoid(np.exp(2.0 * (lr - m)), uu))
    return ConvexityIntegralReport(
        lhs_over_sup=lhs_rel, L=L,
        lhs_log=math.log(max(lhs_rel, 1e-300)) + 2.0 * m,
        rhs_log=math.log(L) + 2.0 * m,
        passed=bool(lhs_rel <= L + tol))
