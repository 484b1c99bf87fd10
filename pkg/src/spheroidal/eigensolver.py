"""Eigenvalues by monotone phase shooting on (0, pi/2].

The accumulated phase phi = integral Im y, measured from the u -> 0 limit
arg z = -pi/2 of the boundary-loaded complex solution, reaches

    (m+1) pi                                   odd parity (Dirichlet at pi/2)
    m pi + pi/2 + arctan(Re y / Im y)(pi/2)    even parity (Neumann at pi/2)

exactly at the eigenvalue with m interior nodes.  The matrix route in
:mod:`spheroidal.oracle` provides brackets; a safeguarded Newton iteration
(derivative = integral of Im y_lambda plus the boundary arctan term)
polishes inside the bracket.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .errors import BracketError, NonMonotonePhaseError, SeriesTruncationError
from .potential import HALF_PI, ProblemParams
from .riccati import (IntegratorOptions, Trajectory, default_u_eps, integrate,
                      singular_series_init, wall_switch_init)

log = logging.getLogger("spheroidal.eigensolver")

PARITIES = ("even", "odd")


@dataclass
class EigenvalueRecord:
    m: int
    parity: str
    k: int
    omega: float
    lam: float
    phaseResidual: float
    bracket: tuple[float, float]
    nodeCountVerified: bool
    gapToNext: float | None = None


@dataclass
class ShootResult:
    """One full sweep u_eps -> pi/2 at fixed lambda."""

    phi_total: float          # phase shift over (0, pi/2]
    y_end: complex
    ylam_end: complex
    dphi_dlam: float          # derivative of phi_total in lambda
    u_eps: float
    phi0: float               # arg z(u_eps), in (-pi/2, 0]
    traj: Trajectory | None = None


def _shoot(lam: float, p: ProblemParams, record: bool = False,
           opts: IntegratorOptions | None = None) -> ShootResult:
    prm = replace_lambda(p, lam)
    init = singular_series_init if prm.normalized().k == 0 else wall_switch_init
    u_eps = default_u_eps(prm)
    for _ in range(4):
        try:
            si = init(prm, u_eps)
            break
        except SeriesTruncationError:
            u_eps *= 0.25
    else:
        si = init(prm, u_eps)  # raise with the final message
    o = opts or IntegratorOptions()
    if si.state.u >= HALF_PI * (1.0 - 1e-12):
        # potential positive all the way: nothing left to integrate
        return ShootResult(phi_total=si.phi0 + HALF_PI, y_end=si.state.y,
                           ylam_end=si.state.yLambda,
                           dphi_dlam=si.dphi0_dlam, u_eps=si.u_eps,
                           phi0=si.phi0, traj=None)
    o = IntegratorOptions(rtol=o.rtol, atol=o.atol, max_steps=o.max_steps,
                          ceiling=o.ceiling, record=record,
                          max_record=o.max_record)
    traj = integrate(si.state, HALF_PI, prm, o)
    end = traj.end_state()
    phi_total = (si.phi0 + HALF_PI) + (end.phase - si.state.phase)
    return ShootResult(phi_total=phi_total, y_end=end.y, ylam_end=end.yLambda,
                       dphi_dlam=si.dphi0_dlam + traj.imylam_trap,
                       u_eps=si.u_eps, phi0=si.phi0,
                       traj=traj if record else None)


def replace_lambda(p: ProblemParams, lam: float) -> ProblemParams:
    return ProblemParams(p.k, p.omega, lam)


def phase_shift(lam: float, p: ProblemParams, parity: str = "even") -> float:
    """Phase shift phi |_0^(pi/2) at spectral parameter lam.

    The shift itself does not depend on parity (the trajectory is the same);
    parity selects which boundary target the caller compares against.
    """
    if parity not in PARITIES:
        raise ValueError(f"parity must be one of {PARITIES}")
    return _shoot(lam, p).phi_total


def phase_target(m: int, parity: str, y_end: complex) -> float:
    """Boundary value phi must reach for the m-node branch."""
    if parity == "odd":
        return (m + 1) * math.pi
    return m * math.pi + HALF_PI + math.atan2(y_end.real, y_end.imag)


def _defect(sr: ShootResult, m: int, parity: str) -> tuple[float, float]:
    """(D, dD/dlambda) with D = phi_total - target."""
    d = sr.phi_total - phase_target(m, parity, sr.y_end)
    dd = sr.dphi_dlam
    if parity == "even":
        y, yl = sr.y_end, sr.ylam_end
        denom = y.real * y.real + y.imag * y.imag
        if denom > 0.0:
            dd -= (y.imag * yl.real - y.real * yl.imag) / denom
    return d, dd


def find_eigenvalue(m: int, parity: str, p: ProblemParams,
                    opts: IntegratorOptions | None = None,
                    lam_guess: float | None = None,
                    margin: float | None = None,
                    rel_tol: float = 1e-9,
                    verify_nodes: bool = True) -> EigenvalueRecord:
    """Locate the m-node eigenvalue of the given parity for real omega.

    A guess close to the root (matrix-oracle estimate or sweep predictor)
    is polished by Newton directly; if that wanders outside guess +- margin
    the solver falls back to bracketing (expanding geometrically up to 8
    times) with safeguarded Newton-bisection.  The returned residual is the
    lambda-uncertainty |D|/D' and satisfies rel_tol*(1+|lam|).
    """
    if m < 0:
        raise ValueError("node count m must be >= 0")
    p = p.normalized()
    k, om, _ = ProblemParams(p.k, p.omega, 0.0).real_parts()
    if lam_guess is None:
        lam_guess = oracle.eigenvalue_estimate(k, om, parity, m)
    if margin is None:
        margin = max(1.0, 0.01 * abs(lam_guess))

    cache: dict[float, ShootResult] = {}

    def shoot(lam: float) -> ShootResult:
        if lam not in cache:
            cache[lam] = _shoot(lam, p, opts=opts)
        return cache[lam]

    def D(lam: float) -> tuple[float, float]:
        return _defect(shoot(lam), m, parity)

    # Newton-first fast path
    lam = lam_guess
    converged = False
    bracket = None
    for _ in range(12):
        d, dd = D(lam)
        if dd <= 0.0:
            break
        step = -d / dd
        if abs(step) <= 0.5 * rel_tol * (1.0 + abs(lam)):
            converged = True
            w = max(abs(step), 1e-14 * (1.0 + abs(lam)))
            bracket = (lam - w, lam + w)
            break
        nxt = lam + step
        if abs(nxt - lam_guess) > margin:
            break
        lam = nxt

    if not converged:
        lo, hi = lam_guess - margin, lam_guess + margin
        for _ in range(8):
            dlo, _ = D(lo)
            dhi, _ = D(hi)
            if dlo < 0.0 < dhi:
                break
            if dlo > 0.0 and dhi > 0.0:
                lo -= 2.0 * (hi - lo)
            elif dlo < 0.0 and dhi < 0.0:
                hi += 2.0 * (hi - lo)
            else:
                raise NonMonotonePhaseError(
                    f"phase defect decreasing on [{lo}, {hi}]: D={dlo}, {dhi}")
        else:
            raise BracketError(f"no bracket for k={k}, omega={om}, "
                               f"parity={parity}, m={m} near "
                               f"lambda={lam_guess}")

        lam = 0.5 * (lo + hi)
        resid = math.inf
        for _ in range(120):
            d, dd = D(lam)
            if d < 0.0:
                lo = lam
            else:
                hi = lam
            if dd > 0.0:
                step = -d / dd
                resid = abs(step)
                nxt = lam + step
            else:
                resid = hi - lo
                nxt = math.nan
            if resid <= 0.5 * rel_tol * (1.0 + abs(lam)):
                break
            if not (lo < nxt < hi):
                nxt = 0.5 * (lo + hi)
            if nxt == lam:
                break
            lam = nxt
        bracket = (lo, hi)
    d, dd = D(lam)

    rec = EigenvalueRecord(m=m, parity=parity, k=k, omega=om, lam=lam,
                           phaseResidual=abs(d), bracket=bracket,
                           nodeCountVerified=False)
    if verify_nodes:
        sr = shoot(lam)
        n = _node_count_from_phase(sr.phi0, sr.phi_total - HALF_PI, parity)
        rec.nodeCountVerified = (n == m)
        if not rec.nodeCountVerified:
            log.warning("node-count mismatch: expected %d, counted %d "
                        "(k=%d, omega=%g, parity=%s)", m, n, k, om, parity)
    return rec


def _node_count_from_phase(phi0: float, phi_end_abs: float, parity: str) -> int:
    """Interior zeros = crossings of the grid pi/2 + j*pi by the monotone
    absolute phase.

    Both parities can arrive exactly on the grid: odd through the endpoint
    zero at pi/2, even in the deep-barrier regime where the boundary arctan
    saturates at pi/2 (the would-be crossing belongs to the mirror half of
    the domain).  A small end tolerance excludes the endpoint crossing.
    """
    end = phi_end_abs - 1e-6
    return int(math.floor((end - HALF_PI) / math.pi)
               - math.floor((phi0 - HALF_PI) / math.pi))


def count_nodes(record: EigenvalueRecord) -> int:
    """Count interior zeros on (0, pi/2) by re-shooting at record.lam.

    Zeros of the reconstructed Y = rho cos(phi_abs) are the crossings of the
    grid pi/2 + j*pi by the monotone absolute phase, counted exactly from
    sample phases by the floor formula (robust to multiple crossings per
    integrator step).
    """
    p = ProblemParams(record.k, record.omega, record.lam)
    sr = _shoot(record.lam, p)
    return _node_count_from_phase(sr.phi0, sr.phi_total - HALF_PI,
                                  record.parity)


def reconstruct_eigenfunction(record: EigenvalueRecord, sample_count: int = 512):
    """Sampled eigenfunction: returns (u, Y, Theta) with Y = rho cos(phi_abs)
    normalized to unit L2 norm on (0, pi) (so the half-interval integral of
    Y^2 is 1/2) and Theta = Y / sqrt(sin u).

    Where the reconstruction is ill-conditioned (rho huge while cos(phi)
    cancels below phase resolution, deep in a classically forbidden region)
    the amplitude is below double precision and Y is set to 0.
    """
    p = ProblemParams(record.k, record.omega, record.lam)
    sr = _shoot(record.lam, p, record=True)
    traj = sr.traj
    uu, _, phi, logrho, _ = traj.with_midpoints()
    phi_abs = sr.phi0 + (phi - traj.phi[0 if traj.flow_from == "left" else -1])
    mlr = float(np.max(logrho))
    amp = np.exp(logrho - mlr)
    y_raw = amp * np.cos(phi_abs)
    # zero out samples whose value is below the phase resolution of cos
    y_raw[np.abs(y_raw) < amp * 1e-13] = 0.0
    norm2 = np.trapezoid(y_raw * y_raw, uu)
    y = y_raw / math.sqrt(2.0 * norm2)
    theta = y / np.sqrt(np.sin(uu))
    if len(uu) > sample_count:
        stride = max(1, len(uu) // sample_count)
        sel = np.arange(0, len(uu), stride)
        if sel[-1] != len(uu) - 1:
            sel = np.append(sel, len(uu) - 1)
        return uu[sel], y[sel], theta[sel]
    return uu, y, theta


# ---------------------------------------------------------------------------
# gap scan
# ---------------------------------------------------------------------------

@dataclass
class BranchSweep:
    k: int
    parity: str
    m: int
    omegas: np.ndarray
    lams: np.ndarray
    residuals: np.ndarray
    nodes_ok: np.ndarray       # bool per point
    lipschitz_ok: np.ndarray   # bool per adjacent pair (len-1)
    slope: float | None = None
    slope_predicted: int | None = None


@dataclass
class GapScanResult:
    k_values: tuple[int, ...]
    omegas: np.ndarray
    m_max: int
    gamma: float
    sweeps: dict[tuple[int, str, int], BranchSweep]
    min_gaps: dict[tuple[int, str, int], float]   # min over grid of lam_(m+1)-lam_m
    empirical_N: dict[tuple[int, str], int]
    lipschitz_violations: list[tuple[int, str, int, float]]

    def gap_table_rows(self):
        for (k, parity, m), g in sorted(self.min_gaps.items()):
            sw = self.sweeps[(k, parity, m)]
            yield {"k": k, "parity": parity, "m": m, "min_gap": g,
                   "slope": sw.slope, "slope_predicted": sw.slope_predicted,
                   "lipschitz_ok": bool(np.all(sw.lipschitz_ok)),
                   "nodes_ok": bool(np.all(sw.nodes_ok))}


def sweep_branch(k: int, parity: str, m: int, omegas: np.ndarray,
                 opts: IntegratorOptions | None = None,
                 rel_tol: float = 1e-9) -> BranchSweep:
    """Solve one (k, parity, m) branch over an ascending omega grid.

    Warm-starts each point from a linear predictor; node counts come for
    free from the converged phase and are checked at every point.
    """
    omegas = np.asarray(omegas, dtype=float)
    lams = np.empty_like(omegas)
    resid = np.empty_like(omegas)
    nodes_ok = np.zeros(len(omegas), dtype=bool)
    guess = None
    for i, om in enumerate(omegas):
        p = ProblemParams(k, om, 0.0)
        if i >= 2:
            slope = (lams[i - 1] - lams[i - 2]) / (omegas[i - 1] - omegas[i - 2])
            guess = lams[i - 1] + slope * (om - omegas[i - 1])
            margin = max(0.25, 0.001 * abs(guess))
        elif i == 1:
            guess = lams[0]
            margin = 1.0 + (om - omegas[0]) * (4 * m + 6)
        else:
            guess, margin = None, None
        rec = find_eigenvalue(m, parity, p, opts=opts, lam_guess=guess,
                              margin=margin, rel_tol=rel_tol,
                              verify_nodes=True)
        lams[i] = rec.lam
        resid[i] = rec.phaseResidual
        nodes_ok[i] = rec.nodeCountVerified

    lip_ok = np.ones(max(len(omegas) - 1, 0), dtype=bool)
    for i in range(len(omegas) - 1):
        bound = (omegas[i + 1] - omegas[i]) * (omegas[i + 1] + omegas[i]
                                               + 2 * abs(k))
        lip_ok[i] = abs(lams[i + 1] - lams[i]) <= bound + 1e-7 * (1 + abs(lams[i]))
    return BranchSweep(k=k, parity=parity, m=m, omegas=omegas, lams=lams,
                       residuals=resid, nodes_ok=nodes_ok, lipschitz_ok=lip_ok)


def _fit_slope(sw: BranchSweep, fit_min: float) -> None:
    mask = sw.omegas >= fit_min
    if int(mask.sum()) >= 2:
        coef = np.polyfit(sw.omegas[mask], sw.lams[mask], 1)
        sw.slope = float(coef[0])
    sw.slope_predicted = 4 * sw.m + 2


def gap_scan(k_values, omega_grid, m_max: int, parities=PARITIES,
             gamma: float = 1.0, fit_min: float | None = None,
             opts: IntegratorOptions | None = None, jobs: int = 1,
             rel_tol: float = 1e-9) -> GapScanResult:
    """Branch sweeps, per-m minimum same-parity gaps, Lipschitz consistency
    flags and large-omega slope fits over a finite grid.

    The uniform-in-omega gap statement is replaced by its grid version plus
    the per-interval Lipschitz bound |dlam| <= |dOmega| (Omega+Omega'+2|k|),
    which any true violation between grid points would have to break first.
    """
    omegas = np.asarray(sorted(omega_grid), dtype=float)
    if len(omegas) == 0:
        raise ValueError("empty omega grid")
    if fit_min is None:
        fit_min = max(100.0, 0.5 * float(omegas[-1]))
    tasks = [(int(k), parity, m) for k in k_values for parity in parities
             for m in range(m_max + 1)]

    sweeps: dict[tuple[int, str, int], BranchSweep] = {}
    if jobs > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = {ex.submit(sweep_branch, k, parity, m, omegas, opts,
                              rel_tol): (k, parity, m)
                    for (k, parity, m) in tasks}
            for fut in cf.as_completed(futs):
                sweeps[futs[fut]] = fut.result()
    else:
        for (k, parity, m) in tasks:
            sweeps[(k, parity, m)] = sweep_branch(k, parity, m, omegas, opts,
                                                  rel_tol)

    min_gaps: dict[tuple[int, str, int], float] = {}
    lip_viol: list[tuple[int, str, int, float]] = []
    for (k, parity, m) in tasks:
        sw = sweeps[(k, parity, m)]
        _fit_slope(sw, fit_min)
        for i, ok in enumerate(sw.lipschitz_ok):
            if not ok:
                lip_viol.append((k, parity, m, float(sw.omegas[i])))
        if (k, parity, m + 1) in sweeps:
            gaps = sweeps[(k, parity, m + 1)].lams - sw.lams
            min_gaps[(k, parity, m)] = float(np.min(gaps))

    empirical_N: dict[tuple[int, str], int] = {}
    for k in k_values:
        for parity in parities:
            n = 0
            for m in range(m_max):
                if min_gaps.get((int(k), parity, m), math.inf) <= gamma:
                    n = m + 1
            empirical_N[(int(k), parity)] = n
    return GapScanResult(k_values=tuple(int(k) for k in k_values),
                         omegas=omegas, m_max=m_max, gamma=gamma,
                         sweeps=sweeps, min_gaps=min_gaps,
                         empirical_N=empirical_N,
                         lipschitz_violations=lip_viol)
