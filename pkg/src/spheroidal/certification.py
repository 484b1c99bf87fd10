"""Per-region certification of shooting trajectories.

Runs the full pipeline behind the ``certify`` command: partition (0, pi/2]
into the analysis regions, integrate the reference trajectory with WKB data
at u0 in both directions, build the matching enclosure in every region
(pole near u=0, constant-profile in the quantum windows, WKB on the
semiclassical window, convexity estimates where V >= 0), certify disk
containment, and aggregate the lambda-sensitivity integral that controls
eigenvalue gaps.

Regions whose lemma hypotheses fail at runtime are reported as
"hypothesis-unmet" (exit class 2 in the CLI), never silently skipped.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePartitionError, HypothesisError
from .invariant_disk import (AlphaProfile, FlowPotential, build_disk,
                             certify_containment, convexity_integral_bound,
                             convexity_lower_bound, pole_enclosure,
                             quantum_enclosure, wkb_enclosure)
from .potential import (HALF_PI, LAMBDA_BIG_DEFAULT, OMEGA0_DEFAULT,
                        ProblemParams, RegionPartition, SpheroidalPotential,
                        compute_K, compute_L, partition_regions)
from .riccati import (IntegratorOptions, Trajectory, init_wkb, integrate,
                      sensitivity_integral)

log = logging.getLogger("spheroidal.certification")

KAPPA_LADDER = (4.0, 3.0, 2.5, 2.0, 1.5, 1.2, 1.0, 0.9, 0.8, 0.7, 0.6, 0.5)


@dataclass
class RegionReport:
    name: str
    interval: tuple[float, float]
    method: str
    passed: bool
    hypothesis_ok: bool
    values: dict = field(default_factory=dict)
    message: str = ""


@dataclass
class CertificationReport:
    k: int
    omega: float
    lam: float
    kappa: float
    lambda_big: float
    omega0: float
    delta: float
    partition: RegionPartition | None
    regions: list[RegionReport]
    sensitivity: dict
    passed: bool
    hypothesis_failures: list[str]

    def lines(self):
        yield (f"certify k={self.k} omega={self.omega:.6g} "
               f"lambda={self.lam:.10g} kappa={self.kappa} "
               f"Lambda={self.lambda_big} Omega0={self.omega0}")
        for r in self.regions:
            status = "PASS" if r.passed else ("HYP-FAIL" if not r.hypothesis_ok
                                              else "FAIL")
            vals = " ".join(f"{k}={v:.6g}" if isinstance(v, float)
                            else f"{k}={v}" for k, v in r.values.items())
            yield (f"  [{status}] {r.name:4s} [{r.interval[0]:.6g}, "
                   f"{r.interval[1]:.6g}] {r.method}: {vals} {r.message}")
        s = self.sensitivity
        yield (f"  sensitivity: int Im y_lam = {s['integral']:.6g} "
               f"(epsilon={s['epsilon']:.3g}, ok={s['below_epsilon']}); "
               f"gap lower bound {s['gap_lower_bound']:.6g}")
        yield f"  overall: {'PASS' if self.passed else 'FAIL'}"


def _auto_partition(p: ProblemParams, kappa, lambda_big, omega0):
    """Fixed kappa if given; otherwise walk the ladder til non-degenerate."""
    if kappa is not None:
        return partition_regions(p, kappa, lambda_big, omega0), kappa
    last = None
    for kap in KAPPA_LADDER:
        try:
            return partition_regions(p, kap, lambda_big, omega0), kap
        except DegeneratePartitionError as exc:
            last = exc
    raise DegeneratePartitionError(
        f"no kappa in {KAPPA_LADDER} yields a valid partition: {last}")


def _wkb_t0(pot, a: float, b: float, flow_from: str) -> float:
    """Smallest T0 putting the exact-WKB datum on the disk boundary, with a
    small safety factor."""
    fp = FlowPotential(pot, a, b, flow_from)
    V0 = float(fp.v(0.0))
    Vp0 = float(fp.dv(0.0))
    Vpp0 = float(fp.d2v(0.0))
    alpha0 = -Vp0 / (4.0 * V0)
    dalpha0 = -Vpp0 / (4.0 * V0) + Vp0 * Vp0 / (4.0 * V0 * V0)
    U0 = V0 - alpha0 * alpha0 - dalpha0
    if U0 >= 0.0:
        raise HypothesisError("U <= 0", where=a if flow_from == "left" else b)
    r = math.sqrt(abs(V0) / abs(U0))
    return max(r, 1.0 / r) * (1.0 + 1e-9)


def _trajectory_c1(traj: Trajectory, u: float, pot) -> float:
    """Constant c1 >= 1 matching the trajectory data at u."""
    i = int(np.argmin(np.abs(traj.u - u)))
    y = complex(traj.y[i])
    sq = math.sqrt(abs(float(pot.v(traj.u[i]))))
    return max(abs(y) / sq, sq / y.imag, 1.0) * (1.0 + 1e-9)


def certify_branch(p: ProblemParams, kappa: float | None = None,
                   lambda_big: float = LAMBDA_BIG_DEFAULT,
                   omega0: float = OMEGA0_DEFAULT, delta: float = 1.0,
                   epsilon: float = 1.0,
                   opts: IntegratorOptions | None = None) -> CertificationReport:
    """Certify the trajectory with WKB data at u0 for one (k, omega, lambda).

    ``lambda`` should sit on (or near) an eigenvalue branch for the gap
    interpretation of the sensitivity integral, but every enclosure holds
    for arbitrary real lambda in the admissible regime.
    """
    k, om, lam = p.normalized().real_parts()
    pot = SpheroidalPotential(p)
    part, kap = _auto_partition(p, kappa, lambda_big, omega0)
    opts = opts or IntegratorOptions()

    regions: list[RegionReport] = []
    hyp_failures: list[str] = []

    s0 = init_wkb(p, part.u0)
    traj_right = integrate(s0, HALF_PI, p, opts)
    left_target = (part.uJ / 100.0 if part.k == 0
                   else max(part.uMinus / 50.0, 1e-7))
    traj_left = integrate(s0, left_target, p, opts)

    def region(name, interval, method, fn):
        try:
            values, passed, msg = fn()
            regions.append(RegionReport(name=name, interval=interval,
                                        method=method, passed=passed,
                                        hypothesis_ok=True, values=values,
                                        message=msg))
        except (HypothesisError, DegeneratePartitionError) as exc:
            regions.append(RegionReport(name=name, interval=interval,
                                        method=method, passed=False,
                                        hypothesis_ok=False,
                                        message=str(exc)))
            hyp_failures.append(f"{name}: {exc}")

    # ----- S region: WKB profile --------------------------------------
    s_left = part.u0 if part.k == 0 else part.uMinusS
    s_right = part.uPlusS

    def do_wkb_forward():
        vals = {}
        T0 = _wkb_t0(pot, part.u0, s_right, "left")
        disk = build_disk(AlphaProfile.wkb(), p, (part.u0, s_right), T0,
                          flow_from="left")
        rep = certify_containment(disk, traj_right)
        vals["T0"] = T0
        vals["tv"] = disk.tv_total
        vals["slack"] = rep.min_slack
        vals["contained"] = rep.passed
        K = compute_K((part.u0, s_right), p)
        vals["K"] = K
        vals["K_le_delta"] = bool(K <= delta)
        msg = ""
        if K <= 1.0:
            ver = wkb_enclosure((part.u0, s_right), p).verify(traj_right)
            vals["thm_bounds_ok"] = ver["passed"]
            vals["max_dev_ratio"] = ver["max_dev_ratio"]
            ok = rep.passed and ver["passed"]
        else:
            msg = "K > 1: theorem bounds not asserted"
            ok = rep.passed
        return vals, ok, msg

    region("S", (part.u0, s_right), "wkb-disk", do_wkb_forward)

    if part.k != 0:
        def do_wkb_backward():
            vals = {}
            T0 = _wkb_t0(pot, part.uMinusS, part.u0, "right")
            disk = build_disk(AlphaProfile.wkb(), p, (part.uMinusS, part.u0),
                              T0, flow_from="right")
            rep = certify_containment(disk, traj_left)
            vals["T0"] = T0
            vals["slack"] = rep.min_slack
            K = compute_K((part.uMinusS, part.u0), p)
            vals["K"] = K
            return vals, rep.passed, ""

        region("S-", (part.uMinusS, part.u0), "wkb-disk(reflected)",
               do_wkb_backward)

    # ----- left quantum window: J (k=0) or I- (k!=0) -------------------
    if part.k == 0:
        jlo, jhi, jname = part.uJ, part.u0, "J"
    else:
        jlo, jhi, jname = part.uMinus, part.uMinusS, "I-"

    def do_left_quantum():
        vals = {}
        c1 = _trajectory_c1(traj_left, jhi, pot)
        v0 = abs(float(pot.v(jhi)))
        kq = math.sqrt(v0) * (jhi - jlo) * (1.0 + 1e-12)
        enc = quantum_enclosure((jlo, jhi), p, c1, kq, flow_from="right")
        ver = enc.verify(traj_left)
        disk = build_disk(AlphaProfile.constant(math.sqrt(v0)), p,
                          (jlo, jhi), enc.T0, flow_from="right")
        rep = certify_containment(disk, traj_left)
        vals.update(c1=c1, kappa_q=kq, c2=enc.c2, slack=rep.min_slack,
                    bounds_ok=ver["passed"], contained=rep.passed)
        if part.k == 0:
            vals["V0_J2"] = v0 * (jhi - jlo) ** 2
        return vals, rep.passed and ver["passed"], ""

    region(jname, (jlo, jhi), "quantum-disk(reflected)", do_left_quantum)

    # ----- P region: pole profile (k=0 only) ---------------------------
    if part.k == 0:
        def do_pole():
            vals = {}
            i = int(np.argmin(np.abs(traj_left.u - part.uJ)))
            uj = float(traj_left.u[i])
            y_j = complex(traj_left.y[i])
            sq = math.sqrt(abs(float(pot.v(uj))))
            C = max(abs(y_j) / sq, sq / y_j.imag, 1.0) * (1.0 + 1e-9)
            enc = pole_enclosure((left_target, uj), p, C, pole_at="left")
            ver = enc.verify(traj_left)
            prof = AlphaProfile.pole(uj)
            disk = build_disk(prof, p, (left_target, uj), enc.T0,
                              flow_from="right")
            rep = certify_containment(disk, traj_left)
            vals.update(C=C, B_sup=enc.B_sup, B_cond=enc.B_cond,
                        slack=rep.min_slack, bounds_ok=ver["passed"],
                        contained=rep.passed,
                        phase_tail=enc.phase_tail_bound(left_target))
            return vals, rep.passed and ver["passed"], ""

        region("P", (left_target, part.uJ), "pole-disk(reflected)", do_pole)

    # ----- right quantum window [uPlusS, uPlus] -------------------------
    if part.uPlus > part.uPlusS * (1 + 1e-12):
        def do_right_quantum():
            vals = {}
            c1 = _trajectory_c1(traj_right, part.uPlusS, pot)
            v0 = abs(float(pot.v(part.uPlusS)))
            kq = math.sqrt(v0) * (part.uPlus - part.uPlusS) * (1.0 + 1e-12)
            enc = quantum_enclosure((part.uPlusS, part.uPlus), p, c1, kq,
                                    flow_from="left")
            ver = enc.verify(traj_right)
            disk = build_disk(AlphaProfile.constant(math.sqrt(v0)), p,
                              (part.uPlusS, part.uPlus), enc.T0,
                              flow_from="left")
            rep = certify_containment(disk, traj_right)
            vals.update(c1=c1, kappa_q=kq, c2=enc.c2, slack=rep.min_slack,
                        bounds_ok=ver["passed"], contained=rep.passed)
            return vals, rep.passed and ver["passed"], ""

        region("I+a", (part.uPlusS, part.uPlus), "quantum-disk",
               do_right_quantum)

    # ----- positive-V stretch [uPlus, uI] and C = [uI, pi/2] ------------
    if part.uI > part.uPlus * (1 + 1e-12):
        def do_convex_mid():
            rep = convexity_lower_bound(traj_right, (part.uPlus, part.uI), p)
            return ({"rho_bound_log": rep.bound_log,
                     "min_slack_log": rep.min_slack_log,
                     "sup_ok": rep.sup_ok}, rep.passed, "")

        region("I+b", (part.uPlus, part.uI), "convexity-lower", do_convex_mid)

    if HALF_PI > part.uI * (1 + 1e-12):
        def do_convex_c():
            vals = {}
            L = compute_L((part.uI, HALF_PI), p)
            vals["L"] = L
            vals["L_le_3_sqrt_omega0"] = bool(L <= 3.0 / math.sqrt(omega0))
            rep = convexity_lower_bound(traj_right, (part.uI, HALF_PI), p)
            irep = convexity_integral_bound(traj_right, (part.uI, HALF_PI), p)
            vals["lhs_over_sup"] = irep.lhs_over_sup
            vals["integral_ok"] = irep.passed
            return vals, rep.passed and irep.passed, ""

        region("C", (part.uI, HALF_PI), "convexity-integral", do_convex_c)

    # ----- sensitivity integral and gap criterion -----------------------
    total_sens = (sensitivity_integral(traj_left)
                  + sensitivity_integral(traj_right))
    samples_re = np.concatenate([traj_left.re_y, traj_right.re_y])
    samples_eta = np.concatenate([traj_left.eta, traj_right.eta])
    live = samples_eta > -300.0
    ratio = -samples_re[live] / np.exp(samples_eta[live])
    c_emp = max(0.0, float(np.max(ratio))) if np.any(live) else 0.0
    delta_phase = HALF_PI - math.atan(c_emp)
    sens = {
        "integral": total_sens,
        "epsilon": epsilon,
        "below_epsilon": bool(total_sens <= epsilon),
        "c_empirical": c_emp,
        "delta_phase": delta_phase,
        "gap_lower_bound": (delta_phase / total_sens
                            if total_sens > 0 else math.inf),
    }

    passed = all(r.passed for r in regions)
    return CertificationReport(k=k, omega=om, lam=lam, kappa=kap,
                               lambda_big=lambda_big, omega0=omega0,
                               delta=delta, partition=part, regions=regions,
                               sensitivity=sens, passed=passed,
                               hypothesis_failures=hyp_failures)
