import math

import numpy as np
import pytest

from spheroidal.errors import HypothesisError
from spheroidal.potential import (ConstantPotential, ProblemParams,
                                  SpheroidalPotential, compute_K,
                                  partition_regions)
from spheroidal import invariant_disk as idk
from spheroidal import riccati as rc

HALF_PI = math.pi / 2


class PoleModelPotential:
    """V = -1/(4 (umax - u)^2): the exactly solvable pole model."""

    kernel_kind = 1
    singular_at_zero = False

    def __init__(self, umax):
        self.umax = umax

    def kernel_args(self):
        return (0.0, 0.0, 0.0)

    def v(self, u):
        return -0.25 / (self.umax - np.asarray(u, dtype=float)) ** 2

    def dv(self, u):
        return -0.5 / (self.umax - np.asarray(u, dtype=float)) ** 3

    def d2v(self, u):
        return -1.5 / (self.umax - np.asarray(u, dtype=float)) ** 4

    @staticmethod
    def y_exact(u, umax):
        v = umax - np.asarray(u, dtype=float)
        L = np.log(v)
        return (-0.5 / v - L / (v * (1 + L * L))) + 1j / (v * (1 + L * L))


# ---------------------------------------------------------------------------
# build_disk basics
# ---------------------------------------------------------------------------

def test_constant_harness_exact_slack():
    """V = -E with alpha = 0 = Re y: T is constant and the containment slack
    reproduces R - (beta - Im y) exactly."""
    E = 4.0
    pot = ConstantPotential(-E)
    s0 = rc.RiccatiState.from_y(0.0, 2j)
    traj = rc.integrate(s0, 1.5, pot)
    T0 = 1.5
    disk = idk.build_disk(idk.AlphaProfile.constant(0.0), pot, (0.0, 1.5), T0)
    assert np.allclose(disk.T, T0)          # TV log|sigma^2 U| = 0
    rep = idk.certify_containment(disk, traj)
    sq = math.sqrt(E)
    expect = sq / 2 * (T0 - 1 / T0) - (sq / 2 * (T0 + 1 / T0) - 2.0)
    assert rep.passed and rep.certified
    assert abs(rep.min_slack - expect) < 1e-9


def test_real_riccati_profile_degenerates_to_curve():
    """alpha a real Riccati solution makes U = 0 and R = 0."""
    E = 4.0
    pot = ConstantPotential(E)       # V = +E: alpha = sqrt(E) solves it
    disk = idk.build_disk(idk.AlphaProfile.constant(math.sqrt(E)), pot,
                          (0.0, 1.0), T0=1.0)
    assert np.max(np.abs(disk.U)) < 1e-12
    assert np.max(disk.R) < 1e-6


def test_disk_field_identities_pointwise():
    """(1g)-(1c): recompute beta, R, m from sigma, U, T samples."""
    p = ProblemParams(0, 30.0, 4340.0)
    part = partition_regions(p)
    disk = idk.build_disk(idk.AlphaProfile.wkb(), p, (part.u0, part.uPlusS),
                          T0=1.1)
    squ = np.sqrt(np.abs(disk.U))
    beta = 0.5 * squ * (disk.T + 1.0 / disk.T)
    R = 0.5 * squ * (disk.T - 1.0 / disk.T)
    assert np.max(np.abs(beta - disk.beta)) <= 1e-10 * np.max(beta)
    assert np.max(np.abs(R - disk.R)) <= 1e-10 * np.max(beta)
    assert np.allclose(disk.center.real, disk.alpha)
    assert np.allclose(disk.center.imag, disk.beta)
    # sigma matches exp(2 int alpha) computed numerically
    num = 2.0 * np.concatenate([[0.0], np.cumsum(
        0.5 * (disk.alpha[1:] + disk.alpha[:-1]) * np.diff(disk.t_grid))])
    assert np.max(np.abs(np.log(disk.sigma) - num)) < 1e-6


def test_u_positive_error():
    pot = ConstantPotential(4.0)     # V = +4, alpha = 0: U = 4 > 0
    with pytest.raises(HypothesisError):
        idk.build_disk(idk.AlphaProfile.constant(0.0), pot, (0.0, 1.0), 1.0)


def test_containment_detects_bad_initial_data():
    E = 4.0
    pot = ConstantPotential(-E)
    disk = idk.build_disk(idk.AlphaProfile.constant(0.0), pot, (0.0, 1.0),
                          T0=1.01)
    # start far outside the disk
    s0 = rc.RiccatiState.from_y(0.0, 8.0 + 9j)
    traj = rc.integrate(s0, 1.0, pot)
    rep = idk.certify_containment(disk, traj)
    assert not rep.passed
    assert rep.initial_slack < 0.0
    assert rep.first_violation_u is not None


def test_custom_profile_matches_constant():
    E = 4.0
    pot = ConstantPotential(-E)
    d1 = idk.build_disk(idk.AlphaProfile.constant(0.3), pot, (0.0, 1.0), 1.2)
    d2 = idk.build_disk(idk.AlphaProfile.custom(lambda t: 0.3, lambda t: 0.0),
                        pot, (0.0, 1.0), 1.2)
    assert np.max(np.abs(d1.R - d2.R)) < 1e-7
    assert np.max(np.abs(d1.center - d2.center)) < 1e-7


# ---------------------------------------------------------------------------
# WKB enclosure
# ---------------------------------------------------------------------------

def test_wkb_constants_are_verbatim():
    p = ProblemParams(0, 30.0, 4340.0)
    part = partition_regions(p)
    enc = idk.wkb_enclosure((part.u0, part.uPlusS), p)
    pot = SpheroidalPotential(p)
    u = 0.5 * (part.u0 + part.uPlusS)
    V = float(pot.v(u))
    assert abs(enc.deviation_bound(u) - 20.0 * math.sqrt(-V) * enc.K) < 1e-12
    assert abs(enc.im_lower(u) - math.sqrt(-V) / 10.0) < 1e-12
    assert enc.T0 == 1.0 + enc.K


def test_wkb_t_bound_from_proof():
    """T - 1 <= 2 e K for the WKB disk built with T0 = 1 + K."""
    p = ProblemParams(0, 30.0, 4340.0)
    part = partition_regions(p)
    K = compute_K((part.u0, part.uPlusS), p)
    disk = idk.build_disk(idk.AlphaProfile.wkb(), p, (part.u0, part.uPlusS),
                          T0=1.0 + K)
    assert np.max(disk.T) - 1.0 <= 2.0 * math.e * K


def test_wkb_bounds_hold_on_trajectory():
    p = ProblemParams(0, 30.0, 4340.0)
    part = partition_regions(p)
    enc = idk.wkb_enclosure((part.u0, part.uPlusS), p)
    traj = rc.integrate(rc.init_wkb(p, part.u0), part.uPlusS, p)
    rep = enc.verify(traj)
    assert rep["passed"]
    assert rep["max_dev_ratio"] < 1.0
    assert rep["min_im_ratio"] > 1.0


def test_wkb_hypothesis_failures_named():
    with pytest.raises(HypothesisError) as exc:
        idk.wkb_enclosure((1.4, HALF_PI), ProblemParams(0, 200.0, 30000.0))
    assert "V" in str(exc.value)
    # K > 1 on the m=0 branch S-window at omega=400
    p = ProblemParams(0, 400.0, 798.9993734)
    part = partition_regions(p, kappa=1.0, lambda_big=1.0)
    with pytest.raises(HypothesisError) as exc:
        idk.wkb_enclosure((part.u0, part.uPlusS), p)
    assert "K <= 1" in str(exc.value)


# ---------------------------------------------------------------------------
# quantum enclosure
# ---------------------------------------------------------------------------

def test_quantum_c2_closed_form():
    E = 4.0
    pot = ConstantPotential(-E)
    enc = idk.quantum_enclosure((0.0, 0.5), pot, c1=1.0, kappa=1.0)
    assert abs(enc.c2 - (32.0 * math.e ** 2 + 1.0)) < 1e-10
    assert abs(enc.c2 - 237.449795) < 1e-5
    assert enc.T0 == 2.0 * 1.0 * 4.0


def test_quantum_bounds_on_harness():
    E = 4.0
    pot = ConstantPotential(-E)
    s0 = rc.RiccatiState.from_y(0.0, 2j)
    traj = rc.integrate(s0, 0.5, pot)
    enc = idk.quantum_enclosure((0.0, 0.5), pot, c1=1.0, kappa=1.0)
    rep = enc.verify(traj)
    assert rep["passed"]


def test_quantum_hypothesis_kappa():
    pot = ConstantPotential(-4.0)
    with pytest.raises(HypothesisError):
        idk.quantum_enclosure((0.0, 2.0), pot, c1=1.0, kappa=1.0)


# ---------------------------------------------------------------------------
# pole enclosure
# ---------------------------------------------------------------------------

def test_pole_exact_model_inside_envelope():
    """The exact log-pole solution obeys all three 64 C^3 bounds."""
    umax = 0.5
    pot = PoleModelPotential(umax)
    enc = idk.pole_enclosure((0.0, umax), pot, C=1.4, pole_at="right")
    assert enc.B_sup == 0.0
    uu = np.linspace(0.0, umax - 1e-3, 400)
    ye = PoleModelPotential.y_exact(uu, umax)
    assert np.all(np.abs(ye) <= enc.abs_bound(uu))
    assert np.all(ye.imag <= enc.im_upper(uu))
    assert np.all(ye.imag >= enc.im_lower(uu))


def test_pole_constants_verbatim():
    umax = 0.5
    enc = idk.pole_enclosure((0.0, umax), PoleModelPotential(umax), C=2.0,
                             pole_at="right")
    d = 0.2    # pole distance
    u = umax - d
    f = 1.0 + math.log(umax) ** 2
    assert abs(enc.abs_bound(u) - 64.0 * 8.0 / d) < 1e-12
    assert abs(enc.im_upper(u) - 64.0 * 8.0 * f / (d * math.log(d) ** 2)) < 1e-10
    assert abs(enc.im_lower(u) - 1.0 / (64.0 * 8.0 * f) / (d * math.log(d) ** 2)) < 1e-12
    assert enc.T0 == 2.0 * 2.0 * 9.0 * f


def test_pole_phase_tail_bound_closed_form():
    """integral over (0, x] of 1/(v log^2 v) = -1/log x bounds the phase."""
    umax = 0.5
    enc = idk.pole_enclosure((0.0, umax), PoleModelPotential(umax), C=1.4,
                             pole_at="right")
    x = 0.05
    assert abs(enc.phase_tail_bound(x)
               - 64.0 * 1.4 ** 3 * (1 + math.log(umax) ** 2) * (-1.0 / math.log(x))) < 1e-10
    # the exact solution's phase integral over pole distances < x is below it
    vv = np.geomspace(1e-9, x, 20001)
    im = 1.0 / (vv * (1 + np.log(vv) ** 2))
    assert np.trapezoid(im, vv) <= enc.phase_tail_bound(x)


def test_pole_bcond_hypothesis():
    p = ProblemParams(0, 400.0, 798.9993734)
    # on (0, uJ] the regular part B satisfies the smallness condition
    part = partition_regions(p, kappa=1.0, lambda_big=1.0)
    enc = idk.pole_enclosure((part.uJ / 100, part.uJ), p, C=12.0)
    assert enc.B_cond <= 0.125
    # but not on a long interval where |B| ~ lambda is too large
    with pytest.raises(HypothesisError):
        idk.pole_enclosure((0.001, 0.5), p, C=12.0)


# ---------------------------------------------------------------------------
# convexity estimates
# ---------------------------------------------------------------------------

def test_convexity_lower_bound_trivial():
    """y0 = i: the bound is rho_0 Im y0/|y0| = rho_0."""
    pot = ConstantPotential(0.0)
    s0 = rc.RiccatiState.from_y(0.0, 1j)
    traj = rc.integrate(s0, 1.0, pot)
    rep = idk.convexity_lower_bound(traj, (0.0, 1.0), pot)
    assert rep.passed
    assert abs(rep.bound - 1.0) < 1e-12
    assert float(rep) == rep.bound


def test_convexity_free_particle_exact_minimum():
    """V = 0: rho = rho_0 |1 + y0 u| dips exactly to rho_0 Im y0/|y0|."""
    y0 = -1.0 + 0.8j
    pot = ConstantPotential(0.0)
    s0 = rc.RiccatiState.from_y(0.0, y0)
    traj = rc.integrate(s0, 2.0, pot)
    rep = idk.convexity_lower_bound(traj, (0.0, 2.0), pot)
    assert rep.passed
    # minimum of |1 + y0 u| over real u is Im y0/|y0| (attained inside here)
    assert rep.min_slack_log < 1e-4
    assert rep.min_slack_log >= -1e-9
    assert rep.sup_ok


def test_convexity_integral_harness():
    E = 9.0
    pot = ConstantPotential(E)
    s0 = rc.RiccatiState.from_y(0.0, 2.0 + 1j)
    traj = rc.integrate(s0, 1.0, pot)
    rep = idk.convexity_integral_bound(traj, (0.0, 1.0), pot)
    assert rep.passed
    assert rep.lhs_over_sup <= rep.L
    assert rep.L >= 3.0 / math.sqrt(E)


def test_convexity_zero_length():
    pot = ConstantPotential(9.0)
    s0 = rc.RiccatiState.from_y(0.0, 2.0 + 1j)
    traj = rc.integrate(s0, 1.0, pot)
    rep = idk.convexity_integral_bound(traj, (0.5, 0.5 + 1e-12), pot)
    assert rep.passed and rep.lhs_over_sup == 0.0


def test_convexity_hypothesis_failure():
    pot = ConstantPotential(-1.0)
    s0 = rc.RiccatiState.from_y(0.0, 1j)
    traj = rc.integrate(s0, 1.0, pot)
    with pytest.raises(HypothesisError):
        idk.convexity_lower_bound(traj, (0.0, 1.0), pot)


# ---------------------------------------------------------------------------
# spheroidal regions end to end
# ---------------------------------------------------------------------------

def test_spheroidal_c_region_convexity():
    p = ProblemParams(0, 200.0, 30000.0)
    part = partition_regions(p)
    traj = rc.integrate(rc.init_wkb(p, part.u0), HALF_PI, p)
    rep = idk.convexity_lower_bound(traj, (part.uI, HALF_PI), p)
    assert rep.passed
    irep = idk.convexity_integral_bound(traj, (part.uI, HALF_PI), p)
    assert irep.passed
    # Lemma-style runtime check with the default Omega0
    assert irep.L <= 3.0 / math.sqrt(16.0)
