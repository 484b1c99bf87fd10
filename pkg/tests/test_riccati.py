import math

import numpy as np
import pytest
from scipy.special import lpmv

from spheroidal.errors import DomainError, SeriesTruncationError
from spheroidal.potential import ConstantPotential, ProblemParams, SpheroidalPotential
from spheroidal import riccati as rc
from spheroidal import _kernels

HALF_PI = math.pi / 2


# ---------------------------------------------------------------------------
# Frobenius series
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("k,l", [(0, 0), (0, 3), (1, 2), (2, 3), (3, 4)])
def test_series_vs_legendre(k, l):
    """At omega=0, lambda=l(l+1), Y1 is sqrt(sin u) P_l^k(cos u) up to scale;
    compare log-derivatives against scipy's associated Legendre."""
    lam = float(l * (l + 1))
    p = ProblemParams(k, 0.0, lam)
    u = 0.01

    def ref(x):
        return math.sqrt(math.sin(x)) * lpmv(k, l, math.cos(x))

    h = 1e-6
    fd = (ref(u + h) - ref(u - h)) / (2 * h) / ref(u)
    val = rc.boundary_log_derivative(p, u)
    assert abs(val - fd) <= 1e-6 * abs(fd)


def test_series_pair_wronskian_two_points():
    """The pair Wronskian is constant; evaluate at two offsets and compare
    with the u -> 0 limit (+1 for k=0, -2|k| otherwise)."""
    for k, w_limit in ((0, 1.0), (1, -2.0), (3, -6.0)):
        p = ProblemParams(k, 5.0, 80.0)
        vals = []
        for ue in (1e-3, 2e-3):
            (y1, y1p, y2, y2p), _, _ = rc.singular_series_pair(p, ue)
            vals.append(y1 * y2p - y1p * y2)
        assert abs(vals[0] - w_limit) <= 1e-10 * abs(w_limit)
        assert abs(vals[1] - w_limit) <= 1e-10 * abs(w_limit)


def test_series_truncation_error_raises():
    with pytest.raises(SeriesTruncationError):
        rc.singular_series_pair(ProblemParams(0, 10.0, 40000.0), 0.4)


def test_boundary_log_derivative_leading():
    # k != 0: (1/2 + |k|)/u leading; k = 0: 1/(2u)
    for k in (0, 1, 2, 4):
        p = ProblemParams(k, 3.0, 50.0)
        ue = 1e-4
        val = rc.boundary_log_derivative(p, ue)
        lead = (0.5 + abs(k)) / ue
        assert abs(val - lead) <= 1e-3 * lead


def test_series_init_k0_imaginary_part():
    """Im y(u_eps) ~ 1/(u (1 + log^2 u)) near the k=0 singularity."""
    p = ProblemParams(0, 0.0, 2.0)
    ue = 1e-5
    si = rc.singular_series_init(p, ue)
    model = 1.0 / (ue * (1.0 + math.log(ue) ** 2))
    assert abs(si.state.im_y - model) <= 0.02 * model
    assert -HALF_PI < si.phi0 < 0.0


def test_series_init_consistency_with_integration():
    """Integrating from u_eps to 2 u_eps reproduces the series value there."""
    for k in (0, 1, 2):
        p = ProblemParams(k, 4.0, 120.0)
        ue = rc.default_u_eps(p)
        init_fn = rc.singular_series_init if k == 0 else rc.wall_switch_init
        si0 = rc.singular_series_init(p, ue) if k == 0 else None
        if k == 0:
            traj = rc.integrate(si0.state, 2 * ue, p)
            si1 = rc.singular_series_init(p, 2 * ue)
            got = traj.y[-1]
            want = si1.state.y
            assert abs(got - want) <= 1e-8 * abs(want)
        else:
            # compare the pair values after a short linear hop
            (y1, y1p, _, _), _, _ = rc.singular_series_pair(p, ue)
            (y1b, y1pb, _, _), _, _ = rc.singular_series_pair(p, 1.5 * ue)
            t = rc._linear_track(ue, 1.5 * ue, y1, y1p, 0.0, 0.0,
                                 SpheroidalPotential(p), 1e-11, 1e-13)
            got = t[1] / t[0]
            assert abs(got - y1pb / y1b) <= 1e-8 * abs(y1pb / y1b)


# ---------------------------------------------------------------------------
# WKB initial data
# ---------------------------------------------------------------------------

def test_init_wkb_at_minimum_exact():
    # at the k != 0 minimum V' = 0, so y = i sqrt(|V(u0)|) exactly
    p = ProblemParams(1, 100.0, 1500.0)
    pot = SpheroidalPotential(p)
    u0 = pot.minimum()
    s = rc.init_wkb(p, u0)
    assert abs(s.y.real) < 1e-10
    assert abs(s.y.imag - math.sqrt(-float(pot.v(u0)))) < 1e-10


def test_init_wkb_rejects_positive_potential():
    with pytest.raises(DomainError):
        rc.init_wkb(ProblemParams(0, 200.0, 30000.0), 1.5)


def test_init_wkb_sensitivity_derivative():
    """y_lambda is the exact lambda-derivative of the WKB condition
    (real part -V'/(4V^2); checked against finite differences)."""
    k, om, u0 = 0, 30.0, 0.061
    h = 1e-4

    def y_of(lam):
        return rc.init_wkb(ProblemParams(k, om, lam), u0).y

    fd = (y_of(4340.0 + h) - y_of(4340.0 - h)) / (2 * h)
    got = rc.init_wkb(ProblemParams(k, om, 4340.0), u0).yLambda
    assert abs(got - fd) <= 1e-6 * abs(fd)
    # imaginary part i/(2 sqrt|V0|)
    pot = SpheroidalPotential(ProblemParams(k, om, 4340.0))
    assert abs(got.imag - 1.0 / (2 * math.sqrt(-float(pot.v(u0))))) < 1e-12


def test_init_wkb_sensitivity_magnitude_bound():
    # |y_lambda(u0)| <= 1/sqrt(|V(u0)|) whenever K <= 1 holds nearby
    from spheroidal.potential import partition_regions, compute_K
    p = ProblemParams(0, 30.0, 4340.0)
    part = partition_regions(p)
    assert compute_K((part.u0, part.uPlusS), p) <= 1.0
    s = rc.init_wkb(p, part.u0)
    v0 = abs(float(SpheroidalPotential(p).v(part.u0)))
    assert abs(s.yLambda) <= 1.0 / math.sqrt(v0)


# ---------------------------------------------------------------------------
# integration harnesses
# ---------------------------------------------------------------------------

def test_constant_potential_fixed_point():
    E = 4.0
    s0 = rc.RiccatiState.from_y(0.0, 1j * math.sqrt(E))
    traj = rc.integrate(s0, 1.4, ConstantPotential(-E))
    assert abs(traj.y[-1] - 1j * math.sqrt(E)) < 1e-9
    assert abs(traj.phi[-1] - math.sqrt(E) * 1.4) < 1e-9


def test_zero_potential_exact_solution():
    # z = 1 + i u: y = (u + i)/(1 + u^2), phi = arctan u
    s0 = rc.RiccatiState.from_y(1e-14, 1j)
    traj = rc.integrate(s0, 1.0, ConstantPotential(0.0))
    u = traj.u
    ref = (u + 1j) / (1 + u * u)
    assert np.max(np.abs(traj.y - ref)) < 1e-9
    assert abs(traj.phi[-1] - math.atan(1.0)) < 1e-9


def test_phase_monotone_and_wronskian_conserved():
    p = ProblemParams(0, 40.0, 900.0)
    si = rc.singular_series_init(p, rc.default_u_eps(p))
    traj = rc.integrate(si.state, HALF_PI, p)
    assert np.all(np.diff(traj.phi) >= 0.0)
    assert traj.wronskian_drift() <= 1e-9


def test_backward_forward_consistency():
    p = ProblemParams(0, 10.0, 300.0)
    si = rc.singular_series_init(p, rc.default_u_eps(p))
    fw = rc.integrate(si.state, 0.8, p)
    bw = rc.integrate(fw.end_state(), 0.05, p)
    fw2 = rc.integrate(si.state, 0.05, p)
    assert bw.flow_from == "right"
    assert np.all(np.diff(bw.u) > 0)
    assert abs(fw2.y[-1] - bw.y[0]) <= 1e-8 * abs(bw.y[0])


def test_sensitivity_matches_finite_difference():
    """(y(lam+h) - y(lam-h))/2h against the propagated y_lambda."""
    k, om, lam = 0, 5.0, 200.0
    u_t = 1.2
    h = 1e-4 * lam

    def end_y(l):
        p = ProblemParams(k, om, l)
        si = rc.singular_series_init(p, 1e-5)
        return rc.integrate(si.state, u_t, p).y[-1]

    fd = (end_y(lam + h) - end_y(lam - h)) / (2 * h)
    p = ProblemParams(k, om, lam)
    si = rc.singular_series_init(p, 1e-5)
    traj = rc.integrate(si.state, u_t, p)
    got = traj.ylam[-1]
    assert abs(got - fd) <= 1e-5 * abs(fd)


def test_sensitivity_integral_is_phase_derivative():
    """d phi_total / d lambda equals the offset derivative plus the integral
    of Im y_lambda, including the k != 0 wall-handover bookkeeping."""
    k, om, lam = 1, 8.0, 300.0
    h = 0.03
    ue = rc.default_u_eps(ProblemParams(k, om, lam))
    opts = rc.IntegratorOptions(rtol=1e-11, atol=1e-13)

    def phase(l):
        p = ProblemParams(k, om, l)
        si = rc.wall_switch_init(p, ue)
        traj = rc.integrate(si.state, HALF_PI, p, opts)
        return si.phi0 + traj.phi[-1] - traj.phi[0]

    p = ProblemParams(k, om, lam)
    si = rc.wall_switch_init(p, ue)
    traj = rc.integrate(si.state, HALF_PI, p, opts)
    total = rc.sensitivity_integral(traj) + si.dphi0_dlam
    fd = (phase(lam + h) - phase(lam - h)) / (2 * h)
    assert abs(total - fd) <= 1e-5 * abs(fd)
    assert total > 0.0


def test_z_crosscheck_reproduces_y():
    """Direct Sturm-Liouville integration of z and y = z'/z agree with the
    Riccati route away from zeros of z."""
    k, om, lam = 0, 3.0, 15.0
    p = ProblemParams(k, om, lam)
    ue = 1e-5
    si = rc.singular_series_init(p, ue)
    traj = rc.integrate(si.state, 0.9, p)
    y_ric = traj.y[-1]

    # z with the same normalization: z(ue) = rho e^{i phi} = e^{i phi0-ish};
    # any scale works for z'/z, use z(ue) = 1, z'(ue) = y(ue)
    state = np.array([1.0 + 0j, si.state.y, 0j, 0j], dtype=np.complex128)
    dummy_t = np.empty(2)
    dummy_s = np.empty((2, 4), dtype=np.complex128)
    dummy_sc = np.empty(2)
    out = _kernels.sturm_kernel(ue, 0.9, state, 0.0, 1.0, 0,
                                complex(k * k - 0.25), complex(om),
                                complex(p.mu), 1e-12, 1e-14, 1e-6,
                                2_000_000, False, dummy_t, dummy_s, dummy_sc)
    assert out[0] == _kernels.OK
    z, zp = out[6][0], out[6][1]
    assert abs(zp / z - y_ric) <= 1e-7 * abs(y_ric)


def test_ylam_variation_of_constants_identity():
    """z^2 y_lam |_u^v = -integral z^2 on a short subinterval."""
    k, om, lam = 0, 3.0, 15.0
    p = ProblemParams(k, om, lam)
    ue = 1e-5
    si = rc.singular_series_init(p, ue)
    a, b = 0.5, 0.62
    traj_a = rc.integrate(si.state, a, p)
    sa = traj_a.end_state()
    traj = rc.integrate(sa, b, p)

    # dense z along [a, b] from rho e^{i phi}; composite Simpson on the
    # (sample, midpoint, sample) triplets for 4th-order quadrature
    uu, yy, phi, logrho, ylm = traj.with_midpoints()
    z2 = np.exp(2 * (logrho - logrho[0])) * np.exp(2j * phi)
    h = uu[2::2] - uu[:-1:2]
    integral = np.sum(h / 6.0 * (z2[:-1:2] + 4.0 * z2[1::2] + z2[2::2]))
    lhs = z2[-1] * ylm[-1] - z2[0] * ylm[0]
    assert abs(lhs + integral) <= 1e-6 * abs(integral)


def test_deep_barrier_underflow_is_graceful():
    # Im y underflows far below double precision; eta keeps the state exact
    p = ProblemParams(0, 400.0, 799.0)
    si = rc.singular_series_init(p, rc.default_u_eps(p))
    traj = rc.integrate(si.state, HALF_PI, p)
    end = traj.end_state()
    assert end.eta < -700.0          # Im y below the float floor
    assert end.im_y == 0.0           # graceful underflow
    assert np.all(np.diff(traj.phi) >= 0.0)


def test_trajectory_midpoints_interleave():
    p = ProblemParams(0, 2.0, 30.0)
    si = rc.singular_series_init(p, 1e-5)
    traj = rc.integrate(si.state, 1.0, p)
    uu, yy, phi, lr, ylm = traj.with_midpoints()
    assert len(uu) == 2 * len(traj.u) - 1
    assert np.all(np.diff(uu) > 0)
    # midpoint phase stays monotone within tolerance
    assert np.all(np.diff(phi) > -1e-12)
