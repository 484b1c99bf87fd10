import math

import numpy as np
import pytest

from spheroidal.errors import DegeneratePartitionError, DomainError, HypothesisError
from spheroidal.potential import (ConstantPotential, ProblemParams,
                                  SpheroidalPotential, compute_K, compute_L,
                                  csc2_minus_inv_sq, eval_potential,
                                  k_functional, l_functional,
                                  partition_regions, v_at_minimum_closed_form)

HALF_PI = math.pi / 2


# ---------------------------------------------------------------------------
# pointwise values
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("u,k,om,lam,expect", [
    (HALF_PI, 0, 2.0, 5.0, -1.5),      # 4 - 1/4 - (5 + 1/4)
    (HALF_PI, 1, 0.0, 2.0, -1.5),      # 0.75 - 2.25
    (math.pi / 6, 0, 0.0, 0.0, -1.25),  # sin^2 = 1/4
])
def test_potential_values(u, k, om, lam, expect):
    ev = eval_potential(u, ProblemParams(k, om, lam))
    assert abs(ev.V - expect) < 1e-14


def test_potential_formula_random(rng):
    for _ in range(50):
        k = int(rng.integers(-4, 5))
        om = float(rng.uniform(0, 50))
        lam = float(rng.uniform(-10, 500))
        u = float(rng.uniform(0.05, HALF_PI))
        ev = eval_potential(u, ProblemParams(k, om, lam))
        mu = lam - 2 * om * k + 0.25
        direct = om**2 * math.sin(u)**2 + (k*k - 0.25) / math.sin(u)**2 - mu
        assert abs(ev.V - direct) <= 1e-12 * (1 + abs(direct))


def test_symmetry_omega_k_flip(rng):
    for _ in range(20):
        k = int(rng.integers(1, 4))
        om = float(rng.uniform(0.1, 30))
        lam = float(rng.uniform(0, 100))
        u = float(rng.uniform(0.05, HALF_PI))
        a = eval_potential(u, ProblemParams(k, om, lam))
        b = eval_potential(u, ProblemParams(-k, -om, lam))
        assert a.V == b.V and a.Vp == b.Vp and a.Vpp == b.Vpp


def test_domain_error():
    with pytest.raises(DomainError):
        eval_potential(0.0, ProblemParams(0, 1.0, 1.0))
    with pytest.raises(DomainError):
        eval_potential(2.0, ProblemParams(0, 1.0, 1.0))


def test_derivatives_match_finite_differences(rng):
    p = ProblemParams(2, 7.0, 60.0)
    pot = SpheroidalPotential(p)
    for u in rng.uniform(0.2, 1.5, size=12):
        h = 1e-5
        fd1 = (pot.v(u + h) - pot.v(u - h)) / (2 * h)
        fd2 = (pot.dv(u + h) - pot.dv(u - h)) / (2 * h)
        fd3 = (pot.d2v(u + h) - pot.d2v(u - h)) / (2 * h)
        assert abs(pot.dv(u) - fd1) <= 1e-6 * (1 + abs(fd1))
        assert abs(pot.d2v(u) - fd2) <= 1e-6 * (1 + abs(fd2))
        assert abs(pot.d3v(u) - fd3) <= 1e-5 * (1 + abs(fd3))


def test_b_regular_cancellation_free():
    p = ProblemParams(0, 400.0, 799.0)
    pot = SpheroidalPotential(p)
    # near zero the direct difference loses ~11 digits; the stable form must
    # agree with the series limit -mu - 1/12
    b0 = float(pot.b_regular(1e-8))
    assert abs(b0 - (-pot.mu - 1.0 / 12.0)) < 1e-9 * abs(pot.mu)
    # and match the direct formula where it is well conditioned
    for u in (0.3, 0.5, 0.7, 1.2):
        direct = float(pot.v(u)) + 0.25 / u**2
        assert abs(float(pot.b_regular(u)) - direct) <= 1e-9 * (1 + abs(direct))


def test_csc2_series_matches_direct():
    for u in (0.3, 0.49, 0.51, 0.8):
        direct = 1 / math.sin(u)**2 - 1 / u**2
        assert abs(float(csc2_minus_inv_sq(u)) - direct) < 1e-12


# ---------------------------------------------------------------------------
# region partition
# ---------------------------------------------------------------------------

def test_u0_closed_form_k1():
    # u0 depends on (k, omega) only; lambda=100 here sits below the well
    # bottom so there is no valid partition, but the minimum is well defined
    p = ProblemParams(1, 100.0, 100.0)
    u0 = SpheroidalPotential(p).minimum()
    # defining equation sin^2 u0 = sqrt(k^2 - 1/4)/Omega
    assert abs(math.sin(u0)**2 - math.sqrt(0.75) / 100.0) < 1e-15
    assert abs(u0 - 0.09319486) < 1e-6
    # same point emerges from a valid partition at larger lambda
    part = partition_regions(ProblemParams(1, 100.0, 1500.0), kappa=2.0,
                             lambda_big=5.0)
    assert abs(part.u0 - u0) < 1e-15


def test_v_at_minimum_closed_form():
    p = ProblemParams(1, 100.0, 100.0)
    u0 = SpheroidalPotential(p).minimum()
    closed = v_at_minimum_closed_form(p)
    assert abs(closed - (100.0 * (2 * math.sqrt(0.75) + 2) - 100.25)) < 1e-10
    direct = eval_potential(u0, p).V
    assert abs(direct - closed) <= 1e-10 * (1 + abs(closed))


def test_partition_defining_residuals():
    p = ProblemParams(1, 100.0, 1500.0)
    part = partition_regions(p, kappa=2.0, lambda_big=5.0)
    pot = SpheroidalPotential(p)
    # S boundary condition |V| (u+- - u)^2 = kappa^2
    for us, uref in ((part.uPlusS, part.uPlus), (part.uMinusS, part.uMinus)):
        res = abs(float(pot.v(us))) * (uref - us)**2 - part.kappa**2
        assert abs(res) <= 1e-10 * part.kappa**2
    # zero crossings: residual relative to the potential scale
    vscale = abs(1500.0) + 100.0**2
    assert abs(float(pot.v(part.uMinus))) <= 1e-10 * vscale
    assert abs(float(pot.v(part.uPlus))) <= 1e-10 * vscale
    # uI condition
    assert abs(float(pot.v(part.uI)) - 100.0**1.5) <= 1e-10 * vscale
    # ordering
    bps = [v for _, v in part.ordered_breakpoints()]
    assert all(b2 >= b1 for b1, b2 in zip(bps, bps[1:]))


def test_partition_uplus_convention():
    # lambda large enough that V < 0 on all of (u0, pi/2]
    p = ProblemParams(0, 20.0, 3000.0)
    part = partition_regions(p, kappa=4.0, lambda_big=64.0)
    assert part.uPlus == HALF_PI
    assert part.uI == HALF_PI


def test_partition_k0_structure():
    p = ProblemParams(0, 30.0, 4340.0)
    part = partition_regions(p)
    assert part.uJ is not None and part.uJ < part.u0
    assert abs(part.uJ - 1.0 / (8 * math.sqrt(4340.0) * math.log(4340.0)**2)) < 1e-15
    assert abs(part.u0 - 4.0 / math.sqrt(4340.0)) < 1e-15
    assert abs(part.u1 - 1.0 / math.sqrt(30.0)) < 1e-15
    regions = part.regions()
    assert set(regions) == {"P", "J", "S", "I+", "C"}


def test_partition_degenerate_raises():
    with pytest.raises(DegeneratePartitionError):
        partition_regions(ProblemParams(1, 0.1, 2.0))
    with pytest.raises(DegeneratePartitionError):
        # kappa too large for this branch: S region empty
        partition_regions(ProblemParams(0, 400.0, 799.0), kappa=2.0,
                          lambda_big=1.0)


# ---------------------------------------------------------------------------
# K and L functionals
# ---------------------------------------------------------------------------

def test_k_constant_harness():
    assert k_functional(ConstantPotential(-4.0), 0.1, 1.0) == 0.0


def test_l_constant_harness():
    E = 9.0
    assert abs(l_functional(ConstantPotential(E), 0.1, 1.0) - 3.0 / math.sqrt(E)) < 1e-14


def _dense_K(pot, a, b, n=200_000):
    u = np.linspace(a, b, n)
    v = np.asarray(pot.v(u), dtype=float)
    vp = np.asarray(pot.dv(u), dtype=float)
    vpp = np.asarray(pot.d2v(u), dtype=float)
    tv = float(np.sum(np.abs(np.diff(vpp))))
    return ((np.max(np.abs(vpp)) + tv) / np.max(v)**2
            + np.max(vp**2 / np.abs(v)**3))


def _dense_L(pot, a, b, n=200_000):
    u = np.linspace(a, b, n)
    v = np.asarray(pot.v(u), dtype=float)
    vp = np.asarray(pot.dv(u), dtype=float)
    g = vp / v**2
    return float(np.max(3.0 / np.sqrt(v) + g) + np.sum(np.abs(np.diff(g))))


def test_k_vs_dense_oracle():
    p = ProblemParams(0, 30.0, 4340.0)
    part = partition_regions(p)
    K = compute_K((part.u0, part.uPlusS), p)
    K_dense = _dense_K(SpheroidalPotential(p), part.u0, part.uPlusS)
    assert abs(K - K_dense) <= 0.01 * K_dense
    # runtime check in the recommended range: K small
    assert K <= 1.0


def test_k_hypothesis_errors():
    with pytest.raises(HypothesisError):
        # lambda < Omega^2: V > 0 near pi/2
        compute_K((1.4, HALF_PI), ProblemParams(0, 200.0, 30000.0))
    p2 = ProblemParams(1, 100.0, 1500.0)
    part = partition_regions(p2, kappa=2.0, lambda_big=5.0)
    with pytest.raises(HypothesisError):
        # interval straddles the minimum: monotonicity fails
        compute_K((part.uMinusS, part.uPlusS), p2)


def test_l_vs_dense_oracle():
    p = ProblemParams(0, 200.0, 30000.0)
    part = partition_regions(p, kappa=4.0, lambda_big=64.0)
    assert part.uI < HALF_PI
    L = compute_L((part.uI, HALF_PI), p)
    L_dense = _dense_L(SpheroidalPotential(p), part.uI, HALF_PI)
    assert abs(L - L_dense) <= 0.01 * L_dense
    # Lemma-style runtime check: L <= 3/sqrt(Omega0) with Omega0 = 16
    assert L <= 3.0 / math.sqrt(16.0)


def test_k_small_across_range_grid():
    # existence of workable (kappa, Lambda) on the regression grid
    for om in (20.0, 40.0, 80.0):
        lam = 2 * 64.0 * om + 300.0
        p = ProblemParams(0, om, lam)
        part = partition_regions(p)
        K = compute_K((part.u0, part.uPlusS), p)
        assert K <= 1.0, (om, K)
