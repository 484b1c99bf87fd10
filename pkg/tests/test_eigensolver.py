import math

import numpy as np
import pytest

from spheroidal.potential import ProblemParams
from spheroidal import eigensolver as es
from spheroidal import oracle

HALF_PI = math.pi / 2


def legendre_lambda(k, parity, m):
    l = abs(k) + 2 * m + (1 if parity == "odd" else 0)
    return float(l * (l + 1))


# ---------------------------------------------------------------------------
# phase shift
# ---------------------------------------------------------------------------

def test_phase_shift_p1_is_pi():
    # k=0, omega=0, lambda=2 (P1, odd, m=0): total shift (m+1) pi
    got = es.phase_shift(2.0, ProblemParams(0, 0.0, 2.0), "odd")
    assert abs(got - math.pi) < 1e-8


def test_phase_targets():
    assert es.phase_target(3, "odd", 1j) == 4 * math.pi
    # even target with Re y(pi/2) = 0: pi/2 + m pi
    assert abs(es.phase_target(2, "even", 1j) - (2 * math.pi + HALF_PI)) < 1e-15


def test_phase_monotone_in_lambda():
    p = ProblemParams(0, 5.0, 0.0)
    vals = [es.phase_shift(lam, p) for lam in (10.0, 30.0, 90.0, 200.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# eigenvalues
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("k,parity,m", [
    (0, "even", 0), (0, "odd", 0), (0, "even", 1), (0, "odd", 3),
    (1, "even", 0), (2, "odd", 0), (2, "even", 4), (3, "even", 2),
    (5, "odd", 1), (12, "even", 0),
])
def test_legendre_limit(k, parity, m):
    rec = es.find_eigenvalue(m, parity, ProblemParams(k, 0.0, 0.0))
    expect = legendre_lambda(k, parity, m)
    assert abs(rec.lam - expect) <= 1e-8 * max(1.0, expect)
    assert rec.nodeCountVerified
    assert rec.phaseResidual < 1e-6


def test_oracle_equivalence_spots():
    for (k, om, parity, m) in [(0, 5.0, "even", 0), (1, 25.0, "odd", 6),
                               (2, 50.0, "even", 12)]:
        rec = es.find_eigenvalue(m, parity, ProblemParams(k, om, 0.0))
        est = oracle.eigenvalue_estimate(k, om, parity, m)
        assert abs(rec.lam - est) <= 1e-6 * max(1.0, abs(est))


def test_eigenvalue_symmetry_omega_k():
    a = es.find_eigenvalue(2, "odd", ProblemParams(2, 7.0, 0.0))
    b = es.find_eigenvalue(2, "odd", ProblemParams(-2, -7.0, 0.0))
    assert abs(a.lam - b.lam) <= 1e-9 * (1 + abs(a.lam))


def test_find_with_explicit_guess_and_margin():
    rec = es.find_eigenvalue(1, "even", ProblemParams(0, 0.0, 0.0),
                             lam_guess=5.0, margin=3.0)
    assert abs(rec.lam - 6.0) < 1e-7


def test_bracket_recovery_from_poor_guess():
    rec = es.find_eigenvalue(0, "odd", ProblemParams(0, 0.0, 0.0),
                             lam_guess=2.6, margin=0.2)
    assert abs(rec.lam - 2.0) < 1e-7


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------

def test_count_nodes_legendre():
    # P2: one interior zero; P0: none
    rec = es.find_eigenvalue(1, "even", ProblemParams(0, 0.0, 0.0))
    assert es.count_nodes(rec) == 1
    rec0 = es.find_eigenvalue(0, "even", ProblemParams(0, 0.0, 0.0))
    assert es.count_nodes(rec0) == 0


def test_node_count_constant_along_branch():
    for om in (0.0, 3.0, 10.0, 40.0):
        rec = es.find_eigenvalue(2, "odd", ProblemParams(0, om, 0.0))
        assert es.count_nodes(rec) == 2, om


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------

def test_reconstruct_p1_cosine():
    rec = es.find_eigenvalue(0, "odd", ProblemParams(0, 0.0, 0.0))
    u, Y, Th = es.reconstruct_eigenfunction(rec, 400)
    ref = np.cos(u)
    scale = Th[len(u) // 2] / ref[len(u) // 2]
    err = np.max(np.abs(Th - scale * ref)) / np.max(np.abs(scale * ref))
    assert err < 1e-6
    assert abs(np.trapezoid(Y * Y, u) - 0.5) < 1e-6


def test_reconstruct_k1_sine():
    # k=1, lambda=2 (l=1): Theta proportional to sin(theta)
    rec = es.find_eigenvalue(0, "even", ProblemParams(1, 0.0, 0.0))
    assert abs(rec.lam - 2.0) < 1e-8
    u, Y, Th = es.reconstruct_eigenfunction(rec, 400)
    sel = u > 0.05
    ref = np.sin(u[sel])
    scale = Th[sel][-1] / ref[-1]
    err = np.max(np.abs(Th[sel] - scale * ref)) / np.max(np.abs(scale * ref))
    assert err < 1e-6


def test_reconstruct_p2():
    rec = es.find_eigenvalue(1, "even", ProblemParams(0, 0.0, 0.0))
    u, Y, Th = es.reconstruct_eigenfunction(rec, 400)
    # P2(cos u) = (3 cos^2 - 1)/2, one sign change in (0, pi/2)
    signs = np.sign(Y[np.abs(Y) > 1e-8])
    assert np.sum(np.abs(np.diff(signs)) > 0) == 1


# ---------------------------------------------------------------------------
# gap scan
# ---------------------------------------------------------------------------

def test_gap_scan_omega_zero():
    res = es.gap_scan([0], [0.0], m_max=3, parities=("even",), gamma=1.0)
    gaps = [res.min_gaps[(0, "even", m)] for m in range(3)]
    assert np.allclose(gaps, [6.0, 14.0, 22.0], atol=1e-7)
    assert res.empirical_N[(0, "even")] == 0


def test_gap_scan_small_grid():
    res = es.gap_scan([0], np.arange(0.0, 5.5, 0.5), m_max=2,
                      parities=("even", "odd"), gamma=1.0)
    assert not res.lipschitz_violations
    for sw in res.sweeps.values():
        assert bool(np.all(sw.nodes_ok))
        assert bool(np.all(sw.lipschitz_ok))
    for key, g in res.min_gaps.items():
        assert g > 0.0


def test_gap_scan_slope_fit():
    res = es.gap_scan([0], np.arange(100.0, 201.0, 5.0), m_max=1,
                      parities=("even", "odd"), fit_min=100.0)
    for (k, parity, m), sw in res.sweeps.items():
        assert sw.slope_predicted == 4 * m + 2
        assert abs(sw.slope - sw.slope_predicted) <= 0.02 * sw.slope_predicted
