"""Holomorphic continuation of eigenvalues into the complex-parameter strip
and finite-matrix diagnostics for the slightly non-selfadjoint split.

Off the real axis the positivity Im y > 0 fails, so shooting switches to the
direct Sturm-Liouville form: integrate the boundary-selected solution z from
its Frobenius series and drive the parity defect (z'(pi/2) for even, z(pi/2)
for odd) to zero with Newton in lambda; the lambda-derivative track of the
integrator supplies the exact Newton slope.

The perturbation split A = A0 + W (A0 the selfadjoint operator at Re omega)
is probed on oracle truncations: contour-integral projectors, idempotency
and rank checks, and the resolvent-difference norm bound against the
gamma = 8 rho gap condition.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, oracle
from .errors import ContourError, DomainError, IntegrationError
from .potential import HALF_PI, ProblemParams
from .riccati import default_u_eps, series_solution
from .eigensolver import EigenvalueRecord, find_eigenvalue


# ---------------------------------------------------------------------------
# strip and perturbation bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StripSpec:
    """The open set |Im Omega| < c/(1 + |Re Omega|)."""

    c: float

    def contains(self, omega: complex) -> bool:
        omega = complex(omega)
        return abs(omega.imag) < self.c / (1.0 + abs(omega.real))


@dataclass
class PerturbationSplit:
    """Constants of the non-selfadjoint split at strip width c.

    |W| <= 2(k+1)c + c^2 = rho/2 and the contour radius is rho; the gap
    criterion uses gamma = 8 rho.
    """

    c: float
    k: int
    N: int | None = None

    @property
    def rho(self) -> float:
        return 2.0 * (2.0 * (abs(self.k) + 1.0) * self.c + self.c * self.c)

    @property
    def gamma(self) -> float:
        return 8.0 * self.rho

    @property
    def w_bound(self) -> float:
        return 0.5 * self.rho


# ---------------------------------------------------------------------------
# complex shooting
# ---------------------------------------------------------------------------

@dataclass
class ShootingDefect:
    defect: complex          # parity defect normalized by sup|z|
    ddefect_dlam: complex    # same normalization
    raw_ratio: complex       # defect/derivative (Newton step, scale-free)
    sup_log_abs_z: float


def _z_shoot(lam: complex, omega: complex, k: int, parity: str) -> ShootingDefect:
    mu = lam - 2.0 * omega * k + 0.25
    p_for_ueps = ProblemParams(k, complex(omega).real, complex(lam).real)
    u_eps = default_u_eps(p_for_ueps)
    Y1, Y1p, dY1, dY1p, trunc = series_solution(u_eps, abs(k), omega, mu)
    mag = max(abs(Y1), abs(Y1p))
    state = np.array([Y1 / mag, Y1p / mag, dY1 / mag, dY1p / mag],
                     dtype=np.complex128)
    dummy_t = np.empty(2)
    dummy_s = np.empty((2, 4), dtype=np.complex128)
    dummy_sc = np.empty(2)
    out = _kernels.sturm_kernel(
        u_eps, HALF_PI, state, 0.0, 1.0, 0, complex(k * k - 0.25),
        complex(omega), complex(mu), 1e-11, 1e-13,
        min(1e-4, 0.1 * u_eps), 2_000_000, False, dummy_t, dummy_s, dummy_sc)
    status, nacc, nrej, nrec, scale_log, suplog, s_end = out
    if status != _kernels.OK:
        raise IntegrationError(f"complex shooting failed (status {status})")
    z, zp, zl, zlp = s_end
    if parity == "even":
        f, df = zp, zlp
    else:
        f, df = z, zl
    norm = math.exp(scale_log - suplog)
    return ShootingDefect(defect=f * norm, ddefect_dlam=df * norm,
                          raw_ratio=(f / df) if df != 0 else complex("nan"),
                          sup_log_abs_z=suplog + math.log(mag))


def shooting_function(lam: complex, omega: complex, k: int,
                      parity: str) -> complex:
    """Parity boundary defect of the boundary-selected solution, normalized
    by sup|z| along the sweep; zero exactly at eigenvalues."""
    return _z_shoot(lam, omega, k, parity).defect


def newton_eigenvalue(lam0: complex, omega: complex, k: int, parity: str,
                      tol: float = 1e-11, max_iter: int = 25
                      ) -> tuple[complex, float, complex]:
    """Newton refinement of the shooting defect; returns
    (lambda, |last step|, final defect)."""
    lam = complex(lam0)
    step = math.inf
    d = None
    for _ in range(max_iter):
        d = _z_shoot(lam, omega, k, parity)
        dl = -d.raw_ratio
        if not (cmath.isfinite(dl)):
            raise IntegrationError("Newton derivative vanished")
        lam = lam + dl
        step = abs(dl)
        if step <= tol * (1.0 + abs(lam)):
            d = _z_shoot(lam, omega, k, parity)
            return lam, step, d.defect
    raise IntegrationError(f"Newton did not converge (last step {step:.2e})")


# ---------------------------------------------------------------------------
# eigenvalue paths
# ---------------------------------------------------------------------------

@dataclass
class PathPoint:
    omega: complex
    lam: complex
    newton_step: float
    defect: complex
    collision: bool = False


@dataclass
class ComplexEigenPath:
    k: int
    parity: str
    m: int
    strip: StripSpec
    points: list[PathPoint] = field(default_factory=list)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([pt.omega for pt in self.points])

    @property
    def lams(self) -> np.ndarray:
        return np.array([pt.lam for pt in self.points])


def continue_eigenvalue(m: int, parity: str, k: int, omega_path,
                        strip: StripSpec, start_record: EigenvalueRecord | None = None,
                        tol: float = 1e-11, max_halvings: int = 4
                        ) -> ComplexEigenPath:
    """Predictor-corrector continuation of one branch along omega_path.

    The path must start at a real omega (solved by the selfadjoint shooting
    if no record is given); consecutive steps are halved on Newton failure.
    Near-collision with an adjacent branch (distance below gamma/4 measured
    against the real-axis neighbors at Re omega) only flags the sample.
    """
    omega_path = [complex(w) for w in omega_path]
    if abs(omega_path[0].imag) > 1e-14:
        raise DomainError("path must start at a real omega")
    for w in omega_path:
        if not strip.contains(w):
            raise DomainError(f"omega={w} outside the strip "
                              f"|Im| < {strip.c}/(1+|Re|)")
    if start_record is None:
        start_record = find_eigenvalue(m, parity,
                                       ProblemParams(k, omega_path[0].real, 0.0))
    pert = PerturbationSplit(c=strip.c, k=abs(k))
    path = ComplexEigenPath(k=k, parity=parity, m=m, strip=strip)

    lam = complex(start_record.lam)
    lam, step, defect = newton_eigenvalue(lam, omega_path[0], k, parity, tol)
    path.points.append(PathPoint(omega_path[0], lam, step, defect,
                                 _near_collision(k, parity, m,
                                                 omega_path[0], lam, pert)))

    for w_next in omega_path[1:]:
        w_prev = path.points[-1].omega
        lam_prev = path.points[-1].lam
        pending = [(w_prev, w_next)]
        halved = 0
        while pending:
            w_a, w_b = pending.pop()
            if len(path.points) >= 2:
                dw = path.points[-1].omega - path.points[-2].omega
                slope = ((path.points[-1].lam - path.points[-2].lam) / dw
                         if dw != 0 else 0.0)
            else:
                slope = 2.0 * k
            guess = path.points[-1].lam + slope * (w_b - path.points[-1].omega)
            try:
                lam_b, step, defect = newton_eigenvalue(guess, w_b, k, parity, tol)
            except IntegrationError:
                if halved >= max_halvings:
                    raise
                halved += 1
                mid = 0.5 * (w_a + w_b)
                pending.extend([(mid, w_b), (w_a, mid)])
                continue
            path.points.append(PathPoint(w_b, lam_b, step, defect,
                                         _near_collision(k, parity, m, w_b,
                                                         lam_b, pert)))
    return path


def _near_collision(k: int, parity: str, m: int, omega: complex,
                    lam: complex, pert: PerturbationSplit) -> bool:
    """Distance test against the adjacent real-axis branches."""
    try:
        size = oracle.suggested_size(k, abs(omega.real), m + 2)
        mat = oracle.assemble(k, omega.real, size)
        eigs = oracle.oracle_eigenvalues(mat, m + 2)
        block = eigs.even if parity == "even" else eigs.odd
    except Exception:
        return False
    dists = [abs(lam - block[j]) for j in range(len(block)) if j != m]
    return bool(dists and min(dists) < pert.gamma / 4.0)


# ---------------------------------------------------------------------------
# holomorphy verification
# ---------------------------------------------------------------------------

@dataclass
class HolomorphyReport:
    center: complex
    radius: float
    n_nodes: int
    dbar_residual: float     # largest negative-frequency Fourier mode
    cauchy_integral: complex  # contour integral of lam dOmega (0 if holomorphic)


def verify_holomorphy(samples) -> HolomorphyReport:
    """Discrete Cauchy/dbar check for lambda(Omega) sampled on a circle.

    ``samples`` is a sequence of (omega, lam) pairs at equispaced angles
    (ascending, full turn).  For a holomorphic function all negative
    Fourier modes vanish up to aliasing, and the contour integral of
    lambda dOmega vanishes by Cauchy's theorem.
    """
    omegas = np.array([complex(w) for w, _ in samples])
    lams = np.array([complex(l) for _, l in samples])
    n = len(omegas)
    if n < 8:
        raise DomainError("need at least 8 circle samples")
    center = complex(np.mean(omegas))
    radii = np.abs(omegas - center)
    radius = float(np.mean(radii))
    if np.max(np.abs(radii - radius)) > 1e-8 * radius:
        raise DomainError("samples are not on a circle")
    coeffs = np.fft.fft(lams) / n
    neg = coeffs[n // 2 + 1:] if n > 2 else coeffs[:0]
    dbar = float(np.max(np.abs(neg))) if len(neg) else 0.0
    theta = np.angle(omegas - center)
    cauchy = complex(1j * radius * np.mean(lams * np.exp(1j * theta)) * 2 * np.pi)
    return HolomorphyReport(center=center, radius=radius, n_nodes=n,
                            dbar_residual=dbar, cauchy_integral=cauchy)


def trace_circle(m: int, parity: str, k: int, center: complex, radius: float,
                 n_nodes: int, strip: StripSpec,
                 lam_center: complex | None = None) -> list[tuple[complex, complex]]:
    """Continue a branch around a circle and return (omega, lam) samples.

    The branch is first walked from the real axis to the circle center.
    """
    if lam_center is None:
        steps = max(3, int(abs(center.imag) / 0.1) + 1)
        approach = [complex(center.real, center.imag * j / steps)
                    for j in range(steps + 1)]
        path = continue_eigenvalue(m, parity, k, approach, strip)
        lam_center = path.points[-1].lam
    out = []
    lam = lam_center
    thetas = 2.0 * np.pi * np.arange(n_nodes + 1) / n_nodes
    for th in thetas:
        w = center + radius * cmath.exp(1j * th)
        if not strip.contains(w):
            raise DomainError(f"circle point {w} outside the strip")
        lam, _, _ = newton_eigenvalue(lam, w, k, parity)
        out.append((w, lam))
    return out[:-1]


# ---------------------------------------------------------------------------
# projector diagnostics on truncations
# ---------------------------------------------------------------------------

def _opnorm2(M: np.ndarray, iters: int = 200, seed: int = 7) -> float:
    """Spectral norm via power iteration on M^H M (deterministic seed)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    lam_old = 0.0
    G = M.conj().T @ M
    for _ in range(iters):
        w = G @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
        if abs(lam - lam_old) <= 1e-12 * lam:
            break
        lam_old = lam
    return math.sqrt(lam)


def _contour_projector(A: np.ndarray, center: complex, radius: float,
                       n_nodes: int) -> np.ndarray:
    """(1/2 pi i) oint (lam - A)^(-1) dlam on a circle, trapezoid rule."""
    n = A.shape[0]
    Q = np.zeros_like(A)
    eye = np.eye(n, dtype=complex)
    for j in range(n_nodes):
        th = 2.0 * math.pi * j / n_nodes
        lam = center + radius * cmath.exp(1j * th)
        R = np.linalg.solve(lam * eye - A, eye)
        Q += R * (radius * cmath.exp(1j * th))
    return Q / n_nodes


def _adaptive_projector(A, center, radius, n_nodes) -> tuple[np.ndarray, int]:
    Q = _contour_projector(A, center, radius, n_nodes)
    while n_nodes < 512:
        Q2 = _contour_projector(A, center, radius, 2 * n_nodes)
        if _opnorm2(Q2 - Q) <= 1e-9 * (1.0 + _opnorm2(Q2)):
            return Q2, 2 * n_nodes
        Q, n_nodes = Q2, 2 * n_nodes
    raise ContourError("projector quadrature not converged; contour may "
                       "run too close to the spectrum")


@dataclass
class ProjectorReport:
    parity: str
    size: int
    c: float
    rho: float
    gamma: float
    N: int
    w_norm: float
    w_norm_ok: bool
    idempotency: list[float]     # ||Q^2 - Q|| per contour (cluster first)
    ranks: list[int]
    rank_ok: bool
    pk_diff: list[float]         # ||P_K - P_K0|| for K = 1..K_max
    pk_gap_ok: list[bool]        # gap condition lambda_(N+K+1)-lambda_(N+K) > gamma
    pk_bound_ok: bool            # diff <= 1/2 wherever the gap condition holds
    completeness_norms: list[float]   # ||(P_K - I) v|| trend for a fixed v
    n_nodes: int


def projector_diagnostics(k: int, omega: complex, size: int, c: float,
                          parity: str = "even", n_contours: int = 6,
                          n_nodes: int = 64, seed: int = 11) -> ProjectorReport:
    """Contour-integral projector checks on one parity block of the
    truncated complex-symmetric matrix at strip width c.

    Builds circles of radius rho around the selfadjoint eigenvalues (a
    merged cluster contour around the first N where gaps fall below
    gamma = 8 rho), verifies idempotency, ranks via traces, the
    ||P_K - P_K0|| <= 1/2 bound wherever the gap condition holds, and the
    strong-convergence proxy on a fixed test vector.
    """
    omega = complex(omega)
    pert = PerturbationSplit(c=c, k=abs(k))
    rho, gamma = pert.rho, pert.gamma

    mat = oracle.assemble(k, omega, size * 2)
    A = mat.dense(parity)[:size, :size].astype(complex)
    mat0 = oracle.assemble(k, omega.real, size * 2)
    A0 = mat0.dense(parity)[:size, :size].astype(complex)
    lam0, status = _kernels.tridiag_eigenvalues(
        np.real(np.diag(A0)).copy(), np.real(np.diag(A0, 1)).copy())
    if status != 0:
        raise ContourError("QL failed on the selfadjoint block")

    W = A - A0
    w_norm = _opnorm2(W, seed=seed)
    w_norm_ok = w_norm <= pert.w_bound * (1.0 + 1e-12)

    n_use = size // 2
    gaps = np.diff(lam0[: n_use + 1])
    N = 1
    for i in range(len(gaps)):
        if gaps[i] <= gamma:
            N = i + 2
    N = min(N, n_use - n_contours - 1)
    if N < 1:
        raise ContourError("truncation too small for the requested contours")

    contours = []
    if N == 1:
        contours.append((complex(lam0[0]), rho))
    else:
        ctr = 0.5 * (lam0[0] + lam0[N - 1])
        rad = 0.5 * (lam0[N - 1] - lam0[0]) + rho
        contours.append((complex(ctr), rad))
    for j in range(1, n_contours + 1):
        contours.append((complex(lam0[N - 1 + j]), rho))
    # separation sanity: each circle keeps distance >= rho/2 from outside
    # spectrum of A0
    for ci, (ctr, rad) in enumerate(contours):
        inside = np.abs(lam0[:n_use] - ctr) < rad
        outside = np.abs(lam0[:n_use] - ctr)[~inside]
        if len(outside) and outside.min() < rad + 0.5 * rho:
            raise ContourError(f"contour {ci} too close to outside spectrum "
                               f"(clearance {outside.min() - rad:.3g})")

    qs = []
    qs0 = []
    used_nodes = n_nodes
    for (ctr, rad) in contours:
        Q, used = _adaptive_projector(A, ctr, rad, n_nodes)
        Q0, _ = _adaptive_projector(A0, ctr, rad, n_nodes)
        used_nodes = max(used_nodes, used)
        qs.append(Q)
        qs0.append(Q0)

    idem = [float(_opnorm2(Q @ Q - Q)) for Q in qs]
    ranks = [int(round(float(np.trace(Q).real))) for Q in qs]
    rank_ok = (ranks[0] == N) and all(r == 1 for r in ranks[1:])

    pk_diff = []
    pk_gap_ok = []
    P = np.zeros_like(A)
    P0 = np.zeros_like(A)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    v /= np.linalg.norm(v)
    comp = []
    for K in range(len(qs)):
        P = P + qs[K]
        P0 = P0 + qs0[K]
        pk_diff.append(float(_opnorm2(P - P0)))
        top = N - 1 + K
        pk_gap_ok.append(bool(lam0[top + 1] - lam0[top] > gamma))
        comp.append(float(np.linalg.norm(P @ v - v)))
    bound_ok = all((not g) or (d <= 0.5 + 1e-9)
                   for g, d in zip(pk_gap_ok, pk_diff))

    return ProjectorReport(parity=parity, size=size, c=c, rho=rho,
                           gamma=gamma, N=N, w_norm=w_norm,
                           w_norm_ok=bool(w_norm_ok), idempotency=idem,
                           ranks=ranks, rank_ok=bool(rank_ok),
                           pk_diff=pk_diff, pk_gap_ok=pk_gap_ok,
                           pk_bound_ok=bool(bound_ok),
                           completeness_norms=comp, n_nodes=used_nodes)
