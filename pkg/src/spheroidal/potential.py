"""Transformed spheroidal potential, its derivatives, and the region partition.

The Sturm-Liouville form of the spheroidal wave operator on u in (0, pi/2] has
potential

    V(u) = Omega^2 sin^2 u + (k^2 - 1/4)/sin^2 u - mu,
    mu   = lambda - 2 Omega k + 1/4.

This module evaluates V, V', V'' in closed form, computes the semiclassical
quality functionals K and L (total-variation terms located analytically via
the sign changes of the next derivative), and splits (0, pi/2] into the
analysis regions P, J, S, I+-, C used by the certification engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePartitionError, DomainError, HypothesisError

HALF_PI = math.pi / 2.0

# Taylor data shared with the series initialiser:
# csc^2 u = 1/u^2 + sum CSC2_SERIES[n] u^(2n),  sin^2 u = sum SIN2_SERIES[n] u^(2n+2)
CSC2_SERIES = (1 / 3, 1 / 15, 2 / 189, 1 / 675, 2 / 10395, 1382 / 58046625,
               4 / 1403325, 3617 / 10854718875, 87734 / 2292899734125,
               349222 / 80596287646875)
SIN2_SERIES = (1.0, -1 / 3, 2 / 45, -1 / 315, 2 / 14175, -2 / 467775,
               4 / 42567525, -1 / 638512875, 2 / 97692469875,
               -2 / 9280784638125)


def csc2_minus_inv_sq(u):
    """1/sin^2 u - 1/u^2 without cancellation (series below u=0.5)."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) <= 0.5
    x = u[small] ** 2
    acc = np.zeros_like(x)
    for c in reversed(CSC2_SERIES):
        acc = acc * x + c
    out[small] = acc
    ub = u[~small]
    out[~small] = 1.0 / np.sin(ub) ** 2 - 1.0 / ub ** 2
    return out

# Default configuration constants for the region partition.  The source
# analysis only asserts that suitable values exist; these defaults make the
# runtime checks K <= delta and L <= 3/sqrt(Omega0) pass on the regression
# grid (lambda > 2*LAMBDA_BIG*omega, omega > OMEGA0).
KAPPA_DEFAULT = 4.0
LAMBDA_BIG_DEFAULT = 64.0
OMEGA0_DEFAULT = 16.0


# ---------------------------------------------------------------------------
# problem parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemParams:
    """One ODE instance: azimuthal index k, aspherical parameter and spectral
    parameter.  ``mu`` is always derived from the other three."""

    k: int
    omega: complex
    lam: complex

    @property
    def mu(self) -> complex:
        return self.lam - 2.0 * self.omega * self.k + 0.25

    @property
    def is_selfadjoint(self) -> bool:
        return self.omega.imag == 0.0 and self.lam.imag == 0.0

    def normalized(self) -> "ProblemParams":
        """Map (omega, k) -> (-omega, -k) so that Re omega >= 0.

        The operator is invariant under this transformation, so eigenvalues
        and the potential are unchanged.
        """
        if self.omega.real < 0:
            return ProblemParams(-self.k, -self.omega, self.lam)
        return self

    def real_parts(self) -> tuple[int, float, float]:
        if not self.is_selfadjoint:
            raise DomainError("real (selfadjoint) parameters required")
        return self.k, self.omega.real, self.lam.real


@dataclass(frozen=True)
class PotentialEval:
    """Pointwise potential data: V and its first two u-derivatives."""

    u: float
    V: float
    Vp: float
    Vpp: float


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

class SpheroidalPotential:
    """Closed-form V, V', V'', V''' for real (selfadjoint) parameters.

    All methods accept scalars or numpy arrays.
    """

    kernel_kind = 0  # integer tag consumed by the jitted integrator

    def __init__(self, params: ProblemParams):
        p = params.normalized()
        k, om, lam = p.real_parts()
        self.params = p
        self.k = k
        self.om = om
        self.mu = lam - 2.0 * om * k + 0.25
        self.c2 = k * k - 0.25  # coefficient of the 1/sin^2 pole
        self.singular_at_zero = True

    def kernel_args(self) -> tuple[float, float, float]:
        return (float(self.c2), self.om, self.mu)

    def v(self, u):
        s2 = np.sin(u) ** 2
        return self.om ** 2 * s2 + self.c2 / s2 - self.mu

    def dv(self, u):
        s = np.sin(u)
        c = np.cos(u)
        return 2.0 * self.om ** 2 * s * c - 2.0 * self.c2 * c / s ** 3

    def d2v(self, u):
        s = np.sin(u)
        c = np.cos(u)
        return (2.0 * self.om ** 2 * (c * c - s * s)
                + 2.0 * self.c2 * (1.0 / s ** 2 + 3.0 * c * c / s ** 4))

    def d3v(self, u):
        s = np.sin(u)
        c = np.cos(u)
        s2 = s * s
        poly = -8.0 * self.om ** 2 * s2 ** 3 + 8.0 * self.c2 * s2 - 24.0 * self.c2
        return c / s ** 5 * poly

    def b_regular(self, u):
        """V - (k^2-1/4)/u^2, the part of V regular at u=0, evaluated
        without cancellation (for k=0 this is V + 1/(4 u^2))."""
        u = np.asarray(u, dtype=float)
        return (self.om ** 2 * np.sin(u) ** 2 - self.mu
                + self.c2 * csc2_minus_inv_sq(u))

    def d3v_roots(self, a: float, b: float) -> list[float]:
        """Zeros of V''' in (a, b).

        V''' = cos(u)/sin^5(u) * q(sin^2 u) with q cubic, so there are at
        most three interior zeros below pi/2 (plus the endpoint cos term).
        """
        if self.om != 0.0:
            coeffs = [-8.0 * self.om ** 2, 0.0, 8.0 * self.c2, -24.0 * self.c2]
        elif self.c2 != 0.0:
            coeffs = [8.0 * self.c2, -24.0 * self.c2]
        else:
            return []
        out = []
        for r in np.roots(coeffs):
            if abs(r.imag) < 1e-12 * (1 + abs(r.real)) and 0.0 < r.real < 1.0:
                u = math.asin(math.sqrt(r.real))
                if a < u < b:
                    out.append(u)
        return sorted(out)

    def minimum(self) -> float | None:
        """Location u0 of the interior minimum (k != 0 only)."""
        if self.c2 <= 0 or self.om <= 0:
            return None
        s2 = math.sqrt(self.c2) / self.om
        if s2 >= 1.0:
            return None
        return math.asin(math.sqrt(s2))


class ConstantPotential:
    """V identically equal to ``value``; validation harness."""

    kernel_kind = 1

    def __init__(self, value: float):
        self.value = float(value)
        self.singular_at_zero = False

    def kernel_args(self) -> tuple[float, float, float]:
        return (self.value, 0.0, 0.0)

    def v(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.value)

    def dv(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    d2v = dv
    d3v = dv

    def d3v_roots(self, a, b):
        return []


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------

def eval_potential(u: float, p: ProblemParams) -> PotentialEval:
    """Evaluate V, V', V'' at a single angle u in (0, pi/2]."""
    if not (0.0 < u <= HALF_PI + 1e-15):
        raise DomainError(f"u={u} outside (0, pi/2]")
    pot = SpheroidalPotential(p)
    return PotentialEval(u=u, V=float(pot.v(u)), Vp=float(pot.dv(u)),
                         Vpp=float(pot.d2v(u)))


# ---------------------------------------------------------------------------
# small numeric utilities (analysis-grade, dependency-free)
# ---------------------------------------------------------------------------

def bisect_root(f, a: float, b: float, tol: float = 1e-12) -> float:
    """Bisection for a sign change of f on [a, b] to absolute tolerance tol."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise DomainError(f"no sign change on [{a}, {b}]")
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
        if b - a < tol:
            break
    return 0.5 * (a + b)


def _scan_sign_changes(f, a: float, b: float, n: int = 1024) -> list[float]:
    """Zeros of f located by a sign scan on n intervals plus bisection."""
    xs = np.linspace(a, b, n + 1)
    vals = np.array([f(x) for x in xs])
    roots = []
    for i in range(n):
        if vals[i] == 0.0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(bisect_root(f, xs[i], xs[i + 1], tol=1e-13))
    return roots


def _sup_on_interval(f, a: float, b: float, n: int = 2048) -> float:
    """Supremum of f on [a, b]: dense scan plus golden-section refinement."""
    xs = np.linspace(a, b, n + 1)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, n)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - gr * (hi - lo)
    d = lo + gr * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(80):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - gr * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + gr * (hi - lo)
            fd = f(d)
        if hi - lo < 1e-13 * (1 + abs(lo)):
            break
    return max(float(vals[i]), fc, fd)


# ---------------------------------------------------------------------------
# K and L functionals
# ---------------------------------------------------------------------------

def _check_sign_and_monotone(pot, a, b, sign: int, n: int = 512) -> None:
    """sign=-1: require V<0 on [a,b]; sign=+1: require V>0.  Also require
    V' of a fixed sign (monotonicity)."""
    xs = np.linspace(a, b, n + 1)
    v = np.asarray(pot.v(xs), dtype=float)
    if sign < 0 and v.max() >= 0:
        raise HypothesisError("V < 0", where=float(xs[int(np.argmax(v))]))
    if sign > 0 and v.min() <= 0:
        raise HypothesisError("V > 0", where=float(xs[int(np.argmin(v))]))
    dv = np.asarray(pot.dv(xs), dtype=float)
    if dv.max() > 0 and dv.min() < 0:
        # allow a root at the very endpoints (e.g. interval starting at u0)
        inner = dv[1:-1]
        if inner.max() > 0 and inner.min() < 0:
            raise HypothesisError("monotonicity of V",
                                  where=float(xs[1 + int(np.argmax(inner))]))


def k_functional(pot, a: float, b: float) -> float:
    """K = (sup|V''| + TV V'')/V_max^2 + sup V'^2/|V|^3 on [a, b], V < 0.

    The total variation of V'' is computed exactly from the sign changes of
    V''' (analytic root isolation, at most four on any subinterval); the
    suprema by scan-and-refine.
    """
    if b <= a:
        raise DomainError("empty interval")
    _check_sign_and_monotone(pot, a, b, sign=-1)
    pts = [a] + pot.d3v_roots(a, b) + [b]
    vpp = [float(pot.d2v(u)) for u in pts]
    sup_vpp = max(abs(v) for v in vpp)
    tv_vpp = sum(abs(vpp[i + 1] - vpp[i]) for i in range(len(vpp) - 1))
    vmax = _sup_on_interval(lambda u: float(pot.v(u)), a, b)
    sup_ratio = _sup_on_interval(
        lambda u: float(pot.dv(u)) ** 2 / abs(float(pot.v(u))) ** 3, a, b)
    return (sup_vpp + tv_vpp) / (vmax * vmax) + sup_ratio


def l_functional(pot, a: float, b: float) -> float:
    """L = sup(3/sqrt(V) + V'/V^2) + TV(V'/V^2) on [a, b], V > 0 increasing.

    TV is taken between the sign changes of d/du (V'/V^2), located from
    V'' V - 2 V'^2.
    """
    if b <= a:
        return 0.0
    _check_sign_and_monotone(pot, a, b, sign=+1)

    def g(u):
        return float(pot.dv(u)) / float(pot.v(u)) ** 2

    crit = _scan_sign_changes(
        lambda u: float(pot.d2v(u)) * float(pot.v(u)) - 2.0 * float(pot.dv(u)) ** 2,
        a, b)
    pts = [a] + crit + [b]
    gv = [g(u) for u in pts]
    tv = sum(abs(gv[i + 1] - gv[i]) for i in range(len(gv) - 1))
    sup_part = _sup_on_interval(
        lambda u: 3.0 / math.sqrt(float(pot.v(u))) + g(u), a, b)
    return sup_part + tv


def compute_K(interval: tuple[float, float], p: ProblemParams) -> float:
    """Spheroidal specialisation of :func:`k_functional`."""
    a, b = interval
    return k_functional(SpheroidalPotential(p), a, b)


def compute_L(interval: tuple[float, float], p: ProblemParams) -> float:
    """Spheroidal specialisation of :func:`l_functional`."""
    a, b = interval
    return l_functional(SpheroidalPotential(p), a, b)


# ---------------------------------------------------------------------------
# region partition
# ---------------------------------------------------------------------------

@dataclass
class RegionPartition:
    """Breakpoints of (0, pi/2] in the k=0 / k!=0 layouts.

    k = 0:   P=(0,uJ], J=[uJ,u0], S=[u0,uPlusS], I+=[uPlusS,uI], C=[uI,pi/2]
    k != 0:  W=(0,uMinus], I-=[uMinus,uMinusS], S=[uMinusS,uPlusS],
             I+=[uPlusS,uI], C=[uI,pi/2]
    (uPlus lies inside I+; u1 is recorded for k=0 but not a region boundary.)
    """

    k: int
    kappa: float
    lambda_big: float
    omega0: float = OMEGA0_DEFAULT
    uJ: float | None = None
    u0: float = 0.0
    u1: float | None = None
    uMinus: float | None = None
    uMinusS: float | None = None
    uPlusS: float = 0.0
    uPlus: float = 0.0
    uI: float = 0.0
    in_range: bool = True          # lambda > 2*Lambda*omega and omega > Omega0
    notes: list[str] = field(default_factory=list)

    def ordered_breakpoints(self) -> list[tuple[str, float]]:
        names = ("uJ", "uMinus", "uMinusS", "u0", "u1", "uPlusS", "uPlus", "uI")
        # u1 is informational for k=0 and may exceed uPlusS; skip in ordering
        out = []
        for n in names:
            v = getattr(self, n)
            if v is not None and n != "u1":
                out.append((n, v))
        return out

    def regions(self) -> dict[str, tuple[float, float]]:
        out: dict[str, tuple[float, float]] = {}
        if self.k == 0:
            out["P"] = (0.0, self.uJ)
            out["J"] = (self.uJ, self.u0)
        else:
            out["W"] = (0.0, self.uMinus)
            out["I-"] = (self.uMinus, self.uMinusS)
        left_s = self.u0 if self.k == 0 else self.uMinusS
        out["S"] = (left_s, self.uPlusS)
        out["I+"] = (self.uPlusS, self.uI)
        out["C"] = (self.uI, HALF_PI)
        return out


def partition_regions(p: ProblemParams, kappa: float = KAPPA_DEFAULT,
                      lambda_big: float = LAMBDA_BIG_DEFAULT,
                      omega0: float = OMEGA0_DEFAULT) -> RegionPartition:
    """Compute the analysis breakpoints for real (omega, lambda), omega > 0.

    Breakpoints defined implicitly (u+-, u+-^S, u^I) are located by bisection
    on strictly monotone functions; the defining residuals are ~1e-12 in u.
    Degenerate layouts raise :class:`DegeneratePartitionError` rather than
    reordering breakpoints.
    """
    k, om, lam = p.normalized().real_parts()
    if om <= 0:
        raise DomainError("partition requires omega > 0")
    pot = SpheroidalPotential(p)
    part = RegionPartition(k=k, kappa=kappa, lambda_big=lambda_big, omega0=omega0)
    part.in_range = (om > omega0) and (lam > 2.0 * lambda_big * om)
    if not part.in_range:
        part.notes.append("outside recommended range lambda > 2*Lambda*omega, "
                          "omega > Omega0")

    if k == 0:
        if lam <= 1.0:
            raise DegeneratePartitionError(
                "k=0 partition needs lambda > 1 (uJ = 1/(8 sqrt(lam) log^2 lam))")
        part.uJ = 1.0 / (8.0 * math.sqrt(lam) * math.log(lam) ** 2)
        part.u0 = kappa / math.sqrt(lam)
        part.u1 = 1.0 / math.sqrt(om)
        if not (0.0 < part.uJ < part.u0 < HALF_PI):
            raise DegeneratePartitionError(
                f"breakpoint order failed: uJ={part.uJ:.4g}, u0={part.u0:.4g}")
        u_lo = part.u0
    else:
        u0 = pot.minimum()
        if u0 is None:
            raise DegeneratePartitionError(
                f"no interior minimum: omega < sqrt(k^2-1/4) for k={k}")
        part.u0 = u0
        if pot.v(u0) >= 0:
            raise DegeneratePartitionError("V(u0) >= 0; potential never negative")
        part.uMinus = bisect_root(lambda u: float(pot.v(u)),
                                  min(1e-8, u0 * 1e-6), u0)
        u_lo = u0

    v0 = float(pot.v(part.u0))
    if v0 >= 0.0:
        raise DegeneratePartitionError(f"V(u0)={v0:.4g} >= 0 at u0={part.u0:.4g}")
    if v0 > -lambda_big * om:
        part.notes.append(f"V(u0)={v0:.4g} above -Lambda*omega="
                          f"{-lambda_big * om:.4g}")

    # u+ : sign change of V on [u0, pi/2], or pi/2 if V stays negative
    if float(pot.v(HALF_PI)) < 0.0:
        part.uPlus = HALF_PI
    else:
        part.uPlus = bisect_root(lambda u: float(pot.v(u)), u_lo, HALF_PI)

    # u+^S : |V| (u+ - u)^2 = kappa^2, strictly decreasing on (u0, u+)
    def gplus(u):
        return abs(float(pot.v(u))) * (part.uPlus - u) ** 2 - kappa * kappa

    if gplus(u_lo) <= 0.0:
        raise DegeneratePartitionError(
            f"empty S region: |V(u0)| (u+-u0)^2 = {gplus(u_lo) + kappa**2:.4g}"
            f" <= kappa^2 = {kappa**2:.4g}")
    part.uPlusS = bisect_root(gplus, u_lo, part.uPlus)

    if k != 0:
        def gminus(u):
            return abs(float(pot.v(u))) * (u - part.uMinus) ** 2 - kappa * kappa

        if gminus(part.u0) <= 0.0:
            raise DegeneratePartitionError("empty left S region (k != 0)")
        part.uMinusS = bisect_root(gminus, part.uMinus, part.u0)

    # u^I : V = omega^(3/2) right of u+, or pi/2
    thr = om ** 1.5
    if float(pot.v(HALF_PI)) < thr:
        part.uI = HALF_PI
    else:
        part.uI = bisect_root(lambda u: float(pot.v(u)) - thr,
                              part.uPlus, HALF_PI)

    # final ordering sanity; never silently reorder
    bps = part.ordered_breakpoints()
    for (n1, v1), (n2, v2) in zip(bps, bps[1:]):
        if v2 < v1:
            raise DegeneratePartitionError(f"breakpoints out of order: "
                                           f"{n1}={v1:.6g} > {n2}={v2:.6g}")
    return part


def v_at_minimum_closed_form(p: ProblemParams) -> float:
    """V(u0) = Omega(2 sqrt(k^2-1/4) + 2k) - lambda - 1/4 for k != 0."""
    k, om, lam = p.normalized().real_parts()
    if k == 0:
        raise DomainError("closed form requires k != 0")
    return om * (2.0 * math.sqrt(k * k - 0.25) + 2.0 * k) - lam - 0.25
