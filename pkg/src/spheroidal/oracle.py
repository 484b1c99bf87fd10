"""Independent eigenvalue route: normalized associated-Legendre basis.

The operator acts on the basis P_l^k (orthonormal on the sphere) as
l(l+1) + 2*omega*k plus omega^2 sin^2(theta).  With x = cos(theta) the
three-term recurrence x P_l = c_l P_(l+1) + c_(l-1) P_(l-1),
c_l = sqrt(((l+1)^2 - k^2)/((2l+1)(2l+3))), applied twice makes sin^2 =
1 - x^2 couple l with l and l+-2 only, so each parity block (l - |k| even
or odd) is symmetric tridiagonal.  Eigenvalues come from an in-repo
implicit-QL solver, which keeps this route fully independent of the
shooting code and of external linear algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import tridiag_eigenvalues
from .errors import DomainError, TruncationNotConvergedError

_K_MAX_DOCUMENTED = 20  # recurrence validated for |k| <= 20


def _recurrence_c(l: np.ndarray, k: int) -> np.ndarray:
    """c_l of the normalized associated-Legendre recurrence; zero for l<|k|."""
    num = (l + 1.0) ** 2 - k * k
    num = np.where(l >= abs(k), num, 0.0)
    return np.sqrt(num / ((2.0 * l + 1.0) * (2.0 * l + 3.0)))


@dataclass
class OracleMatrix:
    """Banded truncation of the operator, split into parity blocks.

    Block arrays are complex when omega is complex, real otherwise.
    ``d_even/e_even`` hold the tridiagonal for l = |k|, |k|+2, ... and
    ``d_odd/e_odd`` for l = |k|+1, |k|+3, ...
    """

    k: int
    omega: complex
    size: int
    base_degree: int
    d_even: np.ndarray
    e_even: np.ndarray
    d_odd: np.ndarray
    e_odd: np.ndarray

    def block(self, parity: str) -> tuple[np.ndarray, np.ndarray]:
        if parity == "even":
            return self.d_even, self.e_even
        if parity == "odd":
            return self.d_odd, self.e_odd
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")

    def dense(self, parity: str) -> np.ndarray:
        d, e = self.block(parity)
        n = len(d)
        out = np.zeros((n, n), dtype=d.dtype)
        out[np.arange(n), np.arange(n)] = d
        out[np.arange(n - 1), np.arange(1, n)] = e
        out[np.arange(1, n), np.arange(n - 1)] = e
        return out


def assemble(k: int, omega: complex, size: int) -> OracleMatrix:
    """Truncated operator matrix over l = |k| .. |k|+size-1.

    Uses the (omega,k) -> (-omega,-k) symmetry so that the stored block is
    always the normalized-parameter one.
    """
    if size < 8:
        raise DomainError("size must be at least 8")
    if abs(k) > _K_MAX_DOCUMENTED:
        raise DomainError(f"|k| <= {_K_MAX_DOCUMENTED} supported")
    omega = complex(omega)
    if omega.real < 0:
        omega, k = -omega, -k
    ak = abs(k)
    if omega.imag == 0.0:
        omega_s: complex | float = omega.real
    else:
        omega_s = omega

    ls = np.arange(ak, ak + size, dtype=float)
    c = _recurrence_c(ls, k)
    c_prev = _recurrence_c(ls - 1.0, k)
    # sin^2 theta = 1 - x^2: diagonal 1 - c_l^2 - c_(l-1)^2, off-diag -c_l c_(l+1)
    diag_sin2 = 1.0 - c * c - c_prev * c_prev
    off_sin2 = -c[:-2] * c[1:-1]          # couples l and l+2

    diag = ls * (ls + 1.0) + 2.0 * omega_s * k + omega_s * omega_s * diag_sin2
    off = omega_s * omega_s * off_sin2

    d_even = diag[0::2]
    e_even = off[0::2]
    d_odd = diag[1::2]
    e_odd = off[1::2]
    # the off-diagonal arrays must be one shorter than the diagonals
    e_even = e_even[: len(d_even) - 1]
    e_odd = e_odd[: len(d_odd) - 1]
    return OracleMatrix(k=k, omega=omega, size=size, base_degree=ak,
                        d_even=np.asarray(d_even), e_even=np.asarray(e_even),
                        d_odd=np.asarray(d_odd), e_odd=np.asarray(e_odd))


@dataclass
class OracleEigenvalues:
    k: int
    omega: float
    count: int
    even: np.ndarray
    odd: np.ndarray
    size: int
    confirm_size: int
    max_rel_shift: float   # truncation evidence: change when size -> size+16


def _block_eigenvalues(mat: OracleMatrix, parity: str, count: int) -> np.ndarray:
    d, e = mat.block(parity)
    if np.iscomplexobj(d):
        raise DomainError("QL route requires real omega")
    eigs, status = tridiag_eigenvalues(np.asarray(d, dtype=float),
                                       np.asarray(e, dtype=float))
    if status != 0:
        raise TruncationNotConvergedError("QL iteration failed to converge")
    return eigs[:count]


def oracle_eigenvalues(mat: OracleMatrix, count: int) -> OracleEigenvalues:
    """First ``count`` eigenvalues of each parity block, ascending.

    Truncation error is estimated by recomputing at size+16; the reported
    eigenvalues must agree to 1e-9 relative, otherwise
    :class:`TruncationNotConvergedError` is raised.
    """
    if count > mat.size // 2 - 4:
        raise DomainError(f"count={count} exceeds truncation guard "
                          f"size/2 - 4 = {mat.size // 2 - 4}")
    even = _block_eigenvalues(mat, "even", count)
    odd = _block_eigenvalues(mat, "odd", count)
    bigger = assemble(mat.k, mat.omega, mat.size + 16)
    even_b = _block_eigenvalues(bigger, "even", count)
    odd_b = _block_eigenvalues(bigger, "odd", count)
    shift = 0.0
    for a, b in ((even, even_b), (odd, odd_b)):
        shift = max(shift, float(np.max(np.abs(a - b) / (1.0 + np.abs(b)))))
    if shift > 1e-9:
        raise TruncationNotConvergedError(
            f"eigenvalues moved by {shift:.2e} rel. when size {mat.size} -> "
            f"{mat.size + 16}; increase size")
    return OracleEigenvalues(k=mat.k, omega=float(mat.omega.real), count=count,
                             even=even_b, odd=odd_b, size=mat.size,
                             confirm_size=mat.size + 16, max_rel_shift=shift)


def suggested_size(k: int, omega: float, m_max: int) -> int:
    """Truncation heuristic: enough tail above index m_max to decouple it."""
    base = 2 * (m_max + 10)
    coupling = int(1.2 * math.sqrt(abs(omega) * (2 * m_max + 3))) + int(abs(omega) / 4)
    return max(48, base + 2 * coupling)


def eigenvalue_estimate(k: int, omega: float, parity: str, m: int) -> float:
    """Matrix-route estimate for the branch with m interior nodes."""
    size = suggested_size(k, omega, m)
    for _ in range(4):
        mat = assemble(k, omega, size)
        try:
            eigs = oracle_eigenvalues(mat, m + 1)
        except TruncationNotConvergedError:
            size += 32
            continue
        return float(eigs.even[m] if parity == "even" else eigs.odd[m])
    raise TruncationNotConvergedError(f"no converged truncation for k={k}, "
                                      f"omega={omega}, m={m}")
