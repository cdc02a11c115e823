"""Prolate spheroidal wave functions (order m = 0) for the finite sinc kernel.

Normalization used throughout the package:

* ``psi_j`` is an eigenfunction of the time/band-limiting operator

      int_{-1}^{1} psi_j(t) sin(c (t - s)) / (pi (t - s)) dt = lambda_j psi_j(s),

* the whole-line norm is one, ``int_R psi_j^2 = 1``, and
* the interval norm is the eigenvalue, ``int_{-1}^{1} psi_j^2 = lambda_j``.

Other Slepian conventions (unit interval norm, ``S_0n(c, 1) = 1``, ...) differ by
order-dependent constants, so values are not interchangeable with those of other
libraries without rescaling.

Inside ``[-1, 1]`` each function is stored as a Legendre series obtained from the
Bouwkamp tridiagonal matrices of the commuting differential operator.  The
eigenvalues follow from the value (or slope) of the series at the origin, which
keeps full relative precision even when ``lambda_j`` is far below machine
epsilon.  Outside the interval the functions are evaluated through the finite
Fourier transform of the Legendre series, i.e. a spherical-Bessel expansion,
rather than by dividing the sinc integral by a tiny ``lambda_j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.special import spherical_jn

from .errors import (
    EigenvalueUnderflow,
    NonConvergence,
    OrderOutOfRange,
    UnderflowOrder,
)
from .io import write_csv

#: Orders whose eigenvalue falls below this value are treated as unavailable.
LAMBDA_FLOOR = 1e-300
#: Sum over all even orders of (2 pi / c) psi_j(0)^2.  The PSWFs form a
#: complete basis of the band-limited functions, whose reproducing kernel at
#: the origin is c / pi, so the constant equals 2 for every c.
NOISE_KERNEL_TOTAL = 2.0
#: Default highest even order in the noise kernel G(c, s').
DEFAULT_KERNEL_TRUNCATION = 40

_TAIL_TOL = 1e-15
_MAX_LEGENDRE = 4000
_TRUST_COMPONENT = 1e-6


def _bouwkamp(c: float, size: int):
    k = np.arange(size, dtype=float)
    diag = k * (k + 1) + c * c * (2 * k * (k + 1) - 1) / ((2 * k + 3) * (2 * k - 1))
    kk = k[:-2]
    off = c * c * (kk + 2) * (kk + 1) / ((2 * kk + 3) * np.sqrt((2 * kk + 1) * (2 * kk + 5)))
    return diag, off


def _refine_leading(vec: np.ndarray, d: np.ndarray, o: np.ndarray, chi: float) -> np.ndarray:
    """Recompute the small leading components of a tridiagonal eigenvector.

    Starting from the boundary row, the ratios ``v[a] / v[a+1]`` follow a
    continued fraction that is well conditioned while ``d[a] - chi`` dominates.
    Dense solvers only give these components to absolute (not relative)
    accuracy, which is what limits the eigenvalue formula for tiny lambda.
    """
    big = np.abs(vec) >= _TRUST_COMPONENT * np.max(np.abs(vec))
    start = int(np.argmax(big))
    if start == 0:
        return vec
    ratios = np.empty(start)
    prev = 0.0
    for a in range(start):
        denom = (d[a] - chi) + (o[a - 1] * prev if a > 0 else 0.0)
        ratios[a] = -o[a] / denom
        prev = ratios[a]
    out = vec.copy()
    for a in range(start - 1, -1, -1):
        out[a] = ratios[a] * out[a + 1]
    return out


@dataclass(frozen=True)
class SlepianBasis:
    """Eigen-system of the sinc kernel on [-1, 1] up to order ``j_max``."""

    c: float
    j_max: int
    eigenvalues: np.ndarray
    log_eigenvalues: np.ndarray
    # row j: ordinary Legendre coefficients of psi_j / sqrt(lambda_j) on [-1, 1]
    legendre: np.ndarray
    # signed transform factors: int_{-1}^{1} e^{icxt} u_j(t) dt = i^j nu_j u_j(x)
    nu: np.ndarray
    couplings: np.ndarray
    parities: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("eigenvalues", "log_eigenvalues", "legendre", "nu", "couplings"):
            getattr(self, name).setflags(write=False)

    @property
    def n_orders(self) -> int:
        return self.j_max + 1

    def check_order(self, j: int) -> int:
        j = int(j)
        if j < 0 or j > self.j_max:
            raise OrderOutOfRange(f"order {j} outside 0..{self.j_max}")
        return j

    def values(self, s, orders=None) -> np.ndarray:
        """Matrix of psi_j(s) with one row per order (whole real line)."""
        orders = list(range(self.n_orders) if orders is None else orders)
        for j in orders:
            self.check_order(j)
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty((len(orders), s.size))
        inside = np.abs(s) <= 1.0
        if np.any(inside):
            for row, j in enumerate(orders):
                out[row, inside] = eval_inside(self, j, s[inside])
        if np.any(~inside):
            out[:, ~inside] = _fourier_series(self, orders, s[~inside])
        return out

    def table_rows(self):
        return [
            (self.c, j, float(self.eigenvalues[j]), float(self.couplings[j]), self.parities[j])
            for j in range(self.n_orders)
        ]


def build_basis(c: float, j_max: int) -> SlepianBasis:
    """Compute PSWFs psi_0..psi_{j_max} for bandwidth parameter ``c``."""
    c = float(c)
    j_max = int(j_max)
    if not c > 0 or not math.isfinite(c):
        raise ValueError(f"c must be positive, got {c}")
    if j_max < 0:
        raise ValueError(f"j_max must be >= 0, got {j_max}")

    size = j_max + 2 * math.ceil(c) + 40
    while True:
        coeffs, nus, logl = _solve(c, j_max, size)
        if coeffs is not None:
            break
        size *= 2
        if size > _MAX_LEGENDRE:
            raise NonConvergence(f"Legendre expansion did not converge for c={c}, j_max={j_max}")

    log_floor = math.log(LAMBDA_FLOOR)
    if logl[-1] < log_floor:
        safe = int(np.nonzero(logl >= log_floor)[0].max()) if np.any(logl >= log_floor) else -1
        raise UnderflowOrder(
            f"lambda_{j_max}(c={c}) = exp({logl[-1]:.1f}) is below the floor {LAMBDA_FLOOR:g}; "
            f"largest safe order is {safe}",
            largest_safe_order=safe,
        )
    if np.any(np.diff(logl) >= 0):
        raise NonConvergence(f"eigenvalues for c={c} are not strictly decreasing")

    lam = np.minimum(np.exp(logl), 1.0)
    psi0 = np.sqrt(lam) * np.array(
        [npleg.legval(0.0, coeffs[j]) if j % 2 == 0 else 0.0 for j in range(j_max + 1)]
    )
    couplings = np.sqrt(2 * np.pi / c) * np.abs(psi0)
    couplings[1::2] = 0.0
    parities = tuple("even" if j % 2 == 0 else "odd" for j in range(j_max + 1))
    return SlepianBasis(c, j_max, lam, logl, coeffs, nus, couplings, parities)


def _solve(c: float, j_max: int, size: int):
    diag, off = _bouwkamp(c, size)
    coeffs = np.zeros((j_max + 1, size))
    nus = np.zeros(j_max + 1)
    logl = np.zeros(j_max + 1)
    for parity in (0, 1):
        orders = list(range(parity, j_max + 1, 2))
        if not orders:
            continue
        idx = np.arange(parity, size, 2)
        d, o = diag[idx], off[idx[:-1]]
        try:
            chis, vecs = eigh_tridiagonal(d, o, select="i", select_range=(0, len(orders) - 1))
        except LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise NonConvergence(str(exc)) from exc
        for i, n in enumerate(orders):
            beta = _refine_leading(vecs[:, i], d, o, chis[i])
            tail = np.max(np.abs(beta[-3:]))
            if tail > _TAIL_TOL:
                return None, None, None
            std = np.zeros(size)
            std[idx] = beta * np.sqrt(idx + 0.5)
            if parity == 0:
                at0 = npleg.legval(0.0, std)
                if at0 < 0:
                    std, beta, at0 = -std, -beta, -at0
                nu = math.sqrt(2.0) * beta[0] / at0
            else:
                slope = npleg.legval(0.0, npleg.legder(std))
                if slope < 0:
                    std, beta, slope = -std, -beta, -slope
                nu = c * math.sqrt(2.0 / 3.0) * beta[0] / slope
            # i^n nu u(0) = sqrt(2) beta_0 fixes the sign of nu relative to i^n
            nu *= (-1) ** (n // 2)
            coeffs[n] = std
            nus[n] = nu
            # beta_0 underflows to zero long after lambda has passed the floor
            logl[n] = math.log(c / (2 * math.pi)) + 2 * math.log(abs(nu)) if nu != 0 else -math.inf
    return coeffs, nus, logl


def eval_inside(basis: SlepianBasis, j: int, s):
    """psi_j(s) for |s| <= 1."""
    j = basis.check_order(j)
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) > 1.0):
        raise ValueError("eval_inside requires |s| <= 1")
    out = math.sqrt(basis.eigenvalues[j]) * npleg.legval(s_arr, basis.legendre[j])
    return float(out) if out.ndim == 0 else out


def eval_outside(basis: SlepianBasis, j: int, s):
    """psi_j(s) for |s| > 1 via the finite Fourier transform of the Legendre series."""
    j = basis.check_order(j)
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) <= 1.0):
        raise ValueError("eval_outside requires |s| > 1")
    if basis.log_eigenvalues[j] < math.log(LAMBDA_FLOOR):
        raise EigenvalueUnderflow(f"lambda_{j} below floor; cannot continue psi_{j} off the interval")
    out = _fourier_series(basis, [j], s_arr.ravel())[0].reshape(s_arr.shape)
    if not np.all(np.isfinite(out)):
        raise EigenvalueUnderflow(f"continuation of psi_{j} lost its dynamic range")
    return float(out) if out.ndim == 0 else out


def _fourier_series(basis: SlepianBasis, orders, s: np.ndarray) -> np.ndarray:
    """Rows psi_j(s), |s| > 1, for several orders sharing one Bessel table.

    Uses int_{-1}^{1} e^{izt} P_k(t) dt = 2 i^k j_k(z) term by term; the factor
    i^(k - j) is real because only k with the parity of j contribute.
    """
    orders = list(orders)
    s = np.asarray(s, dtype=float)
    z = basis.c * np.abs(s)
    kmax = max(int(np.nonzero(basis.legendre[j])[0].max()) for j in orders)
    ks = np.arange(kmax + 1)
    bessel = spherical_jn(ks[:, None], z[None, :])
    out = np.empty((len(orders), s.size))
    for row, j in enumerate(orders):
        a = basis.legendre[j][: kmax + 1]
        signs = np.where(((ks - j) // 2) % 2 == 0, 1.0, -1.0)
        signs[(ks - j) % 2 == 1] = 0.0
        total = 2.0 * ((a * signs) @ bessel)
        if j % 2 == 1:
            total = total * np.sign(s)
        out[row] = math.sqrt(basis.eigenvalues[j]) * total / basis.nu[j]
    return out


def evaluate(basis: SlepianBasis, j: int, s):
    """psi_j(s) anywhere on the real line."""
    j = basis.check_order(j)
    s_arr = np.asarray(s, dtype=float)
    inside = np.abs(s_arr) <= 1.0
    out = np.empty(s_arr.shape)
    if np.any(inside):
        out[inside] = eval_inside(basis, j, s_arr[inside])
    if np.any(~inside):
        out[~inside] = eval_outside(basis, j, s_arr[~inside])
    return float(out) if out.ndim == 0 else out


def coupling(basis: SlepianBasis, j: int) -> float:
    """A_j = sqrt(2 pi / c) |psi_j(0)|; zero for odd orders by parity."""
    j = basis.check_order(j)
    return float(basis.couplings[j])


def whole_line_integral(basis: SlepianBasis, j: int) -> float:
    """Signed int_R psi_j(s) ds.

    From the Fourier self-reproduction of the PSWFs, the transform of psi_j at
    zero frequency is sqrt(2 pi / (c lambda_j)) psi_j(0); this is the coupling
    divided by sqrt(lambda_j).
    """
    j = basis.check_order(j)
    if j % 2:
        return 0.0
    return float(basis.couplings[j] / math.sqrt(basis.eigenvalues[j]))


def interval_integral(basis: SlepianBasis, j: int) -> float:
    """int_{-1}^{1} psi_j(s) ds (exact from the Legendre series)."""
    j = basis.check_order(j)
    if j % 2:
        return 0.0
    return float(2.0 * basis.legendre[j][0] * math.sqrt(basis.eigenvalues[j]))


@dataclass(frozen=True)
class NoiseKernelTable:
    c: float
    grid: np.ndarray
    values: np.ndarray
    truncation_order: int


def _extended(basis: SlepianBasis, truncation: int):
    """Basis covering even orders up to ``truncation`` (clamped at eigenvalue underflow)."""
    truncation = int(truncation)
    if truncation < 0:
        raise ValueError("truncation must be >= 0")
    truncation -= truncation % 2
    if truncation <= basis.j_max:
        return basis, truncation
    try:
        return build_basis(basis.c, truncation), truncation
    except UnderflowOrder as exc:
        truncation = exc.largest_safe_order - exc.largest_safe_order % 2
        return build_basis(basis.c, truncation), truncation


def noise_kernel(basis: SlepianBasis, grid, truncation: int = DEFAULT_KERNEL_TRUNCATION) -> NoiseKernelTable:
    """G(c, s') = sum over even j <= truncation of (2 pi / c) psi_j(0)^2 psi_j(s')^2."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) > 1.0):
        raise ValueError("noise kernel grid must lie in [-1, 1]")
    src, truncation = _extended(basis, truncation)
    values = np.zeros_like(grid)
    for j in range(0, truncation + 1, 2):
        weight = src.couplings[j] ** 2  # (2 pi / c) psi_j(0)^2
        values = values + weight * eval_inside(src, j, grid) ** 2
    return NoiseKernelTable(basis.c, grid, values, truncation)


def kernel_constant(basis: SlepianBasis, truncation: int = DEFAULT_KERNEL_TRUNCATION) -> float:
    """Partial sum of (2 pi / c) psi_j(0)^2 over even j <= truncation; tends to 2."""
    src, truncation = _extended(basis, truncation)
    return float(np.sum(src.couplings[0 : truncation + 1 : 2] ** 2))


def write_table(basis: SlepianBasis, path) -> Path:
    return write_csv(path, ("c", "j", "lambda_j", "A_j", "parity"), basis.table_rows())
