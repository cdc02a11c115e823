"""Seeded Monte Carlo simulation of the measured image quadrature and phase reconstruction.

Measurement model (one trial = one shot of M modes).  For PSWF order j and
mode m the second-quadrature image coefficient is

    e_j2^(m) = A'_j b2^(m) + Phi_j b1^(m),

with the signed coupling A'_j = sqrt(2 pi / c) psi_j(0) and the object overlap
Phi_j = int_{-1}^{1} phi psi_j.  Quadratures are drawn independently for every
(trial, order, mode), which is what makes the pointwise variance of
e_2(s') = sum_j e_j2 psi_j(s') equal to the G(c, s') law.

Random numbers: trials are grouped in blocks of ``BLOCK`` consecutive trials.
Block k uses ``numpy.random.default_rng([seed, k, 0])`` for the source
quadratures and ``default_rng([seed, k, 1])`` for the loss vacuum, so the draws
of trial t never depend on how many trials follow it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import find_peaks

from .errors import DomainError, ProtocolMismatch, SmallPhaseViolation, UnderflowOrder
from .geometry import (
    INVERSION_FLOOR,
    FieldSamples,
    bandwidth,
    check_inversion_order,
    clenshaw_curtis,
    object_coefficients,
    object_to_image,
)
from .light import ProbeSource, Protocol
from .objects import PhaseObject, check_small_phase
from .optimizer import order_constant, sigma_for_source
from .pswf import (
    DEFAULT_KERNEL_TRUNCATION,
    NoiseKernelTable,
    SlepianBasis,
    build_basis,
    noise_kernel,
)

BLOCK = 1024
DEFAULT_GRID_POINTS = 257
N_TRACES = 5
LOW_CONFIDENCE_TRIALS = 30


class SimulationMode(str, Enum):
    COEFFICIENT = "coefficient-space"
    POINTWISE = "pointwise"

    @classmethod
    def parse(cls, value) -> "SimulationMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for m in cls:
            if key in (m.value, m.name.lower(), m.value.split("-")[0]):
                return m
        raise ValueError(f"unknown simulation mode {value!r}")


def measurement_grid(points: int = DEFAULT_GRID_POINTS):
    """Sample points s' in [-1, 1] (Clenshaw-Curtis) and their quadrature weights."""
    return clenshaw_curtis(points)


def _small_phase_gate(obj: PhaseObject, src: ProbeSource, c: float):
    chk = check_small_phase(obj, src.r, c)
    if not chk.ok:
        warnings.warn(
            f"small-phase condition violated: margin {chk.margin:.3g} < 1", SmallPhaseViolation, stacklevel=3
        )
    return chk


def mean_image_quadrature(obj: PhaseObject, src: ProbeSource, system, grid=None) -> FieldSamples:
    """<e_2^avg(s)> = int sinc-kernel(s', s) <b1> phi(s') ds' with <b1> the per-mode mean."""
    c = bandwidth(system)
    _small_phase_gate(obj, src, c)
    grid = measurement_grid()[0] if grid is None else np.asarray(grid, dtype=float)
    img = object_to_image(c, obj, grid)
    return FieldSamples(grid, src.mode_stats().mean1 * img.values, "image-plane")


def pointwise_variance(src: ProbeSource, kernel: NoiseKernelTable) -> FieldSamples:
    """Variance of e_2^avg at each s' for one shot: Var((1/M) sum_m b2^(m)) * G(c, s')."""
    if src.protocol is Protocol.INDEPENDENT_SQUEEZED:
        raise ProtocolMismatch("no pointwise variance law for independent squeezed light")
    per_mode = src.mode_stats().var2
    if src.protocol is Protocol.MEMSL:
        # the M modes share one squeezed input: Var(sum b2) = M * Var(b_e2)
        var_avg = (src.tau * math.exp(-2 * src.r) + 1 - src.tau) / (4 * src.M)
    else:
        var_avg = per_mode / src.M
    return FieldSamples(kernel.grid, var_avg * kernel.values, "image-plane")


@dataclass
class SimulatedMeasurement:
    protocol: Protocol
    mode: SimulationMode
    seed: int
    trials: int
    c: float
    M: int
    b1_mean: float
    grid: np.ndarray
    weights: np.ndarray
    analytic_mean: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    samples: np.ndarray
    orders: int
    coef_analytic_mean: np.ndarray
    coef_mean: np.ndarray
    # per-shot second moment of (e_j2^avg - analytic mean), orders x orders
    coef_cov: np.ndarray
    small_phase_margin: float = math.inf
    notes: list = field(default_factory=list)

    def trial_std(self) -> np.ndarray:
        return np.sqrt(self.var)


class _Accumulator:
    def __init__(self, n_points: int, n_orders: int):
        self.n = 0
        self.p1 = np.zeros(n_points)
        self.p2 = np.zeros(n_points)
        self.c1 = np.zeros(n_orders)
        self.c2 = np.zeros((n_orders, n_orders))
        self.traces = []

    def add(self, dev_points: np.ndarray, dev_coef: np.ndarray):
        self.n += dev_points.shape[0]
        self.p1 += dev_points.sum(axis=0)
        self.p2 += np.einsum("ij,ij->j", dev_points, dev_points)
        self.c1 += dev_coef.sum(axis=0)
        self.c2 += dev_coef.T @ dev_coef
        need = N_TRACES - len(self.traces)
        if need > 0:
            self.traces.extend(dev_points[:need])

    def point_stats(self):
        mean = self.p1 / self.n
        if self.n > 1:
            var = (self.p2 - self.n * mean**2) / (self.n - 1)
            var = np.maximum(var, 0.0)
        else:
            var = np.full_like(mean, np.nan)
        return mean, var


def _block_sizes(trials: int):
    full, rest = divmod(trials, BLOCK)
    for k in range(full):
        yield k, BLOCK
    if rest:
        yield full, rest


def _synthesis_basis(basis: SlepianBasis, truncation: int) -> SlepianBasis:
    if basis.j_max >= truncation:
        return basis
    try:
        return build_basis(basis.c, truncation)
    except UnderflowOrder as exc:
        return build_basis(basis.c, exc.largest_safe_order)


def simulate_measurement(obj: PhaseObject, src: ProbeSource, basis: SlepianBasis, trials: int, seed: int,
                         mode=SimulationMode.COEFFICIENT, grid_points: int = DEFAULT_GRID_POINTS,
                         noise: bool = True, synthesis_orders: int = DEFAULT_KERNEL_TRUNCATION,
                         system=None) -> SimulatedMeasurement:
    """Draw ``trials`` independent shots of the image quadrature e_2^avg(s')."""
    mode = SimulationMode.parse(mode)
    if seed is None:
        raise DomainError("a seed is required")
    trials = int(trials)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    c = basis.c if system is None else bandwidth(system)
    if abs(c - basis.c) > 1e-12 * c:
        raise DomainError("basis and imaging system disagree on c")
    grid, weights = measurement_grid(grid_points)
    chk = _small_phase_gate(obj, src, c)
    m1 = src.mode_stats().mean1
    analytic = m1 * object_to_image(c, obj, grid).values

    if mode is SimulationMode.COEFFICIENT:
        syn = _synthesis_basis(basis, max(synthesis_orders, basis.j_max))
        J = syn.n_orders
        psi = syn.values(grid)
        signed_A = np.sqrt(2 * np.pi / c) * np.array(
            [syn.values(0.0, [j])[0, 0] if j % 2 == 0 else 0.0 for j in range(J)]
        )
        overlap = object_coefficients(syn, obj)
        coef_mean = m1 * overlap
        acc = _Accumulator(grid.size, J)
        stats_in = src.input_stats()
        sd_in = np.array([math.sqrt(stats_in.var1), math.sqrt(stats_in.var2)])
        mix = src.mixing_matrix()
        memsl = src.protocol is Protocol.MEMSL
        tau = src.tau
        for k, n in _block_sizes(trials):
            if noise:
                z = np.random.default_rng([seed, k, 0]).standard_normal((n, J, src.M, 2))
                # port 0 (or every shot) carries the squeezed/coherent input, other ports vacuum
                scale = np.full((src.M, 2), 0.5)
                if memsl:
                    scale[0] = sd_in
                else:
                    scale[:] = sd_in
                q = z * scale
                if memsl:
                    q = np.einsum("mk,njkq->njmq", mix, q)
                if tau < 1.0:
                    zv = np.random.default_rng([seed, k, 1]).standard_normal((n, J, src.M, 2))
                    q = math.sqrt(tau) * q + math.sqrt(1 - tau) * 0.5 * zv
                # noise part only: b1 fluctuation multiplies Phi_j, b2 multiplies A'_j
                dev = (signed_A[None, :, None] * q[..., 1] + overlap[None, :, None] * q[..., 0]).mean(axis=2)
            else:
                dev = np.zeros((n, J))
            acc.add(dev @ psi, dev)
        n_orders = J
        coef_analytic = coef_mean
    else:
        if src.protocol is Protocol.INDEPENDENT_SQUEEZED:
            raise ProtocolMismatch("pointwise sampling needs a pointwise variance law")
        kernel = noise_kernel(basis, grid, synthesis_orders)
        sd = np.sqrt(pointwise_variance(src, kernel).values)
        usable = [j for j in range(basis.n_orders) if basis.eigenvalues[j] >= INVERSION_FLOOR]
        n_orders = len(usable)
        psi = basis.values(grid, usable)
        proj = (psi * weights).T / basis.eigenvalues[: n_orders]
        coef_analytic = analytic @ proj
        acc = _Accumulator(grid.size, n_orders)
        for k, n in _block_sizes(trials):
            if noise:
                dev_pts = np.random.default_rng([seed, k, 0]).standard_normal((n, grid.size)) * sd
            else:
                dev_pts = np.zeros((n, grid.size))
            acc.add(dev_pts, dev_pts @ proj)

    dmean, var = acc.point_stats()
    traces = analytic + np.array(acc.traces) if acc.traces else np.empty((0, grid.size))
    return SimulatedMeasurement(
        protocol=src.protocol,
        mode=mode,
        seed=int(seed),
        trials=trials,
        c=c,
        M=src.M,
        b1_mean=m1,
        grid=grid,
        weights=weights,
        analytic_mean=analytic,
        mean=analytic + dmean,
        var=var,
        samples=traces,
        orders=n_orders,
        coef_analytic_mean=coef_analytic,
        coef_mean=coef_analytic + acc.c1 / acc.n,
        coef_cov=acc.c2 / acc.n,
        small_phase_margin=chk.margin,
    )


@dataclass(frozen=True)
class ReconstructionResult:
    Q: int
    grid: np.ndarray
    phi_hat: np.ndarray
    phi_projection: np.ndarray
    phi_true: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    coefficients: np.ndarray
    sigma_predicted: float
    sigma_empirical: float
    sigma_empirical_interval: float
    seed: int
    trials: int

    @property
    def low_confidence(self) -> bool:
        return self.trials < LOW_CONFIDENCE_TRIALS

    @property
    def sigma_predicted_averaged(self) -> float:
        return self.sigma_predicted / math.sqrt(self.trials)


def reconstruct(measurement: SimulatedMeasurement, basis: SlepianBasis, Q: int, src: ProbeSource,
                obj: PhaseObject | None = None, grid=None, exact_sum: bool = False) -> ReconstructionResult:
    """phi~(s') = sum_{j<=Q} e_j2^avg / (lambda_j <b1>) psi_j(s') from trial-averaged coefficients.

    Dividing by the per-mode mean <b1> (sqrt(2 tau / M) alpha for MEMSL,
    sqrt(2 tau) alpha for independent shots) reproduces each protocol's prefactor.
    ``sigma_empirical`` is the single-shot whole-line error sqrt(sum_j Var c_j);
    the interval-restricted value weights each order by lambda_j.
    """
    if abs(measurement.c - basis.c) > 1e-12 * basis.c:
        raise DomainError("measurement and basis disagree on c")
    Q = check_inversion_order(basis, Q)
    if Q >= measurement.orders:
        raise DomainError(f"measurement carries only {measurement.orders} orders")
    if measurement.b1_mean <= 0:
        raise DomainError("reconstruction needs a displaced probe (alpha > 0)")
    grid = np.linspace(-1.0, 1.0, 401) if grid is None else np.asarray(grid, dtype=float)
    lam = basis.eigenvalues[: Q + 1]
    scale = 1.0 / (lam * measurement.b1_mean)
    coef = measurement.coef_mean[: Q + 1] * scale
    psi = basis.values(grid, range(Q + 1))
    phi_hat = coef @ psi
    proj_coef = measurement.coef_analytic_mean[: Q + 1] * scale
    phi_proj = proj_coef @ psi
    cov = measurement.coef_cov[: Q + 1, : Q + 1] * np.outer(scale, scale)
    sigma_emp = math.sqrt(max(np.trace(cov), 0.0))
    sigma_int = math.sqrt(max(float(np.sum(np.diag(cov) * lam)), 0.0))
    var_avg = np.einsum("jp,jk,kp->p", psi, cov, psi) / measurement.trials
    half = 1.96 * np.sqrt(np.maximum(var_avg, 0.0))
    phi_true = obj(grid) if obj is not None else np.full(grid.shape, np.nan)
    sigma_pred = sigma_for_source(src, order_constant(basis, Q, exact_sum))
    return ReconstructionResult(
        Q=Q,
        grid=grid,
        phi_hat=phi_hat,
        phi_projection=phi_proj,
        phi_true=phi_true,
        ci_low=phi_hat - half,
        ci_high=phi_hat + half,
        coefficients=coef,
        sigma_predicted=sigma_pred,
        sigma_empirical=sigma_emp,
        sigma_empirical_interval=sigma_int,
        seed=measurement.seed,
        trials=measurement.trials,
    )


def lobe_positions(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Interior local maxima of a reconstructed profile."""
    idx, _ = find_peaks(values)
    return grid[idx]


def lobes_match(found, expected, tol: float = 0.1) -> bool:
    found = np.sort(np.asarray(found))
    expected = np.sort(np.asarray(expected))
    return found.size == expected.size and bool(np.all(np.abs(found - expected) <= tol))
