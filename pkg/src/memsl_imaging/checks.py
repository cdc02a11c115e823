"""Reference-value checks for the worked example (c = 3.07, M = 8, N = 6).

Each check compares one computed number against a fixed reference value
with an explicit tolerance.  ``perturb_lambda`` rescales every eigenvalue by
``1 + perturb_lambda`` so that harness sensitivity can be demonstrated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import derive_dimensionless
from .light import ProbeSource, Protocol
from .objects import three_lobe_object
from .optimizer import (
    log_noise_ratio,
    log_q_bound,
    optimize_lossless,
    optimize_lossy,
    resolution,
    select_Q,
    sigma_lossless,
)
from .pswf import NOISE_KERNEL_TOTAL, SlepianBasis, build_basis, kernel_constant, noise_kernel
from .simulation import lobe_positions, lobes_match, pointwise_variance, reconstruct, simulate_measurement

EXAMPLE = dict(f=10e-3, wavelength=780e-9, d=50.8e-3, Y=300e-9, M=8, N=6, N_avg=50000)
REPORT_HEADER = ("check_id", "expected", "actual", "tolerance", "pass")


@dataclass(frozen=True)
class Check:
    check_id: str
    expected: float
    actual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(abs(self.actual - self.expected) <= self.tolerance)

    def row(self):
        return (self.check_id, self.expected, self.actual, self.tolerance, self.passed)


def perturbed(basis: SlepianBasis, rel: float) -> SlepianBasis:
    if rel == 0.0:
        return basis
    return replace(
        basis,
        eigenvalues=basis.eigenvalues * (1.0 + rel),
        log_eigenvalues=basis.log_eigenvalues + math.log1p(rel),
    )


def run_checks(perturb_lambda: float = 0.0, trials: int = 2000, seed: int = 2024) -> list[Check]:
    ex = EXAMPLE
    M, N = ex["M"], ex["N"]
    checks: list[Check] = []
    add = lambda *a: checks.append(Check(*a))  # noqa: E731

    system = derive_dimensionless(ex["f"], ex["wavelength"], ex["d"], ex["Y"])
    add("geometry.c", 3.07, system.c, 0.01)
    add("geometry.rayleigh_nm", 154.0, system.rayleigh * 1e9, 1.0)
    add("geometry.shannon", 1.95, system.shannon, 0.01)

    opt = optimize_lossless(Protocol.MEMSL, M, N)
    add("optimum.exp_minus_r", 0.100, math.exp(-opt.r_opt), 0.002)
    add("optimum.alpha", 4.92, opt.alpha_opt, 0.01)
    add("optimum.squeezing_db", -19.9, opt.squeezing_db, 0.2)

    basis = perturbed(build_basis(system.c, 12), perturb_lambda)
    sig_memsl = sigma_lossless(Protocol.MEMSL, basis, 7, M, N)
    sig_coh = sigma_lossless(Protocol.COHERENT, basis, 7, M, 294)
    add("equivalence.sigma_ratio_294_photons", 1.0, sig_coh / sig_memsl, 0.01)
    add("equivalence.coherent_photons_per_shot", 294.0, N * (1 + M * N), 0.5)
    add("equivalence.total_photons", 2352.0, M * N * (1 + M * N), 0.5)

    add("cutoff.Q_memsl_single_shot", 7, select_Q(basis, M, N, 1, Protocol.MEMSL), 0)
    add("cutoff.Q_coherent_averaged", 5, select_Q(basis, M, N, ex["N_avg"], Protocol.COHERENT), 0)
    bound = log_q_bound(Protocol.MEMSL, M, N, 1)
    add("cutoff.order6_within_bound", 1, float(log_noise_ratio(basis, 6) <= bound), 0)
    add("cutoff.order8_exceeds_bound", 1, float(log_noise_ratio(basis, 8) > bound), 0)
    add("resolution.Q7_nm", 38.0, resolution(system, 7) * 1e9, 0.5)

    for proto, lossless_sigma in (
        (Protocol.MEMSL, optimize_lossless(Protocol.MEMSL, M, N).sigma_opt),
        (Protocol.INDEPENDENT_SQUEEZED, optimize_lossless(Protocol.INDEPENDENT_SQUEEZED, M, N).sigma_opt),
    ):
        near = optimize_lossy(proto, M, N, 1 - 1e-9).sigma_opt
        add(f"loss.continuity_{proto.value}", 0.0, abs(near - lossless_sigma) / lossless_sigma, 1e-4)
    coh = [optimize_lossy(Protocol.COHERENT, M, N, t).sigma_opt for t in (0.2, 0.6, 1.0)]
    add("loss.coherent_tau_independent", 0.0, (max(coh) - min(coh)) / min(coh), 1e-12)

    grid = np.linspace(-1, 1, 201)
    kern = noise_kernel(basis, grid)
    mem_src = opt.source(M)
    coh_src = ProbeSource(Protocol.COHERENT, M, math.sqrt(N))
    ratio = pointwise_variance(mem_src, kern).values / pointwise_variance(coh_src, kern).values
    add("noise.pointwise_variance_ratio", 1.0 / (1 + 2 * M * N), float(np.max(ratio)), 1e-12)
    add("kernel.constant_total", NOISE_KERNEL_TOTAL, kernel_constant(basis, 40), 1e-8)
    add("kernel.peak_at_centre", 0.0, float(grid[np.argmax(kern.values)]), 0.05)
    add("kernel.edge_below_centre", 1, float(kern.values[0] < kern.values[100]), 0)
    add("spectrum.trace_equals_shannon", system.shannon, float(np.sum(basis.eigenvalues)), 1e-6)

    obj = three_lobe_object()
    expected_lobes = np.array([-0.80, -0.05, 0.82])
    m = simulate_measurement(obj, mem_src, basis, trials, seed)
    rec = reconstruct(m, basis, 7, mem_src, obj)
    add("reconstruction.memsl_Q7_three_lobes", 1,
        float(lobes_match(lobe_positions(rec.grid, rec.phi_hat), expected_lobes)), 0)
    m = simulate_measurement(obj, coh_src, basis, trials, seed)
    rec = reconstruct(m, basis, 5, coh_src, obj)
    add("reconstruction.coherent_Q5_misses_lobes", 1,
        float(not lobes_match(lobe_positions(rec.grid, rec.phi_hat), expected_lobes)), 0)
    return checks

