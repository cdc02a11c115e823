"""Phase objects on the normalized object interval and the small-phase check."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .geometry import FieldSamples, gauss_legendre
from .pswf import SlepianBasis, build_basis, interval_integral

DEFAULT_POINTS = 2001


@dataclass(frozen=True)
class PhaseObject:
    """Phase phi(s') in radians sampled on a grid covering exactly [-1, 1]."""

    grid: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        phase = np.asarray(self.phase, dtype=float)
        if grid.ndim != 1 or grid.shape != phase.shape or grid.size < 4:
            raise ValueError("grid and phase must be 1-D arrays of equal length (>= 4)")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if abs(grid[0] + 1.0) > 1e-12 or abs(grid[-1] - 1.0) > 1e-12:
            raise ValueError("a phase object lives on [-1, 1]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "phase", phase)

    @classmethod
    def from_function(cls, func, points: int = DEFAULT_POINTS) -> "PhaseObject":
        g = np.linspace(-1.0, 1.0, points)
        return cls(g, np.asarray(func(g), dtype=float) * np.ones_like(g))

    @classmethod
    def zero(cls, points: int = DEFAULT_POINTS) -> "PhaseObject":
        return cls.from_function(np.zeros_like, points)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.phase)))

    def __call__(self, s):
        return CubicSpline(self.grid, self.phase)(s)

    def integral(self) -> float:
        x, w = gauss_legendre()
        return float(np.sum(w * self(x)))

    def as_field(self) -> FieldSamples:
        return FieldSamples(self.grid, self.phase, "object-plane")

    def scaled(self, factor: float) -> "PhaseObject":
        return PhaseObject(self.grid, factor * self.phase)


@dataclass(frozen=True)
class SmallPhaseCheck:
    ok: bool
    margin: float  # threshold / |int phi|; > 1 when the condition holds
    phase_integral: float
    threshold: float


def check_small_phase(obj: PhaseObject, r: float, basis: SlepianBasis | float) -> SmallPhaseCheck:
    """Sufficient condition |int phi| < e^{-r} / |int_{-1}^{1} psi_0| for the linearized model."""
    if not isinstance(basis, SlepianBasis):
        basis = build_basis(float(basis), 0)
    threshold = math.exp(-r) / abs(interval_integral(basis, 0))
    integral = obj.integral()
    if integral == 0.0:
        return SmallPhaseCheck(True, math.inf, 0.0, threshold)
    margin = threshold / abs(integral)
    return SmallPhaseCheck(margin > 1.0, margin, integral, threshold)


# Stand-in test object: three Gaussian lobes of unequal height at asymmetric
# positions.  Lobe spacing is chosen so that seven Slepian orders resolve all
# three lobes while five do not.
LOBE_CENTERS = (-0.80, -0.05, 0.82)
LOBE_HEIGHTS = (1.0, 0.6, 0.8)
LOBE_WIDTH = 0.10
LOBE_PEAK_RAD = 0.04


def three_lobe_profile(s, peak: float = LOBE_PEAK_RAD):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for h, c0 in zip(LOBE_HEIGHTS, LOBE_CENTERS):
        out = out + h * np.exp(-0.5 * ((s - c0) / LOBE_WIDTH) ** 2)
    return peak * out


def three_lobe_object(peak: float = LOBE_PEAK_RAD, points: int = DEFAULT_POINTS) -> PhaseObject:
    return PhaseObject.from_function(lambda s: three_lobe_profile(s, peak), points)


def small_phase_peak(r: float, basis: SlepianBasis | float, safety: float = 2.0) -> float:
    """Largest lobe peak that keeps the small-phase margin at ``safety``."""
    unit = check_small_phase(three_lobe_object(1.0), r, basis)
    return unit.threshold / (safety * abs(unit.phase_integral))
