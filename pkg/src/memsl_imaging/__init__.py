"""Quantum super-resolution phase imaging with multi-mode entangled squeezed light.

Prolate spheroidal (Slepian) basis, 4-f imaging geometry, probe light statistics,
closed-form error optimization, and a seeded Monte Carlo simulator.
"""
from .errors import (
    BasisTooSmall,
    DomainError,
    EigenvalueUnderflow,
    GridTooCoarse,
    GridTooNarrow,
    ImagingError,
    InsufficientPhotons,
    NonConvergence,
    NonPositiveParameter,
    NumericalError,
    OrderOutOfRange,
    ProtocolMismatch,
    SmallPhaseViolation,
    UnderflowOrder,
)
from .geometry import (
    FieldSamples,
    ImagingSystem,
    bandwidth,
    compose_image,
    decompose_image,
    derive_dimensionless,
    object_to_image,
    reconstruct_object_estimate,
    slepian_projection,
)
from .light import LossChannel, ProbeSource, Protocol, QuadratureStats, photons_on_sample
from .objects import PhaseObject, check_small_phase, three_lobe_object
from .optimizer import (
    OptimalConfig,
    PhotonBudget,
    optimize,
    optimize_lossless,
    optimize_lossy,
    predict,
    resolution,
    select_Q,
    sigma_lossless,
)
from .pswf import SlepianBasis, build_basis, coupling, evaluate, noise_kernel
from .simulation import SimulationMode, pointwise_variance, reconstruct, simulate_measurement

__version__ = "0.1.0"

__all__ = [
    "BasisTooSmall",
    "DomainError",
    "EigenvalueUnderflow",
    "GridTooCoarse",
    "GridTooNarrow",
    "ImagingError",
    "InsufficientPhotons",
    "NonConvergence",
    "NonPositiveParameter",
    "NumericalError",
    "OrderOutOfRange",
    "ProtocolMismatch",
    "SmallPhaseViolation",
    "UnderflowOrder",
    "FieldSamples",
    "ImagingSystem",
    "bandwidth",
    "compose_image",
    "decompose_image",
    "derive_dimensionless",
    "object_to_image",
    "reconstruct_object_estimate",
    "slepian_projection",
    "LossChannel",
    "ProbeSource",
    "Protocol",
    "QuadratureStats",
    "photons_on_sample",
    "PhaseObject",
    "check_small_phase",
    "three_lobe_object",
    "OptimalConfig",
    "PhotonBudget",
    "optimize",
    "optimize_lossless",
    "optimize_lossy",
    "predict",
    "resolution",
    "select_Q",
    "sigma_lossless",
    "SlepianBasis",
    "build_basis",
    "coupling",
    "evaluate",
    "noise_kernel",
    "SimulationMode",
    "pointwise_variance",
    "reconstruct",
    "simulate_measurement",
]
