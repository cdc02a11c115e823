"""Probe-light protocols, their quadrature statistics and the lumped loss channel.

Quadrature convention: b = b1 + i b2 with b1 = (b + b^dag)/2, b2 = (b - b^dag)/(2i),
so the vacuum variance of either quadrature is 1/4.  A displaced squeezed mode
has <b1> = sqrt(2) alpha, <b2> = 0, Var b1 = e^{2r}/4 and Var b2 = e^{-2r}/4.
With this convention the photon number is taken to be alpha^2 + sinh^2 r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.linalg import helmert

from .errors import DomainError, NonPositiveParameter, ProtocolMismatch


class Protocol(str, Enum):
    MEMSL = "MEMSL"
    INDEPENDENT_SQUEEZED = "IndependentSqueezed"
    COHERENT = "Coherent"

    @classmethod
    def parse(cls, value) -> "Protocol":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        for p in cls:
            if p.value.lower() == key:
                return p
        aliases = {"independent": cls.INDEPENDENT_SQUEEZED, "squeezed": cls.INDEPENDENT_SQUEEZED}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown protocol {value!r}; expected one of {[p.value for p in cls]}")


@dataclass(frozen=True)
class QuadratureStats:
    mean1: float
    mean2: float
    var1: float
    var2: float


VACUUM = QuadratureStats(0.0, 0.0, 0.25, 0.25)


def squeezed_stats(alpha: float, r: float) -> QuadratureStats:
    return QuadratureStats(math.sqrt(2.0) * alpha, 0.0, math.exp(2 * r) / 4, math.exp(-2 * r) / 4)


@dataclass(frozen=True)
class LossChannel:
    """Beam splitter of transmission tau mixing in a vacuum mode."""

    tau: float

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise DomainError(f"transmission must lie in (0, 1], got {self.tau}")


def apply_loss(stats: QuadratureStats, channel: LossChannel) -> QuadratureStats:
    """b -> sqrt(tau) b + sqrt(1 - tau) d_v for both quadratures."""
    t = channel.tau
    st = math.sqrt(t)
    return QuadratureStats(
        st * stats.mean1,
        st * stats.mean2,
        t * stats.var1 + (1 - t) * VACUUM.var1,
        t * stats.var2 + (1 - t) * VACUUM.var2,
    )


@dataclass(frozen=True)
class ProbeSource:
    """Probe light.

    For MEMSL ``alpha`` and ``r`` describe the single squeezed input that the
    beam-splitter array divides into M entangled modes; for the other two
    protocols they describe each of the M independent shots.
    """

    protocol: Protocol
    M: int
    alpha: float
    r: float = 0.0
    tau: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol.parse(self.protocol))
        if int(self.M) != self.M or self.M < 1:
            raise NonPositiveParameter(f"mode count M must be an integer >= 1, got {self.M}")
        object.__setattr__(self, "M", int(self.M))
        if not self.alpha >= 0 or not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if not self.r >= 0 or not math.isfinite(self.r):
            raise DomainError(f"r must be >= 0, got {self.r}")
        if self.protocol is Protocol.COHERENT and self.r != 0:
            raise DomainError("coherent light has r = 0")
        LossChannel(self.tau)

    @property
    def channel(self) -> LossChannel:
        return LossChannel(self.tau)

    def with_tau(self, tau: float) -> "ProbeSource":
        return replace(self, tau=tau)

    def input_stats(self) -> QuadratureStats:
        """Statistics of the (single) squeezed or coherent input before splitting and loss."""
        return squeezed_stats(self.alpha, self.r)

    def mode_stats(self) -> QuadratureStats:
        """Statistics of one of the M modes hitting the sample, loss included."""
        s = self.input_stats()
        if self.protocol is Protocol.MEMSL:
            m = self.M
            s = QuadratureStats(
                s.mean1 / math.sqrt(m),
                0.0,
                (s.var1 + (m - 1) * VACUUM.var1) / m,
                (s.var2 + (m - 1) * VACUUM.var2) / m,
            )
        return apply_loss(s, self.channel)

    def mixing_matrix(self) -> np.ndarray:
        """Orthogonal M x M map from inputs to modes; column 0 carries the squeezed input."""
        if self.protocol is Protocol.MEMSL:
            return memsl_splitter(self.M)
        return np.eye(self.M)


def memsl_splitter(M: int) -> np.ndarray:
    """Real orthogonal balanced splitter: first column 1/sqrt(M), the rest vacuum ports."""
    if M == 1:
        return np.ones((1, 1))
    return helmert(M, full=True).T


def photons_on_sample(src: ProbeSource) -> float:
    """Mean photon number per mode reaching the sample."""
    n_input = src.alpha**2 + math.sinh(src.r) ** 2
    if src.protocol is Protocol.MEMSL:
        return src.tau * n_input / src.M
    return src.tau * n_input


@dataclass(frozen=True)
class CompositeStats:
    """Statistics of b_e = (1/sqrt(M)) sum_m b^(m) and of the plain sum over modes."""

    M: int
    effective: QuadratureStats
    summed: QuadratureStats


def mode_sum_quadratures(src: ProbeSource) -> CompositeStats:
    m = src.M
    per = src.mode_stats()
    if src.protocol is Protocol.MEMSL:
        eff = apply_loss(src.input_stats(), src.channel)
        summed = QuadratureStats(math.sqrt(m) * eff.mean1, 0.0, m * eff.var1, m * eff.var2)
    else:
        summed = QuadratureStats(m * per.mean1, 0.0, m * per.var1, m * per.var2)
        eff = QuadratureStats(summed.mean1 / math.sqrt(m), 0.0, per.var1, per.var2)
    return CompositeStats(m, eff, summed)


def effective_memsl_quadratures(src: ProbeSource) -> CompositeStats:
    if src.protocol is not Protocol.MEMSL:
        raise ProtocolMismatch(f"effective MEMSL statistics requested for {src.protocol.value}")
    return mode_sum_quadratures(src)
