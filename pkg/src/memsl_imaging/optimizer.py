"""Closed-form imaging error, optimal probe parameters, cutoff order and resolution.

All errors are written as ``sigma = K * g`` where ``K = A / (2 sqrt(2) lambda)``
is the order constant of the governing even order and ``g`` depends only on the
probe: MEMSL ``sqrt(e^{-2r} + 1/tau - 1) / alpha``, independent squeezed light
the same divided by ``sqrt(M)``, coherent light ``1 / (alpha sqrt(tau M))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BasisTooSmall,
    DomainError,
    EigenvalueUnderflow,
    InsufficientPhotons,
    NonPositiveParameter,
    ProtocolMismatch,
)
from .geometry import ImagingSystem
from .light import ProbeSource, Protocol
from .pswf import SlepianBasis


@dataclass(frozen=True)
class PhotonBudget:
    M: int
    N: float
    N_avg: int = 1

    def __post_init__(self):
        if self.M < 1 or int(self.M) != self.M:
            raise NonPositiveParameter(f"M must be an integer >= 1, got {self.M}")
        if not self.N > 0:
            raise NonPositiveParameter(f"N must be positive, got {self.N}")
        if self.N_avg < 1 or int(self.N_avg) != self.N_avg:
            raise NonPositiveParameter(f"N_avg must be an integer >= 1, got {self.N_avg}")


@dataclass(frozen=True)
class OptimalConfig:
    protocol: Protocol
    r_opt: float
    alpha_opt: float
    sigma_opt: float
    tau: float

    @property
    def squeezing_db(self) -> float:
        """10 log10 e^{-2r} (negative for squeezing)."""
        return -20.0 * self.r_opt / math.log(10.0)

    def source(self, M: int) -> ProbeSource:
        return ProbeSource(self.protocol, M, self.alpha_opt, self.r_opt, self.tau)


def governing_order(Q: int) -> int:
    """Odd cutoffs carry no noise of their own; the preceding even order governs."""
    return Q - 1 if Q % 2 else Q


def log_coupling(basis: SlepianBasis, j: int) -> float:
    """log A_j evaluated without forming A_j (even orders only)."""
    if j % 2:
        return -math.inf
    u0 = abs(np.polynomial.legendre.legval(0.0, basis.legendre[j]))
    return 0.5 * math.log(2 * math.pi / basis.c) + 0.5 * basis.log_eigenvalues[j] + math.log(u0)


def log_noise_ratio(basis: SlepianBasis, j: int) -> float:
    """log(A_j^2 / lambda_j^2)."""
    return 2.0 * log_coupling(basis, j) - 2.0 * basis.log_eigenvalues[j]


def order_constant(basis: SlepianBasis, Q: int, exact_sum: bool = False) -> float:
    """K = A_q / (2 sqrt(2) lambda_q) at the governing even order q.

    With ``exact_sum`` the dominant term is replaced by sqrt(sum_{j<=Q} A_j^2/lambda_j^2) / (2 sqrt 2).
    """
    basis.check_order(Q)
    q = governing_order(Q)
    if exact_sum:
        logs = np.array([log_noise_ratio(basis, j) for j in range(0, q + 1, 2)])
        top = logs.max()
        log_k2 = top + math.log(np.sum(np.exp(logs - top))) - math.log(8.0)
    else:
        log_k2 = log_noise_ratio(basis, q) - math.log(8.0)
    if log_k2 > 700:
        raise EigenvalueUnderflow(f"order constant at Q={Q} exceeds double range")
    return math.exp(0.5 * log_k2)


def _check_budget(M, N):
    if not M >= 1:
        raise NonPositiveParameter(f"M must be >= 1, got {M}")
    if not N >= 0:
        raise NonPositiveParameter(f"N must be >= 0, got {N}")


def sigma_general(protocol, K: float, M: int, r: float, alpha: float, tau: float = 1.0) -> float:
    """Imaging error for arbitrary probe parameters (alpha = 0 gives infinity)."""
    protocol = Protocol.parse(protocol)
    if not 0 < tau <= 1:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    if alpha <= 0:
        return math.inf
    noise = math.sqrt(math.exp(-2 * r) + 1.0 / tau - 1.0)
    if protocol is Protocol.MEMSL:
        return K * noise / alpha
    return K * noise / (alpha * math.sqrt(M))


def sigma_for_source(src: ProbeSource, K: float) -> float:
    return sigma_general(src.protocol, K, src.M, src.r, src.alpha, src.tau)


def sigma_lossless(protocol, basis: SlepianBasis, Q: int, M: int, N: float | None = None,
                   r: float | None = None, alpha: float | None = None, exact_sum: bool = False) -> float:
    """Lossless error; with N the budget-optimal form, with (r, alpha) the general one."""
    protocol = Protocol.parse(protocol)
    K = order_constant(basis, Q, exact_sum)
    if N is None:
        if alpha is None:
            raise ValueError("give either N or (r, alpha)")
        return sigma_general(protocol, K, M, r or 0.0, alpha)
    _check_budget(M, N)
    if N == 0:
        return math.inf
    if protocol is Protocol.MEMSL:
        B = M * N
        return K / math.sqrt(B * (1 + B))
    if protocol is Protocol.INDEPENDENT_SQUEEZED:
        return K / (math.sqrt(M) * math.sqrt(N * (1 + N)))
    return K / math.sqrt(M * N)


def _budget_for(protocol: Protocol, M: int, N: float) -> float:
    return M * N if protocol is Protocol.MEMSL else N


def optimize_lossless(protocol, M: int, N: float, K: float = 1.0) -> OptimalConfig:
    """Budget-optimal squeezing and displacement without loss.

    ``K`` is the order constant; the default of one reports sigma in units of it.
    """
    protocol = Protocol.parse(protocol)
    if protocol is Protocol.COHERENT:
        raise ProtocolMismatch("coherent light has no squeezing to optimize; alpha = sqrt(N)")
    _check_budget(M, N)
    B = _budget_for(protocol, M, N)
    r = 0.5 * math.log1p(2 * B)
    alpha = math.sqrt(B * (1 + B) / (1 + 2 * B))
    sigma = sigma_general(protocol, K, M, r, alpha) if B > 0 else math.inf
    return OptimalConfig(protocol, r, alpha, sigma, 1.0)


def lossy_squeezing(B: float, tau: float) -> float:
    """Optimal e^{-2r} under loss for budget B (MN for MEMSL, N for independent shots)."""
    lam = math.sqrt(1 + 4 * B * (1 - tau))
    return (lam + tau) / (1 + 4 * B + tau)


def lossy_alpha_closed_form(B: float, tau: float) -> float:
    """Closed-form optimal displacement under loss (singular at tau = 1)."""
    lam = math.sqrt(1 + 4 * B * (1 - tau))
    num = 8 * B * B * (1 - tau) - tau * (lam - 1) - 2 * B * (tau * (lam + 2 * tau - 2) - 1)
    den = (1 - tau) * tau * (1 + 4 * B + tau)
    return math.sqrt(num / den) / math.sqrt(2.0)


def optimize_lossy(protocol, M: int, N: float, tau: float, K: float = 1.0) -> OptimalConfig:
    """Budget-optimal parameters when only a fraction tau of the light reaches the sample.

    The displacement is taken from the photon constraint, alpha^2 = B/tau - sinh^2 r,
    which coincides with the closed form for tau < 1 and stays finite at tau = 1.
    The reported sigma is the error law evaluated at the returned (r, alpha).
    """
    protocol = Protocol.parse(protocol)
    if not 0 < tau <= 1:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    _check_budget(M, N)
    if protocol is Protocol.COHERENT:
        if N == 0:
            return OptimalConfig(protocol, 0.0, 0.0, math.inf, tau)
        alpha = math.sqrt(N / tau)
        return OptimalConfig(protocol, 0.0, alpha, sigma_general(protocol, K, M, 0.0, alpha, tau), tau)
    if tau == 1.0:
        return optimize_lossless(protocol, M, N, K)
    B = _budget_for(protocol, M, N)
    e2r = lossy_squeezing(B, tau)
    r = -0.5 * math.log(e2r)
    sinh2 = (1.0 / e2r + e2r - 2.0) / 4.0
    alpha = math.sqrt(max(B / tau - sinh2, 0.0))
    sigma = sigma_general(protocol, K, M, r, alpha, tau) if B > 0 else math.inf
    return OptimalConfig(protocol, r, alpha, sigma, tau)


def optimize(protocol, M: int, N: float, tau: float = 1.0, K: float = 1.0) -> OptimalConfig:
    """Optimal configuration for any protocol and transmission."""
    protocol = Protocol.parse(protocol)
    if protocol is Protocol.COHERENT or tau < 1.0:
        return optimize_lossy(protocol, M, N, tau, K)
    return optimize_lossless(protocol, M, N, K)


def budget_factor(protocol, M: int, N: float) -> float:
    """Gain from squeezing in the cutoff criterion: 1 + MN, 1 + N or 1."""
    protocol = Protocol.parse(protocol)
    if protocol is Protocol.MEMSL:
        return 1.0 + M * N
    if protocol is Protocol.INDEPENDENT_SQUEEZED:
        return 1.0 + N
    return 1.0


def log_q_bound(protocol, M: int, N: float, N_avg: int = 1) -> float:
    """log of 8 M^2 N^2 N_avg^2 g with g the protocol's squeezing gain."""
    return (math.log(8.0) + 2 * math.log(M) + 2 * math.log(N) + 2 * math.log(N_avg)
            + math.log(budget_factor(protocol, M, N)))


def select_Q(basis: SlepianBasis, M: int, N: float, N_avg: int = 1, protocol=Protocol.MEMSL) -> int:
    """Largest odd Q whose governing even order Q-1 satisfies A^2/lambda^2 <= bound.

    Comparisons are made between logarithms.  Ties count as satisfied, and the
    first even order that violates the bound ends the search.
    """
    protocol = Protocol.parse(protocol)
    if not N > 0 or M < 1 or N_avg < 1:
        raise InsufficientPhotons(f"no photons available (M={M}, N={N}, N_avg={N_avg})")
    bound = log_q_bound(protocol, M, N, N_avg)
    last_ok = None
    for j in range(0, basis.j_max + 1, 2):
        if log_noise_ratio(basis, j) <= bound:
            last_ok = j
        else:
            break
    else:
        raise BasisTooSmall(f"bound not reached by order {basis.j_max}; build a larger basis")
    if last_ok is None:
        raise InsufficientPhotons("photon budget does not support even the zeroth order")
    return last_ok + 1


def select_Q_auto(c: float, M: int, N: float, N_avg: int = 1, protocol=Protocol.MEMSL, start: int = 12) -> int:
    """select_Q with a basis grown until the bound is crossed."""
    from .pswf import build_basis

    j_max = start
    while True:
        try:
            return select_Q(build_basis(c, j_max), M, N, N_avg, protocol)
        except BasisTooSmall:
            j_max *= 2


def resolution(system: ImagingSystem | float, Q: int) -> float:
    """Resolution D = Y / (Q + 1) in meters; accepts a system or an object size."""
    if Q < 0:
        raise ValueError("Q must be >= 0")
    Y = system.object_size if isinstance(system, ImagingSystem) else float(system)
    return Y / (Q + 1)


@dataclass(frozen=True)
class Prediction:
    protocol: Protocol
    Q: int
    sigma: float
    resolution_m: float
    config: OptimalConfig


def predict(system: ImagingSystem, protocol, M: int, N: float, tau: float = 1.0, N_avg: int = 1,
            Q: int | None = None, exact_sum: bool = False) -> Prediction:
    """Cutoff, optimal parameters, error and resolution for one configuration."""
    from .pswf import build_basis

    protocol = Protocol.parse(protocol)
    if Q is None:
        Q = select_Q_auto(system.c, M, N, N_avg, protocol)
    basis = build_basis(system.c, max(Q, 1))
    K = order_constant(basis, Q, exact_sum)
    cfg = optimize(protocol, M, N, tau, K)
    return Prediction(protocol, Q, cfg.sigma_opt, resolution(system, Q), cfg)
