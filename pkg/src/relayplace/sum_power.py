"""Power allocation for fixed relays under one total budget shared by all nodes.

Gains must come from an exponential law on a line, so ``g[i, k] = g[i, j] g[j, k]``
and the whole problem reduces to the source-side sequence ``b_k = g[0, k]``.
With ``a_j = sum_{i<j} 1/g[0, i]`` every quantity is a short scalar recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Exponential, LinePlacement, awgn_capacity, gain_matrix


@dataclass(frozen=True)
class PowerAllocation:
    gamma: np.ndarray
    P: np.ndarray
    P_T: float
    rate: float
    net_attenuation: float


@dataclass(frozen=True)
class DualCertificate:
    theta: float
    mu: np.ndarray
    zeta: float
    gamma: np.ndarray


def _stage_sequences(gains):
    """``(a, b)`` for stages ``1..N+1``; rejects unordered or nonpositive gains."""
    g = np.asarray(gains, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
        raise ValueError("gain matrix must be square with at least 2 nodes")
    row = g[0].copy()
    row[0] = 1.0
    if np.any(row <= 0):
        raise ValueError("gains must be strictly positive")
    if np.any(np.diff(row) > 0):
        raise ValueError("source gains must be nonincreasing along the line (relays out of order)")
    b = row[1:]
    a = np.cumsum(1.0 / row[:-1])
    return a, b


def net_attenuation(gains) -> float:
    """Scalar ``H`` such that the optimized rate is ``C(P_T / (sigma^2 H))``."""
    a, b = _stage_sequences(gains)
    inv_b = 1.0 / b
    steps = np.diff(np.concatenate(([0.0], inv_b)))
    return float(np.sum(steps / a))


def allocate_sum_power(gains, P_T: float, sigma2: float = 1.0) -> PowerAllocation:
    """Allocation that makes every decoding constraint bind at once."""
    if not P_T > 0:
        raise ValueError("total power must be > 0")
    if not sigma2 > 0:
        raise ValueError("noise power must be > 0")
    a, b = _stage_sequences(gains)
    n = len(b)
    b_prev = np.concatenate(([1.0], b[:-1]))
    # exact zero for co-located relays: b_prev == b gives d == 0 with no epsilon
    d = (b_prev - b) / (b * a)
    gamma = np.empty(n)
    gamma[0] = 1.0
    acc = a[0] * gamma[0]
    for k in range(1, n):
        gamma[k] = d[k] * acc
        acc += a[k] * gamma[k]
    gamma *= P_T / gamma.sum()

    inv_g0 = 1.0 / np.concatenate(([1.0], b[:-1]))
    P = np.zeros((n + 1, n + 1))
    for j in range(1, n + 1):
        P[:j, j] = inv_g0[:j] / a[j - 1] * gamma[j - 1]
    H = float(np.sum(np.diff(np.concatenate(([0.0], 1.0 / b))) / a))
    rate = float(awgn_capacity(P_T / (sigma2 * H)))
    return PowerAllocation(gamma=gamma, P=P, P_T=float(P_T), rate=rate, net_attenuation=H)


def split_by_link_gain(gains, gamma) -> np.ndarray:
    """Per-link split ``P[i, j] = g[i, j] / sum_l g[l, j] * gamma_j``.

    Equivalent to the source-normalized split used by ``allocate_sum_power``
    whenever gains are multiplicative.
    """
    g = np.asarray(gains, dtype=float)
    n = g.shape[0]
    P = np.zeros((n, n))
    for j in range(1, n):
        col = g[:j, j]
        P[:j, j] = col / col.sum() * gamma[j - 1]
    return P


def dual_certificate(gains, P_T: float, rtol: float = 1e-9) -> DualCertificate:
    """Primal and dual optimal points of the equalization LP, with checks.

    Raises ``ValueError`` if either point is infeasible or the duality gap is
    not closed to ``rtol``.
    """
    if not P_T > 0:
        raise ValueError("total power must be > 0")
    a, b = _stage_sequences(gains)
    inv_b = 1.0 / b
    dinv_b = np.diff(np.concatenate(([0.0], inv_b)))
    zeta = P_T / float(np.sum(dinv_b / a))
    gamma = zeta / a * dinv_b

    inv_a = 1.0 / a
    dinv_a = inv_a - np.concatenate((inv_a[1:], [0.0]))
    weights = inv_b * dinv_a
    theta = 1.0 / float(weights.sum())
    mu = theta * weights

    def close(x, y):
        return np.allclose(x, y, rtol=rtol, atol=0.0)

    if np.any(gamma < 0) or not close(gamma.sum(), P_T):
        raise ValueError("primal point infeasible: gains ordering violated")
    if not close(b * np.cumsum(a * gamma), zeta):
        raise ValueError("primal constraints do not bind uniformly")
    if np.any(mu < 0) or not close(mu.sum(), 1.0):
        raise ValueError("dual point infeasible: gains ordering violated")
    tail = np.cumsum((b * mu)[::-1])[::-1]
    if not close(a * tail, theta):
        raise ValueError("dual constraints violated")
    if not close(zeta, P_T * theta):
        raise ValueError("nonzero duality gap")
    return DualCertificate(theta=theta, mu=mu, zeta=zeta, gamma=gamma)


def relaying_gain(placement: LinePlacement, rho: float) -> float:
    """``exp(rho L) / H``: how much the relays shrink the effective attenuation."""
    g = gain_matrix(placement, Exponential(rho))
    return math.exp(rho * placement.L) / net_attenuation(g)


def single_relay_sum_power(lam: float, P_T: float = 1.0, sigma2: float = 1.0):
    """Closed-form optimum for one relay: ``(y/L, allocation, rate)``."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    if lam <= math.log(3.0):
        x = 0.0
        rate = float(awgn_capacity(2.0 * P_T / ((math.exp(lam) + 1.0) * sigma2)))
    else:
        root = math.sqrt(math.exp(lam) + 1.0) - 1.0
        x = math.log(root) / lam
        rate = float(awgn_capacity(P_T / (2.0 * sigma2 * root)))
    alloc = allocate_sum_power(gain_matrix(LinePlacement(1.0, (x,)), Exponential(lam)), P_T, sigma2)
    return x, alloc, rate


def uniform_attenuation(N: int, lam: float) -> float:
    """Net attenuation with ``N`` relays spaced evenly, ``y_k = k L / (N+1)``."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    z = np.exp(lam * np.arange(N + 2) / (N + 1))
    S = np.cumsum(z[:-1])
    return float(z[1] + np.sum((z[2:] - z[1:-1]) / S[1:]))


def uniform_placement_rate(N: int, lam: float, P_T: float = 1.0, sigma2: float = 1.0) -> float:
    return float(awgn_capacity(P_T / (sigma2 * uniform_attenuation(N, lam))))
