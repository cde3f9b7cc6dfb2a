"""Path-loss laws and the decode-and-forward multi-relay achievable rate.

Nodes are indexed 0 (source), 1..N (relays), N+1 (sink).  Gain and power
matrices are square ``(N+2, N+2)`` arrays; only the strict upper triangle
(``i < j``) carries meaning.  Gains are stored as power gains, amplitude gains
are ``sqrt`` of those.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np


def awgn_capacity(x):
    """Gaussian channel capacity ``0.5 * log2(1 + x)`` in bits per symbol."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("SNR must be nonnegative")
    out = 0.5 * np.log2(1.0 + arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Exponential:
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be > 0")

    def gain(self, r):
        r = _check_distance(r)
        return np.exp(-self.rho * r)


@dataclass(frozen=True)
class PowerLaw:
    eta: float

    def __post_init__(self):
        if not self.eta > 1:
            raise ValueError("eta must be > 1")

    def gain(self, r):
        r = _check_distance(r)
        if np.any(r == 0):
            raise ValueError("power-law gain is unbounded at r = 0")
        return r ** (-self.eta)


@dataclass(frozen=True)
class ModifiedPowerLaw:
    eta: float
    b: float

    def __post_init__(self):
        if not self.eta > 1:
            raise ValueError("eta must be > 1")
        if not self.b > 0:
            raise ValueError("reference distance b must be > 0")

    def gain(self, r):
        r = _check_distance(r)
        # min{r^-eta, b^-eta} == max(r, b)^-eta, and stays finite at r = 0
        return np.maximum(r, self.b) ** (-self.eta)


PathLossModel = Union[Exponential, PowerLaw, ModifiedPowerLaw]


def _check_distance(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distance must be nonnegative")
    return r


def gain(model: PathLossModel, r):
    g = model.gain(r)
    return float(g) if np.ndim(g) == 0 else g


@dataclass(frozen=True)
class LinePlacement:
    """Source at 0, sink at ``L`` and ``N`` relays at ``y`` (nondecreasing)."""

    L: float
    y: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if not self.L > 0:
            raise ValueError("line length L must be > 0")
        pos = self.positions()
        if np.any(np.diff(pos) < 0):
            raise ValueError("relay coordinates must satisfy 0 <= y1 <= ... <= yN <= L")

    @property
    def N(self) -> int:
        return len(self.y)

    def positions(self) -> np.ndarray:
        """Coordinates of all nodes, ``[0, y1, ..., yN, L]``."""
        return np.concatenate(([0.0], np.asarray(self.y, dtype=float), [self.L]))

    def hop_lengths(self) -> np.ndarray:
        return np.diff(self.positions())


def gain_matrix(placement: LinePlacement, model: PathLossModel) -> np.ndarray:
    """Pairwise power gains for a line placement (unit diagonal, symmetric)."""
    pos = placement.positions()
    return _gains_from_distances(np.abs(pos[:, None] - pos[None, :]), model)


def _gains_from_distances(dist: np.ndarray, model: PathLossModel) -> np.ndarray:
    n = dist.shape[0]
    g = np.ones((n, n))
    iu = np.triu_indices(n, k=1)
    g[iu] = model.gain(dist[iu])
    il = np.tril_indices(n, k=-1)
    g[il] = g.T[il]
    return g


def received_snr_terms(gains, powers, sigma2: float = 1.0) -> np.ndarray:
    """The ``N+1`` SNR arguments of the min in the achievable-rate formula.

    Entry ``k-1`` is ``(1/sigma2) * sum_{j<=k} (sum_{i<j} h[i,k] sqrt(P[i,j]))**2``.
    """
    g = np.asarray(gains, dtype=float)
    P = np.asarray(powers, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
        raise ValueError("gain matrix must be square with at least 2 nodes")
    if P.shape != g.shape:
        raise ValueError(f"power matrix shape {P.shape} does not match gains {g.shape}")
    if not sigma2 > 0:
        raise ValueError("noise power must be > 0")
    n = g.shape[0]
    iu = np.triu_indices(n, k=1)
    if np.any(g[iu] <= 0):
        raise ValueError("gains must be strictly positive")
    if np.any(P < 0):
        raise ValueError("powers must be nonnegative")
    # only i < j carries power
    sqrtP = np.sqrt(np.triu(P, k=1))
    h = np.sqrt(g)
    terms = np.empty(n - 1)
    for k in range(1, n):
        # amplitude combining at receiver k of every stream j <= k
        coherent = h[:k, k] @ sqrtP[:k, 1 : k + 1]
        terms[k - 1] = np.sum(coherent**2) / sigma2
    return terms


def achievable_rate(gains, powers, sigma2: float = 1.0) -> float:
    """Decode-and-forward inner bound: the worst per-node decoding rate."""
    return float(awgn_capacity(received_snr_terms(gains, powers, sigma2).min()))


# -- relays off the line ------------------------------------------------------


def compact_onto_segment(positions_2d: Sequence[Sequence[float]], L: float) -> np.ndarray:
    """Move planar relays onto the source-sink segment without growing any distance.

    ``positions_2d`` holds the relay coordinates only; source is (0, 0) and sink
    is (L, 0).  Relays are projected onto the x axis; those left of the source
    are spread evenly inside ``[0, a/2]`` and those right of the sink inside
    ``[L - a/2, L]``, where ``a`` is the smallest gap between projected nodes.
    When ``a == 0`` the projection is simply clamped to ``[0, L]``.
    Returns the new x coordinates in the input order.
    """
    pts = np.asarray(positions_2d, dtype=float).reshape(-1, 2)
    x = pts[:, 0].copy()
    allx = np.concatenate(([0.0], x, [L]))
    if len(allx) > 1:
        a = np.min(np.abs(allx[:, None] - allx[None, :])[np.triu_indices(len(allx), 1)])
    else:
        a = 0.0
    if a == 0:
        return np.clip(x, 0.0, L)
    out = x.copy()
    behind = np.where(x < 0)[0]
    beyond = np.where(x > L)[0]
    for idx, base in ((behind, 0.0), (beyond, L - a / 2)):
        if len(idx) == 0:
            continue
        order = idx[np.argsort(x[idx], kind="stable")]
        m = len(order)
        out[order] = base + (a / 2) * np.arange(1, m + 1) / (m + 1)
    return out


def projection_improves_rate_check(positions_2d, powers, model: PathLossModel, sigma2: float, L: float = 1.0):
    """Rate before and after compacting planar relays onto the segment.

    The same power matrix is used for both placements; relay ``i`` keeps its
    index.  Returns ``(rate_before, rate_after)``.
    """
    pts = np.asarray(positions_2d, dtype=float).reshape(-1, 2)
    nodes = np.vstack(([0.0, 0.0], pts, [L, 0.0]))
    dist_before = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=-1)
    x_after = np.concatenate(([0.0], compact_onto_segment(pts, L), [L]))
    dist_after = np.abs(x_after[:, None] - x_after[None, :])
    before = achievable_rate(_gains_from_distances(dist_before, model), powers, sigma2)
    after = achievable_rate(_gains_from_distances(dist_after, model), powers, sigma2)
    return before, after


def exponential_gain_from_source(positions, rho: float) -> np.ndarray:
    """``g_{0,k} = exp(-rho * y_k)`` for every node coordinate."""
    return np.exp(-rho * np.asarray(positions, dtype=float))
