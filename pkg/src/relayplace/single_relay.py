"""Single relay between source and sink, both nodes limited to the same power.

The source splits its power ``P`` into a fraction ``alpha`` aimed at the relay
and ``1 - alpha`` sent coherently with the relay to the sink.  Everything is
normalized: positions are fractions ``x = r / L`` and powers enter only through
``snr = P / sigma^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ModifiedPowerLaw, PathLossModel, PowerLaw, awgn_capacity

LOG2 = math.log(2.0)
LOG4 = math.log(4.0)


@dataclass(frozen=True)
class SingleRelaySolution:
    regime: str
    x_star: float
    alpha_star: float
    R_star: float

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "x_star": self.x_star,
            "alpha_star": self.alpha_star,
            "R_star": self.R_star,
        }


def _link_gains(r: float, model: PathLossModel, L: float):
    g01 = float(model.gain(r))
    g12 = float(model.gain(L - r))
    g02 = float(model.gain(L))
    return g01, g02, g12


def rate_arguments(alpha, g01, g02, g12):
    """The two SNR-free arguments of the min: relay decoding and sink decoding."""
    relay = alpha * g01
    sink = g02 + g12 + 2.0 * np.sqrt((1.0 - alpha) * g02 * g12)
    return relay, sink


def single_relay_rate(alpha: float, r: float, model: PathLossModel, L: float = 1.0, snr: float = 1.0) -> float:
    """Achievable rate with source split ``alpha`` and relay at distance ``r``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not 0.0 <= r <= L:
        raise ValueError("relay distance must lie in [0, L]")
    if snr < 0:
        raise ValueError("snr must be nonnegative")
    relay, sink = rate_arguments(alpha, *_link_gains(r, model, L))
    return float(awgn_capacity(snr * min(relay, sink)))


def alpha_threshold(g01: float, g02: float, g12: float) -> float:
    """Power split that equalizes the two rate arguments at a fixed location.

    When ``g01 < g02 + g12`` the relay link is the bottleneck for every split
    and the best choice is ``alpha = 1``.
    """
    if g01 < g02 + g12:
        return 1.0
    t = math.sqrt(g02 * (1.0 - g12 / g01)) + math.sqrt(g12 * (1.0 - g02 / g01))
    return min(1.0, t * t / g01)


# -- exponential path loss ----------------------------------------------------


def _exp_high_attenuation(lam: float):
    """``(x_plus, alpha, rate_argument)`` of the high-attenuation branch."""
    D = 2.0 * math.exp(-lam) + math.exp(-lam / 2.0)
    q = math.exp(-lam) / D
    inner = math.sqrt(1.0 - q / D) + math.sqrt((1.0 - q) / D)
    x_plus = -math.log(D) / lam
    alpha = q * inner * inner
    return x_plus, alpha, math.exp(-lam) * inner * inner


def exponential_branch(lam: float, regime: str, snr: float = 1.0) -> SingleRelaySolution:
    """Evaluate one branch formula regardless of whether ``lam`` lies inside it."""
    if regime == "ii":
        return SingleRelaySolution("ii", 0.0, 1.0, float(awgn_capacity(snr)))
    if regime == "iii":
        alpha = 4.0 * math.exp(-lam) * (1.0 - math.exp(-lam))
        return SingleRelaySolution("iii", 0.0, alpha, float(awgn_capacity(snr * alpha)))
    if regime == "iv":
        x, alpha, arg = _exp_high_attenuation(lam)
        return SingleRelaySolution("iv", x, alpha, float(awgn_capacity(snr * arg)))
    raise ValueError(f"unknown regime {regime!r}")


def solve_exponential_node_power(lam: float, snr: float = 1.0) -> SingleRelaySolution:
    """Optimal relay location and power split under exponential path loss."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    # closed intervals, lower branch wins ties
    if lam <= LOG2:
        regime = "ii"
    elif lam <= LOG4:
        regime = "iii"
    else:
        regime = "iv"
    return exponential_branch(lam, regime, snr)


# -- power law path loss ------------------------------------------------------


def powerlaw_f1(x, eta):
    return (x ** (1.0 - eta) - 1.0) ** 2 * (1.0 - (1.0 / x - 1.0) ** (-eta))


def powerlaw_f2(x, eta):
    return (1.0 - x) ** (-eta) - (1.0 / x - 1.0) ** (-eta)


@dataclass
class RootResult:
    root: float
    residual: float
    iterates: list = field(default_factory=list)


def powerlaw_root(eta: float, lo: float | None = None, hi: float = 0.5 - 1e-9, xtol: float = 1e-12) -> RootResult:
    """Bisection for the crossing of ``f1`` (decreasing) and ``f2`` (increasing).

    Keeps halving past ``xtol`` until the bracket is one ulp wide, since near
    ``x = 1/2`` the slopes grow like ``2**eta`` and an ``xtol``-wide bracket
    alone does not pin the residual.
    """
    if not eta > 1:
        raise ValueError("eta must be > 1")
    if lo is None:
        # keep x**(1 - eta) squared inside double range
        lo = max(1e-9, 10.0 ** (-150.0 / (eta - 1.0)))

    def h(x):
        return powerlaw_f1(x, eta) - powerlaw_f2(x, eta)

    if not (h(lo) > 0 > h(hi)):
        # past eta ~ 25 the root sits within 1e-9 of 1/2, beyond double resolution
        raise RuntimeError(f"bracket [{lo}, {hi}] does not enclose a sign change for eta={eta}")
    iterates = []
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        iterates.append(mid)
        v = h(mid)
        if v == 0:
            lo = hi = mid
            break
        if v > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol and abs(v) < 1e-13:
            break
    x = lo if abs(h(lo)) <= abs(h(hi)) else hi
    return RootResult(x, abs(h(x)), iterates)


def _powerlaw_solution(regime: str, x: float, eta: float, b: float | None, snr: float) -> SingleRelaySolution:
    model = PowerLaw(eta) if b is None else ModifiedPowerLaw(eta, b)
    g01, g02, g12 = _link_gains(x, model, 1.0)
    alpha = alpha_threshold(g01, g02, g12)
    relay, sink = rate_arguments(alpha, g01, g02, g12)
    return SingleRelaySolution(regime, x, alpha, float(awgn_capacity(snr * min(relay, sink))))


def solve_powerlaw_node_power(eta: float, snr: float = 1.0) -> SingleRelaySolution:
    """Optimal placement under ``r**-eta`` loss on a unit-length line."""
    p = powerlaw_root(eta).root
    return _powerlaw_solution("powerlaw", p, eta, None, snr)


def solve_modified_powerlaw_node_power(eta: float, b_over_l: float, snr: float = 1.0) -> SingleRelaySolution:
    """Optimal placement under ``min(r**-eta, b**-eta)`` loss, ``2b < L``."""
    if not 0.0 < b_over_l < 0.5:
        raise ValueError("b_over_L must lie in (0, 0.5)")
    p = powerlaw_root(eta).root
    if p >= b_over_l:
        return _powerlaw_solution("modified_powerlaw_root", p, eta, b_over_l, snr)
    return _powerlaw_solution("modified_powerlaw_floor", b_over_l, eta, b_over_l, snr)


# -- brute force --------------------------------------------------------------


def grid_maximize(model: PathLossModel, n_alpha: int = 2001, n_x: int = 2001, snr: float = 1.0):
    """Exhaustive search of the rate over an ``(alpha, x)`` grid on a unit line.

    Returns ``(x, alpha, rate)`` of the best grid point.  ``x = 0`` is skipped
    for the pure power law, whose gain is unbounded there.
    """
    x = np.linspace(0.0, 1.0, n_x)
    if isinstance(model, PowerLaw):
        x = x[1:-1]
    alpha = np.linspace(0.0, 1.0, n_alpha)
    g01 = model.gain(x)[:, None]
    g12 = model.gain(1.0 - x)[:, None]
    g02 = float(model.gain(1.0))
    relay, sink = rate_arguments(alpha[None, :], g01, g02, g12)
    obj = np.minimum(relay, sink)
    i, j = np.unravel_index(np.argmax(obj), obj.shape)
    return float(x[i]), float(alpha[j]), float(awgn_capacity(snr * obj[i, j]))


def sweep(model_kind: str, values, b_over_l: float = 0.1, snr: float = 1.0):
    """Solutions over a parameter sweep (``lam`` for exp, ``eta`` otherwise)."""
    out = []
    for v in values:
        if model_kind == "exp":
            out.append((v, solve_exponential_node_power(v, snr)))
        elif model_kind == "powerlaw":
            out.append((v, solve_powerlaw_node_power(v, snr)))
        elif model_kind == "modified":
            out.append((v, solve_modified_powerlaw_node_power(v, b_over_l, snr)))
        else:
            raise ValueError(f"unknown model kind {model_kind!r}")
    return out

