"""As-you-go relay placement as a total-cost MDP, solved by value iteration.

Lengths are normalized so the line's mean length is 1 (``beta = 1``) and the
only channel parameter is ``Lam = rho / beta``.  After the k-th relay the state
is ``s = e^{Lam y_k} / (1 + e^{Lam y_1} + ... + e^{Lam y_k})``; an action is the
distance to walk before placing the next relay.  When the line ends first the
sink is placed and the accumulated attenuation term is paid.

Per state the expected cost of action ``a`` is

    s * u(a) + e^{-a} * (xi + J(s'))        s' = s e^{Lam a} / (1 + s e^{Lam a})

where ``s u(a)`` collects the expected sink-side cost.  For ``Lam < 1`` the
never-place action costs ``theta s`` with ``theta = Lam / (1 - Lam)``, and the
solver works with the margin ``M = J - theta s`` so that ``J < theta s`` is a
sign check rather than a difference of nearly equal numbers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

# next-state gridding: round up onto the grid, or interpolate J linearly
NEXT_STATE_RULES = ("ceil", "interp")
# ceiling lookups are precomputed below this many (state, action) pairs
_PRECOMPUTE_LIMIT = 20_000_000


class MdpDiagnostic(UserWarning):
    pass


@dataclass(frozen=True)
class MdpConfig:
    Lambda: float
    xi: float
    state_step: float = 0.01
    action_step: float = 0.001
    a_max: float | None = None
    tol: float = 1e-9
    iter_cap: int = 100_000
    next_state: str = "ceil"
    form: str = "auto"
    # on a cap diagnostic, re-solve with the cap doubled (at most this many times)
    cap_doublings: int = 4

    def __post_init__(self):
        if not self.Lambda > 0:
            raise ValueError("Lambda must be > 0")
        if not self.xi > 0:
            raise ValueError("xi must be > 0")
        if not 0 < self.state_step <= 0.1:
            raise ValueError("state_step must lie in (0, 0.1]")
        n = 1.0 / self.state_step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("state_step must divide 1 evenly")
        if not self.action_step > 0:
            raise ValueError("action_step must be > 0")
        if self.a_max is not None and not self.a_max > 0:
            raise ValueError("a_max must be > 0")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.iter_cap < 1:
            raise ValueError("iter_cap must be >= 1")
        if self.cap_doublings < 0:
            raise ValueError("cap_doublings must be >= 0")
        if self.next_state not in NEXT_STATE_RULES:
            raise ValueError(f"next_state must be one of {NEXT_STATE_RULES}")
        if self.form not in ("auto", "integral", "theta"):
            raise ValueError("form must be 'auto', 'integral' or 'theta'")
        if self.form == "theta" and self.Lambda >= 1:
            raise ValueError("theta form needs Lambda < 1")

    @classmethod
    def from_rho_beta(cls, rho: float, beta: float, xi: float, **kw) -> "MdpConfig":
        """Config for a line of mean length ``1/beta``; distances come out in units of ``1/beta``."""
        if not (rho > 0 and beta > 0):
            raise ValueError("rho and beta must be > 0")
        return cls(Lambda=rho / beta, xi=xi, **kw)

    @property
    def n_states(self) -> int:
        return int(round(1.0 / self.state_step))

    @property
    def action_cap(self) -> float:
        return self.a_max if self.a_max is not None else max(25.0, 5.0 / self.Lambda)

    @property
    def n_actions(self) -> int:
        return int(round(self.action_cap / self.action_step)) + 1

    @property
    def theta(self) -> float | None:
        return self.Lambda / (1.0 - self.Lambda) if self.Lambda < 1 else None

    @property
    def uses_theta_form(self) -> bool:
        if self.form == "auto":
            return self.Lambda < 1
        return self.form == "theta"

    def states(self) -> np.ndarray:
        return np.arange(1, self.n_states + 1) * self.state_step

    def actions(self) -> np.ndarray:
        return np.arange(self.n_actions) * self.action_step


def sink_side_integral(a, Lam: float):
    """``int_0^a e^{-z} (e^{Lam z} - 1) dz`` per unit state, in closed form.

    At ``Lam = 1`` the removable singularity is replaced by its limit.
    """
    a = np.asarray(a, dtype=float)
    c = 1.0 - Lam
    first = a if c == 0 else -np.expm1(-c * a) / c
    return first + np.expm1(-a)


def stage_weight(a, Lam: float):
    """``u(a)``: the state-proportional part of the expected cost of action ``a``."""
    a = np.asarray(a, dtype=float)
    return sink_side_integral(a, Lam) + np.exp(-a) * np.expm1(Lam * a)


def next_state(s, a, Lam: float):
    x = s * np.exp(Lam * np.asarray(a, dtype=float))
    return x / (1.0 + x)


def ceil_index(sp, n_states: int):
    """Zero-based grid index of ``sp`` rounded up to the ``1/n_states`` grid."""
    k = np.ceil(np.asarray(sp) * n_states - 1e-9).astype(np.int64)
    return np.clip(k, 1, n_states) - 1


def lookup(J: np.ndarray, sp, cfg: MdpConfig):
    """``J`` at off-grid next states under the configured gridding rule."""
    n = cfg.n_states
    if cfg.next_state == "ceil":
        return J[ceil_index(sp, n)]
    # linear in s; below the first grid point extrapolate from the first two
    pos = np.asarray(sp) * n - 1.0
    lo = np.clip(np.floor(pos).astype(np.int64), 0, n - 2)
    w = pos - lo
    return J[lo] + w * (J[lo + 1] - J[lo])


def stage_cost_expectation(s: float, a: float, cfg: MdpConfig, J=None) -> float:
    """Expected cost-to-go of walking ``a`` from state ``s`` before the next relay.

    ``J`` is the value on the state grid used for the post-placement state
    (defaults to zero).
    """
    if not 0 < s <= 1:
        raise ValueError("state must lie in (0, 1]")
    if a < 0:
        raise ValueError("action must be >= 0")
    J = np.zeros(cfg.n_states) if J is None else np.asarray(J, dtype=float)
    sp = next_state(s, a, cfg.Lambda)
    return float(s * stage_weight(a, cfg.Lambda) + math.exp(-a) * (cfg.xi + lookup(J, sp, cfg)))


@dataclass
class BackupResult:
    values: np.ndarray
    policy_index: np.ndarray
    boundary_hits: int
    no_relay_wins: int


class BellmanOperator:
    """Precomputed tables for repeated backups at one configuration."""

    def __init__(self, cfg: MdpConfig):
        self.cfg = cfg
        self.s = cfg.states()
        self.a = cfg.actions()
        self.disc = np.exp(-self.a)
        self.growth = np.exp(cfg.Lambda * self.a)
        self.theta = cfg.theta
        self.theta_form = cfg.uses_theta_form
        if self.theta_form:
            # s * v(a) + theta * s' e^{-a} replaces the closed-form integral
            self.weight = -self.theta * np.exp((cfg.Lambda - 1.0) * self.a)
        else:
            self.weight = stage_weight(self.a, cfg.Lambda)
        self.disc_xi = self.disc * cfg.xi
        n_pairs = len(self.s) * len(self.a)
        self._nxt = None
        if cfg.next_state == "ceil" and n_pairs <= _PRECOMPUTE_LIMIT:
            dtype = np.int16 if cfg.n_states < 2**15 else np.int32
            self._nxt = np.empty((len(self.s), len(self.a)), dtype=dtype)
            for i in range(len(self.s)):
                self._nxt[i] = self._row_index(i)

    def _row_next(self, i: int) -> np.ndarray:
        x = self.s[i] * self.growth
        return x / (1.0 + x)

    def _row_index(self, i: int) -> np.ndarray:
        return ceil_index(self._row_next(i), self.cfg.n_states)

    def _row_lookup(self, i: int, V: np.ndarray) -> np.ndarray:
        """Continuation value at every action from state ``i``, in the solver's units."""
        cfg = self.cfg
        if cfg.next_state == "ceil":
            idx = self._nxt[i] if self._nxt is not None else self._row_index(i)
            cont = V[idx]
            if self.theta_form:
                cont = cont + self.theta * self.s[idx]
            return cont
        sp = self._row_next(i)
        cont = lookup(V, sp, cfg)
        if self.theta_form:
            # the linear part interpolates exactly
            cont = cont + self.theta * sp
        return cont

    def apply(self, V: np.ndarray) -> BackupResult:
        """One backup.  ``V`` is ``J``, or the margin ``J - theta s`` in theta form."""
        ns = len(self.s)
        out = np.empty(ns)
        pol = np.empty(ns, dtype=np.int64)
        last = len(self.a) - 1
        for i in range(ns):
            q = self.s[i] * self.weight + self.disc_xi + self.disc * self._row_lookup(i, V)
            j = int(np.argmin(q))  # first minimizer: ties go to the smaller action
            pol[i] = j
            out[i] = q[j]
        boundary = int(np.count_nonzero(pol == last))
        wins = 0
        if self.theta is not None:
            no_relay = np.zeros(ns) if self.theta_form else self.theta * self.s
            lose = out > no_relay
            wins = int(np.count_nonzero(lose))
            out = np.where(lose, no_relay, out)
            pol = np.where(lose, -1, pol)
        return BackupResult(out, pol, boundary, wins)

    def to_J(self, V: np.ndarray) -> np.ndarray:
        return V + self.theta * self.s if self.theta_form else V.copy()

    def from_J(self, J: np.ndarray) -> np.ndarray:
        J = np.asarray(J, dtype=float)
        return J - self.theta * self.s if self.theta_form else J.copy()


def bellman_backup(J, cfg: MdpConfig, operator: BellmanOperator | None = None):
    """``(J', policy')`` with the policy as action distances (``inf`` = never place)."""
    op = operator or BellmanOperator(cfg)
    res = op.apply(op.from_J(J))
    return op.to_J(res.values), _actions_from_index(res.policy_index, op.a)


def _actions_from_index(idx: np.ndarray, actions: np.ndarray) -> np.ndarray:
    out = np.full(len(idx), np.inf)
    ok = idx >= 0
    out[ok] = actions[idx[ok]]
    return out


@dataclass
class MdpSolution:
    config: MdpConfig
    s: np.ndarray
    J: np.ndarray
    policy: np.ndarray
    policy_index: np.ndarray
    iterations: int
    final_sup_diff: float
    converged: bool
    residual: float
    monotone: bool
    min_increment: float
    boundary_hits: int
    no_relay_wins: int
    margin: np.ndarray | None = None
    cap_extensions: int = 0
    tie_break: str = "smallest_action"
    history: list = field(default_factory=list)

    @property
    def theta(self) -> float | None:
        return self.config.theta

    @property
    def Lambda(self) -> float:
        return self.config.Lambda

    def index_of(self, s: float) -> int:
        n = self.config.n_states
        k = int(round(s * n))
        if not 1 <= k <= n or abs(k - s * n) > 1e-6:
            raise ValueError(f"state {s} is not on the policy grid")
        return k - 1

    def action(self, s: float) -> float:
        return float(self.policy[self.index_of(s)])

    def below_no_relay_cost(self) -> bool:
        """``J(s) < theta s`` on the whole grid (only meaningful for ``Lam < 1``)."""
        if self.theta is None:
            raise ValueError("no finite no-relay cost when Lambda >= 1")
        if self.margin is not None:
            return bool(np.all(self.margin < 0))
        return bool(np.all(self.J < self.theta * self.s))

    def metadata(self) -> dict:
        c = self.config
        return {
            "Lambda": c.Lambda,
            "xi": c.xi,
            "state_step": c.state_step,
            "action_step": c.action_step,
            "a_max": c.action_cap,
            "tol": c.tol,
            "iter_cap": c.iter_cap,
            "next_state": c.next_state,
            "form": "theta" if c.uses_theta_form else "integral",
            "iterations": self.iterations,
            "final_sup_diff": self.final_sup_diff,
            "converged": self.converged,
            "residual": self.residual,
            "monotone": self.monotone,
            "boundary_hits": self.boundary_hits,
            "no_relay_wins": self.no_relay_wins,
            "cap_extensions": self.cap_extensions,
            "tie_break": self.tie_break,
            "theta": self.theta,
        }


def solve(cfg: MdpConfig, record_history: bool = False) -> MdpSolution:
    """Value iteration from ``J = 0`` until the sup-norm step drops below ``tol``.

    If some state's best action sits on the action cap, or never placing beats
    every capped action, the cap was too short: a diagnostic is issued and the
    problem is re-solved with the cap doubled, up to ``cfg.cap_doublings`` times.
    ``solution.config.action_cap`` reports the cap finally used.
    """
    sol = _solve_once(cfg, record_history)
    extensions = 0
    while (sol.boundary_hits or sol.no_relay_wins) and extensions < cfg.cap_doublings:
        cfg = replace(cfg, a_max=2.0 * cfg.action_cap)
        sol = _solve_once(cfg, record_history)
        extensions += 1
    sol.cap_extensions = extensions
    if not sol.converged:
        warnings.warn(f"value iteration hit iter_cap={cfg.iter_cap} with sup diff {sol.final_sup_diff:.3e}", MdpDiagnostic)
    if sol.boundary_hits:
        warnings.warn(f"{sol.boundary_hits} states choose the action cap {cfg.action_cap}; raise a_max", MdpDiagnostic)
    if sol.no_relay_wins:
        warnings.warn(f"never placing won at {sol.no_relay_wins} states; the action cap is too small", MdpDiagnostic)
    return sol


def _solve_once(cfg: MdpConfig, record_history: bool) -> MdpSolution:
    op = BellmanOperator(cfg)
    V = op.from_J(np.zeros(cfg.n_states))
    min_inc = math.inf
    diff = math.inf
    history = []
    res = None
    it = 0
    for it in range(1, cfg.iter_cap + 1):
        res = op.apply(V)
        inc = res.values - V
        min_inc = min(min_inc, float(inc.min()))
        diff = float(np.max(np.abs(inc)))
        V = res.values
        if record_history:
            history.append(op.to_J(V))
        if diff < cfg.tol:
            break
    converged = diff < cfg.tol
    check = op.apply(V)
    residual = float(np.max(np.abs(check.values - V)))
    return MdpSolution(
        config=cfg,
        s=op.s.copy(),
        J=op.to_J(V),
        policy=_actions_from_index(res.policy_index, op.a),
        policy_index=res.policy_index,
        iterations=it,
        final_sup_diff=diff,
        converged=converged,
        residual=residual,
        monotone=min_inc >= 0.0,
        min_increment=min_inc,
        boundary_hits=res.boundary_hits,
        no_relay_wins=res.no_relay_wins,
        margin=V.copy() if op.theta_form else None,
        history=history,
    )


# -- relay budget -------------------------------------------------------------


@dataclass
class TuningResult:
    xi: float
    mean_relays: float
    steps: int
    history: list


def constrained_tuning(
    M: float,
    template: MdpConfig,
    samples: int = 10_000,
    seed: int = 0,
    xi_bracket: tuple = (1e-5, 1.0),
    count_tol: float = 0.05,
    max_steps: int = 30,
) -> TuningResult:
    """Relay price ``xi`` whose policy uses ``M`` relays on average.

    The mean count falls as ``xi`` rises, so bisect on ``log xi``.  The count is
    a step function of ``xi``; the search stops when it is within
    ``count_tol`` of ``M`` or after ``max_steps`` halvings.
    """
    from .deploy import mean_relay_count

    if not M > 0:
        raise ValueError("relay budget must be > 0")
    lo, hi = xi_bracket
    if not 0 < lo < hi:
        raise ValueError("xi bracket must satisfy 0 < lo < hi")

    def count(xi):
        pol = solve(replace(template, xi=xi))
        return mean_relay_count(pol, samples, seed)

    history = []
    c_lo, c_hi = count(lo), count(hi)
    history += [(lo, c_lo), (hi, c_hi)]
    if not c_hi - count_tol <= M <= c_lo + count_tol:
        raise ValueError(f"budget {M} unattainable: counts span [{c_hi}, {c_lo}] over xi in [{lo}, {hi}]")
    for step in range(1, max_steps + 1):
        mid = math.sqrt(lo * hi)
        c = count(mid)
        history.append((mid, c))
        if abs(c - M) <= count_tol:
            return TuningResult(mid, c, step, history)
        if c > M:
            lo = mid
        else:
            hi = mid
    best = min(history, key=lambda t: abs(t[1] - M))
    return TuningResult(best[0], best[1], max_steps, history)
