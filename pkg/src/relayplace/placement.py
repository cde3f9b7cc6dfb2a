"""Optimal positions of N relays on a line under a total power budget.

Work in ``z_k = exp(rho y_k)``.  With ``z_0 = 1`` and ``z_{N+1} = exp(lam)`` the
net attenuation is

    H(z) = z_1 + sum_{k=2}^{N+1} (z_k - z_{k-1}) / (z_0 + ... + z_{k-1})

which is convex in each ``z_k`` separately, so cyclic coordinate descent with
an exact 1-D line search is the workhorse.  Joint convexity is not known, hence
the multi-start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import awgn_capacity

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PlacementProblem:
    N: int
    lam: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be an integer >= 1")
        if not self.lam > 0:
            raise ValueError("lambda must be > 0")

    @property
    def z_sink(self) -> float:
        return math.exp(self.lam)


@dataclass(frozen=True)
class PlacementOptions:
    tol: float = 1e-12
    max_sweeps: int = 10_000
    line_tol: float = 1e-13
    # relative slack when judging whether line-search samples look unimodal
    unimodal_slack: float = 1e-12


@dataclass
class PlacementSolution:
    lam: float
    z: np.ndarray
    objective: float
    converged: bool
    sweeps: int
    seed_index: int = 0
    # summed over every seed's line searches
    unimodal_violations: int = 0
    seed_objectives: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def y_over_L(self) -> np.ndarray:
        return np.log(self.z) / self.lam

    @property
    def G(self) -> float:
        return math.exp(self.lam) / self.objective

    def rate(self, P_T: float = 1.0, sigma2: float = 1.0) -> float:
        return float(awgn_capacity(P_T / (sigma2 * self.objective)))


def attenuation_from_z(z: Sequence[float], lam: float) -> float:
    """Net attenuation for interior variables ``z_1..z_N`` (sink fixed at ``e**lam``)."""
    zz = list(z) + [math.exp(lam)]
    return _objective(zz)


def _objective(zz: list) -> float:
    # zz holds z_1..z_{N+1}; z_0 = 1 is implicit
    h = zz[0]
    S = 1.0 + zz[0]
    prev = zz[0]
    for v in zz[1:]:
        h += (v - prev) / S
        S += v
        prev = v
    return h


def attenuation_gradient(z: Sequence[float], lam: float) -> np.ndarray:
    """``dH/dz_k`` for the interior variables; zero at an unconstrained optimum."""
    zz = np.concatenate(([1.0], np.asarray(z, dtype=float), [math.exp(lam)]))
    n = len(zz) - 2
    S = np.cumsum(zz)
    grad = np.empty(n)
    for k in range(1, n + 1):
        tail = sum((zz[m] - zz[m - 1]) / S[m - 1] ** 2 for m in range(k + 1, n + 2))
        if k == 1:
            grad[0] = 1.0 - 1.0 / S[1] - tail
        else:
            grad[k - 1] = 1.0 / S[k - 1] - 1.0 / S[k] - tail
    return grad


def _unimodal(samples: list, slack: float) -> bool:
    """Values sorted by abscissa must fall then rise (up to roundoff slack)."""
    samples.sort()
    vals = [v for _, v in samples]
    scale = slack * max(1.0, max(abs(v) for v in vals))
    rising = False
    for prev, cur in zip(vals, vals[1:]):
        if cur > prev + scale:
            rising = True
        elif rising and cur < prev - scale:
            return False
    return True


def golden_section(f, lo: float, hi: float, tol: float, slack: float = 1e-12):
    """Minimize ``f`` on ``[lo, hi]``; returns ``(x, f(x), looked_unimodal)``.

    Both end points are evaluated too, so a minimizer sitting on the boundary
    is returned exactly.
    """
    f_lo, f_hi = f(lo), f(hi)
    samples = [(lo, f_lo), (hi, f_hi)]
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    samples += [(c, fc), (d, fd)]
    while b - a > tol * max(1.0, abs(a)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
            samples.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
            samples.append((d, fd))
    x, fx = (c, fc) if fc <= fd else (d, fd)
    if f_lo <= fx:
        x, fx = lo, f_lo
    if f_hi < fx:
        x, fx = hi, f_hi
    return x, fx, _unimodal(samples, slack)


def _coordinate_descent(zz: list, opts: PlacementOptions):
    n = len(zz) - 1
    best = _objective(zz)
    violations = 0
    for sweep in range(1, opts.max_sweeps + 1):
        start = best
        for k in range(n):
            lo = 1.0 if k == 0 else zz[k - 1]
            hi = zz[k + 1]
            if hi - lo <= 0:
                continue

            def f(v, k=k):
                zz[k] = v
                return _objective(zz)

            old = zz[k]
            x, fx, ok = golden_section(f, lo, hi, opts.line_tol, opts.unimodal_slack)
            violations += 0 if ok else 1
            if fx <= best:
                zz[k], best = x, fx
            else:
                zz[k] = old
        if start - best < opts.tol:
            return best, True, sweep, violations
    return best, False, opts.max_sweeps, violations


def default_seeds(problem: PlacementProblem, previous: Sequence[float] | None = None) -> list:
    """All-at-source, uniform, and (optionally) a previous solution with one more relay."""
    N, lam = problem.N, problem.lam
    seeds = [np.ones(N), np.exp(lam * np.arange(1, N + 1) / (N + 1))]
    if previous is not None and len(previous) == N - 1:
        y = np.concatenate(([0.0], np.log(np.asarray(previous, dtype=float)), [lam]))
        gap = int(np.argmax(np.diff(y)))
        # new relay in the middle of the widest hop
        y_new = np.insert(y[1:-1], gap, 0.5 * (y[gap] + y[gap + 1]))
        seeds.append(np.exp(np.sort(y_new)))
    return seeds


def solve_placement(
    problem: PlacementProblem,
    opts: PlacementOptions | None = None,
    previous: Sequence[float] | None = None,
    extra_seeds: Iterable[Sequence[float]] = (),
) -> PlacementSolution:
    """Best of several coordinate-descent runs; ties go to the earliest seed."""
    opts = opts or PlacementOptions()
    z_sink = problem.z_sink
    seeds = default_seeds(problem, previous) + [np.asarray(s, dtype=float) for s in extra_seeds]
    best = None
    objectives = []
    total_violations = 0
    for idx, seed in enumerate(seeds):
        if len(seed) != problem.N:
            raise ValueError(f"seed {idx} has {len(seed)} entries, expected {problem.N}")
        zz = [float(v) for v in np.clip(np.sort(seed), 1.0, z_sink)] + [z_sink]
        obj, conv, sweeps, viol = _coordinate_descent(zz, opts)
        objectives.append(obj)
        total_violations += viol
        if best is None or obj < best.objective:
            best = PlacementSolution(
                lam=problem.lam,
                z=np.array(zz[:-1]),
                objective=obj,
                converged=conv,
                sweeps=sweeps,
                seed_index=idx,
            )
    best.unimodal_violations = total_violations
    best.seed_objectives = objectives
    return best


def rate_vs_N_table(lam: float, N_max: int, P_T: float = 1.0, sigma2: float = 1.0, opts: PlacementOptions | None = None):
    """Rows ``(N, rate, G, solution)`` for ``N = 1..N_max``."""
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    rows = []
    prev = None
    for N in range(1, N_max + 1):
        sol = solve_placement(PlacementProblem(N, lam), opts, previous=prev)
        if not sol.converged:
            raise RuntimeError(f"placement solver did not converge for N={N}, lambda={lam}")
        rows.append((N, sol.rate(P_T, sigma2), sol.G, sol))
        prev = sol.z
    return rows
