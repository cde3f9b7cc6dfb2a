"""Walk a line, place relays by a solved policy, and score against one-shot placement."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .mdp import MdpSolution, ceil_index
from .placement import PlacementProblem, attenuation_from_z, solve_placement

MAX_RELAYS = 100_000


@dataclass
class DeploymentTrace:
    line_length: float
    placements: list
    states: list
    relay_count: int
    H_sequential: float
    H_offline: float | None = None
    e_percent: float | None = None

    @property
    def relays(self) -> list:
        return self.placements[:-1]


@dataclass(frozen=True)
class SampleRecord:
    sample_index: int
    length: float
    n_relays: int
    H_seq: float
    H_off: float
    e_percent: float


@dataclass
class ComparisonReport:
    Lambda: float
    xi: float
    sample_count: int
    seed: int
    mean_percent_error: float
    mean_relays: float
    zero_relay_cases: int
    max_percent_error: float
    records: list = field(default_factory=list, repr=False)

    @classmethod
    def from_records(cls, records, Lambda: float, xi: float, seed: int) -> "ComparisonReport":
        e = np.array([r.e_percent for r in records], dtype=float)
        n = np.array([r.n_relays for r in records], dtype=float)
        return cls(
            Lambda=Lambda,
            xi=xi,
            sample_count=len(records),
            seed=seed,
            mean_percent_error=float(e.mean()),
            mean_relays=float(n.mean()),
            zero_relay_cases=int(np.count_nonzero(n == 0)),
            max_percent_error=float(e.max()),
            records=list(records),
        )

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("records")
        return d


def _walk(policy: MdpSolution, line_length: float):
    """Relay coordinates and visited states; the policy is read on its own grid."""
    n = policy.config.n_states
    Lam = policy.config.Lambda
    k = n - 1  # s = 1
    y = 0.0
    relays = []
    states = [(k + 1) / n]
    while True:
        a = float(policy.policy[k])
        if not line_length - y > a:
            break
        y += a
        relays.append(y)
        x = states[-1] * math.exp(Lam * a)
        k = int(ceil_index(x / (1.0 + x), n))
        states.append((k + 1) / n)
        if len(relays) > MAX_RELAYS:
            raise RuntimeError("policy keeps placing relays without advancing; check the action grid")
    return relays, states


def sequential_attenuation(relays, line_length: float, Lambda: float) -> float:
    lam = Lambda * line_length
    return attenuation_from_z([math.exp(Lambda * y) for y in relays], lam)


def deploy(policy: MdpSolution, line_length: float, Lambda: float | None = None) -> DeploymentTrace:
    """Place relays while walking a line whose end is revealed on arrival."""
    if Lambda is not None and not math.isclose(Lambda, policy.config.Lambda, rel_tol=1e-12):
        raise ValueError(f"policy was solved for Lambda={policy.config.Lambda}, not {Lambda}")
    if not line_length > 0:
        raise ValueError("line length must be > 0")
    relays, states = _walk(policy, line_length)
    H = sequential_attenuation(relays, line_length, policy.config.Lambda)
    return DeploymentTrace(
        line_length=float(line_length),
        placements=relays + [float(line_length)],
        states=states,
        relay_count=len(relays),
        H_sequential=H,
    )


def offline_oracle(length: float, N: int, Lambda: float, extra_seeds=()) -> float:
    """Smallest net attenuation reachable with ``N`` relays once the length is known."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if not length > 0:
        raise ValueError("length must be > 0")
    lam = Lambda * length
    if N == 0:
        return math.exp(lam)
    sol = solve_placement(PlacementProblem(N, lam), extra_seeds=extra_seeds)
    if not sol.converged:
        raise RuntimeError(f"offline placement did not converge (N={N}, lambda={lam})")
    return sol.objective


def compare(policy: MdpSolution, line_length: float) -> DeploymentTrace:
    """Deploy, then fill in the offline optimum for the same relay count."""
    tr = deploy(policy, line_length)
    Lam = policy.config.Lambda
    # the sequential layout is itself feasible, so seeding with it keeps H_off <= H_seq
    seed = [math.exp(Lam * y) for y in tr.relays]
    H_off = offline_oracle(line_length, tr.relay_count, Lam, extra_seeds=[seed] if seed else ())
    tr.H_offline = H_off
    tr.e_percent = abs(H_off - tr.H_sequential) / H_off * 100.0
    return tr


def sample_length(seed: int, index: int) -> float:
    """Exponential(mean 1) draw from a counter-based stream keyed by ``seed ^ index``."""
    rng = np.random.Generator(np.random.Philox(key=seed ^ index))
    return float(rng.standard_exponential())


def _records(policy: MdpSolution, seed: int, indices) -> list:
    out = []
    for i in indices:
        length = sample_length(seed, i)
        tr = compare(policy, length)
        out.append(SampleRecord(i, length, tr.relay_count, tr.H_sequential, tr.H_offline, tr.e_percent))
    return out


def monte_carlo_compare(
    policy: MdpSolution,
    Lambda: float,
    xi: float,
    samples: int,
    seed: int,
    workers: int = 1,
) -> ComparisonReport:
    """Deploy on ``samples`` random lengths and aggregate the gap to offline placement."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if seed < 0:
        raise ValueError("seed must be >= 0")
    if not math.isclose(Lambda, policy.config.Lambda, rel_tol=1e-12):
        raise ValueError(f"policy was solved for Lambda={policy.config.Lambda}, not {Lambda}")
    if not math.isclose(xi, policy.config.xi, rel_tol=1e-12):
        raise ValueError(f"policy was solved for xi={policy.config.xi}, not {xi}")
    if workers <= 1:
        records = _records(policy, seed, range(samples))
    else:
        chunks = np.array_split(np.arange(samples), workers)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = ex.map(_records, [policy] * len(chunks), [seed] * len(chunks), [c.tolist() for c in chunks])
            records = [r for part in parts for r in part]
    return ComparisonReport.from_records(records, Lambda, xi, seed)


def mean_relay_count(policy: MdpSolution, samples: int, seed: int) -> float:
    """Average relays used over the same random lengths, without the offline step."""
    total = 0
    for i in range(samples):
        relays, _ = _walk(policy, sample_length(seed, i))
        total += len(relays)
    return total / samples
