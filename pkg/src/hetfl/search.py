"""Worst-case instance search.

Two routes: the closed-form ratio of random dictatorship on its worst-case
family ``(alpha0, alphax, alpha1, beta0, beta1, x)``, enumerated exactly, and a
seeded hill climber over concrete instances for any mechanism.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .audit import INFINITY, SCHEMA_VERSION, RatioReport, approximation_ratio
from .corpus import prd_instance, rd_worst_case
from .mechanisms import Mechanism
from .model import (
    ONE,
    ZERO,
    Agent,
    Instance,
    SearchSpaceTooLarge,
    UtilityClass,
    as_rational,
    format_rational,
    instance_to_dict,
)

CONJECTURED_RATIO = Fraction(3, 2)


@dataclass(frozen=True)
class WorstCaseParams:
    """Counts of single-approval agents: ``alpha*`` approve facility 1 and sit
    at 0, ``x`` or 1; ``beta*`` approve facility 2 and sit at 0 or 1.

    Valid parameters make ``x`` a median of the facility-1 approvers and
    facility 1 (at ``x``) an optimal choice, with ``beta0 >= beta1``.
    """

    alpha0: int
    alphax: int
    alpha1: int
    beta0: int
    beta1: int
    x: Fraction = ZERO

    def __post_init__(self):
        object.__setattr__(self, "x", as_rational(self.x))
        problems = self.problems()
        if problems:
            raise ValueError(f"invalid worst-case parameters {self.counts}: {'; '.join(problems)}")

    @property
    def counts(self) -> tuple:
        return (self.alpha0, self.alphax, self.alpha1, self.beta0, self.beta1)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def problems(self) -> list:
        a0, ax, a1, b0, b1 = self.counts
        x = self.x
        out = []
        if any(not isinstance(c, int) or c < 0 for c in self.counts):
            return ["counts must be non-negative integers"]
        if not ZERO <= x <= ONE:
            out.append(f"x={x} outside [0, 1]")
        if self.n < 1:
            out.append("need at least one agent")
        # x is a median of the facility-1 approvers at 0, x and 1
        total = a0 + ax + a1
        left = a0 + ax + (a1 if x == 1 else 0)
        right = a1 + ax + (a0 if x == 0 else 0)
        if total and (2 * left < total or 2 * right < total):
            out.append("x is not a median of the facility-1 approvers")
        if b0 < b1:
            out.append("need beta0 >= beta1")
        if a0 + ax + (a1 - a0) * x < b0:
            out.append("facility 1 is not optimal")
        return out

    def materialize(self) -> Instance:
        a0, ax, a1, b0, b1 = self.counts
        return Instance.from_pairs(
            [(ZERO, {1})] * a0 + [(self.x, {1})] * ax + [(ONE, {1})] * a1
            + [(ZERO, {2})] * b0 + [(ONE, {2})] * b1
        )


def rd_closedform_ratio(params: WorstCaseParams) -> Fraction:
    """Ratio of random dictatorship on the family, before restricting x to {0, 1}:

    ``n * (a0 + ax + (a1 - a0) x) / ((a0 + ax)^2 + a1^2 + b0^2 + b1^2 + 2 ax (a1 - a0) x)``
    """
    a0, ax, a1, b0, b1 = params.counts
    x = params.x
    optimum = a0 + ax + (a1 - a0) * x
    scaled_rd = (a0 + ax) ** 2 + a1**2 + b0**2 + b1**2 + 2 * ax * (a1 - a0) * x
    return params.n * optimum / Fraction(scaled_rd)


def _count_tuples(total: int):
    """5-tuples of non-negative ints summing to ``total``, lexicographically descending."""
    for a0 in range(total, -1, -1):
        for ax in range(total - a0, -1, -1):
            for a1 in range(total - a0 - ax, -1, -1):
                for b0 in range(total - a0 - ax - a1, -1, -1):
                    yield (a0, ax, a1, b0, total - a0 - ax - a1 - b0)


def enumerate_worst_case_params(max_total_agents: int, x_grid_denominator: int):
    """All valid parameter sets with at most ``max_total_agents`` agents and x
    on ``{0, 1/q, ..., 1}``: fewest agents first, then descending counts, then
    ascending x."""
    xs = [Fraction(i, x_grid_denominator) for i in range(x_grid_denominator + 1)]
    for total in range(1, max_total_agents + 1):
        for counts in _count_tuples(total):
            for x in xs:
                try:
                    yield WorstCaseParams(*counts, x)
                except ValueError:
                    continue


def maximize_rd_closedform(
    max_total_agents: int,
    x_grid_denominator: int,
    max_evaluations: int = 5_000_000,
) -> tuple:
    """Exhaustive maximum of :func:`rd_closedform_ratio`; the first maximizer in
    enumeration order wins ties."""
    if max_total_agents < 1 or x_grid_denominator < 1:
        raise ValueError("need max_total_agents >= 1 and x_grid_denominator >= 1")
    # number of (counts, x) pairs: C(N + 5, 5) - 1 tuples times q + 1 grid points
    size = (math.comb(max_total_agents + 5, 5) - 1) * (x_grid_denominator + 1)
    if size > max_evaluations:
        raise SearchSpaceTooLarge(f"{size} parameter sets exceed max_evaluations={max_evaluations}")
    best, best_ratio = None, None
    for params in enumerate_worst_case_params(max_total_agents, x_grid_denominator):
        r = rd_closedform_ratio(params)
        if best_ratio is None or r > best_ratio:
            best, best_ratio = params, r
    return best, best_ratio


# --- hill climbing over instances -----------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    mechanism: str
    n_agents: int = 4
    iterations: int = 10_000
    restarts: int = 4
    seed: int = 0
    grid: int = 100
    m: int = 2
    k: int = 1
    utility_class: UtilityClass = UtilityClass.SUM
    workers: int | None = None

    def __post_init__(self):
        if self.n_agents < 1 or self.iterations < 1 or self.restarts < 1 or self.grid < 1:
            raise ValueError("n_agents, iterations, restarts and grid must be positive")
        object.__setattr__(self, "utility_class", UtilityClass(self.utility_class))


@dataclass(frozen=True)
class SearchResult:
    config: SearchConfig
    instance: Instance
    report: RatioReport
    evaluations: int

    @property
    def ratio(self):
        return self.report.ratio


# Internal state: a tuple of (grid index, approval frozenset) per agent.


def _build(state: tuple, config: SearchConfig) -> Instance:
    q = config.grid
    return Instance(
        tuple(Agent(Fraction(p, q), a) for p, a in state),
        config.m, config.k, config.utility_class,
    )


def _random_state(rng: np.random.Generator, config: SearchConfig) -> tuple:
    state = []
    for _ in range(config.n_agents):
        p = int(rng.integers(0, config.grid + 1))
        while True:
            mask = rng.integers(0, 2, size=config.m)
            if mask.any():
                break
        state.append((p, frozenset(int(j) + 1 for j in np.flatnonzero(mask))))
    return tuple(state)


def random_instance(
    rng: np.random.Generator,
    n_agents: int,
    grid: int = 16,
    m: int = 2,
    k: int = 1,
    utility_class: UtilityClass = UtilityClass.SUM,
) -> Instance:
    """Positions uniform on ``{0, 1/grid, ..., 1}``, approvals uniform over non-empty sets."""
    config = SearchConfig("middle", n_agents, grid=grid, m=m, k=k, utility_class=utility_class)
    return _build(_random_state(rng, config), config)


def _neighbours(state: tuple, config: SearchConfig) -> list:
    out = []
    for i, (p, approvals) in enumerate(state):
        for step in (-1, 1):
            if 0 <= p + step <= config.grid:
                out.append(state[:i] + ((p + step, approvals),) + state[i + 1:])
        for j in range(1, config.m + 1):
            flipped = approvals ^ {j}
            if flipped:
                out.append(state[:i] + ((p, frozenset(flipped)),) + state[i + 1:])
    return out


def _climb(config: SearchConfig, restart: int, budget: int) -> tuple:
    """One restart: repeated first-improvement climbs from random starts until
    ``budget`` ratio evaluations are spent. Returns (ratio, state, evaluations)."""
    mechanism = Mechanism.parse(config.mechanism)
    rng = np.random.default_rng([config.seed, restart])

    def ratio(state):
        return approximation_ratio(mechanism, _build(state, config)).ratio

    used = 0
    best = None
    while used < budget:
        state = _random_state(rng, config)
        current = ratio(state)
        used += 1
        while used < budget:
            moves = _neighbours(state, config)
            order = rng.permutation(len(moves))
            improved = False
            for idx in order:
                if used >= budget:
                    break
                candidate = moves[idx]
                r = ratio(candidate)
                used += 1
                if r > current:
                    state, current, improved = candidate, r, True
                    break
            if not improved:
                break
        if best is None or _better(current, state, *best, config):
            best = (current, state)
    return best[0], best[1], used


def _better(r, state, best_r, best_state, config) -> bool:
    if r != best_r:
        return r > best_r
    return _build(state, config).sort_key() < _build(best_state, config).sort_key()


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("FM_THREADS", "1")))
    except ValueError:
        return 1


def worst_case_search(config: SearchConfig) -> SearchResult:
    """Highest-ratio instance found by seeded restarts of coordinate hill climbing.

    A move shifts one agent by ``1/grid`` or toggles one of its approvals
    (never emptying the set) and is kept only if the ratio strictly rises.
    The evaluation budget ``iterations`` is split evenly across restarts;
    each restart draws from its own generator seeded by ``(seed, restart)``,
    so the result does not depend on ``workers``.
    """
    Mechanism.parse(config.mechanism)  # fail fast on a bad name
    per = [config.iterations // config.restarts] * config.restarts
    for r in range(config.iterations % config.restarts):
        per[r] += 1
    jobs = [(r, b) for r, b in enumerate(per) if b > 0]
    workers = config.workers if config.workers is not None else _default_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_climb, [config] * len(jobs), *zip(*jobs)))
    else:
        results = [_climb(config, r, b) for r, b in jobs]

    best_r, best_state = results[0][0], results[0][1]
    for r, state, _ in results[1:]:
        if _better(r, state, best_r, best_state, config):
            best_r, best_state = r, state
    instance = _build(best_state, config)
    report = approximation_ratio(Mechanism.parse(config.mechanism), instance)
    return SearchResult(config, instance, report, sum(u for _, _, u in results))


def search_result_to_dict(result: SearchResult) -> dict:
    ratio = result.report.ratio
    return {
        "schema_version": SCHEMA_VERSION,
        "mechanism": result.config.mechanism,
        "seed": result.config.seed,
        "iterations": result.config.iterations,
        "restarts": result.config.restarts,
        "grid": result.config.grid,
        "evaluations": result.evaluations,
        "max_ratio": "inf" if ratio == INFINITY else format_rational(ratio),
        "max_ratio_decimal": None if ratio == INFINITY else float(ratio),
        "witness_instance": instance_to_dict(result.instance),
    }


# --- proportional tie-breaking explorer -----------------------------------


@dataclass(frozen=True)
class ReferenceCheck:
    name: str
    ratio: Fraction
    exceeds: bool


@dataclass(frozen=True)
class ConjectureResult:
    max_ratio: Fraction
    witness: Instance
    exceeds: bool
    search: SearchResult
    references: tuple = field(default=())


CONJECTURE_MECHANISM = "rd:proportional"


def conjecture_scan(config: SearchConfig) -> ConjectureResult:
    """Search for instances where proportional tie-breaking RD does worse than 3/2.

    The mechanism in ``config`` is replaced by ``rd:proportional``. Besides the
    searched maximum, the known reference instances are evaluated. Exceeding
    3/2 is flagged, never raised.
    """
    config = SearchConfig(**{**config.__dict__, "mechanism": CONJECTURE_MECHANISM, "m": 2, "k": 1})
    result = worst_case_search(config)
    mechanism = Mechanism.parse(CONJECTURE_MECHANISM)
    references = []
    for name, instance in (("rd-worst-case", rd_worst_case()), ("prd", prd_instance())):
        r = approximation_ratio(mechanism, instance).ratio
        references.append(ReferenceCheck(name, r, r > CONJECTURED_RATIO))
    best = result.ratio
    witness = result.instance
    return ConjectureResult(best, witness, best > CONJECTURED_RATIO, result, tuple(references))


def conjecture_result_to_dict(result: ConjectureResult) -> dict:
    out = search_result_to_dict(result.search)
    out["conjectured_ratio"] = format_rational(CONJECTURED_RATIO)
    out["exceeds_conjecture"] = result.exceeds
    out["references"] = [
        {"name": ref.name, "ratio": format_rational(ref.ratio),
         "ratio_decimal": float(ref.ratio), "exceeds_conjecture": ref.exceeds}
        for ref in result.references
    ]
    return out
