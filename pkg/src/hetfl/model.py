"""Exact data model: instances, outcomes, lotteries, utilities and optimal welfare.

Every quantity is a :class:`fractions.Fraction`. Positions live on ``[0, 1]``,
facilities are numbered ``1..m`` and agents are indexed ``0..n-1`` in the order
they were given.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np

RationalLike = Union[int, Fraction, str, Decimal, float]

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


class InvalidInstanceError(ValueError):
    """Raised when an instance, outcome or lottery violates its invariants."""


class InstanceFormatError(ValueError):
    """Raised when an instance file cannot be parsed; the message names the field."""


class SearchSpaceTooLarge(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its evaluation cap."""


def as_rational(value: RationalLike) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Strings may be ``"num/den"`` or decimal literals (``"0.25"`` is exactly 1/4).
    Floats go through their shortest repr, so ``0.1`` becomes 1/10 rather than
    the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def format_rational(value: Fraction) -> str:
    """Serialize as ``"num/den"``, always with an explicit denominator."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


class UtilityClass(str, enum.Enum):
    """How an agent aggregates the facilities that were built.

    SUM adds up every approved facility, MIN_DIST counts only the closest
    approved one and MAX_DIST takes the minimum term over all chosen facilities.
    """

    SUM = "sum"
    MIN_DIST = "min"
    MAX_DIST = "max"


class InformationSetting(str, enum.Enum):
    GENERAL = "general"
    KNOWN_PREFERENCES = "known_preferences"
    KNOWN_POSITIONS = "known_positions"

    @property
    def positions_private(self) -> bool:
        return self is not InformationSetting.KNOWN_POSITIONS

    @property
    def preferences_private(self) -> bool:
        return self is not InformationSetting.KNOWN_PREFERENCES


@dataclass(frozen=True)
class Agent:
    position: Fraction
    approvals: frozenset
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        position = as_rational(self.position)
        if not ZERO <= position <= ONE:
            raise InvalidInstanceError(f"position {position} outside [0, 1]")
        approvals = frozenset(int(j) for j in self.approvals)
        if not approvals:
            raise InvalidInstanceError("an agent must approve at least one facility")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "approvals", approvals)
        # audits hash the same agents millions of times; Fraction hashing is slow
        object.__setattr__(self, "_hash", hash((position, approvals)))

    def __hash__(self) -> int:
        return self._hash

    def approves(self, facility: int) -> bool:
        return facility in self.approvals

    def sort_key(self) -> tuple:
        return (self.position, tuple(sorted(self.approvals)))

    def __repr__(self) -> str:
        approvals = ",".join(str(j) for j in sorted(self.approvals))
        return f"Agent({self.position}, {{{approvals}}})"


@dataclass(frozen=True)
class Instance:
    """A reported (or true) profile plus the selection problem ``k`` out of ``m``."""

    agents: tuple
    m: int = 2
    k: int = 1
    utility_class: UtilityClass = UtilityClass.SUM
    _positions: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        agents = tuple(
            a if isinstance(a, Agent) else Agent(a[0], a[1]) for a in self.agents
        )
        if not agents:
            raise InvalidInstanceError("an instance needs at least one agent")
        if self.m < 2:
            raise InvalidInstanceError(f"need m >= 2 facilities, got {self.m}")
        if not 1 <= self.k <= self.m:
            raise InvalidInstanceError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        for i, agent in enumerate(agents):
            if not agent.approvals <= set(range(1, self.m + 1)):
                raise InvalidInstanceError(
                    f"agent {i} approves {sorted(agent.approvals)}, "
                    f"facilities are 1..{self.m}"
                )
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "utility_class", UtilityClass(self.utility_class))
        object.__setattr__(self, "_positions", tuple(a.position for a in agents))
        object.__setattr__(self, "_hash", hash((agents, self.m, self.k, self.utility_class)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple],
        m: int = 2,
        k: int = 1,
        utility_class: UtilityClass = UtilityClass.SUM,
    ) -> "Instance":
        """Build from ``(position, approvals)`` pairs, e.g. ``[("1/6", {1, 2})]``."""
        return cls(tuple(Agent(x, a) for x, a in pairs), m, k, utility_class)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def facilities(self) -> range:
        return range(1, self.m + 1)

    @property
    def positions(self) -> tuple:
        return self._positions

    def approvers(self, facility: int) -> list:
        return [i for i, a in enumerate(self.agents) if facility in a.approvals]

    def approval_count(self, facility: int) -> int:
        return sum(1 for a in self.agents if facility in a.approvals)

    def approval_counts(self) -> dict:
        return {j: self.approval_count(j) for j in self.facilities}

    def with_agent(self, agent_id: int, agent: Agent) -> "Instance":
        agents = list(self.agents)
        agents[agent_id] = agent
        return Instance(tuple(agents), self.m, self.k, self.utility_class)

    def with_agents(self, replacements: dict) -> "Instance":
        agents = list(self.agents)
        for i, agent in replacements.items():
            agents[i] = agent
        return Instance(tuple(agents), self.m, self.k, self.utility_class)

    def sort_key(self) -> tuple:
        return (self.m, self.k, self.utility_class.value,
                tuple(a.sort_key() for a in self.agents))

    def digest(self) -> str:
        payload = json.dumps(instance_to_dict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True, order=True)
class Outcome:
    """The facilities that get built, as sorted ``(facility, location)`` pairs."""

    placements: tuple

    def __post_init__(self):
        placements = tuple(sorted((int(j), as_rational(y)) for j, y in self.placements))
        ids = [j for j, _ in placements]
        if not placements:
            raise InvalidInstanceError("an outcome places at least one facility")
        if len(set(ids)) != len(ids):
            raise InvalidInstanceError(f"facility placed twice in {placements}")
        for j, y in placements:
            if j < 1:
                raise InvalidInstanceError(f"facility ids start at 1, got {j}")
            if not ZERO <= y <= ONE:
                raise InvalidInstanceError(f"location {y} outside [0, 1]")
        object.__setattr__(self, "placements", placements)

    @classmethod
    def single(cls, facility: int, location: RationalLike) -> "Outcome":
        return cls(((facility, location),))

    @property
    def facilities(self) -> tuple:
        return tuple(j for j, _ in self.placements)

    def location(self, facility: int) -> Fraction:
        for j, y in self.placements:
            if j == facility:
                return y
        raise KeyError(facility)

    def __repr__(self) -> str:
        inner = ", ".join(f"f{j}@{y}" for j, y in self.placements)
        return f"Outcome({inner})"


@dataclass(frozen=True)
class Lottery:
    """Finite-support distribution over outcomes.

    The support is kept canonical: equal outcomes merged, zero-probability
    entries dropped, sorted by outcome. Two lotteries are equal iff they
    assign the same probability to every outcome.
    """

    support: tuple

    def __post_init__(self):
        merged: dict = {}
        for p, outcome in self.support:
            p = as_rational(p)
            if p < 0:
                raise InvalidInstanceError(f"negative probability {p}")
            if not isinstance(outcome, Outcome):
                raise TypeError("lottery support must hold Outcome objects")
            merged[outcome] = merged.get(outcome, ZERO) + p
        total = sum(merged.values(), ZERO)
        if total != 1:
            raise InvalidInstanceError(f"probabilities sum to {total}, not 1")
        support = tuple((p, o) for o, p in sorted(merged.items()) if p)
        object.__setattr__(self, "support", support)

    @classmethod
    def point(cls, outcome: Outcome) -> "Lottery":
        return cls(((ONE, outcome),))

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.support)

    def __len__(self) -> int:
        return len(self.support)

    def probability(self, outcome: Outcome) -> Fraction:
        for p, o in self.support:
            if o == outcome:
                return p
        return ZERO

    @property
    def is_deterministic(self) -> bool:
        return len(self.support) == 1

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}: {o!r}" for p, o in self.support)
        return f"Lottery({inner})"


def _check_outcome(instance: Instance, outcome: Outcome) -> None:
    if len(outcome.placements) != instance.k:
        raise InvalidInstanceError(
            f"outcome places {len(outcome.placements)} facilities, instance needs k={instance.k}"
        )
    if outcome.placements[-1][0] > instance.m:
        raise InvalidInstanceError(
            f"facility {outcome.placements[-1][0]} does not exist (m={instance.m})"
        )


def _utility(agent: Agent, outcome: Outcome, utility_class: UtilityClass) -> Fraction:
    x = agent.position
    terms = [
        ONE - abs(x - y) if j in agent.approvals else ZERO
        for j, y in outcome.placements
    ]
    if len(terms) == 1:
        return terms[0]
    if utility_class is UtilityClass.SUM:
        return sum(terms, ZERO)
    if utility_class is UtilityClass.MIN_DIST:
        return max(terms)
    return min(terms)


def agent_utility(instance: Instance, agent_id: int, outcome: Outcome) -> Fraction:
    if not 0 <= agent_id < instance.n:
        raise IndexError(f"no agent {agent_id} in an instance of {instance.n} agents")
    _check_outcome(instance, outcome)
    return _utility(instance.agents[agent_id], outcome, instance.utility_class)


def social_welfare(instance: Instance, outcome: Outcome) -> Fraction:
    _check_outcome(instance, outcome)
    uc = instance.utility_class
    return sum((_utility(a, outcome, uc) for a in instance.agents), ZERO)


def expected_welfare(instance: Instance, lottery: Lottery) -> Fraction:
    return sum((p * social_welfare(instance, o) for p, o in lottery), ZERO)


def expected_agent_utility(instance: Instance, agent_id: int, lottery: Lottery) -> Fraction:
    """Expected utility of ``agent_id`` evaluated at its attributes in ``instance``.

    Pass the *true* instance here even when ``lottery`` came from a misreport.
    """
    return sum((p * agent_utility(instance, agent_id, o) for p, o in lottery), ZERO)


def median_of_approvers(instance: Instance, facility: int) -> Fraction | None:
    """Lower median of the approvers' positions, or None if nobody approves."""
    positions = sorted(a.position for a in instance.agents if facility in a.approvals)
    if not positions:
        return None
    return positions[(len(positions) + 1) // 2 - 1]


def facility_welfare(instance: Instance, facility: int, location: Fraction) -> Fraction:
    """Welfare contributed by ``facility`` alone at ``location``: sum over its approvers."""
    return sum(
        (ONE - abs(a.position - location) for a in instance.agents if facility in a.approvals),
        ZERO,
    )


def best_location_on(
    instance: Instance,
    facility: int,
    lo: RationalLike = ZERO,
    hi: RationalLike = ONE,
) -> tuple:
    """Leftmost maximizer of ``facility_welfare`` over ``[lo, hi]`` and its value.

    The welfare is concave and piecewise linear with kinks at approver
    positions, so the maximum over an interval is attained at an endpoint or
    at a kink inside it.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    candidates = sorted({lo, hi} | {x for x in instance.positions if lo <= x <= hi})
    best_y, best_w = None, None
    for y in candidates:
        w = facility_welfare(instance, facility, y)
        if best_w is None or w > best_w:
            best_y, best_w = y, w
    return best_y, best_w


def optimal_choice(instance: Instance, max_evaluations: int = 5_000_000) -> tuple:
    """An optimal outcome and its welfare, ties broken by facility ids then locations.

    k = 1 and SUM with k >= 2 decompose per facility (each at its approvers'
    lower median). MIN_DIST / MAX_DIST with k >= 2 are searched exhaustively
    over facility subsets and agent positions (plus 0), which contains an
    optimum for both classes.
    """
    if instance.k == 1 or instance.utility_class is UtilityClass.SUM:
        return _optimal_separable(instance)
    return _optimal_exhaustive(instance, max_evaluations)


def _optimal_separable(instance: Instance) -> tuple:
    scored = []
    for j in instance.facilities:
        y = median_of_approvers(instance, j)
        if y is None:
            scored.append((ZERO, j, ZERO))
        else:
            scored.append((facility_welfare(instance, j, y), j, y))
    scored.sort(key=lambda t: (-t[0], t[1]))
    chosen = scored[: instance.k]
    outcome = Outcome(tuple((j, y) for _, j, y in chosen))
    return outcome, sum((w for w, _, _ in chosen), ZERO)


def _optimal_exhaustive(instance: Instance, max_evaluations: int) -> tuple:
    candidates = sorted(set(instance.positions) | {ZERO})
    k, P = instance.k, len(candidates)
    subsets = list(itertools.combinations(instance.facilities, k))
    total = len(subsets) * P**k
    if total > max_evaluations:
        raise SearchSpaceTooLarge(
            f"{total} candidate outcomes exceed max_evaluations={max_evaluations}"
        )

    # Scale by the common denominator so that every utility term is an
    # integer; the search is then exact and needs no float tolerance.
    scale = math.lcm(*(c.denominator for c in candidates))
    big = instance.n * scale >= 2**62
    dtype = object if big else np.int64
    x = np.array([int(p * scale) for p in instance.positions], dtype=dtype)
    cand = np.array([int(c * scale) for c in candidates], dtype=dtype)
    approves = np.array(
        [[int(j in a.approvals) for j in instance.facilities] for a in instance.agents],
        dtype=dtype,
    )
    # scaled utility of agent i from facility j placed at candidate c
    table = approves[:, :, None] * (scale - np.abs(x[:, None, None] - cand[None, None, :]))
    grid = np.array(list(itertools.product(range(P), repeat=k)), dtype=np.intp)
    reduce = np.max if instance.utility_class is UtilityClass.MIN_DIST else np.min

    scores = np.stack([
        reduce(np.stack([table[:, j - 1, :][:, grid[:, a]] for a, j in enumerate(subset)]), axis=0)
        .sum(axis=0)
        for subset in subsets
    ])
    # argmax returns the first maximum in row-major order: subsets and
    # location tuples are both enumerated in increasing order
    s_idx, g_idx = np.unravel_index(int(np.argmax(scores)), scores.shape)
    locs = tuple(candidates[c] for c in grid[g_idx])
    outcome = Outcome(tuple(zip(subsets[s_idx], locs)))
    return outcome, social_welfare(instance, outcome)


def optimal_welfare_bruteforce(
    instance: Instance,
    grid_denominator: int,
    max_evaluations: int = 2_000_000,
) -> Fraction:
    """Maximum welfare over every facility subset and every location tuple drawn
    from ``{0, 1/q, ..., 1}`` together with the agents' positions."""
    if grid_denominator < 1:
        raise ValueError("grid_denominator must be >= 1")
    q = grid_denominator
    candidates = sorted({Fraction(i, q) for i in range(q + 1)} | set(instance.positions))
    subsets = list(itertools.combinations(instance.facilities, instance.k))
    total = len(subsets) * len(candidates) ** instance.k
    if total > max_evaluations:
        raise SearchSpaceTooLarge(
            f"{total} candidate outcomes exceed max_evaluations={max_evaluations}"
        )
    best = None
    for subset in subsets:
        for locs in itertools.product(candidates, repeat=instance.k):
            w = social_welfare(instance, Outcome(tuple(zip(subset, locs))))
            if best is None or w > best:
                best = w
    return best


# --- instance files -------------------------------------------------------


def instance_to_dict(instance: Instance) -> dict:
    return {
        "m": instance.m,
        "k": instance.k,
        "utility_class": instance.utility_class.value,
        "agents": [
            {"x": format_rational(a.position), "approve": sorted(a.approvals)}
            for a in instance.agents
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise InstanceFormatError("instance: expected a JSON object")
    try:
        m = data.get("m", 2)
        k = data.get("k", 1)
        if not isinstance(m, int) or isinstance(m, bool):
            raise InstanceFormatError(f"m: expected an integer, got {m!r}")
        if not isinstance(k, int) or isinstance(k, bool):
            raise InstanceFormatError(f"k: expected an integer, got {k!r}")
        raw_class = data.get("utility_class", "sum")
        try:
            utility_class = UtilityClass(raw_class)
        except ValueError:
            raise InstanceFormatError(
                f"utility_class: expected 'sum', 'min' or 'max', got {raw_class!r}"
            ) from None
        raw_agents = data.get("agents")
        if not isinstance(raw_agents, list) or not raw_agents:
            raise InstanceFormatError("agents: expected a non-empty list")
        agents = []
        for i, entry in enumerate(raw_agents):
            if not isinstance(entry, dict) or "x" not in entry or "approve" not in entry:
                raise InstanceFormatError(f"agents[{i}]: expected {{'x': ..., 'approve': [...]}}")
            raw_x = entry["x"]
            if isinstance(raw_x, bool) or not isinstance(raw_x, (str, int, float)):
                raise InstanceFormatError(f"agents[{i}].x: expected a rational, got {raw_x!r}")
            try:
                x = as_rational(raw_x)
            except (ValueError, ZeroDivisionError):
                raise InstanceFormatError(f"agents[{i}].x: cannot parse {raw_x!r}") from None
            approve = entry["approve"]
            if not isinstance(approve, list) or not all(
                isinstance(j, int) and not isinstance(j, bool) for j in approve
            ):
                raise InstanceFormatError(f"agents[{i}].approve: expected a list of integers")
            try:
                agents.append(Agent(x, approve))
            except InvalidInstanceError as exc:
                raise InstanceFormatError(f"agents[{i}]: {exc}") from None
        return Instance(tuple(agents), m, k, utility_class)
    except InvalidInstanceError as exc:
        raise InstanceFormatError(str(exc)) from None


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2)


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(data)


def load_instance(path: str | Path) -> Instance:
    return loads_instance(Path(path).read_text())


def dump_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(instance) + "\n")
