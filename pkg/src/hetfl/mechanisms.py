"""Truthful mechanisms for choosing and locating facilities.

Every mechanism maps a reported :class:`~hetfl.model.Instance` to a
:class:`~hetfl.model.Lottery`; randomized mechanisms return their
distribution instead of sampling from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .model import (
    HALF,
    ONE,
    ZERO,
    Instance,
    Lottery,
    Outcome,
    as_rational,
    median_of_approvers,
    optimal_choice,
)


class MechanismError(ValueError):
    """The mechanism is not defined for this instance or parameter."""


def _require_two_facilities(instance: Instance, name: str) -> None:
    if instance.m != 2 or instance.k != 1:
        raise MechanismError(f"{name} needs m=2, k=1 (got m={instance.m}, k={instance.k})")


def _ranked_by_count(instance: Instance) -> list:
    counts = instance.approval_counts()
    return sorted(instance.facilities, key=lambda j: (-counts[j], j))


def middle(instance: Instance) -> Lottery:
    """Most-approved facility at 1/2; a count tie goes to facility 1."""
    _require_two_facilities(instance, "middle")
    return Lottery.point(Outcome.single(_ranked_by_count(instance)[0], HALF))


def km_middle(instance: Instance) -> Lottery:
    """The k most-approved facilities, all at 1/2, ties to lower ids."""
    chosen = _ranked_by_count(instance)[: instance.k]
    return Lottery.point(Outcome(tuple((j, HALF) for j in chosen)))


# --- Random-Median family -------------------------------------------------

MedianProbabilityRule = Callable[[int, int], tuple]


def proportional_rule(n1: int, n2: int) -> tuple:
    total = n1 + n2
    return Fraction(n1, total), Fraction(n2, total)


def mirror_rule(n1: int, n2: int) -> tuple:
    """Probability ``(3a - 2b) / (4a - 2b)`` on the facility with the larger
    count ``a`` (facility 1 on a tie), the rest on the other one."""
    if n1 >= n2:
        alpha = Fraction(3 * n1 - 2 * n2, 4 * n1 - 2 * n2)
        return alpha, ONE - alpha
    alpha = Fraction(3 * n2 - 2 * n1, 4 * n2 - 2 * n1)
    return ONE - alpha, alpha


@dataclass(frozen=True)
class ConstantRule:
    """Facility 1 with a fixed probability, whatever the counts."""

    q1: Fraction

    def __post_init__(self):
        q1 = as_rational(self.q1)
        if not ZERO <= q1 <= ONE:
            raise MechanismError(f"probability {q1} outside [0, 1]")
        object.__setattr__(self, "q1", q1)

    def __call__(self, n1: int, n2: int) -> tuple:
        return self.q1, ONE - self.q1


def random_median(instance: Instance, rule: MedianProbabilityRule) -> Lottery:
    """Pick facility j with the rule's probability and put it at its approvers'
    lower median. A facility nobody approves keeps its probability and is put
    at 1/2, where it earns nothing."""
    _require_two_facilities(instance, "random-median")
    counts = instance.approval_counts()
    q = tuple(as_rational(p) for p in rule(counts[1], counts[2]))
    if len(q) != 2 or min(q) < 0 or sum(q) != 1:
        raise MechanismError(f"rule returned {q}, not a distribution over two facilities")
    pairs = []
    for j, p in zip((1, 2), q):
        y = median_of_approvers(instance, j)
        pairs.append((p, Outcome.single(j, HALF if y is None else y)))
    return Lottery(tuple(pairs))


def proportional(instance: Instance) -> Lottery:
    return random_median(instance, proportional_rule)


def mirror(instance: Instance) -> Lottery:
    return random_median(instance, mirror_rule)


# --- Random Dictatorship --------------------------------------------------


@dataclass(frozen=True)
class TieRule:
    """What a dictator who approves both facilities gets.

    ``optimal``: the facility of the optimal outcome on the reported profile.
    ``fixed``: facility 1 with probability ``p``. ``proportional``: facility j
    with probability n_j / (n_1 + n_2). ``lowest_index``: always facility 1.
    """

    kind: str
    p: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("optimal", "fixed", "proportional", "lowest_index"):
            raise MechanismError(f"unknown tie rule {self.kind!r}")
        if self.kind == "fixed":
            if self.p is None:
                raise MechanismError("fixed tie rule needs a probability")
            p = as_rational(self.p)
            if not ZERO <= p <= ONE:
                raise MechanismError(f"probability {p} outside [0, 1]")
            object.__setattr__(self, "p", p)
        elif self.p is not None:
            raise MechanismError(f"tie rule {self.kind!r} takes no probability")

    @classmethod
    def optimal(cls) -> "TieRule":
        return cls("optimal")

    @classmethod
    def fixed(cls, p) -> "TieRule":
        return cls("fixed", p)

    @classmethod
    def proportional(cls) -> "TieRule":
        return cls("proportional")

    @classmethod
    def lowest_index(cls) -> "TieRule":
        return cls("lowest_index")


def random_dictatorship(instance: Instance, tie: TieRule = TieRule("optimal")) -> Lottery:
    _require_two_facilities(instance, "random dictatorship")
    share = Fraction(1, instance.n)
    if tie.kind == "optimal":
        dual = {optimal_choice(instance)[0].facilities[0]: ONE}
    elif tie.kind == "fixed":
        dual = {1: tie.p, 2: ONE - tie.p}
    elif tie.kind == "proportional":
        counts = instance.approval_counts()
        q1, q2 = proportional_rule(counts[1], counts[2])
        dual = {1: q1, 2: q2}
    else:
        dual = {1: ONE}

    pairs = []
    for agent in instance.agents:
        if len(agent.approvals) == 1:
            (j,) = agent.approvals
            pairs.append((share, Outcome.single(j, agent.position)))
        else:
            for j, p in dual.items():
                pairs.append((share * p, Outcome.single(j, agent.position)))
    return Lottery(tuple(pairs))


# --- named mechanisms -----------------------------------------------------


@dataclass(frozen=True)
class Mechanism:
    """A named, picklable mechanism: ``Mechanism.parse("rd:fixed:1/2")(instance)``."""

    name: str
    func: Callable = field(compare=False)
    kwargs: tuple = ()

    def __call__(self, instance: Instance) -> Lottery:
        return self.func(instance, **dict(self.kwargs))

    @classmethod
    def parse(cls, spec: str) -> "Mechanism":
        """Parse a selection string.

        Accepted forms: ``middle``, ``km-middle``, ``proportional``, ``mirror``,
        ``random-median:<p>`` (facility 1 with probability p),
        ``random-median:proportional``, ``random-median:mirror``,
        ``rd:optimal``, ``rd:fixed:<p>``, ``rd:proportional``, ``rd:lowest-index``.
        """
        text = spec.strip().lower()
        if text == "middle":
            return cls("middle", middle)
        if text == "km-middle":
            return cls("km-middle", km_middle)
        if text == "proportional":
            return cls("proportional", proportional)
        if text == "mirror":
            return cls("mirror", mirror)
        if text.startswith("random-median:"):
            arg = text.split(":", 1)[1]
            if arg == "proportional":
                rule = proportional_rule
            elif arg == "mirror":
                rule = mirror_rule
            else:
                rule = ConstantRule(_parse_probability(arg, spec))
                arg = str(rule.q1)
            return cls(f"random-median:{arg}", random_median, (("rule", rule),))
        if text.startswith("rd:"):
            parts = text.split(":")
            if parts[1:] == ["optimal"]:
                tie = TieRule.optimal()
            elif parts[1:] == ["proportional"]:
                tie = TieRule.proportional()
            elif parts[1:] == ["lowest-index"]:
                tie = TieRule.lowest_index()
            elif len(parts) == 3 and parts[1] == "fixed":
                tie = TieRule.fixed(_parse_probability(parts[2], spec))
            else:
                raise MechanismError(f"unknown RD variant {spec!r}")
            name = f"rd:fixed:{tie.p}" if tie.kind == "fixed" else f"rd:{parts[1]}"
            return cls(name, random_dictatorship, (("tie", tie),))
        raise MechanismError(f"unknown mechanism {spec!r}")


def _parse_probability(text: str, spec: str) -> Fraction:
    try:
        p = as_rational(text)
    except (ValueError, ZeroDivisionError):
        raise MechanismError(f"bad probability {text!r} in {spec!r}") from None
    if not ZERO <= p <= ONE:
        raise MechanismError(f"probability {p} outside [0, 1] in {spec!r}")
    return p


def mechanism_names() -> list:
    return [
        "middle", "km-middle", "proportional", "mirror", "random-median:<p>",
        "rd:optimal", "rd:fixed:<p>", "rd:proportional",
    ]
