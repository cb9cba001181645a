"""Constructors for the instances behind the published bounds.

Preferences are written as approval sets: ``{1}`` is the (1,0) type,
``{2}`` the (0,1) type and ``{1, 2}`` approves both.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import HALF, ONE, ZERO, Agent, Instance, UtilityClass, as_rational

DEFAULT_EPS = Fraction(1, 100)


def _eps(eps, upper=HALF) -> Fraction:
    eps = as_rational(eps)
    if not ZERO < eps < upper:
        raise ValueError(f"epsilon must lie in (0, {upper}), got {eps}")
    return eps


def fig1_pair(eps=DEFAULT_EPS) -> tuple:
    """Four agents, one of each type at ``eps`` and at 1; the primed instance
    moves the {1}-agent at ``eps`` to 1."""
    eps = _eps(eps)
    first = Instance.from_pairs([(eps, {2}), (eps, {1}), (ONE, {2}), (ONE, {1})])
    return first, first.with_agent(1, Agent(ONE, {1}))


def fig2_pair() -> tuple:
    """The 13/11 pair; the primed instance flips the agent at 1/6 to {2}."""
    first = Instance.from_pairs([
        (ZERO, {2}), (Fraction(1, 6), {1, 2}), (Fraction(5, 6), {1, 2}), (ONE, {1}),
    ])
    return first, first.with_agent(1, Agent(Fraction(1, 6), {2}))


def random_median_lb_pair(eps=DEFAULT_EPS) -> tuple:
    """One agent of each type at ``eps`` and at ``1 - eps``; the primed instance
    moves the {1}-agent at ``1 - eps`` to ``eps``."""
    eps = _eps(eps)
    first = Instance.from_pairs([(eps, {2}), (eps, {1}), (ONE - eps, {2}), (ONE - eps, {1})])
    return first, first.with_agent(3, Agent(eps, {1}))


def fig3_pair(n: int = 4, eps=Fraction(1, 10)) -> tuple:
    """A {1}-agent at 0, ``n - 2`` dual approvers at ``1/2 - eps`` and a
    {2}-agent at 1 (the last agent), who moves to ``1/2 - eps`` in the primed
    instance. ``eps = 0`` gives the unperturbed profile with a facility tie."""
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    eps = as_rational(eps)
    if not ZERO <= eps < HALF:
        raise ValueError(f"epsilon must lie in [0, 1/2), got {eps}")
    inner = HALF - eps
    first = Instance.from_pairs(
        [(ZERO, {1})] + [(inner, {1, 2})] * (n - 2) + [(ONE, {2})]
    )
    return first, first.with_agent(n - 1, Agent(inner, {2}))


def prd_instance() -> Instance:
    """30 agents at 0 (15 approve both, 15 approve {1}), 20 at 1 (10 of each
    single type)."""
    return Instance.from_pairs(
        [(ZERO, {1, 2})] * 15 + [(ZERO, {1})] * 15 + [(ONE, {1})] * 10 + [(ONE, {2})] * 10
    )


def km_nongsp_instance(m: int = 4, k: int = 2,
                       utility_class: UtilityClass = UtilityClass.SUM) -> Instance:
    """Agent ``i`` (0-based) approves only facility ``i + 1``; everyone sits at 1/2."""
    if m < 4 or not 2 <= k <= m - 2:
        raise ValueError(f"need m >= 4 and 2 <= k <= m - 2, got m={m}, k={k}")
    return Instance.from_pairs([(HALF, {j}) for j in range(1, m + 1)], m, k, utility_class)


def km_lb_sequence(m: int = 4, k: int = 2, eps=DEFAULT_EPS,
                   utility_class: UtilityClass = UtilityClass.SUM) -> list:
    """Instances ``I_0 .. I_{m-k}``.

    ``I_0`` has two approvers per facility, at ``eps`` and at 1, listed
    facility by facility (agents ``2j - 2`` and ``2j - 1`` approve facility
    ``j``). The facilities left out by lowest-index tie-breaking are
    ``k+1 .. m``; ``I_j`` moves the ``eps``-agent of facility ``k + j`` to 1.
    """
    if m < 2 or not 1 <= k <= m // 2:
        raise ValueError(f"need m >= 2 and 1 <= k <= m/2, got m={m}, k={k}")
    eps = _eps(eps)
    pairs = []
    for j in range(1, m + 1):
        pairs += [(eps, {j}), (ONE, {j})]
    sequence = [Instance.from_pairs(pairs, m, k, utility_class)]
    for step, j in enumerate(range(k + 1, m + 1), start=1):
        sequence.append(sequence[-1].with_agent(2 * j - 2, Agent(ONE, {j})))
    return sequence


def rd_worst_case(scale: int = 1) -> Instance:
    """Three {1}-agents at 0, one at 1, and one {2}-agent at each end (times ``scale``)."""
    return Instance.from_pairs(
        [(ZERO, {1})] * (3 * scale) + [(ONE, {1})] * scale
        + [(ZERO, {2})] * scale + [(ONE, {2})] * scale
    )


def proportional_lb_instance(n1: int = 41, n2: int = 30) -> Instance:
    """``n1`` {1}-agents stacked at 0 and ``n2`` (even) {2}-agents split
    between 0 and 1, so the two medians earn ``n1`` and ``n2/2``."""
    if n2 % 2 or n2 < 2 or n1 < 1:
        raise ValueError("need n1 >= 1 and an even n2 >= 2")
    return Instance.from_pairs(
        [(ZERO, {1})] * n1 + [(ZERO, {2})] * (n2 // 2) + [(ONE, {2})] * (n2 // 2)
    )


# --- names used on the command line ---------------------------------------

REPRODUCIBLE = ("fig1", "fig2", "random-median-lb", "fig3", "prd", "km-nongsp", "km-lb")


@dataclass(frozen=True)
class NamedInstance:
    name: str
    params: tuple
    instance: Instance


def _split(name: str) -> tuple:
    base, *args = name.strip().split(":")
    return base.lower(), args


def resolve(name: str) -> NamedInstance:
    """Look up a single corpus instance by name.

    ``fig1[:eps]``, ``fig2``, ``random-median-lb[:eps]``, ``fig3[:n[:eps]]``
    each give the first instance of the pair; append ``-prime`` to the base
    name (``fig2-prime``) for the second. Also ``prd``, ``km-nongsp[:m:k]``,
    ``km-lb[:m:k[:eps[:j]]]`` (the j-th instance, default the last) and
    ``rd-worst-case[:scale]``.
    """
    base, args = _split(name)
    prime = base.endswith("-prime")
    if prime:
        base = base[: -len("-prime")]
    pick = 1 if prime else 0
    try:
        if base == "fig1":
            eps = as_rational(args[0]) if args else DEFAULT_EPS
            return NamedInstance(name, (eps,), fig1_pair(eps)[pick])
        if base == "fig2" and not args:
            return NamedInstance(name, (), fig2_pair()[pick])
        if base == "random-median-lb":
            eps = as_rational(args[0]) if args else DEFAULT_EPS
            return NamedInstance(name, (eps,), random_median_lb_pair(eps)[pick])
        if base == "fig3":
            n = int(args[0]) if args else 4
            eps = as_rational(args[1]) if len(args) > 1 else DEFAULT_EPS
            return NamedInstance(name, (n, eps), fig3_pair(n, eps)[pick])
        if prime:
            raise KeyError(name)
        if base == "prd" and not args:
            return NamedInstance(name, (), prd_instance())
        if base == "km-nongsp":
            m, k = (int(args[0]), int(args[1])) if args else (4, 2)
            return NamedInstance(name, (m, k), km_nongsp_instance(m, k))
        if base == "km-lb":
            m, k = (int(args[0]), int(args[1])) if len(args) >= 2 else (4, 2)
            eps = as_rational(args[2]) if len(args) > 2 else DEFAULT_EPS
            seq = km_lb_sequence(m, k, eps)
            j = int(args[3]) if len(args) > 3 else len(seq) - 1
            return NamedInstance(name, (m, k, eps, j), seq[j])
        if base == "rd-worst-case":
            scale = int(args[0]) if args else 1
            return NamedInstance(name, (scale,), rd_worst_case(scale))
    except (IndexError, ValueError, ZeroDivisionError) as exc:
        raise KeyError(f"{name}: {exc}") from None
    raise KeyError(name)


def is_corpus_name(name: str) -> bool:
    base, _ = _split(name)
    base = base.removesuffix("-prime")
    return base in REPRODUCIBLE or base == "rd-worst-case"
