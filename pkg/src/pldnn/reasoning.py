"""One-step "what happens next" reasoning over a network.

Reasoning is read-only: unknown labels in a query are reported, never added.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from pldnn.errors import InvalidArgument
from pldnn.events import Event
from pldnn.network import (
    NEGATIVE,
    POSITIVE,
    ExcitatoryLink,
    InhibitoryLink,
    Link,
    Network,
)

DEFAULT_THETA = Fraction(1, 2)



class Mode(str, Enum):
    DETERMINISTIC = "deterministic"
    PROBABILISTIC = "probabilistic"

    @classmethod
    def coerce(cls, value: Mode | str) -> Mode:
        if isinstance(value, Mode):
            return value
        aliases = {"det": cls.DETERMINISTIC, "prob": cls.PROBABILISTIC}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise InvalidArgument(f"unknown reasoning mode {value!r}") from None


def as_fraction(value: Fraction | float | str) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise InvalidArgument(f"not a number: {value!r}") from None


def check_theta(theta: Fraction | float | str) -> Fraction:
    theta = as_fraction(theta)
    if not 0 < theta <= 1:
        raise InvalidArgument(f"threshold must lie in (0, 1], got {theta}")
    return theta


@dataclass(frozen=True)
class Activation:
    """Tri-state neuron activation; neurons not listed are resting (0)."""

    states: Mapping[int, int]
    mask: int
    unknown: frozenset[str] = frozenset()

    def state(self, neuron: int) -> int:
        return self.states.get(neuron, 0)


def apply_event(network: Network, event: Event) -> Activation:
    states: dict[int, int] = {}
    mask = 0
    unknown = []
    for label in sorted(event.positives):
        nid = network.get_neuron_id(label)
        if nid is None:
            unknown.append(label)
            continue
        states[nid] = POSITIVE
        mask |= 1 << (2 * nid)
    for label in sorted(event.negatives):
        nid = network.get_neuron_id(label)
        if nid is None:
            unknown.append(label)
            continue
        states[nid] = NEGATIVE
        mask |= 1 << (2 * nid + 1)
    return Activation(states, mask, frozenset(unknown))


def link_is_active(link: Link, activation: Activation | int) -> bool:
    """A link fires iff every pre-literal matches: +1 for positive, -1 for negative.

    Resting never satisfies a negative literal.
    """
    mask = activation if isinstance(activation, int) else activation.mask
    return link.pre_mask & mask == link.pre_mask


def inhibited_score(weight: Fraction, inhibitor_weights: Iterable[Fraction]) -> Fraction:
    """Excitation left on one EL after its active inhibitors have acted."""
    return weight * math.prod((1 - w for w in inhibitor_weights), start=Fraction(1))


def survey(network: Network, mask: int) -> dict[int, list[InhibitoryLink]]:
    """Map every active EL id to the list of its active inhibitors."""
    inhibitors = network.active_inhibitory(mask)
    return {el.id: inhibitors.get(el.id, []) for el in network.active_excitatory(mask)}


def link_scores(
    network: Network, active: Mapping[int, list[InhibitoryLink]], mode: Mode
) -> dict[int, Fraction]:
    """Per active EL: 1/0 (uninhibited or not) or the weighted, inhibited score.

    Deterministic scores are plain ints, which compare faster than fractions.
    """
    scores = {}
    for el_id, inhibitors in active.items():
        if mode is Mode.DETERMINISTIC:
            scores[el_id] = 0 if inhibitors else 1
        else:
            el = network.excitatory_link(el_id)
            scores[el_id] = inhibited_score(el.weight, (il.weight for il in inhibitors))
    return scores


def neuron_scores(
    network: Network, el_scores: Mapping[int, Fraction]
) -> dict[int, Fraction]:
    best: dict[int, Fraction] = {}
    for el_id, score in el_scores.items():
        post = network.excitatory_link(el_id).post
        current = best.get(post)
        if current is None or score > current:
            best[post] = score
    return best


@dataclass(frozen=True)
class InhibitorTrace:
    link_id: int
    signature: str
    weight: Fraction


@dataclass(frozen=True)
class ExcitationTrace:
    link_id: int
    signature: str
    weight: Fraction
    active: bool
    inhibitors: tuple[InhibitorTrace, ...] = ()
    score: Fraction = Fraction(0)

    @property
    def inhibited(self) -> bool:
        return bool(self.inhibitors)


@dataclass(frozen=True)
class ReasoningSet:
    members: frozenset[str]
    scores: Mapping[str, Fraction]
    theta: Fraction
    mode: Mode

    def __contains__(self, label: object) -> bool:
        return label in self.members

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def score(self, label: str) -> Fraction:
        return self.scores.get(label, Fraction(0))


@dataclass(frozen=True)
class Reasoning:
    rs: ReasoningSet
    activation: Activation
    trace: Mapping[str, tuple[ExcitationTrace, ...]] = field(default_factory=dict)

    @property
    def predicted(self) -> frozenset[str]:
        return self.rs.members

    @property
    def suppressed(self) -> frozenset[str]:
        """Things with at least one active EL that still did not make the RS."""
        return frozenset(self.trace) - self.rs.members


def _trace_entry(
    network: Network,
    el: ExcitatoryLink,
    inhibitors: list[InhibitoryLink] | None,
    score: Fraction,
) -> ExcitationTrace:
    return ExcitationTrace(
        link_id=el.id,
        signature=network.signature(el),
        weight=el.weight,
        active=inhibitors is not None,
        inhibitors=tuple(
            InhibitorTrace(il.id, network.signature(il), il.weight)
            for il in inhibitors or ()
        ),
        score=score,
    )


def reason_step(
    network: Network,
    event: Event,
    mode: Mode | str = Mode.DETERMINISTIC,
    theta: Fraction | float | str = DEFAULT_THETA,
) -> Reasoning:
    mode = Mode.coerce(mode)
    theta = Fraction(1) if mode is Mode.DETERMINISTIC else check_theta(theta)
    activation = apply_event(network, event)
    active = survey(network, activation.mask)
    el_scores = link_scores(network, active, mode)
    per_neuron = neuron_scores(network, el_scores)

    scores = {label: Fraction(0) for label in network.labels}
    members = set()
    for nid, score in per_neuron.items():
        label = network.label(nid)
        scores[label] = Fraction(score)
        if score >= theta:
            members.add(label)

    trace: dict[str, list[ExcitationTrace]] = {}
    for el_id, inhibitors in active.items():
        el = network.excitatory_link(el_id)
        trace.setdefault(network.label(el.post), []).append(
            _trace_entry(network, el, inhibitors, Fraction(el_scores[el_id]))
        )
    rs = ReasoningSet(frozenset(members), scores, theta, mode)
    return Reasoning(rs, activation, {k: tuple(v) for k, v in sorted(trace.items())})


def reason_step_deterministic(network: Network, event: Event) -> Reasoning:
    """A thing is predicted iff some active EL into it has no active inhibitor."""
    return reason_step(network, event, Mode.DETERMINISTIC)


def reason_step_probabilistic(
    network: Network, event: Event, theta: Fraction | float | str = DEFAULT_THETA
) -> Reasoning:
    """Score each thing by its strongest EL, damped by ``(1 - w)`` per active IL.

    A thing is predicted when its score reaches ``theta``; the score map
    covers every neuron regardless of the threshold.
    """
    return reason_step(network, event, Mode.PROBABILISTIC, theta)


@dataclass(frozen=True)
class ChainResult:
    inferred: frozenset[str]
    rounds: tuple[frozenset[str], ...]
    fixpoint: bool

    @property
    def depth(self) -> int:
        return len(self.rounds)


def reason_chain(network: Network, event: Event, max_depth: int = 10) -> ChainResult:
    """Repeat deterministic steps, feeding predictions back in as positives.

    Stops at a fixpoint (no new things) or after ``max_depth`` rounds. Things
    the event explicitly negates are never fed back.
    """
    if max_depth < 1:
        raise InvalidArgument("max_depth must be at least 1")
    positives = set(event.positives)
    rounds = []
    fixpoint = False
    for _ in range(max_depth):
        rs = reason_step_deterministic(network, Event(positives, event.negatives)).rs
        new = frozenset(rs.members - positives - event.negatives)
        if not new:
            fixpoint = True
            break
        rounds.append(new)
        positives |= new
    else:
        rs = reason_step_deterministic(network, Event(positives, event.negatives)).rs
        fixpoint = not (rs.members - positives - event.negatives)
    inferred = frozenset().union(*rounds) if rounds else frozenset()
    return ChainResult(inferred, tuple(rounds), fixpoint)


def explain(network: Network, event: Event, thing: str) -> tuple[ExcitationTrace, ...]:
    """Every EL into ``thing``: activity, weight, active inhibitors, score."""
    nid = network.neuron_id(thing)
    activation = apply_event(network, event)
    out = []
    for el in network.links_into(nid):
        if link_is_active(el, activation):
            inhibitors = network.active_inhibitors(el.id, activation.mask)
            score = inhibited_score(el.weight, (il.weight for il in inhibitors))
            out.append(_trace_entry(network, el, inhibitors, score))
        else:
            out.append(_trace_entry(network, el, None, Fraction(0)))
    return tuple(out)
