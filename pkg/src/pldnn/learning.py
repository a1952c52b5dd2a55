"""Event-driven construction and adjustment of a network.

Each observed transition runs four stages: perceive the first event, associate
(reason about what comes next), perceive the next event, and learn. Learning
compares the reasoning set (RS) with the actual set (AS) per neuron:

    case 1: not in RS, not in AS   (correct, nothing to do)
    case 2: not in RS, in AS       (missed: add ELs toward the thing)
    case 3: in RS, not in AS       (spurious: add ILs onto the responsible ELs)
    case 4: in RS, in AS           (correct)

Counters of links that were active are updated before any new link is
created, so a fresh link's (1, 1) start already counts its creating event.
"""

from __future__ import annotations

import logging
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, TypeVar

from pldnn.errors import InvalidArgument
from pldnn.events import Transition
from pldnn.network import InhibitoryLink, Network, neuron_cover
from pldnn.reasoning import (
    DEFAULT_THETA,
    Activation,
    Mode,
    apply_event,
    check_theta,
    link_scores,
    neuron_scores,
    survey,
)

log = logging.getLogger(__name__)

T = TypeVar("T", bound=Hashable)

CORRECT_NEGATIVE, MISSED, SPURIOUS, CORRECT_POSITIVE = 1, 2, 3, 4


def classify_consistency(
    rs: Iterable[T], actual: Iterable[T], universe: Iterable[T]
) -> dict[T, int]:
    rs, actual = set(rs), set(actual)
    cases = {}
    for item in universe:
        if item in rs:
            cases[item] = CORRECT_POSITIVE if item in actual else SPURIOUS
        else:
            cases[item] = MISSED if item in actual else CORRECT_NEGATIVE
    return cases


class Adjustment(NamedTuple):
    created: list[int]
    arbitrated: bool = False


def handle_missed(
    network: Network,
    activation: Activation,
    missed: int,
    active: Mapping[int, list[InhibitoryLink]] | None = None,
) -> Adjustment:
    """Add a simple EL from every observed literal to a thing that was missed.

    When an EL into the thing was active but inhibited, nothing is built and
    the outcome is left to the weights.
    """
    if active is None:
        active = survey(network, activation.mask)
    if any(network.excitatory_link(i).post == missed for i in active):
        return Adjustment([], arbitrated=True)
    created = []
    rest = activation.mask & ~(0b11 << (2 * missed))
    while rest:
        bit = rest & -rest
        rest ^= bit
        lid, new = network.add_excitatory_mask(bit, missed)
        if new:
            created.append(lid)
    return Adjustment(created)


def handle_spurious(
    network: Network,
    activation: Activation,
    spurious: int,
    active: Mapping[int, list[InhibitoryLink]] | None = None,
    mode: Mode | str = Mode.DETERMINISTIC,
    theta: Fraction = DEFAULT_THETA,
    el_scores: Mapping[int, Fraction] | None = None,
) -> Adjustment:
    """Inhibit each EL that caused a wrong prediction.

    The IL's trigger is the determining factor: every observed literal outside
    the EL's own pre-set. With no such literal only the counters react.
    """
    mode = Mode.coerce(mode)
    if active is None:
        active = survey(network, activation.mask)
    threshold = Fraction(1) if mode is Mode.DETERMINISTIC else theta
    if el_scores is None:
        el_scores = link_scores(network, active, mode)
    created = []
    arbitrated = False
    for el_id in sorted(active):
        el = network.excitatory_link(el_id)
        if el.post != spurious or el_scores[el_id] < threshold:
            continue
        trigger = activation.mask & ~neuron_cover(el.pre_mask)
        if not trigger:
            arbitrated = True
            continue
        lid, new = network.add_inhibitory_mask(trigger, el_id)
        if new:
            created.append(lid)
        else:
            arbitrated = True
    return Adjustment(created, arbitrated)


def update_weights(
    network: Network,
    activation: Activation,
    actual: Iterable[int],
    active: Mapping[int, list[InhibitoryLink]] | None = None,
) -> dict[int, tuple[int, int]]:
    """Count one occurrence on every active link.

    An active EL counts its post as happened iff the post is in ``actual``.
    An active IL on an active EL counts a success iff that EL's post did not
    happen. Returns per-link ``(num_pre, num_post)`` increments.
    """
    if active is None:
        active = survey(network, activation.mask)
    actual = set(actual)
    deltas = {}
    for el_id, inhibitors in active.items():
        el = network.excitatory_link(el_id)
        happened = el.post in actual
        el.counters.num_pre += 1
        el.counters.num_post += happened
        deltas[el_id] = (1, int(happened))
        for il in inhibitors:
            il.counters.num_pre += 1
            il.counters.num_post += not happened
            deltas[il.id] = (1, int(not happened))
    return deltas


@dataclass
class AdjustmentReport:
    rs: frozenset[str]
    actual: frozenset[str]
    cases: dict[str, int]
    created_neurons: list[str] = field(default_factory=list)
    created_excitatory: list[int] = field(default_factory=list)
    created_inhibitory: list[int] = field(default_factory=list)
    counter_deltas: dict[int, tuple[int, int]] = field(default_factory=dict)
    arbitrated: list[str] = field(default_factory=list)

    @property
    def structural_changes(self) -> int:
        return (
            len(self.created_neurons)
            + len(self.created_excitatory)
            + len(self.created_inhibitory)
        )

    def case_members(self, case: int) -> list[str]:
        return sorted(k for k, v in self.cases.items() if v == case)


def _reasoning_ids(
    network: Network, activation: Activation, mode: Mode, theta: Fraction
) -> tuple[set[int], dict[int, list[InhibitoryLink]], dict[int, Fraction]]:
    active = survey(network, activation.mask)
    threshold = 1 if mode is Mode.DETERMINISTIC else theta
    el_scores = link_scores(network, active, mode)
    scores = neuron_scores(network, el_scores)
    return {n for n, s in scores.items() if s >= threshold}, active, el_scores


def observe_transition(
    network: Network,
    transition: Transition,
    mode: Mode | str = Mode.DETERMINISTIC,
    theta: Fraction | float | str = DEFAULT_THETA,
) -> AdjustmentReport:
    mode = Mode.coerce(mode)
    theta = check_theta(theta)
    before = len(network)
    for label in sorted(transition.pre.labels | transition.post.labels):
        network.find_or_create_neuron(label)
    created_neurons = network.labels[before:]

    activation = apply_event(network, transition.pre)
    rs, active, el_scores = _reasoning_ids(network, activation, mode, theta)
    actual = {network.neuron_id(label) for label in transition.post.positives}
    deltas = update_weights(network, activation, actual, active)

    cases = classify_consistency(rs, actual, network.neuron_ids)
    report = AdjustmentReport(
        rs=frozenset(network.label(n) for n in rs),
        actual=transition.post.positives,
        cases={network.label(n): c for n, c in cases.items()},
        created_neurons=created_neurons,
        counter_deltas=deltas,
    )
    for nid in sorted(n for n, c in cases.items() if c == MISSED):
        outcome = handle_missed(network, activation, nid, active)
        report.created_excitatory += outcome.created
        if outcome.arbitrated:
            report.arbitrated.append(network.label(nid))
    for nid in sorted(n for n, c in cases.items() if c == SPURIOUS):
        outcome = handle_spurious(
            network, activation, nid, active, mode, theta, el_scores
        )
        report.created_inhibitory += outcome.created
        if outcome.arbitrated and not outcome.created:
            report.arbitrated.append(network.label(nid))
    return report


@dataclass(frozen=True)
class RecallFailure:
    index: int
    transition: Transition
    predicted: frozenset[str]

    @property
    def missing(self) -> frozenset[str]:
        return self.transition.post.positives - self.predicted

    @property
    def extra(self) -> frozenset[str]:
        return self.predicted - self.transition.post.positives


@dataclass
class RecallReport:
    total: int
    failures: list[RecallFailure]

    @property
    def recalled(self) -> int:
        return self.total - len(self.failures)

    @property
    def fraction(self) -> Fraction:
        if self.total == 0:
            return Fraction(1)
        return Fraction(self.recalled, self.total)


def evaluate_recall(
    network: Network,
    transitions: Sequence[Transition],
    mode: Mode | str = Mode.DETERMINISTIC,
    theta: Fraction | float | str = DEFAULT_THETA,
) -> RecallReport:
    """Exact one-step recall: predicted things must equal the next positives."""
    mode = Mode.coerce(mode)
    theta = check_theta(theta)
    failures = []
    for i, t in enumerate(transitions):
        activation = apply_event(network, t.pre)
        ids, _, _ = _reasoning_ids(network, activation, mode, theta)
        predicted = frozenset(network.label(n) for n in ids)
        if predicted != t.post.positives:
            failures.append(RecallFailure(i, t, predicted))
    return RecallReport(len(transitions), failures)


@dataclass
class ConvergenceReport:
    epochs: int
    changes_per_epoch: list[int]
    recall: Fraction
    converged: bool
    failures: list[RecallFailure] = field(default_factory=list)


def train(
    network: Network,
    transitions: Sequence[Transition],
    max_epochs: int = 10,
    mode: Mode | str = Mode.DETERMINISTIC,
    theta: Fraction | float | str = DEFAULT_THETA,
) -> ConvergenceReport:
    """Replay ``transitions`` in order until structure is quiet and recall exact."""
    if max_epochs < 1:
        raise InvalidArgument("max_epochs must be at least 1")
    mode = Mode.coerce(mode)
    theta = check_theta(theta)
    changes = []
    recall = RecallReport(len(transitions), [])
    for epoch in range(1, max_epochs + 1):
        n = sum(
            observe_transition(network, t, mode, theta).structural_changes
            for t in transitions
        )
        changes.append(n)
        recall = evaluate_recall(network, transitions, mode, theta)
        log.debug("epoch %d: %d structural changes, recall %s", epoch, n, recall.fraction)
        if n == 0 and not recall.failures:
            return ConvergenceReport(epoch, changes, recall.fraction, True)
    return ConvergenceReport(
        max_epochs, changes, recall.fraction, False, recall.failures
    )

