"""Propositional if-then rule libraries.

Grammar, one rule per line (``#`` starts a comment)::

    IF lit (AND lit)* THEN lit (AND lit)* (UNLESS lit (AND lit)*)*
    lit := [NOT] name
    name := [A-Za-z0-9_]+ | "json-quoted string"

Keywords are case-insensitive; a name that collides with a keyword must be
quoted. Each ``UNLESS`` clause is one exception: the rule does not fire when
every literal of some exception holds.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from pldnn.errors import InvalidArgument, PLDNNError
from pldnn.events import Event, Lit, Transition
from pldnn.learning import ConvergenceReport, train
from pldnn.network import Network, mask_to_literals
from pldnn.reasoning import as_fraction, reason_step_deterministic

KEYWORDS = {"IF", "THEN", "AND", "NOT", "UNLESS"}
_TOKEN = re.compile(
    r'\s*(?:(?P<name>[A-Za-z0-9_]+)|(?P<quoted>"(?:[^"\\]|\\.)*")|(?P<bad>\S))'
)
_NAME = re.compile(r"[A-Za-z0-9_]+")


class RuleParseError(PLDNNError, ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class RuleSemanticError(RuleParseError):
    pass


Conjunction = tuple[Lit, ...]


@dataclass(frozen=True)
class Rule:
    antecedent: Conjunction
    consequent: Conjunction
    exceptions: tuple[Conjunction, ...] = ()
    line: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.antecedent or not self.consequent:
            raise InvalidArgument("rule needs a non-empty antecedent and consequent")
        for side in (self.antecedent, self.consequent, *self.exceptions):
            if not side:
                raise InvalidArgument("empty exception clause")
            labels = [lit.label for lit in side]
            if len(set(labels)) != len(labels):
                raise InvalidArgument(
                    "a label appears twice on one side of a rule"
                )

    def key(self) -> tuple:
        return (
            frozenset(self.antecedent),
            frozenset(self.consequent),
            frozenset(frozenset(e) for e in self.exceptions),
        )

    def fires(self, event: Event) -> bool:
        return satisfied(self.antecedent, event) and not any(
            satisfied(exc, event) for exc in self.exceptions
        )

    def __str__(self) -> str:
        return render_rule(self)


def satisfied(conjunction: Iterable[Lit], event: Event) -> bool:
    return all(
        (lit.label in event.positives) if lit.positive else (lit.label in event.negatives)
        for lit in conjunction
    )


@dataclass(frozen=True)
class RuleLibrary:
    rules: tuple[Rule, ...] = ()
    source: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        seen = set()
        for rule in self.rules:
            if rule.key() in seen:
                raise InvalidArgument(f"duplicate rule: {rule}")
            seen.add(rule.key())

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __getitem__(self, i: int) -> Rule:
        return self.rules[i]

    def labels(self) -> frozenset[str]:
        out = set()
        for rule in self.rules:
            for side in (rule.antecedent, rule.consequent, *rule.exceptions):
                out.update(lit.label for lit in side)
        return frozenset(out)

    def antecedent_labels(self) -> frozenset[str]:
        return frozenset(lit.label for rule in self.rules for lit in rule.antecedent)


# -- parsing ------------------------------------------------------------------


def _tokens(line: str, lineno: int) -> list[tuple[str, str, int]]:
    """Split one line into (kind, text, column) tokens; kind is KEYWORD or NAME."""
    out = []
    pos = 0
    stripped = line.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if m is None:
            break
        col = m.start(m.lastgroup) + 1
        if m.group("bad") is not None:
            if m.group("bad") == "#":
                break
            raise RuleParseError(f"unexpected character {m.group('bad')!r}", lineno, col)
        if m.group("quoted") is not None:
            try:
                text = json.loads(m.group("quoted"))
            except json.JSONDecodeError:
                raise RuleParseError("malformed quoted name", lineno, col) from None
            if not text:
                raise RuleParseError("empty quoted name", lineno, col)
            out.append(("NAME", text, col))
        else:
            word = m.group("name")
            if word.upper() in KEYWORDS:
                out.append(("KEYWORD", word.upper(), col))
            else:
                out.append(("NAME", word, col))
        pos = m.end()
    return out


def _parse_line(line: str, lineno: int) -> Rule | None:
    toks = _tokens(line, lineno)
    if not toks:
        return None
    end_col = len(line.rstrip()) + 1
    i = 0

    def peek() -> tuple[str, str, int] | None:
        return toks[i] if i < len(toks) else None

    def expect_keyword(word: str) -> None:
        nonlocal i
        tok = peek()
        if tok is None or tok[:2] != ("KEYWORD", word):
            col = tok[2] if tok else end_col
            found = repr(tok[1]) if tok else "end of line"
            raise RuleParseError(f"expected {word}, found {found}", lineno, col)
        i += 1

    def conjunction() -> Conjunction:
        nonlocal i
        lits = []
        while True:
            positive = True
            tok = peek()
            if tok is not None and tok[:2] == ("KEYWORD", "NOT"):
                positive = False
                i += 1
                tok = peek()
            if tok is None or tok[0] != "NAME":
                col = tok[2] if tok else end_col
                found = repr(tok[1]) if tok else "end of line"
                raise RuleParseError(f"expected a name, found {found}", lineno, col)
            i += 1
            for prev in lits:
                if prev.label == tok[1]:
                    raise RuleSemanticError(
                        f"{tok[1]!r} appears twice on one side", lineno, tok[2]
                    )
            lits.append(Lit(tok[1], positive))
            nxt = peek()
            if nxt is not None and nxt[:2] == ("KEYWORD", "AND"):
                i += 1
                continue
            return tuple(lits)

    expect_keyword("IF")
    antecedent = conjunction()
    expect_keyword("THEN")
    consequent = conjunction()
    exceptions = []
    while peek() is not None:
        expect_keyword("UNLESS")
        exceptions.append(conjunction())
    return Rule(antecedent, consequent, tuple(exceptions), line=lineno)


def parse_rules(text: str) -> RuleLibrary:
    rules = []
    seen: dict[tuple, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        rule = _parse_line(line, lineno)
        if rule is None:
            continue
        if rule.key() in seen:
            raise RuleSemanticError(
                f"duplicate of the rule on line {seen[rule.key()]}", lineno, 1
            )
        seen[rule.key()] = lineno
        rules.append(rule)
    return RuleLibrary(tuple(rules), source=text)


def _render_name(label: str) -> str:
    if _NAME.fullmatch(label) and label.upper() not in KEYWORDS:
        return label
    return json.dumps(label, ensure_ascii=False)


def _render_conjunction(lits: Iterable[Lit]) -> str:
    return " AND ".join(
        ("" if lit.positive else "NOT ") + _render_name(lit.label) for lit in lits
    )


def render_rule(rule: Rule) -> str:
    text = f"IF {_render_conjunction(rule.antecedent)} THEN {_render_conjunction(rule.consequent)}"
    for exc in rule.exceptions:
        text += f" UNLESS {_render_conjunction(exc)}"
    return text


def render_rules(library: RuleLibrary) -> str:
    return "".join(render_rule(rule) + "\n" for rule in library)


# -- evaluation and compilation ---------------------------------------------------


@dataclass(frozen=True)
class Derivation:
    """One-step conclusions; may be contradictory, unlike an Event."""

    positives: frozenset[str]
    negatives: frozenset[str]

    @property
    def conflicts(self) -> frozenset[str]:
        return self.positives & self.negatives


def evaluate(library: RuleLibrary | Iterable[Rule], event: Event) -> Derivation:
    """Fire every rule satisfied by ``event`` once.

    Only new conclusions are returned: a positive already observed in the
    event, or a negative already observed, is left out.
    """
    pos, neg = set(), set()
    for rule in library:
        if rule.fires(event):
            for lit in rule.consequent:
                (pos if lit.positive else neg).add(lit.label)
    return Derivation(
        frozenset(pos - event.positives), frozenset(neg - event.negatives)
    )


def closed_world_event(
    antecedent: Iterable[Lit],
    universe: Iterable[str] = (),
    groups: Sequence[Iterable[str]] = (),
) -> Event:
    """Build the event for an antecedent, adding implied negatives.

    Every label of ``universe`` not mentioned by the antecedent becomes a
    negative. Within each of ``groups`` (mutually exclusive values), a
    positive member makes every unmentioned sibling a negative.
    """
    pos = {lit.label for lit in antecedent if lit.positive}
    neg = {lit.label for lit in antecedent if not lit.positive}
    mentioned = pos | neg
    neg |= set(universe) - mentioned
    for group in groups:
        group = set(group)
        if pos & group:
            neg |= group - mentioned
    return Event(frozenset(pos), frozenset(neg))


def rules_to_transitions(
    library: RuleLibrary,
    closed_world_groups: Sequence[Iterable[str]] | None = None,
    closed_world: bool = False,
) -> list[Transition]:
    """One transition per rule: antecedent event -> its one-step consequences.

    The next event holds the rule's own consequent plus whatever other rules
    fire on the same antecedent event; where another rule contradicts the
    rule being compiled, the compiled rule wins. ``closed_world`` negates
    every antecedent label the rule does not mention.
    """
    universe = library.antecedent_labels() if closed_world else frozenset()
    out = []
    for rule in library:
        pre = closed_world_event(rule.antecedent, universe, closed_world_groups or ())
        derived = evaluate(library, pre)
        own_pos = {lit.label for lit in rule.consequent if lit.positive}
        own_neg = {lit.label for lit in rule.consequent if not lit.positive}
        pos = (set(derived.positives) - own_neg) | (own_pos - pre.positives)
        neg = (set(derived.negatives) - own_pos) | (own_neg - pre.negatives)
        out.append(Transition(pre, Event(frozenset(pos), frozenset(neg - pos))))
    return out


def is_conflict_free(library: RuleLibrary, closed_world: bool = False) -> bool:
    """No compiled antecedent derives both a thing and its negation."""
    universe = library.antecedent_labels() if closed_world else frozenset()
    return all(
        not evaluate(library, closed_world_event(rule.antecedent, universe)).conflicts
        for rule in library
    )


# -- extraction -----------------------------------------------------------------------


def _labelled(network: Network, mask: int) -> Conjunction:
    lits = [
        Lit(network.label(lit.neuron), lit.positive) for lit in mask_to_literals(mask)
    ]
    return tuple(sorted(lits, key=lambda lit: (lit.label, not lit.positive)))


def extract_rules(
    network: Network, min_weight: Fraction | float | str = Fraction(1, 2)
) -> RuleLibrary:
    """Read the network back as rules.

    Every EL with weight >= ``min_weight`` becomes ``IF pre THEN post``, with
    one ``UNLESS`` clause per sufficiently strong IL on it. Each such IL also
    yields ``IF pre(EL) AND pre(IL) THEN NOT post``.
    """
    min_weight = as_fraction(min_weight)
    if not 0 <= min_weight <= 1:
        raise InvalidArgument("min_weight must lie in [0, 1]")
    rules: list[Rule] = []
    seen = set()

    def emit(rule: Rule) -> None:
        if rule.key() not in seen:
            seen.add(rule.key())
            rules.append(rule)

    els = sorted(network.excitatory_links(), key=network.signature)
    for el in els:
        strong_ils = [
            il
            for il in sorted(network.inhibitors_of(el.id), key=network.signature)
            if il.weight >= min_weight
        ]
        head = Lit(network.label(el.post), True)
        pre = _labelled(network, el.pre_mask)
        if el.weight >= min_weight:
            emit(Rule(pre, (head,), tuple(_labelled(network, il.pre_mask) for il in strong_ils)))
        for il in strong_ils:
            emit(Rule(pre + _labelled(network, il.pre_mask), (head._replace(positive=False),)))
    return RuleLibrary(tuple(rules))


@dataclass(frozen=True)
class Mismatch:
    index: int
    antecedent: Event
    expected: frozenset[str]
    network: frozenset[str]
    extracted: frozenset[str]


@dataclass
class RoundTripReport:
    training: ConvergenceReport
    extracted: RuleLibrary
    mismatches: list[Mismatch]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def round_trip_check(
    library: RuleLibrary,
    closed_world: bool = True,
    max_epochs: int = 10,
    min_weight: Fraction | float | str = 0,
) -> RoundTripReport:
    """Compile, train, extract, and compare all three views per antecedent."""
    transitions = rules_to_transitions(library, closed_world=closed_world)
    network = Network()
    report = train(network, transitions, max_epochs=max_epochs)
    extracted = extract_rules(network, min_weight)
    mismatches = []
    for i, t in enumerate(transitions):
        by_network = reason_step_deterministic(network, t.pre).rs.members
        by_rules = evaluate(extracted, t.pre).positives
        expected = t.post.positives
        if not expected == by_network == by_rules:
            mismatches.append(Mismatch(i, t.pre, expected, by_network, by_rules))
    return RoundTripReport(report, extracted, mismatches)
