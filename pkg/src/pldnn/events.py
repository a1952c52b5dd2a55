"""Label-level events and transitions shared by every front end."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from typing import NamedTuple

from pldnn.errors import InvalidArgument


class Lit(NamedTuple):
    label: str
    positive: bool = True

    def __str__(self) -> str:
        return ("+" if self.positive else "-") + self.label


@dataclass(frozen=True)
class Event:
    """Things observed to happen (positives) and not to happen (negatives)."""

    positives: frozenset[str] = frozenset()
    negatives: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "positives", frozenset(self.positives))
        object.__setattr__(self, "negatives", frozenset(self.negatives))
        both = self.positives & self.negatives
        if both:
            raise InvalidArgument(
                f"event marks {sorted(both)} as both happening and not happening"
            )
        if any(not isinstance(x, str) or not x for x in self.labels):
            raise InvalidArgument("event labels must be non-empty strings")

    @classmethod
    def from_literals(cls, lits: Iterable[Lit | tuple[str, bool]]) -> Event:
        pos, neg = set(), set()
        for label, positive in lits:
            (pos if positive else neg).add(label)
        return cls(frozenset(pos), frozenset(neg))

    @classmethod
    def parse(cls, text: str) -> Event:
        """Parse ``"+a,-b,c"``: ``+`` or no prefix is positive, ``-``/``!`` negative."""
        lits = []
        for raw in text.split(","):
            item = raw.strip()
            if not item:
                continue
            if item[0] in "-!":
                lits.append(Lit(item[1:].strip(), False))
            elif item[0] == "+":
                lits.append(Lit(item[1:].strip(), True))
            else:
                lits.append(Lit(item, True))
        if any(not lit.label for lit in lits):
            raise InvalidArgument(f"empty label in event {text!r}")
        return cls.from_literals(lits)

    @property
    def labels(self) -> frozenset[str]:
        return self.positives | self.negatives

    def literals(self) -> list[Lit]:
        """Literals sorted by label, positive before negative."""
        lits = [Lit(x, True) for x in self.positives] + [Lit(x, False) for x in self.negatives]
        return sorted(lits, key=lambda lit: (lit.label, not lit.positive))

    def __str__(self) -> str:
        return ",".join(str(lit) for lit in self.literals())

    def __bool__(self) -> bool:
        return bool(self.positives or self.negatives)


@dataclass(frozen=True)
class Transition:
    """An observed event followed by the event that happened next."""

    pre: Event
    post: Event

    def __str__(self) -> str:
        return f"{self.pre} -> {self.post}"
