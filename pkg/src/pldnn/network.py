"""Network data model: thing-neurons, excitatory and inhibitory links.

Neurons stand for things and nothing else; every logical relation lives in a
link. An excitatory link (EL) joins a conjunction of pre-literals to one post
neuron. An inhibitory link (IL) joins a conjunction of pre-literals to an
*excitatory link* and blocks it while active. Both carry a pair of occurrence
counters whose ratio is the link weight.

Literal sets are stored as integer bitmasks, two bits per neuron (bit
``2*n`` for the positive literal of neuron ``n``, ``2*n + 1`` for the
negative one), so activity checks reduce to ``mask & ctx == mask``.

A network is single-writer: mutating methods must not run concurrently with
anything else, while read-only queries may share a network freely.
"""

from __future__ import annotations

import copy
import hashlib
import json
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction

from pldnn.errors import InvalidArgument, NotFound

RESTING = 0
POSITIVE = 1
NEGATIVE = -1

_PLAIN_LABEL = re.compile(r"[A-Za-z0-9_=.:/]+")


@dataclass(frozen=True, order=True)
class Literal:
    """A neuron together with the state it must be in (+1 or -1)."""

    neuron: int
    positive: bool = True

    @property
    def bit(self) -> int:
        return 1 << (2 * self.neuron + (0 if self.positive else 1))

    def negated(self) -> Literal:
        return Literal(self.neuron, not self.positive)


@dataclass
class Counters:
    num_pre: int = 1
    num_post: int = 1

    @property
    def weight(self) -> Fraction:
        return link_weight(self)


def link_weight(counters: Counters) -> Fraction:
    """Return ``num_post / num_pre`` as an exact fraction (0 when never counted)."""
    if counters.num_pre == 0:
        return Fraction(0)
    return Fraction(counters.num_post, counters.num_pre)


# -- bitmask helpers ---------------------------------------------------------


def literals_to_mask(literals: Iterable[Literal]) -> int:
    mask = 0
    for lit in literals:
        mask |= lit.bit
    return mask


def mask_to_literals(mask: int) -> frozenset[Literal]:
    out = []
    while mask:
        low = mask & -mask
        index = low.bit_length() - 1
        out.append(Literal(index >> 1, not index & 1))
        mask ^= low
    return frozenset(out)


def mask_neurons(mask: int) -> list[int]:
    """Neuron ids mentioned by a literal mask, ascending."""
    merged = (mask | mask >> 1) & _even_bits(mask)
    return [n for n, c in enumerate(bin(merged)[:1:-1][::2]) if c == "1"]


_EVEN = int("01" * 512, 2)


def _even_bits(mask: int) -> int:
    global _EVEN
    while _EVEN.bit_length() < mask.bit_length():
        _EVEN |= _EVEN << _EVEN.bit_length() + 1
    return _EVEN


def neuron_cover(mask: int) -> int:
    """Both literal bits of every neuron that appears in ``mask``."""
    even = _even_bits(mask)
    return mask | ((mask & even) << 1) | ((mask >> 1) & even)


def has_complementary_pair(mask: int) -> bool:
    return bool(mask & (mask >> 1) & _even_bits(mask))


def _anchor(mask: int) -> int:
    positives = mask & _even_bits(mask)
    pick = positives or mask
    return pick & -pick


# -- links --------------------------------------------------------------------


@dataclass(eq=False)
class ExcitatoryLink:
    id: int
    pre_mask: int
    post: int
    counters: Counters

    @property
    def pre(self) -> frozenset[Literal]:
        return mask_to_literals(self.pre_mask)

    @property
    def weight(self) -> Fraction:
        return link_weight(self.counters)

    @property
    def is_composite(self) -> bool:
        return self.pre_mask.bit_count() > 1


@dataclass(eq=False)
class InhibitoryLink:
    id: int
    pre_mask: int
    target: int
    counters: Counters

    @property
    def pre(self) -> frozenset[Literal]:
        return mask_to_literals(self.pre_mask)

    @property
    def weight(self) -> Fraction:
        return link_weight(self.counters)

    @property
    def is_composite(self) -> bool:
        return self.pre_mask.bit_count() > 1


Link = ExcitatoryLink | InhibitoryLink


def quote_label(label: str) -> str:
    if _PLAIN_LABEL.fullmatch(label):
        return label
    return json.dumps(label, ensure_ascii=False)


class Network:
    def __init__(self) -> None:
        self._labels: list[str] = []
        self._ids: dict[str, int] = {}
        self._els: dict[int, ExcitatoryLink] = {}
        self._ils: dict[int, InhibitoryLink] = {}
        self._next_link = 0
        self._el_keys: dict[tuple[int, int], int] = {}
        self._il_keys: dict[tuple[int, int], int] = {}
        self._els_by_post: dict[int, set[int]] = {}
        self._ils_by_target: dict[int, set[int]] = {}
        self._els_by_pre: dict[int, set[int]] = {}
        self._ils_by_pre: dict[int, set[int]] = {}
        # each IL is filed under one literal bit of its pre-set, a positive one
        # when it has any, so a context only has to look at ILs it could fire
        self._ils_by_anchor: dict[int, set[int]] = {}

    # -- neurons ---------------------------------------------------------

    def find_or_create_neuron(self, label: str) -> int:
        if not isinstance(label, str) or not label:
            raise InvalidArgument("neuron label must be a non-empty string")
        nid = self._ids.get(label)
        if nid is None:
            nid = len(self._labels)
            self._labels.append(label)
            self._ids[label] = nid
        return nid

    def neuron_id(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise NotFound(f"unknown thing {label!r}") from None

    def get_neuron_id(self, label: str) -> int | None:
        return self._ids.get(label)

    def label(self, neuron: int) -> str:
        try:
            return self._labels[neuron]
        except IndexError:
            raise NotFound(f"unknown neuron id {neuron}") from None

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    @property
    def neuron_ids(self) -> range:
        return range(len(self._labels))

    def __contains__(self, label: object) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self._labels)

    def literal(self, label: str, positive: bool = True) -> Literal:
        return Literal(self.neuron_id(label), positive)

    # -- links -------------------------------------------------------------

    def _check_pre(self, pre: Iterable[Literal]) -> int:
        mask = 0
        for lit in pre:
            if not 0 <= lit.neuron < len(self._labels):
                raise NotFound(f"unknown neuron id {lit.neuron}")
            mask |= lit.bit
        return mask

    def _check_mask(self, mask: int) -> None:
        if mask <= 0:
            raise InvalidArgument("link pre-set must not be empty")
        if mask.bit_length() > 2 * len(self._labels):
            raise NotFound("pre-set mentions an unknown neuron")
        if has_complementary_pair(mask):
            raise InvalidArgument("pre-set holds both polarities of one neuron")

    def _new_link_id(self) -> int:
        lid = self._next_link
        self._next_link += 1
        return lid

    def add_excitatory_link(
        self, pre: Iterable[Literal], post: int, counters: Counters | None = None
    ) -> tuple[int, bool]:
        """Create ``pre -> post`` unless a structurally equal link exists.

        Returns ``(link_id, created)``. Fresh links start at counters (1, 1).
        """
        return self.add_excitatory_mask(self._check_pre(pre), post, counters)

    def add_excitatory_mask(
        self, mask: int, post: int, counters: Counters | None = None
    ) -> tuple[int, bool]:
        """Same as :meth:`add_excitatory_link` with the pre-set given as a mask."""
        self._check_mask(mask)
        if not 0 <= post < len(self._labels):
            raise NotFound(f"unknown neuron id {post}")
        if mask & (0b11 << (2 * post)):
            raise InvalidArgument(
                f"self-loop: {self._labels[post]!r} appears in its own pre-set"
            )
        return self._insert_el(mask, post, counters)

    def _insert_el(
        self, mask: int, post: int, counters: Counters | None
    ) -> tuple[int, bool]:
        existing = self._el_keys.get((mask, post))
        if existing is not None:
            return existing, False
        lid = self._new_link_id()
        link = ExcitatoryLink(lid, mask, post, counters or Counters())
        self._els[lid] = link
        self._el_keys[(mask, post)] = lid
        self._els_by_post.setdefault(post, set()).add(lid)
        self._ils_by_target[lid] = set()
        for n in mask_neurons(mask):
            self._els_by_pre.setdefault(n, set()).add(lid)
        return lid, True

    def add_inhibitory_link(
        self, pre: Iterable[Literal], target: int, counters: Counters | None = None
    ) -> tuple[int, bool]:
        """Create an IL from ``pre`` onto excitatory link ``target``.

        The pre-set must not share a neuron with the target's own pre-set.
        """
        return self.add_inhibitory_mask(self._check_pre(pre), target, counters)

    def add_inhibitory_mask(
        self, mask: int, target: int, counters: Counters | None = None
    ) -> tuple[int, bool]:
        self._check_mask(mask)
        el = self._els.get(target)
        if el is None:
            raise NotFound(f"unknown excitatory link {target}")
        if neuron_cover(mask) & neuron_cover(el.pre_mask):
            raise InvalidArgument("IL pre-set overlaps the target link's pre-set")
        return self._insert_il(mask, target, counters)

    def _insert_il(
        self, mask: int, target: int, counters: Counters | None
    ) -> tuple[int, bool]:
        existing = self._il_keys.get((mask, target))
        if existing is not None:
            return existing, False
        lid = self._new_link_id()
        link = InhibitoryLink(lid, mask, target, counters or Counters())
        self._ils[lid] = link
        self._il_keys[(mask, target)] = lid
        self._ils_by_target[target].add(lid)
        for n in mask_neurons(mask):
            self._ils_by_pre.setdefault(n, set()).add(lid)
        self._ils_by_anchor.setdefault(_anchor(mask), set()).add(lid)
        return lid, True

    def remove_excitatory_link(self, link_id: int) -> None:
        """Delete an EL together with every IL that targets it."""
        el = self._els.pop(link_id, None)
        if el is None:
            raise NotFound(f"unknown excitatory link {link_id}")
        for il_id in sorted(self._ils_by_target.pop(link_id)):
            il = self._ils.pop(il_id)
            del self._il_keys[(il.pre_mask, link_id)]
            for n in mask_neurons(il.pre_mask):
                self._ils_by_pre[n].discard(il_id)
            self._ils_by_anchor[_anchor(il.pre_mask)].discard(il_id)
        del self._el_keys[(el.pre_mask, el.post)]
        self._els_by_post[el.post].discard(link_id)
        for n in mask_neurons(el.pre_mask):
            self._els_by_pre[n].discard(link_id)

    def find_excitatory_link(self, pre: Iterable[Literal], post: int) -> int | None:
        return self._el_keys.get((literals_to_mask(pre), post))

    def find_inhibitory_link(self, pre: Iterable[Literal], target: int) -> int | None:
        return self._il_keys.get((literals_to_mask(pre), target))

    def excitatory_link(self, link_id: int) -> ExcitatoryLink:
        try:
            return self._els[link_id]
        except KeyError:
            raise NotFound(f"unknown excitatory link {link_id}") from None

    def inhibitory_link(self, link_id: int) -> InhibitoryLink:
        try:
            return self._ils[link_id]
        except KeyError:
            raise NotFound(f"unknown inhibitory link {link_id}") from None

    def excitatory_links(self) -> Iterator[ExcitatoryLink]:
        return iter(self._els.values())

    def inhibitory_links(self) -> Iterator[InhibitoryLink]:
        return iter(self._ils.values())

    @property
    def num_excitatory(self) -> int:
        return len(self._els)

    @property
    def num_inhibitory(self) -> int:
        return len(self._ils)

    def links_into(self, neuron: int) -> list[ExcitatoryLink]:
        return [self._els[i] for i in sorted(self._els_by_post.get(neuron, ()))]

    def inhibitors_of(self, el_id: int) -> list[InhibitoryLink]:
        return [self._ils[i] for i in sorted(self._ils_by_target.get(el_id, ()))]

    def links_from(self, neuron: int) -> list[Link]:
        ids = self._els_by_pre.get(neuron, set()) | self._ils_by_pre.get(neuron, set())
        return [self._els.get(i) or self._ils[i] for i in sorted(ids)]

    # -- activity ------------------------------------------------------------

    def active_excitatory(self, mask: int) -> list[ExcitatoryLink]:
        """ELs whose whole pre-set is satisfied by the literal mask ``mask``."""
        candidates: set[int] = set()
        for n in mask_neurons(mask):
            candidates.update(self._els_by_pre.get(n, ()))
        els = self._els
        return [
            els[i] for i in sorted(candidates) if els[i].pre_mask & mask == els[i].pre_mask
        ]

    def active_inhibitory(self, mask: int) -> dict[int, list[InhibitoryLink]]:
        """Active ILs under ``mask`` grouped by target EL id, each list by IL id."""
        ils = self._ils
        by_anchor = self._ils_by_anchor
        found: list[int] = []
        rest = mask
        while rest:
            bit = rest & -rest
            rest ^= bit
            bucket = by_anchor.get(bit)
            if bucket:
                found.extend(i for i in bucket if ils[i].pre_mask & mask == ils[i].pre_mask)
        out: dict[int, list[InhibitoryLink]] = {}
        for i in sorted(found):
            il = ils[i]
            out.setdefault(il.target, []).append(il)
        return out

    def active_inhibitors(self, el_id: int, mask: int) -> list[InhibitoryLink]:
        ils = self._ils
        return [
            ils[i]
            for i in sorted(self._ils_by_target.get(el_id, ()))
            if ils[i].pre_mask & mask == ils[i].pre_mask
        ]

    # -- identity --------------------------------------------------------------

    def literal_text(self, lit: Literal) -> str:
        return ("+" if lit.positive else "-") + quote_label(self._labels[lit.neuron])

    def literals_text(self, mask: int) -> str:
        lits = sorted(
            mask_to_literals(mask),
            key=lambda lit: (self._labels[lit.neuron], not lit.positive),
        )
        return "{" + ",".join(self.literal_text(lit) for lit in lits) + "}"

    def signature(self, link: Link) -> str:
        """Canonical text form; equal structure iff equal signature."""
        if isinstance(link, ExcitatoryLink):
            return f"{self.literals_text(link.pre_mask)}->{quote_label(self._labels[link.post])}"
        target = self._els[link.target]
        return f"{self.literals_text(link.pre_mask)}-|{self.signature(target)}"

    def fingerprint(self) -> str:
        """Hash of labels, link signatures and counters (ignores internal ids)."""
        h = hashlib.sha256()
        for label in sorted(self._labels):
            h.update(b"N" + label.encode() + b"\0")
        rows = [
            (self.signature(link), link.counters.num_pre, link.counters.num_post)
            for link in (*self._els.values(), *self._ils.values())
        ]
        for sig, a, b in sorted(rows):
            h.update(f"L{sig}\0{a}\0{b}\0".encode())
        return h.hexdigest()

    def copy(self) -> Network:
        return copy.deepcopy(self)

    # -- index consistency -------------------------------------------------------

    def _rebuilt_indexes(self) -> dict[str, dict]:
        el_keys = {(el.pre_mask, el.post): el.id for el in self._els.values()}
        il_keys = {(il.pre_mask, il.target): il.id for il in self._ils.values()}
        by_post: dict[int, set[int]] = {}
        by_target: dict[int, set[int]] = {i: set() for i in self._els}
        els_by_pre: dict[int, set[int]] = {}
        ils_by_pre: dict[int, set[int]] = {}
        by_anchor: dict[int, set[int]] = {}
        for el in self._els.values():
            by_post.setdefault(el.post, set()).add(el.id)
            for n in mask_neurons(el.pre_mask):
                els_by_pre.setdefault(n, set()).add(el.id)
        for il in self._ils.values():
            by_target[il.target].add(il.id)
            for n in mask_neurons(il.pre_mask):
                ils_by_pre.setdefault(n, set()).add(il.id)
            by_anchor.setdefault(_anchor(il.pre_mask), set()).add(il.id)
        return {
            "el_keys": el_keys,
            "il_keys": il_keys,
            "els_by_post": by_post,
            "ils_by_target": by_target,
            "els_by_pre": els_by_pre,
            "ils_by_pre": ils_by_pre,
            "ils_by_anchor": by_anchor,
        }

    def check_indexes(self) -> bool:
        """True when every incremental index equals a from-scratch rebuild."""

        def nonempty(d: dict[int, set[int]]) -> dict[int, set[int]]:
            return {k: v for k, v in d.items() if v}

        rebuilt = self._rebuilt_indexes()
        if self._ids != {label: i for i, label in enumerate(self._labels)}:
            return False
        if any(il.target not in self._els for il in self._ils.values()):
            return False
        return (
            self._el_keys == rebuilt["el_keys"]
            and self._il_keys == rebuilt["il_keys"]
            and nonempty(self._els_by_post) == nonempty(rebuilt["els_by_post"])
            and self._ils_by_target == rebuilt["ils_by_target"]
            and nonempty(self._els_by_pre) == nonempty(rebuilt["els_by_pre"])
            and nonempty(self._ils_by_pre) == nonempty(rebuilt["ils_by_pre"])
            and nonempty(self._ils_by_anchor) == nonempty(rebuilt["ils_by_anchor"])
        )

    def __repr__(self) -> str:
        return (
            f"Network(neurons={len(self._labels)}, excitatory={len(self._els)}, "
            f"inhibitory={len(self._ils)})"
        )
