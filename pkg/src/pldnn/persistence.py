"""Stable text formats: the network document and the event log.

Network document (JSON, canonical ordering)::

    {"format": "pldnn-network", "version": 1,
     "neurons": [...sorted labels...],
     "excitatory_links": [{"pre": ["+O2"], "post": "SO3", "num_pre": 5, "num_post": 3}],
     "inhibitory_links": [{"pre": ["+FeS2"], "target": "{+O2}->SO3", ...}]}

Links are sorted by signature, so saving a freshly loaded document
reproduces it byte for byte.

Event log: one transition per line, ``a, b, !c -> d``. ``!`` marks a thing
that did not happen; ``#`` starts a comment.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable
from pathlib import Path
from typing import IO, Any

from pldnn.errors import DanglingTarget, DocumentError, InvalidArgument, VersionError
from pldnn.events import Event, Transition
from pldnn.network import Counters, Network, mask_to_literals

FORMAT = "pldnn-network"
VERSION = 1

_TOP_FIELDS = {"format", "version", "neurons", "excitatory_links", "inhibitory_links"}
_EL_FIELDS = {"pre", "post", "num_pre", "num_post"}
_IL_FIELDS = {"pre", "target", "num_pre", "num_post"}

PathOrStream = str | os.PathLike | IO[str]


# -- network document --------------------------------------------------------


def _lit_texts(network: Network, mask: int) -> list[str]:
    lits = sorted(
        mask_to_literals(mask), key=lambda lit: (network.label(lit.neuron), not lit.positive)
    )
    return [("+" if lit.positive else "-") + network.label(lit.neuron) for lit in lits]


def network_to_document(network: Network) -> dict[str, Any]:
    els = sorted(
        ((network.signature(el), el) for el in network.excitatory_links()),
        key=lambda pair: pair[0],
    )
    ils = sorted(
        ((network.signature(il), il) for il in network.inhibitory_links()),
        key=lambda pair: pair[0],
    )
    return {
        "format": FORMAT,
        "version": VERSION,
        "neurons": sorted(network.labels),
        "excitatory_links": [
            {
                "pre": _lit_texts(network, el.pre_mask),
                "post": network.label(el.post),
                "num_pre": el.counters.num_pre,
                "num_post": el.counters.num_post,
            }
            for _, el in els
        ],
        "inhibitory_links": [
            {
                "pre": _lit_texts(network, il.pre_mask),
                "target": network.signature(network.excitatory_link(il.target)),
                "num_pre": il.counters.num_pre,
                "num_post": il.counters.num_post,
            }
            for _, il in ils
        ],
    }


def dumps_network(network: Network) -> str:
    return json.dumps(network_to_document(network), indent=2, ensure_ascii=False) + "\n"


def _check_fields(obj: Any, allowed: set[str], where: str, strict: bool) -> None:
    if not isinstance(obj, dict):
        raise DocumentError(f"{where}: expected an object")
    missing = allowed - obj.keys() - ({"format"} if where == "document" else set())
    if missing:
        raise DocumentError(f"{where}: missing field(s) {sorted(missing)}")
    extra = obj.keys() - allowed
    if extra and strict:
        raise DocumentError(f"{where}: unknown field(s) {sorted(extra)}")


def _counters(obj: dict[str, Any], where: str) -> Counters:
    a, b = obj["num_pre"], obj["num_post"]
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in (a, b)):
        raise DocumentError(f"{where}: counters must be integers")
    if not 0 <= b <= a:
        raise DocumentError(f"{where}: need 0 <= num_post <= num_pre, got ({a}, {b})")
    return Counters(a, b)


def _pre_mask(network: Network, pre: Any, where: str) -> int:
    if not isinstance(pre, list) or not pre:
        raise DocumentError(f"{where}: 'pre' must be a non-empty list")
    mask = 0
    for text in pre:
        if not isinstance(text, str) or len(text) < 2 or text[0] not in "+-":
            raise DocumentError(f"{where}: bad literal {text!r}")
        nid = network.get_neuron_id(text[1:])
        if nid is None:
            raise DocumentError(f"{where}: literal names unknown neuron {text[1:]!r}")
        mask |= 1 << (2 * nid + (text[0] == "-"))
    return mask


def document_to_network(doc: Any, strict: bool = True) -> Network:
    _check_fields(doc, _TOP_FIELDS, "document", strict)
    if doc.get("format", FORMAT) != FORMAT:
        raise DocumentError(f"not a network document: format {doc['format']!r}")
    if doc["version"] != VERSION:
        raise VersionError(f"unsupported document version {doc['version']!r}")
    neurons = doc["neurons"]
    if not isinstance(neurons, list) or not all(isinstance(x, str) and x for x in neurons):
        raise DocumentError("'neurons' must be a list of non-empty strings")
    if len(set(neurons)) != len(neurons):
        raise DocumentError("duplicate neuron label")

    network = Network()
    for label in sorted(neurons):
        network.find_or_create_neuron(label)
    for key in ("excitatory_links", "inhibitory_links"):
        if not isinstance(doc[key], list):
            raise DocumentError(f"'{key}' must be a list")

    for i, obj in enumerate(doc["excitatory_links"]):
        where = f"excitatory_links[{i}]"
        _check_fields(obj, _EL_FIELDS, where, strict)
        post = network.get_neuron_id(obj["post"]) if isinstance(obj["post"], str) else None
        if post is None:
            raise DocumentError(f"{where}: unknown post neuron {obj['post']!r}")
        mask = _pre_mask(network, obj["pre"], where)
        try:
            _, created = network.add_excitatory_mask(mask, post, _counters(obj, where))
        except InvalidArgument as exc:
            raise DocumentError(f"{where}: {exc}") from None
        if not created:
            raise DocumentError(f"{where}: duplicate link")

    by_signature = {network.signature(el): el.id for el in network.excitatory_links()}
    for i, obj in enumerate(doc["inhibitory_links"]):
        where = f"inhibitory_links[{i}]"
        _check_fields(obj, _IL_FIELDS, where, strict)
        target = by_signature.get(obj["target"])
        if target is None:
            raise DanglingTarget(f"{where}: no excitatory link {obj['target']!r}")
        mask = _pre_mask(network, obj["pre"], where)
        try:
            _, created = network.add_inhibitory_mask(mask, target, _counters(obj, where))
        except InvalidArgument as exc:
            raise DocumentError(f"{where}: {exc}") from None
        if not created:
            raise DocumentError(f"{where}: duplicate link")
    return network


def loads_network(text: str, strict: bool = True) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed document: {exc}") from None
    return document_to_network(doc, strict)


def save_network(network: Network, sink: PathOrStream) -> None:
    text = dumps_network(network)
    if isinstance(sink, (str, os.PathLike)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def load_network(source: PathOrStream, strict: bool = True) -> Network:
    if isinstance(source, (str, os.PathLike)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    return loads_network(text, strict)


# -- event log ------------------------------------------------------------------


def check_log_label(label: str) -> None:
    if (
        not label
        or label != label.strip()
        or label[0] in "!+"
        or any(bad in label for bad in (",", "->", "#", "\n", "\r"))
    ):
        raise InvalidArgument(f"label {label!r} cannot be written to an event log")


def format_event(event: Event) -> str:
    parts = []
    for lit in event.literals():
        check_log_label(lit.label)
        parts.append(lit.label if lit.positive else "!" + lit.label)
    return ", ".join(parts)


def format_transition(transition: Transition) -> str:
    pre, post = format_event(transition.pre), format_event(transition.post)
    return f"{pre} -> {post}".strip()


def parse_log_event(text: str) -> Event:
    pos, neg = set(), set()
    for raw in text.split(","):
        item = raw.strip()
        if not item:
            continue
        if item[0] == "!":
            label, target = item[1:].strip(), neg
        else:
            label, target = item[1:].strip() if item[0] == "+" else item, pos
        if not label:
            raise InvalidArgument(f"empty label in {text!r}")
        target.add(label)
    return Event(frozenset(pos), frozenset(neg))


def parse_event_log(text: str, source: str = "<log>") -> list[Transition]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.count("->") != 1:
            raise DocumentError(f"{source}:{lineno}: expected exactly one '->'")
        left, right = body.split("->")
        try:
            out.append(Transition(parse_log_event(left), parse_log_event(right)))
        except InvalidArgument as exc:
            raise DocumentError(f"{source}:{lineno}: {exc}") from None
    return out


def dumps_event_log(transitions: Iterable[Transition]) -> str:
    return "".join(format_transition(t) + "\n" for t in transitions)


def save_event_log(transitions: Iterable[Transition], sink: PathOrStream) -> None:
    text = dumps_event_log(transitions)
    if isinstance(sink, (str, os.PathLike)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def load_event_log(source: PathOrStream) -> list[Transition]:
    if isinstance(source, (str, os.PathLike)):
        return parse_event_log(Path(source).read_text(encoding="utf-8"), str(source))
    return parse_event_log(source.read(), getattr(source, "name", "<log>"))

