"""Integration of two independently learned networks."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from pldnn.events import Transition
from pldnn.learning import ConvergenceReport, train
from pldnn.network import Counters, Network, mask_to_literals
from pldnn.reasoning import DEFAULT_THETA, Mode

log = logging.getLogger(__name__)


@dataclass
class MergeResult:
    network: Network
    report: ConvergenceReport | None
    structural_only: bool


def _translate(src: Network, dst: Network, mask: int) -> int:
    out = 0
    for lit in mask_to_literals(mask):
        nid = dst.neuron_id(src.label(lit.neuron))
        out |= 1 << (2 * nid + (not lit.positive))
    return out


def union_networks(a: Network, b: Network) -> Network:
    """Union by label and link signature; colliding links add their counters."""
    merged = Network()
    for label in sorted(set(a.labels) | set(b.labels)):
        merged.find_or_create_neuron(label)
    for src in (a, b):
        el_map = {}
        for el in sorted(src.excitatory_links(), key=lambda link: link.id):
            mask = _translate(src, merged, el.pre_mask)
            post = merged.neuron_id(src.label(el.post))
            lid, created = merged.add_excitatory_mask(
                mask, post, Counters(el.counters.num_pre, el.counters.num_post)
            )
            if not created:
                c = merged.excitatory_link(lid).counters
                c.num_pre += el.counters.num_pre
                c.num_post += el.counters.num_post
            el_map[el.id] = lid
        for il in sorted(src.inhibitory_links(), key=lambda link: link.id):
            mask = _translate(src, merged, il.pre_mask)
            lid, created = merged.add_inhibitory_mask(
                mask, el_map[il.target], Counters(il.counters.num_pre, il.counters.num_post)
            )
            if not created:
                c = merged.inhibitory_link(lid).counters
                c.num_pre += il.counters.num_pre
                c.num_post += il.counters.num_post
    return merged


def merge_networks(
    a: Network,
    b: Network,
    replay: Sequence[Transition] | None = None,
    max_epochs: int = 10,
    mode: Mode | str = Mode.DETERMINISTIC,
    theta: Fraction | float | str = DEFAULT_THETA,
) -> MergeResult:
    """Union two networks, then replay both training histories on the result.

    Replay is what adds the cross-domain links; without it the merge is only
    structural and is reported as such.
    """
    merged = union_networks(a, b)
    if replay is None:
        log.warning("merge without replay: result is structural-only")
        return MergeResult(merged, None, True)
    report = train(merged, replay, max_epochs, mode, theta)
    return MergeResult(merged, report, False)
