"""Graphviz DOT export.

Neurons are ellipses. Every EL gets a small junction point: solid edges run
from its pre neurons into the junction and from the junction to the post
neuron, which carries the weight. ILs are dashed edges ending on the junction
of the EL they block. Edges leaving a negative literal get a hollow tail
marker so NELs and NILs stand out.
"""

from __future__ import annotations

from dataclasses import dataclass

from pldnn.network import ExcitatoryLink, Network, mask_to_literals


@dataclass(frozen=True)
class DotOptions:
    name: str = "pldnn"
    rankdir: str = "LR"
    weights: bool = True


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(network: Network, options: DotOptions | None = None) -> str:
    opts = options or DotOptions()
    labels = sorted(network.labels)
    node = {label: f"n{i}" for i, label in enumerate(labels)}
    els = sorted(network.excitatory_links(), key=network.signature)
    junction = {el.id: f"j{i}" for i, el in enumerate(els)}
    ils = sorted(network.inhibitory_links(), key=network.signature)

    def pre_edges(mask: int, head: str, style: str) -> list[str]:
        out = []
        lits = sorted(
            mask_to_literals(mask),
            key=lambda lit: (network.label(lit.neuron), not lit.positive),
        )
        for lit in lits:
            attrs = [f"style={style}"]
            if not lit.positive:
                attrs += ["dir=both", "arrowtail=odot"]
            if style == "dashed":
                attrs.append("arrowhead=tee")
            out.append(f"  {node[network.label(lit.neuron)]} -> {head} [{', '.join(attrs)}];")
        return out

    lines = [f"digraph {_q(opts.name)} {{", f"  rankdir={opts.rankdir};"]
    lines.append("  node [shape=ellipse];")
    for label in labels:
        lines.append(f"  {node[label]} [label={_q(label)}];")
    for el in els:
        lines.append(
            f"  {junction[el.id]} [shape=point, width=0.08, "
            f"tooltip={_q(network.signature(el))}];"
        )
    for el in els:
        lines += pre_edges(el.pre_mask, junction[el.id], "solid")
        lines.append(f"  {junction[el.id]} -> {node[network.label(el.post)]}{_weight(el, opts)};")
    for il in ils:
        lines += pre_edges(il.pre_mask, junction[il.target], "dashed")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _weight(el: ExcitatoryLink, opts: DotOptions) -> str:
    if not opts.weights:
        return " [style=solid]"
    return f" [style=solid, label={_q(str(el.weight))}]"
