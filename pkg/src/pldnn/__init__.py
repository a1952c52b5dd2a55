"""Networks whose neurons are things and whose links are logical relations."""

from pldnn.errors import DocumentError, InvalidArgument, NotFound, PLDNNError
from pldnn.events import Event, Lit, Transition
from pldnn.export import export_dot
from pldnn.learning import (
    ConvergenceReport,
    RecallReport,
    evaluate_recall,
    observe_transition,
    train,
)
from pldnn.merge import MergeResult, merge_networks
from pldnn.network import Counters, ExcitatoryLink, InhibitoryLink, Literal, Network
from pldnn.persistence import (
    dumps_network,
    load_event_log,
    load_network,
    loads_network,
    save_event_log,
    save_network,
)
from pldnn.reasoning import Mode, explain, reason_chain, reason_step
from pldnn.rules import RuleLibrary, extract_rules, parse_rules, rules_to_transitions

__version__ = "0.1.0"

__all__ = [
    "ConvergenceReport",
    "Counters",
    "DocumentError",
    "Event",
    "ExcitatoryLink",
    "InhibitoryLink",
    "InvalidArgument",
    "Lit",
    "Literal",
    "MergeResult",
    "Mode",
    "Network",
    "NotFound",
    "PLDNNError",
    "RecallReport",
    "RuleLibrary",
    "Transition",
    "dumps_network",
    "evaluate_recall",
    "explain",
    "export_dot",
    "extract_rules",
    "load_event_log",
    "load_network",
    "loads_network",
    "merge_networks",
    "observe_transition",
    "parse_rules",
    "reason_chain",
    "reason_step",
    "rules_to_transitions",
    "save_event_log",
    "save_network",
    "train",
]
