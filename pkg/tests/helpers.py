"""Test-side oracles and strategies, kept independent of the package logic."""

import time
from itertools import product

from hypothesis import strategies as st

from pldnn import Event, Transition

LABELS = ["a", "b", "c", "d", "e"]


def best_time(fn, repeat=5):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


@st.composite
def events(draw, labels=LABELS, min_size=1):
    chosen = draw(st.lists(st.sampled_from(labels), min_size=min_size, unique=True))
    signs = draw(st.lists(st.booleans(), min_size=len(chosen), max_size=len(chosen)))
    pos = {x for x, s in zip(chosen, signs) if s}
    neg = {x for x, s in zip(chosen, signs) if not s}
    return Event(pos, neg)


@st.composite
def transitions(draw, labels=LABELS):
    pre = draw(events(labels))
    post = draw(events(labels, min_size=0))
    return Transition(pre, post)


transition_lists = st.lists(transitions(), min_size=1, max_size=8)


# -- brute-force rule oracle ------------------------------------------------------
#
# A rule is (antecedent, consequent): tuples of (label, positive) pairs. The
# oracle enumerates the closed-world context of an antecedent (every
# antecedent-side proposition not mentioned is false) and fires every rule
# whose literals all hold there.


def context_of(antecedent, props):
    state = {p: False for p in props}
    for label, positive in antecedent:
        state[label] = positive
    return state


def holds(conj, state):
    return all(state.get(label) is positive for label, positive in conj)


def oracle_next(rules, state):
    """Positives concluded in one step from ``state``, excluding ones already true."""
    out = set()
    for antecedent, consequent in rules:
        if holds(antecedent, state):
            out |= {label for label, positive in consequent if positive}
    return {x for x in out if not state.get(x, False)}


def oracle_conflicts(rules, props):
    """True when some antecedent context derives a proposition both ways."""
    for antecedent, _ in rules:
        state = context_of(antecedent, props)
        pos, neg = set(), set()
        for a, c in rules:
            if holds(a, state):
                pos |= {x for x, p in c if p}
                neg |= {x for x, p in c if not p}
        if pos & neg:
            return True
    return False


def all_states(props):
    for values in product([False, True], repeat=len(props)):
        yield dict(zip(props, values))
