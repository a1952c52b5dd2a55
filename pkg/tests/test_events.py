import pytest

from pldnn import Event, InvalidArgument, Lit, Transition


def test_parse_prefixes():
    ev = Event.parse("+a, -b, c, !d")
    assert ev.positives == {"a", "c"} and ev.negatives == {"b", "d"}
    assert str(ev) == "+a,-b,+c,-d"


def test_contradictory_event_rejected():
    with pytest.raises(InvalidArgument):
        Event({"a"}, {"a"})
    with pytest.raises(InvalidArgument):
        Event.parse("+a, -")


def test_literals_sorted_and_truthiness():
    ev = Event.from_literals([Lit("b"), ("a", False)])
    assert ev.literals() == [Lit("a", False), Lit("b", True)]
    assert ev and not Event()


def test_transition_text():
    t = Transition(Event({"x"}), Event({"y"}, {"z"}))
    assert str(t) == "+x -> +y,-z"
