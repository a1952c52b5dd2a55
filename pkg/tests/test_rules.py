import pytest

from pldnn import (
    Event,
    Lit,
    Network,
    parse_rules,
    reason_step,
    rules_to_transitions,
    train,
)
from pldnn.rules import (
    RuleLibrary,
    RuleParseError,
    RuleSemanticError,
    closed_world_event,
    evaluate,
    extract_rules,
    is_conflict_free,
    render_rules,
    round_trip_check,
)


def test_parse_basic_rule():
    lib = parse_rules("# animals\nIF mammal AND NOT airborne THEN beast\n\n")
    (rule,) = lib
    assert rule.antecedent == (Lit("mammal"), Lit("airborne", False))
    assert rule.consequent == (Lit("beast"),)
    assert rule.line == 2


def test_keywords_case_insensitive_and_quoted_names():
    lib = parse_rules('if "two words" and x then "IF" unless y')
    (rule,) = lib
    assert rule.antecedent[0].label == "two words"
    assert rule.consequent[0].label == "IF"
    assert rule.exceptions == ((Lit("y"),),)
    assert render_rules(lib) == 'IF "two words" AND x THEN "IF" UNLESS y\n'


@pytest.mark.parametrize(
    "text,column",
    [
        ("IF a b THEN c", 6),
        ("IF a THEN", 10),
        ("a THEN b", 1),
        ("IF a THEN b ; c", 13),
    ],
)
def test_parse_errors_point_at_the_problem(text, column):
    with pytest.raises(RuleParseError) as err:
        parse_rules(text)
    assert err.value.line == 1 and err.value.column == column


def test_semantic_errors():
    with pytest.raises(RuleSemanticError):
        parse_rules("IF a AND a THEN b")
    with pytest.raises(RuleSemanticError) as err:
        parse_rules("IF a THEN b\nIF a THEN b")
    assert err.value.line == 2


def test_evaluate_fires_once_and_skips_known():
    lib = parse_rules("IF a THEN b\nIF a THEN a\nIF b THEN c\nIF a THEN NOT d")
    d = evaluate(lib, Event({"a"}))
    assert d.positives == {"b"} and d.negatives == {"d"}


def test_unless_blocks_rule():
    lib = parse_rules("IF bird THEN flies UNLESS penguin")
    assert evaluate(lib, Event({"bird"})).positives == {"flies"}
    assert evaluate(lib, Event({"bird", "penguin"})).positives == set()


def test_closed_world_event():
    ev = closed_world_event([Lit("a")], universe=["a", "b"], groups=[["x=1", "x=2"]])
    assert ev == Event({"a"}, {"b"})
    ev = closed_world_event([Lit("x=1")], groups=[["x=1", "x=2"]])
    assert ev == Event({"x=1"}, {"x=2"})


def test_compile_includes_other_rules_consequences():
    lib = parse_rules("IF a THEN b\nIF a THEN c\nIF d THEN e")
    ts = rules_to_transitions(lib, closed_world=True)
    assert ts[0].pre == Event({"a"}, {"d"})
    assert ts[0].post.positives == {"b", "c"}


def test_conflict_detection():
    assert is_conflict_free(parse_rules("IF a THEN b\nIF c THEN NOT b"), closed_world=True)
    assert not is_conflict_free(parse_rules("IF a THEN b\nIF a THEN NOT b"))


def test_animal_round_trip(data_dir):
    lib = parse_rules((data_dir / "animals.rules").read_text())
    report = round_trip_check(lib)
    assert report.training.converged
    assert report.ok


def test_extraction_of_h2so4(data_dir):
    from pldnn import load_event_log

    net = Network()
    train(net, load_event_log(data_dir / "h2so4.log"))
    lines = render_rules(extract_rules(net)).splitlines()
    assert "IF O2 THEN SO3 UNLESS FeS2" in lines
    assert "IF O2 AND FeS2 THEN NOT SO3" in lines
    assert len(extract_rules(net, 1)) < len(extract_rules(net, 0))


def test_extract_empty_network():
    assert render_rules(extract_rules(Network())) == ""


def test_library_split_files_cover_the_full_library(data_dir):
    full = parse_rules((data_dir / "animals.rules").read_text())
    parts = [parse_rules((data_dir / f).read_text()) for f in ("mammals.rules", "birds.rules")]
    assert {r.key() for r in full} == {r.key() for p in parts for r in p}
    assert len(RuleLibrary(tuple(r for p in parts for r in p))) == 14


def test_trained_network_predicts_compiled_consequences():
    lib = parse_rules("IF a THEN b\nIF c AND NOT a THEN d")
    ts = rules_to_transitions(lib, closed_world=True)
    net = Network()
    assert train(net, ts).converged
    for tr in ts:
        assert reason_step(net, tr.pre).predicted == tr.post.positives
