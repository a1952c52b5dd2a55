import io
import json

import pytest

from pldnn import Event, Network, Transition, reason_step, train
from pldnn.errors import DanglingTarget, DocumentError, InvalidArgument, VersionError
from pldnn.network import Counters
from pldnn.persistence import (
    dumps_event_log,
    dumps_network,
    format_transition,
    load_event_log,
    load_network,
    loads_network,
    network_to_document,
    parse_event_log,
    save_event_log,
    save_network,
)


@pytest.fixture
def h2so4(data_dir):
    net = Network()
    train(net, load_event_log(data_dir / "h2so4.log"))
    return net


def test_empty_round_trip():
    text = dumps_network(Network())
    assert len(loads_network(text)) == 0
    assert json.loads(text)["excitatory_links"] == []


def test_h2so4_round_trip(h2so4, tmp_path):
    path = tmp_path / "net.json"
    save_network(h2so4, path)
    loaded = load_network(path)
    query = Event({"FeS2", "O2"})
    assert reason_step(loaded, query).predicted == reason_step(h2so4, query).predicted
    assert path.read_text() == dumps_network(loaded)
    buf = io.StringIO()
    save_network(loaded, buf)
    assert load_network(io.StringIO(buf.getvalue())).fingerprint() == h2so4.fingerprint()


def test_document_layout(h2so4):
    doc = network_to_document(h2so4)
    assert doc["format"] == "pldnn-network" and doc["version"] == 1
    assert doc["neurons"] == sorted(doc["neurons"])
    il = next(x for x in doc["inhibitory_links"] if x["target"] == "{+O2}->SO3")
    assert il["pre"] == ["+FeS2"]
    el = next(x for x in doc["excitatory_links"] if x["post"] == "SO3" and x["pre"] == ["+O2"])
    assert (el["num_pre"], el["num_post"]) == (5, 3)


def _doc(h2so4):
    return network_to_document(h2so4)


def test_dangling_target(h2so4):
    doc = _doc(h2so4)
    doc["inhibitory_links"][0]["target"] = "{+nothing}->here"
    with pytest.raises(DanglingTarget):
        loads_network(json.dumps(doc))


def test_version_and_format_errors(h2so4):
    doc = _doc(h2so4)
    doc["version"] = 2
    with pytest.raises(VersionError):
        loads_network(json.dumps(doc))
    with pytest.raises(DocumentError):
        loads_network("{not json")
    with pytest.raises(DocumentError):
        loads_network(json.dumps({"format": "other", "version": 1}))


def test_unknown_fields_strict_vs_lenient(h2so4):
    doc = _doc(h2so4)
    doc["comment"] = "hello"
    doc["excitatory_links"][0]["colour"] = "red"
    with pytest.raises(DocumentError):
        loads_network(json.dumps(doc))
    assert loads_network(json.dumps(doc), strict=False).fingerprint() == h2so4.fingerprint()


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d["excitatory_links"][0].update(num_post=99),
        lambda d: d["excitatory_links"][0].update(pre=["+ghost"]),
        lambda d: d["excitatory_links"][0].update(pre=[]),
        lambda d: d["excitatory_links"][0].update(post="ghost"),
        lambda d: d["excitatory_links"].append(dict(d["excitatory_links"][0])),
        lambda d: d["neurons"].append(d["neurons"][0]),
        lambda d: d.pop("neurons"),
    ],
)
def test_malformed_documents(h2so4, mutate):
    doc = _doc(h2so4)
    mutate(doc)
    with pytest.raises(DocumentError):
        loads_network(json.dumps(doc))


def test_awkward_labels_survive():
    net = Network()
    net.find_or_create_neuron("two words")
    b = net.find_or_create_neuron('quote"d')
    net.add_excitatory_link([net.literal("two words", False)], b, Counters(3, 1))
    loaded = loads_network(dumps_network(net))
    assert loaded.fingerprint() == net.fingerprint()


def test_event_log_format():
    text = "# burning\nFeS2, O2 -> Fe2O3, SO2  # first\n\n+a, !b -> \n"
    ts = parse_event_log(text)
    assert ts[0] == Transition(Event({"FeS2", "O2"}), Event({"Fe2O3", "SO2"}))
    assert ts[1] == Transition(Event({"a"}, {"b"}), Event())
    assert format_transition(ts[1]) == "a, !b ->"
    assert parse_event_log(dumps_event_log(ts)) == ts


@pytest.mark.parametrize("line", ["a -> b -> c", "a b", "a, ! -> b"])
def test_event_log_errors(line):
    with pytest.raises(DocumentError):
        parse_event_log(line)


@pytest.mark.parametrize("label", ["a,b", "x->y", "has#hash", "!bang", "+plus", " pad"])
def test_unwritable_labels(label):
    with pytest.raises(InvalidArgument):
        dumps_event_log([Transition(Event({label}), Event())])


def test_event_log_files(tmp_path):
    ts = [Transition(Event({"a"}), Event({"b"}, {"c"}))]
    path = tmp_path / "x.log"
    save_event_log(ts, path)
    assert load_event_log(path) == ts
    assert load_event_log(io.StringIO(path.read_text())) == ts
