import io
import json

import pytest

from pldnn import Event, InvalidArgument, Lit
from pldnn.ingestion import (
    ColumnSpec,
    DatasetSchema,
    SchemaError,
    dedupe_conflicts,
    expand_attribute,
    find_conflicts,
    first_distinct,
    load_records,
    read_records,
    write_transitions,
)
from pldnn.persistence import load_event_log

LEGS = ColumnSpec("legs", "feature", "categorical", domain=("0", "2", "4", "5", "6", "8"))


def schema(*extra, strict=False):
    cols = (
        ColumnSpec("animal", "target", "categorical"),
        ColumnSpec("hair"),
        ColumnSpec("legs", "feature", "categorical"),
    ) + extra
    return DatasetSchema(cols, strict=strict)


def test_expand_boolean():
    col = ColumnSpec("hair")
    assert expand_attribute(col, "1") == {Lit("hair", True)}
    assert expand_attribute(col, "0") == {Lit("hair", False)}
    with pytest.raises(InvalidArgument):
        expand_attribute(col, "maybe")


def test_expand_categorical_closed_world():
    lits = expand_attribute(LEGS, "4")
    assert lits == {Lit("legs=4")} | {Lit(f"legs={v}", False) for v in "025 68".replace(" ", "")}
    with pytest.raises(InvalidArgument):
        expand_attribute(LEGS, "3")


def test_expand_by_column_name():
    s = DatasetSchema((ColumnSpec("k", "target", "categorical"), LEGS))
    assert Lit("legs=0") in expand_attribute("legs", "0", s)


def test_schema_validation():
    with pytest.raises(SchemaError):
        DatasetSchema((ColumnSpec("a"),))
    with pytest.raises(SchemaError):
        ColumnSpec("a", role="label")
    with pytest.raises(SchemaError):
        DatasetSchema.from_dict({"columns": [{"name": "a", "colour": "red"}]})


def test_schema_from_mapping_and_round_trip(tmp_path):
    data = {
        "columns": {
            "animal": {"role": "target", "kind": "categorical"},
            "hair": {"role": "feature", "kind": "boolean"},
        }
    }
    s = DatasetSchema.from_dict(data)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(s.to_dict()))
    assert DatasetSchema.load(path) == s


def test_zoo_row(data_dir):
    s = DatasetSchema.load(data_dir / "zoo.schema.json")
    rows = load_records(data_dir / "zoo.csv", s)
    assert len(rows) == 101 and not rows.errors
    first = rows[0]
    assert first.row == 0
    assert first.post == Event({"animal=aardvark"})
    assert {"hair", "milk", "legs=4", "type=mammal"} <= first.pre.positives
    assert {"feathers", "legs=2", "type=bird"} <= first.pre.negatives
    boolean = sum(1 for c in s.features if c.kind == "boolean")
    assert len(first.pre.labels) == boolean + 6 + 7


def test_breast_cancer_row(data_dir):
    s = DatasetSchema.load(data_dir / "breast-cancer.schema.json")
    rows = load_records(data_dir / "breast-cancer-wisconsin.csv", s)
    assert rows[0].post == Event({"class=benign"})
    assert "clump_thickness=5" in rows[0].pre.positives
    assert len(rows.errors) == 16
    assert all("bare_nuclei" in e.message for e in rows.errors)


def test_empty_file():
    assert len(read_records(io.StringIO(""), schema())) == 0


def test_missing_column_is_schema_error():
    with pytest.raises(SchemaError):
        read_records(io.StringIO("animal,hair\nx,1\n"), schema())


def test_bad_cells_skip_rows():
    text = "animal,hair,legs\nx,1,4\ny,?,2\nz,perhaps,2\nw,0,2\n"
    rows = read_records(io.StringIO(text), schema())
    assert [r.row for r in rows] == [0, 3]
    assert [e.row for e in rows.errors] == [1, 2]


def test_strict_out_of_domain():
    legs = ColumnSpec("legs", "feature", "categorical", domain=("2", "4"))
    cols = (ColumnSpec("animal", "target", "categorical"), legs)
    text = "animal,legs\nx,4\ny,3\n"
    lenient = read_records(io.StringIO(text), DatasetSchema(cols))
    assert len(lenient) == 1 and lenient.errors[0].row == 1
    with pytest.raises(InvalidArgument):
        read_records(io.StringIO(text), DatasetSchema(cols, strict=True))


def test_boolean_target_keeps_polarity():
    cols = (ColumnSpec("sick", "target"), ColumnSpec("fever"))
    rows = read_records(io.StringIO("fever,sick\n1,1\n0,0\n"), DatasetSchema(cols))
    assert rows[0].post == Event({"sick"}) and rows[1].post == Event(set(), {"sick"})


def test_domains_sort_numerically():
    text = "animal,hair,legs\nx,1,10\ny,1,8\n"
    rows = read_records(io.StringIO(text), schema())
    assert [lit.label for lit in rows[0].pre.literals()][1:] == ["legs=10", "legs=8"]
    assert rows[0].pre.negatives == {"legs=8"}


def test_deterministic_loading(data_dir):
    s = DatasetSchema.load(data_dir / "zoo.schema.json")
    a = load_records(data_dir / "zoo.csv", s).transitions()
    b = load_records(data_dir / "zoo.csv", s).transitions()
    assert a == b


def test_conflicts_and_dedupe():
    text = "animal,hair,legs\na,1,4\nb,1,4\nc,0,4\nc,0,4\nd,1,2\n"
    rows = list(read_records(io.StringIO(text), schema()))
    conflicts = find_conflicts(rows)
    assert len(conflicts) == 1
    result = dedupe_conflicts(rows)
    assert (result.conflicts, result.removed) == (1, 2)
    assert [r.row for r in result.records] == [2, 3, 4]
    assert [r.row for r in first_distinct(rows, 10)] == [0, 2, 4]


def test_write_transitions_round_trip(tmp_path, data_dir):
    s = DatasetSchema.load(data_dir / "zoo.schema.json")
    rows = load_records(data_dir / "zoo.csv", s)
    path = tmp_path / "zoo.log"
    write_transitions(rows, path)
    assert load_event_log(path) == rows.transitions()
