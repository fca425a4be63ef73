import json

import pytest
from hypothesis import given, strategies as st

from ibac.errors import LabelError, PolicyError
from ibac.schema import (LabelSet, PolicySchema, expand_subject, is_prime, load_policy, object_label,
                         odd_primes, worked_schema, validate_schema)

LEVELS = ("TopSecret", "Secret", "Protected", "Public")


def test_worked_schema_validates_and_matches_code_tables(worked):
    assert validate_schema(worked).ok
    assert worked.primes() == (3, 5, 7, 11, 13, 17, 19)
    assert [worked.code("expsum", n) for n in worked.labels] == list(range(7))
    assert worked.labels == LEVELS + ("GCHQ", "MI5", "MI6")


def test_demo_policy_loads(demo_schema):
    assert validate_schema(demo_schema).ok
    assert demo_schema.code("primeprod", "Protected") * demo_schema.code("primeprod", "MI6") \
        * demo_schema.code("primeprod", "borders") == 663


def test_duplicate_prime_reported():
    s = PolicySchema.build(LEVELS[:2], ("MI5",), assignments={"primeprod": {"TopSecret": 17, "MI5": 17}})
    assert any(v.startswith("duplicate prime 17") for v in validate_schema(s).violations)


def test_repeated_index_reported():
    s = PolicySchema.build(("A",), ("B",), assignments={"expsum": {"A": 1, "B": 1}})
    assert any(v.startswith("repeated index 1") for v in validate_schema(s).violations)


@pytest.mark.parametrize("assignments, fragment", [
    ({"primeprod": {"A": 9}}, "non-prime entry 9"),
    ({"expsum": {"A": -1}}, "negative exponent index"),
    ({"bitvec": {"A": 0, "B": 2}}, "not contiguous"),
    ({"bitvec": {"A": 0, "B": 0}}, "duplicate bit position"),
    ({"primeprod": {"Z": 23}}, "unknown label Z"),
])
def test_code_violations(assignments, fragment):
    s = PolicySchema.build(("A",), ("B",), assignments=assignments)
    report = validate_schema(s)
    assert not report.ok
    assert any(fragment in v for v in report.violations), report.violations


def test_duplicate_label_and_base():
    s = PolicySchema.build(("A", "B"), ("A",), base=1)
    violations = validate_schema(s).violations
    assert any("duplicate label 'A'" in v for v in violations)
    assert any("base" in v for v in violations)


def test_cyclic_projects_reported():
    s = PolicySchema.build(("A",), projects={"p": ["q"], "q": ["p"]})
    assert "cyclic projects" in validate_schema(s).violations


def test_auto_assignment_skips_given_codes():
    s = PolicySchema.build(("A", "B", "C"), assignments={"primeprod": {"B": 3}, "expsum": {"A": 1}})
    assert s.primes() == (5, 3, 7)
    assert [s.code("expsum", n) for n in s.labels] == [1, 0, 2]
    assert validate_schema(s).ok


def test_expand_subject_worked_example(worked):
    c = expand_subject(worked, LabelSet("Secret", {"MI5", "MI6"}))
    assert c.included_form == {"Secret", "Protected", "Public", "MI5", "MI6"}
    assert expand_subject(worked, LabelSet("Public")).included_form == {"Public"}


def test_expand_subject_project_chain():
    s = PolicySchema.build(("L",), projects={"A": ["B"], "B": ["C"]})
    assert expand_subject(s, LabelSet("L", {"A"})).included_form == {"L", "A", "B", "C"}
    assert expand_subject(s, LabelSet("L", {"B"})).included_form == {"L", "B", "C"}


def test_expand_subject_unknown_label(worked):
    with pytest.raises(LabelError):
        expand_subject(worked, LabelSet("Secret", {"NATO"}))


def test_object_label_rules(worked):
    obj = LabelSet("Secret", {"MI5"})
    assert object_label(worked, obj) is obj
    assert object_label(worked, ["TopSecret"]) == LabelSet("TopSecret")
    with pytest.raises(LabelError):
        object_label(worked, ["Secret", "Protected", "MI5"])
    with pytest.raises(LabelError):
        object_label(worked, ["MI5"])


def test_parse_labels_text(worked):
    assert worked.parse_labels("Secret, MI5;MI6") == LabelSet("Secret", {"MI5", "MI6"})


def test_round_trip_dict_and_id(worked, tmp_path):
    again = PolicySchema.from_dict(json.loads(json.dumps(worked.to_dict())))
    assert again == worked and again.schema_id == worked.schema_id
    path = tmp_path / "p.json"
    path.write_text(json.dumps(worked.to_dict()))
    assert load_policy(path).schema_id == worked.schema_id


def test_load_policy_errors(tmp_path):
    with pytest.raises(PolicyError):
        load_policy(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"levels": ["A"], "assignments": {"primeprod": {"A": 4}}}))
    with pytest.raises(PolicyError, match="non-prime"):
        load_policy(bad)
    bad.write_text(json.dumps({"compartments": []}))
    with pytest.raises(PolicyError, match="malformed"):
        load_policy(bad)


def test_primes():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    gen = odd_primes()
    assert [next(gen) for _ in range(5)] == [3, 5, 7, 11, 13]


@st.composite
def clearances(draw):
    level = draw(st.sampled_from(LEVELS))
    marks = draw(st.sets(st.sampled_from(["GCHQ", "MI5", "MI6"])))
    return LabelSet(level, frozenset(marks))


@given(clearances())
def test_expansion_superset_and_idempotent(label):
    s = worked_schema()
    first = expand_subject(s, label).included_form
    assert first >= label.names()
    again = set()
    for lvl in s.levels:
        if lvl in first:
            again |= expand_subject(s, LabelSet(lvl, label.marks)).included_form
    assert again == first


@given(st.integers(0, 3))
def test_level_expansion_is_suffix_of_chain(i):
    s = worked_schema()
    assert expand_subject(s, LabelSet(LEVELS[i])).included_form == set(LEVELS[i:])


@given(st.lists(st.integers(2, 60), min_size=1, max_size=6))
def test_validation_accepts_iff_primes_injective_and_prime(codes):
    names = [f"x{i}" for i in range(len(codes))]
    s = PolicySchema.build((), names, assignments={"primeprod": dict(zip(names, codes))})
    expected = len(set(codes)) == len(codes) and all(is_prime(c) for c in codes)
    assert validate_schema(s).ok == expected
