"""Security universe of discourse: levels, compartments, projects and their integer codes.

A policy document is a JSON tree::

    {
      "name": "mi-demo",
      "levels": ["TopSecret", "Secret", "Protected", "Public"],   # highest first
      "compartments": ["GCHQ", "MI5", "MI6"],
      "projects": {"operations": ["borders"], "borders": []},      # parent -> included children
      "base": 3,
      "assignments": {"primeprod": {"Secret": 5}, "expsum": {}, "bitvec": {}}
    }

Codes left out of ``assignments`` are filled in deterministically: odd primes
from 3 upward, exponent indices and bit positions from 0 upward, in universe
order (levels, then compartments, then projects).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from ibac.errors import LabelError, PolicyError

SCHEMES = ("bitvec", "expsum", "primeprod")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def odd_primes() -> Iterator[int]:
    return (n for n in itertools.count(3, 2) if is_prime(n))


@dataclass(frozen=True)
class LabelSet:
    """One optional level plus a set of compartment/project marks."""

    level: str | None = None
    marks: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "marks", frozenset(self.marks))

    def names(self) -> frozenset[str]:
        if self.level is None:
            return self.marks
        return self.marks | {self.level}

    def __str__(self):
        marks = ",".join(sorted(self.marks))
        return f"({self.level or '-'},{{{marks}}})"


@dataclass(frozen=True)
class SubjectClearance:
    labelset: LabelSet
    included_form: frozenset[str]


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class PolicySchema:
    levels: tuple[str, ...]
    compartments: tuple[str, ...] = ()
    projects: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    assignments: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    base: int = 3
    name: str = "policy"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "compartments", tuple(self.compartments))
        projects = {p: tuple(children) for p, children in self.projects.items()}
        object.__setattr__(self, "projects", MappingProxyType(projects))
        assignments = {s: MappingProxyType(dict(m)) for s, m in self.assignments.items()}
        object.__setattr__(self, "assignments", MappingProxyType(assignments))

    def __hash__(self):
        return hash(self.schema_id)

    @classmethod
    def build(cls, levels, compartments=(), projects=None, assignments=None, base=3, name="policy"):
        """Construct a schema, auto-assigning any codes the caller left out."""
        projects = dict(projects or {})
        for children in list(projects.values()):
            for child in children:
                projects.setdefault(child, ())
        universe = list(levels) + list(compartments) + list(projects)
        given = {s: dict((assignments or {}).get(s, {})) for s in SCHEMES}
        filled = {}
        for scheme in SCHEMES:
            codes = given[scheme]
            used = set(codes.values())
            if scheme == "primeprod":
                fresh = (p for p in odd_primes() if p not in used)
            else:
                fresh = (i for i in itertools.count() if i not in used)
            filled[scheme] = {label: codes[label] if label in codes else next(fresh) for label in universe}
            # keep stray entries so validation can report them
            filled[scheme].update({k: v for k, v in codes.items() if k not in filled[scheme]})
        return cls(tuple(levels), tuple(compartments), projects, filled, base, name)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolicySchema":
        try:
            return cls.build(
                levels=data["levels"],
                compartments=data.get("compartments", ()),
                projects=data.get("projects") or {},
                assignments=data.get("assignments") or {},
                base=data.get("base", 3),
                name=data.get("name", "policy"),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise PolicyError(f"malformed policy document: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "levels": list(self.levels),
            "compartments": list(self.compartments),
            "projects": {p: list(c) for p, c in self.projects.items()},
            "base": self.base,
            "assignments": {s: dict(m) for s, m in self.assignments.items()},
        }

    @cached_property
    def labels(self) -> tuple[str, ...]:
        """Every label name in universe order."""
        return self.levels + self.compartments + tuple(self.projects)

    @cached_property
    def schema_id(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @cached_property
    def _reverse(self) -> dict[str, dict[int, str]]:
        return {s: {code: label for label, code in m.items()} for s, m in self.assignments.items()}

    def code(self, scheme: str, label: str) -> int:
        try:
            return self.assignments[scheme][label]
        except KeyError:
            if label not in self.labels:
                raise LabelError(f"unknown label {label!r}") from None
            raise PolicyError(f"no {scheme} code for {label!r}") from None

    def label_for(self, scheme: str, code: int) -> str | None:
        return self._reverse.get(scheme, {}).get(code)

    def primes(self) -> tuple[int, ...]:
        return tuple(self.code("primeprod", label) for label in self.labels)

    def check_names(self, names: Iterable[str]) -> frozenset[str]:
        names = frozenset(names)
        unknown = sorted(names - set(self.labels))
        if unknown:
            raise LabelError(f"unknown label(s): {', '.join(unknown)}")
        return names

    def parse_labels(self, names: Iterable[str] | str) -> LabelSet:
        """Split label names into a LabelSet; accepts "Secret,MI5,MI6" text too."""
        if isinstance(names, str):
            names = [n for n in re.split(r"[\s,;+]+", names) if n]
        names = self.check_names(names)
        levels = [n for n in self.levels if n in names]
        if len(levels) > 1:
            raise LabelError(f"label carries {len(levels)} levels: {', '.join(levels)}")
        return LabelSet(levels[0] if levels else None, names - set(levels))

    def project_closure(self, marks: Iterable[str]) -> frozenset[str]:
        seen: set[str] = set()
        stack = [m for m in marks if m in self.projects]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self.projects.get(node, ()))
        return frozenset(seen)


LabelLike = Union[LabelSet, Iterable[str], str]


def _as_labelset(schema: PolicySchema, label: LabelLike) -> LabelSet:
    if isinstance(label, LabelSet):
        schema.check_names(label.names())
        if label.level is not None and label.level not in schema.levels:
            raise LabelError(f"{label.level!r} is not a level")
        return label
    return schema.parse_labels(label)


def validate_schema(schema: PolicySchema) -> ValidationReport:
    violations: list[str] = []
    universe = list(schema.labels)

    seen: dict[str, int] = {}
    for name in list(schema.levels) + list(schema.compartments) + list(schema.projects):
        seen[name] = seen.get(name, 0) + 1
    violations += [f"duplicate label {n!r}" for n, count in seen.items() if count > 1]

    if not isinstance(schema.base, int) or schema.base < 2:
        violations.append(f"base must be an integer >= 2, got {schema.base!r}")

    for scheme in SCHEMES:
        codes = schema.assignments.get(scheme, {})
        missing = [n for n in universe if n not in codes]
        if missing:
            violations.append(f"{scheme}: missing code for {', '.join(missing)}")
        stray = sorted(set(codes) - set(universe))
        if stray:
            violations.append(f"{scheme}: code for unknown label {', '.join(stray)}")
        by_code: dict[int, list[str]] = {}
        for label, code in codes.items():
            if not isinstance(code, int) or isinstance(code, bool):
                violations.append(f"{scheme}: non-integer code {code!r} for {label}")
                continue
            by_code.setdefault(code, []).append(label)
        for code, labels in sorted(by_code.items()):
            if len(labels) > 1:
                kind = {"primeprod": "duplicate prime", "expsum": "repeated index",
                        "bitvec": "duplicate bit position"}[scheme]
                violations.append(f"{kind} {code}: {', '.join(sorted(labels))}")
        ints = [c for c in by_code]
        if scheme == "primeprod":
            violations += [f"non-prime entry {c} for {', '.join(by_code[c])}" for c in sorted(ints) if not is_prime(c)]
        elif scheme == "expsum":
            violations += [f"negative exponent index {c}" for c in sorted(ints) if c < 0]
        elif ints and sorted(ints) != list(range(len(ints))):
            violations.append("bitvec: bit positions are not contiguous from 0")

    for parent, children in schema.projects.items():
        for child in children:
            if child not in schema.projects:
                violations.append(f"project edge {parent} -> {child}: unknown project")
    if _has_cycle(schema.projects):
        violations.append("cyclic projects")
    return ValidationReport(tuple(violations))


def _has_cycle(graph: Mapping[str, Iterable[str]]) -> bool:
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(node) -> bool:
        state[node] = 1
        for child in graph.get(node, ()):
            mark = state.get(child)
            if mark == 1 or (mark is None and visit(child)):
                return True
        state[node] = 2
        return False

    return any(state.get(n) is None and visit(n) for n in graph)


def expand_subject(schema: PolicySchema, label: LabelLike) -> SubjectClearance:
    """Downward-close a subject label: lower levels and included projects are added."""
    labelset = _as_labelset(schema, label)
    included = set(labelset.marks)
    if labelset.level is not None:
        included.update(schema.levels[schema.levels.index(labelset.level):])
    included |= schema.project_closure(labelset.marks)
    return SubjectClearance(labelset, frozenset(included))


def object_label(schema: PolicySchema, label: LabelLike) -> LabelSet:
    """Objects are never expanded, but must carry exactly one level."""
    labelset = _as_labelset(schema, label)
    if labelset.level is None:
        raise LabelError("object label carries no level")
    return labelset


def load_policy(path: str | Path) -> PolicySchema:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PolicyError(f"cannot read policy {path}: {exc}") from exc
    schema = PolicySchema.from_dict(data)
    report = validate_schema(schema)
    if not report.ok:
        raise PolicyError(f"invalid policy {path}: " + "; ".join(report.violations))
    return schema


def demo_policy_path() -> Path:
    return Path(__file__).parent / "data" / "demo_policy.json"


def worked_schema() -> PolicySchema:
    """The seven-label MI5/MI6 universe used for the worked examples."""
    return PolicySchema.build(
        levels=("TopSecret", "Secret", "Protected", "Public"),
        compartments=("GCHQ", "MI5", "MI6"),
        name="mi-worked-example",
    )
