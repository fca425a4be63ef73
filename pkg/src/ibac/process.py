"""Process constraint on top of subject dominance.

An administrator registers (subject, process, clearance) tuples ahead of time.
Access through a process needs the tuple to exist and both the subject and the
tuple clearance to dominate the object. A "process" is anything a subject acts
through: a printer, a briefing room, a service.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from ibac.dominance import DominanceVerdict, dominates
from ibac.errors import IbacError, RegistryError
from ibac.schema import LabelSet, PolicySchema, expand_subject, object_label

_write_lock = threading.Lock()


@dataclass(frozen=True)
class ProcessTuple:
    subject: str
    process: str
    clearance: LabelSet
    # tuples sharing a context must pair subjects and processes one-to-one
    context: str | None = None


@dataclass(frozen=True)
class TupleRegistry:
    tuples: tuple[ProcessTuple, ...] = ()

    def lookup(self, subject: str, process: str) -> ProcessTuple | None:
        for t in self.tuples:
            if t.subject == subject and t.process == process:
                return t
        return None

    def processes(self) -> set[str]:
        return {t.process for t in self.tuples}

    def is_bijective(self, context: str) -> bool:
        members = [t for t in self.tuples if t.context == context]
        f = {t.subject: t.process for t in members}
        g = {t.process: t.subject for t in members}
        return (all(g.get(p) == s for s, p in f.items())
                and all(f.get(s) == p for p, s in g.items()))


def register_tuple(reg: TupleRegistry, tup: ProcessTuple) -> TupleRegistry:
    if reg.lookup(tup.subject, tup.process) is not None:
        raise RegistryError(f"({tup.subject}, {tup.process}) is already registered")
    updated = replace(reg, tuples=reg.tuples + (tup,))
    if tup.context is not None and not updated.is_bijective(tup.context):
        raise RegistryError(
            f"({tup.subject}, {tup.process}) breaks the one-to-one pairing of context {tup.context!r}")
    return updated


def remove_tuple(reg: TupleRegistry, subject: str, process: str) -> TupleRegistry:
    kept = tuple(t for t in reg.tuples if (t.subject, t.process) != (subject, process))
    return replace(reg, tuples=kept)


@dataclass(frozen=True)
class Decision:
    allow: bool
    registered: bool
    subject_dominates: DominanceVerdict | None = None
    tuple_dominates: DominanceVerdict | None = None
    reason: str = ""


def _tuple_verdicts(schema, clearance, tup, obj, scheme):
    direct = dominates(schema, expand_subject(schema, clearance), obj, scheme)
    via = dominates(schema, expand_subject(schema, tup.clearance), obj, scheme)
    return direct, via


def check_write_via_process(reg: TupleRegistry, schema: PolicySchema, subject: str,
                            clearance: LabelSet, process: str, obj,
                            scheme: str = "primeprod") -> Decision:
    """ALLOW iff (subject, process) is registered, the subject dominates the object,
    and the tuple clearance dominates the object."""
    if process not in reg.processes():
        raise RegistryError(f"unknown process {process!r}")
    obj = object_label(schema, obj)
    tup = reg.lookup(subject, process)
    if tup is None:
        return Decision(False, False, reason=f"no ({subject}, {process}) tuple registered")
    direct, via = _tuple_verdicts(schema, clearance, tup, obj, scheme)
    if not direct.holds:
        reason = f"{subject} does not dominate the object (missing {direct.witness})"
    elif not via.holds:
        reason = f"({subject}, {process}) tuple does not dominate the object (missing {via.witness})"
    else:
        reason = f"{subject} and ({subject}, {process}) both dominate the object"
    return Decision(direct.holds and via.holds, True, direct, via, reason)


def check_disclosure_in_context(reg: TupleRegistry, schema: PolicySchema, discloser: str,
                                discloser_clearance: LabelSet, viewer: str, context: str, obj,
                                scheme: str = "primeprod", viewer_clearance: LabelSet | None = None,
                                require_viewer_dominance: bool = False) -> Decision:
    """ALLOW iff both (discloser, context) and (viewer, context) are registered and the
    discloser and its tuple dominate the object.

    The viewer's own clearance is only consulted when ``require_viewer_dominance`` is set.
    """
    if context not in reg.processes():
        raise RegistryError(f"unknown context {context!r}")
    obj = object_label(schema, obj)
    tup = reg.lookup(discloser, context)
    if tup is None or reg.lookup(viewer, context) is None:
        missing = discloser if tup is None else viewer
        return Decision(False, False, reason=f"no ({missing}, {context}) tuple registered")
    direct, via = _tuple_verdicts(schema, discloser_clearance, tup, obj, scheme)
    allow = direct.holds and via.holds
    reason = f"{discloser} may disclose to {viewer} in {context}"
    if not direct.holds:
        reason = f"{discloser} does not dominate the object (missing {direct.witness})"
    elif not via.holds:
        reason = f"({discloser}, {context}) tuple does not dominate the object (missing {via.witness})"
    elif require_viewer_dominance:
        if viewer_clearance is None:
            raise IbacError("viewer clearance required by configuration")
        own = dominates(schema, expand_subject(schema, viewer_clearance), obj, scheme)
        if not own.holds:
            allow, reason = False, f"{viewer} does not dominate the object (missing {own.witness})"
    return Decision(allow, True, direct, via, reason)


def registry_to_dict(reg: TupleRegistry) -> dict:
    return {"tuples": [
        {"subject": t.subject, "process": t.process, "context": t.context,
         "clearance": sorted(t.clearance.names())}
        for t in reg.tuples
    ]}


def load_registry(path: str | Path, schema: PolicySchema) -> TupleRegistry:
    path = Path(path)
    if not path.exists():
        return TupleRegistry()
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        reg = TupleRegistry()
        for item in data.get("tuples", []):
            tup = ProcessTuple(item["subject"], item["process"],
                               schema.parse_labels(item["clearance"]), item.get("context"))
            reg = register_tuple(reg, tup)
        return reg
    except (ValueError, KeyError, TypeError) as exc:
        raise RegistryError(f"cannot read registry {path}: {exc}") from exc


def save_registry(reg: TupleRegistry, path: str | Path) -> None:
    """Write via a temp file and rename, so readers never see a half-written registry."""
    path = Path(path)
    text = json.dumps(registry_to_dict(reg), indent=2, sort_keys=True) + "\n"
    with _write_lock:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
