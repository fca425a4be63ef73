"""Bundled end-to-end example: staff table tagged under the mi-demo policy."""

from __future__ import annotations

import json
from pathlib import Path

from ibac.codecs import encode, format_token
from ibac.schema import LabelSet, PolicySchema, expand_subject, load_policy
from ibac.store import RecordStore, explain, filter_records, ingest, new_store, read_rows_csv

DATA = Path(__file__).parent / "data"
DEFAULT_SUBJECT = "MI6 Secretary"


def load_demo(scheme: str = "primeprod") -> tuple[PolicySchema, RecordStore, dict[str, list[str]]]:
    schema = load_policy(DATA / "demo_policy.json")
    store = ingest(new_store(schema, scheme), schema, read_rows_csv(DATA / "demo_records.csv"))
    subjects = json.loads((DATA / "demo_subjects.json").read_text(encoding="utf-8"))
    return schema, store, subjects


def _ordered(schema: PolicySchema, names) -> str:
    return ", ".join(n for n in schema.labels if n in names) or "-"


def run_demo(subject: str = DEFAULT_SUBJECT, full_universe: bool = False, verbose: bool = False) -> str:
    schema, store, subjects = load_demo()
    if full_universe:
        subject = "full universe"
        clearance = expand_subject(schema, LabelSet(schema.levels[0], schema.labels[len(schema.levels):]))
    else:
        clearance = expand_subject(schema, subjects[subject])
    token = encode(schema, clearance, store.scheme)

    lines = [
        f"policy {schema.name} (schema {schema.schema_id}), tags {store.scheme}",
        f"subject {subject}: {_ordered(schema, clearance.labelset.names())}",
        f"  included form: {_ordered(schema, clearance.included_form)}",
        f"  token {format_token(token)}",
        f"full table scan of {len(store.records)} rows, returned rows starred:",
    ]
    allowed = {r.row_id: r for r in filter_records(store, schema, token)}
    for row_id, verdict in explain(store, schema, token):
        if row_id in allowed:
            record = allowed[row_id]
            fields = " | ".join(record.payload.values())
            lines.append(f"* {row_id:>3}  {format_token(record.sec_tag):<10} {fields}")
        elif verbose:
            lines.append(f"  {row_id:>3}  withheld: object carries {verdict.witness}")
    lines.append(f"{len(allowed)} of {len(store.records)} rows returned")
    return "\n".join(lines) + "\n"
