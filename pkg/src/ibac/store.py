"""Row-level filtering over records tagged with object tokens.

Store file format (UTF-8, one JSON document per line, ``\\n`` terminated,
keys sorted, separators ``,`` and ``:`` with no spaces)::

    {"format":"ibac-store/1","policy":"<name>","schema_id":"<12 hex>","scheme":"primeprod"}
    {"payload":{"name":"Karen",...},"row_id":"1","sec_tag":"p:663"}
    ...

The first line is the header. Every following line is one record; JSON string
escaping keeps embedded newlines and delimiters inside a single line.
``sec_tag`` uses the token syntax of ``ibac.codecs`` (``p:``, ``e<base>:``, ``b:0b``).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from ibac.codecs import Token, decode, encode, format_token, parse_token
from ibac.dominance import DominanceVerdict, native_test
from ibac.errors import IbacError, StoreError, TokenError
from ibac.schema import PolicySchema, object_label

STORE_FORMAT = "ibac-store/1"


@dataclass(frozen=True)
class TaggedRecord:
    row_id: str
    payload: Mapping[str, str] = field(hash=False)
    sec_tag: Token

    def __post_init__(self):
        object.__setattr__(self, "payload", MappingProxyType(dict(self.payload)))


@dataclass(frozen=True)
class RecordStore:
    schema_id: str
    scheme: str = "primeprod"
    records: tuple[TaggedRecord, ...] = ()
    policy: str = ""

    def row_ids(self) -> list[str]:
        return [r.row_id for r in self.records]


def new_store(schema: PolicySchema, scheme: str = "primeprod") -> RecordStore:
    return RecordStore(schema.schema_id, scheme, (), schema.name)


def _bound(store: RecordStore, schema: PolicySchema) -> None:
    if store.schema_id != schema.schema_id:
        raise StoreError(f"store is bound to schema {store.schema_id}, policy is {schema.schema_id}")


def tag_for(schema: PolicySchema, labels, scheme: str = "primeprod") -> Token:
    return encode(schema, object_label(schema, labels), scheme)


def ingest(store: RecordStore, schema: PolicySchema, rows: Iterable[Mapping[str, str]],
           label_column: str = "labels") -> RecordStore:
    """Tag rows at insert time. Each row names its object labels in ``label_column``."""
    _bound(store, schema)
    records = list(store.records)
    ids = set(store.row_ids())
    for n, row in enumerate(rows, start=len(records) + 1):
        row = dict(row)
        if label_column not in row:
            raise StoreError(f"row {n} has no {label_column!r} column")
        labels = row.pop(label_column)
        row_id = str(row.pop("row_id", None) or n)
        if row_id in ids:
            raise StoreError(f"duplicate row id {row_id!r}")
        try:
            tag = tag_for(schema, labels, store.scheme)
        except IbacError as exc:
            raise StoreError(f"row {row_id}: {exc}") from exc
        ids.add(row_id)
        records.append(TaggedRecord(row_id, row, tag))
    return replace(store, records=tuple(records))


def _check_subject(store: RecordStore, schema: PolicySchema | None, subject: Token) -> None:
    if schema is not None:
        _bound(store, schema)
    if subject.scheme != store.scheme:
        raise TokenError(f"subject token is {subject.scheme}, store tags are {store.scheme}")
    if subject.schema_id is not None and subject.schema_id != store.schema_id:
        raise StoreError("subject token is bound to a different schema")


def filter_records(store: RecordStore, schema: PolicySchema | None, subject: Token) -> Iterator[TaggedRecord]:
    """Full scan in store order; only rows whose tag the subject dominates come out.

    ``schema`` may be None when the caller only holds the store file.
    """
    _check_subject(store, schema, subject)
    for record in store.records:
        if native_test(subject, record.sec_tag).holds:
            yield record


def explain(store: RecordStore, schema: PolicySchema, subject: Token) -> list[tuple[str, DominanceVerdict]]:
    """Per-row verdicts with witnesses. Carries row ids only, never payloads."""
    _check_subject(store, schema, subject)
    return [(r.row_id, native_test(subject, r.sec_tag, schema)) for r in store.records]


def retag(store: RecordStore, schema: PolicySchema, row_id: str, labels) -> RecordStore:
    _bound(store, schema)
    records = list(store.records)
    for i, record in enumerate(records):
        if record.row_id == row_id:
            records[i] = replace(record, sec_tag=tag_for(schema, labels, store.scheme))
            return replace(store, records=tuple(records))
    raise StoreError(f"unknown row {row_id!r}")


def record_labels(schema: PolicySchema, record: TaggedRecord) -> frozenset[str]:
    return decode(schema, record.sec_tag)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def dumps_store(store: RecordStore) -> str:
    lines = [_dumps({"format": STORE_FORMAT, "policy": store.policy,
                     "schema_id": store.schema_id, "scheme": store.scheme})]
    for r in store.records:
        lines.append(_dumps({"row_id": r.row_id, "sec_tag": format_token(r.sec_tag),
                             "payload": dict(r.payload)}))
    return "\n".join(lines) + "\n"


def loads_store(text: str) -> RecordStore:
    lines = text.splitlines()
    try:
        header = json.loads(lines[0])
        if header.get("format") != STORE_FORMAT:
            raise StoreError(f"not an {STORE_FORMAT} file")
        schema_id, scheme = header["schema_id"], header["scheme"]
        records = []
        for line in lines[1:]:
            if not line.strip():
                continue
            item = json.loads(line)
            token = replace(parse_token(item["sec_tag"]), schema_id=schema_id)
            if token.scheme != scheme:
                raise StoreError(f"row {item['row_id']} is tagged {token.scheme}, store is {scheme}")
            records.append(TaggedRecord(str(item["row_id"]), item.get("payload", {}), token))
    except (IndexError, ValueError, KeyError, TypeError, AttributeError) as exc:
        raise StoreError(f"malformed store: {exc}") from exc
    return RecordStore(schema_id, scheme, tuple(records), header.get("policy", ""))


def save_store(store: RecordStore, path: str | Path) -> None:
    Path(path).write_text(dumps_store(store), encoding="utf-8")


def load_store(path: str | Path) -> RecordStore:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"cannot read store {path}: {exc}") from exc
    return loads_store(text)


def read_rows_csv(path: str | Path) -> list[dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc}") from exc
