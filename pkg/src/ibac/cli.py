"""``ibac`` command line.

Exit codes: 0 success or allow, 3 deny, 1 usage error, 2 data error.
``--policy`` takes a path, or ``demo`` / ``worked`` for the bundled policies.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ibac import codecs, dominance
from ibac.bench import DEFAULT_COUNTS, BenchConfig, bench_dominance
from ibac.codecs import decode, decode_codes, encode, format_token, parse_token, storage_report
from ibac.demo import DEFAULT_SUBJECT, run_demo
from ibac.errors import IbacError, LabelError
from ibac.hierarchy import flatten, format_inclusion, load_graph
from ibac.process import (ProcessTuple, check_disclosure_in_context, check_write_via_process,
                          load_registry, register_tuple, registry_to_dict, save_registry)
from ibac.schema import (SCHEMES, PolicySchema, demo_policy_path, expand_subject, load_policy,
                         object_label, worked_schema, validate_schema)
from ibac.store import dumps_store, filter_records, ingest, load_store, new_store, read_rows_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DENY = 0, 1, 2, 3

log = logging.getLogger("ibac")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _policy(name: str | None) -> PolicySchema:
    if name is None:
        raise LabelError("this command needs --policy")
    if name == "worked":
        return worked_schema()
    return load_policy(demo_policy_path() if name == "demo" else name)


def _emit(args, payload: dict, plain: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(plain)


def _ordered(schema: PolicySchema, names) -> list[str]:
    return [n for n in schema.labels if n in names]


def cmd_policy_validate(args) -> int:
    path = demo_policy_path() if args.policy == "demo" else Path(args.policy)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise LabelError(f"cannot read policy {path}: {exc}") from exc
    schema = PolicySchema.from_dict(data)
    report = validate_schema(schema)
    plain = "ok" if report.ok else "\n".join(f"violation: {v}" for v in report.violations)
    _emit(args, {"ok": report.ok, "violations": list(report.violations), "schema_id": schema.schema_id}, plain)
    return EXIT_OK if report.ok else EXIT_DATA


def cmd_encode(args) -> int:
    schema = _policy(args.policy)
    if args.as_ == "subject":
        labels = expand_subject(schema, args.labels)
    elif args.as_ == "object":
        labels = object_label(schema, args.labels)
    else:
        labels = schema.parse_labels(args.labels).names()
    token = encode(schema, labels, args.scheme)
    _emit(args, {"token": format_token(token), "value": token.value, "scheme": token.scheme}, format_token(token))
    return EXIT_OK


def cmd_decode(args) -> int:
    schema = _policy(args.policy)
    token = parse_token(args.token, args.scheme, schema.base)
    codes = decode_codes(schema, token)
    names = _ordered(schema, decode(schema, token))
    plain = ", ".join(names) or "(empty)"
    if token.scheme == "expsum":
        plain += f"\nindices {codes}"
    _emit(args, {"labels": names, "codes": codes, "scheme": token.scheme}, plain)
    return EXIT_OK


def cmd_check(args) -> int:
    schema = _policy(args.policy) if args.policy else None
    base = schema.base if schema else None
    subject = parse_token(args.subject, args.scheme, base)
    obj = parse_token(args.object, args.scheme or subject.scheme, subject.base)
    test = args.test
    if test == "dot":
        if schema is None:
            raise LabelError("the dot test needs --policy")
        verdict = dominance.test_complement_dot(subject, obj, schema)
    elif test == "oracle":
        if schema is None:
            raise LabelError("the oracle needs --policy")
        verdict = dominance.oracle_subset(decode(schema, subject), decode(schema, obj), schema)
    else:
        verdict = dominance.native_test(subject, obj, schema)
    plain = "dominates" if verdict.holds else f"denied: object carries {verdict.witness}"
    _emit(args, {"holds": verdict.holds, "witness": verdict.witness}, plain)
    return EXIT_OK if verdict.holds else EXIT_DENY


def cmd_flatten(args) -> int:
    graph = load_graph(args.graph)
    sets = flatten(graph)
    payload = {u: [v for v in graph.vertices if v in sets[u]] for u in graph.vertices}
    _emit(args, payload, "\n".join(format_inclusion(graph, sets)))
    return EXIT_OK


def cmd_tuple(args) -> int:
    schema = _policy(args.policy)
    reg = load_registry(args.registry, schema)
    if args.action == "add":
        tup = ProcessTuple(args.subject, args.process, schema.parse_labels(args.clearance), args.context)
        reg = register_tuple(reg, tup)
        save_registry(reg, args.registry)
        log.info("registered (%s, %s)", args.subject, args.process)
    rows = registry_to_dict(reg)["tuples"]
    plain = "\n".join(
        f"({t['subject']}, {t['process']}) {','.join(_ordered(schema, t['clearance']))}"
        + (f" [context {t['context']}]" if t["context"] else "")
        for t in rows
    ) or "(no tuples)"
    _emit(args, {"tuples": rows}, plain)
    return EXIT_OK


def cmd_decide(args) -> int:
    schema = _policy(args.policy)
    reg = load_registry(args.registry, schema)
    obj = object_label(schema, args.object)
    if args.mode == "write":
        decision = check_write_via_process(reg, schema, args.subject, schema.parse_labels(args.clearance),
                                           args.process, obj)
    else:
        viewer_clearance = schema.parse_labels(args.viewer_clearance) if args.viewer_clearance else None
        decision = check_disclosure_in_context(
            reg, schema, args.discloser, schema.parse_labels(args.discloser_clearance), args.viewer,
            args.context, obj, viewer_clearance=viewer_clearance,
            require_viewer_dominance=args.require_viewer_dominance)
    verdict = "ALLOW" if decision.allow else "DENY"
    _emit(args, {"allow": decision.allow, "registered": decision.registered, "reason": decision.reason},
          f"{verdict}: {decision.reason}")
    return EXIT_OK if decision.allow else EXIT_DENY


def cmd_ingest(args) -> int:
    schema = _policy(args.policy)
    store = ingest(new_store(schema, args.scheme), schema, read_rows_csv(args.data), args.label_column)
    text = dumps_store(store)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(store.records)} records to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_filter(args) -> int:
    store = load_store(args.data)
    schema = _policy(args.policy) if args.policy else None
    base = schema.base if schema else None
    subject = parse_token(args.subject, store.scheme, base)
    rows = list(filter_records(store, schema, subject))
    if args.format == "json":
        print(json.dumps([{"row_id": r.row_id, "sec_tag": format_token(r.sec_tag), "payload": dict(r.payload)}
                          for r in rows], indent=2, sort_keys=True))
    else:
        for r in rows:
            fields = " | ".join(f"{k}={v}" for k, v in r.payload.items())
            print(f"{r.row_id}\t{format_token(r.sec_tag)}\t{fields}")
    return EXIT_OK


def cmd_bench(args) -> int:
    config = BenchConfig(counts=tuple(args.counts), repetitions=args.reps)
    report = bench_dominance(config)
    _emit(args, report.to_dict(), report.format_plain())
    return EXIT_OK


def cmd_storage_report(args) -> int:
    if args.policy:
        schema = _policy(args.policy)
    else:
        schema = PolicySchema.build(levels=(), compartments=("A", "B", "C"), name="abc")
    rows = storage_report(schema)
    lines = [f"{'scheme':<10} {'value':>24} {'bits':>5}"]
    lines += [f"{r.scheme:<10} {r.value:>24} {r.bits:>5}" for r in rows]
    _emit(args, {"rows": [{"scheme": r.scheme, "value": r.value, "bits": r.bits,
                           "mersenne_bound": r.mersenne_bound} for r in rows]}, "\n".join(lines))
    return EXIT_OK


def cmd_demo(args) -> int:
    try:
        sys.stdout.write(run_demo(args.subject, full_universe=args.full, verbose=args.verbose))
    except KeyError:
        raise LabelError(f"no demo subject {args.subject!r}") from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("plain", "json"), default="plain")
    common.add_argument("-v", "--verbose-log", action="store_true", help="log to stderr")

    p = _Parser(prog="ibac", description="Integer-based access control toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pol = sub.add_parser("policy", help="policy file utilities")
    pol_sub = pol.add_subparsers(dest="action", required=True, parser_class=_Parser)
    val = pol_sub.add_parser("validate", parents=[common])
    val.add_argument("--policy", required=True)
    val.set_defaults(func=cmd_policy_validate)

    enc = sub.add_parser("encode", parents=[common], help="encode label names into a token")
    enc.add_argument("--policy", required=True)
    enc.add_argument("--labels", required=True, help='e.g. "Secret,MI5,MI6"')
    enc.add_argument("--scheme", choices=SCHEMES, default="primeprod")
    enc.add_argument("--as", dest="as_", choices=("raw", "subject", "object"), default="raw",
                     help="subject expands to the included form; object requires one level")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", parents=[common], help="decode a token into label names")
    dec.add_argument("--policy", required=True)
    dec.add_argument("--scheme", choices=SCHEMES)
    dec.add_argument("token")
    dec.set_defaults(func=cmd_decode)

    chk = sub.add_parser("check", parents=[common], help="test subject-dominates-object")
    chk.add_argument("--subject", required=True)
    chk.add_argument("--object", required=True)
    chk.add_argument("--scheme", choices=SCHEMES, help="scheme of bare integer tokens")
    chk.add_argument("--policy", help="needed for label witnesses and the dot/oracle tests")
    chk.add_argument("--test", choices=("native", "dot", "oracle"), default="native")
    chk.set_defaults(func=cmd_check)

    fl = sub.add_parser("flatten", parents=[common], help="print inclusion sets of a hierarchy graph")
    fl.add_argument("--graph", required=True)
    fl.set_defaults(func=cmd_flatten)

    tp = sub.add_parser("tuple", help="manage (subject, process) tuples")
    tp_sub = tp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for action in ("add", "list"):
        t = tp_sub.add_parser(action, parents=[common])
        t.add_argument("--policy", required=True)
        t.add_argument("--registry", required=True)
        if action == "add":
            t.add_argument("--subject", required=True)
            t.add_argument("--process", required=True)
            t.add_argument("--clearance", required=True)
            t.add_argument("--context")
        t.set_defaults(func=cmd_tuple)

    dc = sub.add_parser("decide", help="process-constrained decisions")
    dc_sub = dc.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    w = dc_sub.add_parser("write", parents=[common])
    w.add_argument("--subject", required=True)
    w.add_argument("--clearance", required=True)
    w.add_argument("--process", required=True)
    d = dc_sub.add_parser("disclose", parents=[common])
    d.add_argument("--discloser", required=True)
    d.add_argument("--discloser-clearance", required=True)
    d.add_argument("--viewer", required=True)
    d.add_argument("--viewer-clearance")
    d.add_argument("--require-viewer-dominance", action="store_true")
    d.add_argument("--context", required=True)
    for q in (w, d):
        q.add_argument("--policy", required=True)
        q.add_argument("--registry", required=True)
        q.add_argument("--object", required=True)
        q.set_defaults(func=cmd_decide)

    ing = sub.add_parser("ingest", parents=[common], help="tag CSV rows into a record store")
    ing.add_argument("--policy", required=True)
    ing.add_argument("--data", required=True)
    ing.add_argument("--out")
    ing.add_argument("--scheme", choices=SCHEMES, default="primeprod")
    ing.add_argument("--label-column", default="labels")
    ing.set_defaults(func=cmd_ingest)

    flt = sub.add_parser("filter", parents=[common], help="rows of a store the subject may see")
    flt.add_argument("--subject", required=True)
    flt.add_argument("--data", required=True)
    flt.add_argument("--policy")
    flt.set_defaults(func=cmd_filter)

    bn = sub.add_parser("bench", parents=[common], help="bit AND vs prime modulo timings")
    bn.add_argument("--counts", type=lambda s: [int(c) for c in s.split(",") if c],
                    default=list(DEFAULT_COUNTS))
    bn.add_argument("--reps", type=int, default=5)
    bn.set_defaults(func=cmd_bench)

    sr = sub.add_parser("storage-report", parents=[common], help="bit width per scheme")
    sr.add_argument("--policy", help="defaults to the three-label A, B, C universe")
    sr.set_defaults(func=cmd_storage_report)

    dm = sub.add_parser("demo", parents=[common], help="end-to-end filtering example")
    dm.add_argument("--subject", default=DEFAULT_SUBJECT)
    dm.add_argument("--full", action="store_true", help="use the full-universe subject")
    dm.add_argument("--verbose", action="store_true", help="show why each withheld row was withheld")
    dm.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose_log else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (IbacError, ValueError) as exc:
        print(f"ibac: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
