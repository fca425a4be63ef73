"""Dominance between a subject token and an object token.

Four token tests decide the same relation, and ``oracle_subset`` decides it
directly on label-name sets:

- ``test_bitvec_and``      subject & object == object
- ``test_complement_dot``  complement(subject) . object == 0, on code-weighted vectors
- ``test_expsum_decode``   merge walk over the two descending exponent sequences
- ``test_prime_modulo``    subject % object == 0

A failing verdict carries a witness: a label the object has and the subject lacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from ibac import codecs
from ibac.codecs import Token, encode, ilog
from ibac.errors import TokenError
from ibac.schema import LabelSet, PolicySchema, SubjectClearance, expand_subject


@dataclass(frozen=True)
class DominanceVerdict:
    holds: bool
    witness: str | None = None

    def __post_init__(self):
        if self.holds != (self.witness is None):
            raise ValueError("a verdict holds exactly when it has no witness")


HOLDS = DominanceVerdict(True)


def _subject_names(subject) -> frozenset[str]:
    if isinstance(subject, SubjectClearance):
        return subject.included_form
    if isinstance(subject, LabelSet):
        return subject.names()
    return frozenset(subject)


def _object_names(obj) -> frozenset[str]:
    return obj.names() if isinstance(obj, LabelSet) else frozenset(obj)


def oracle_subset(subject, obj, schema: PolicySchema | None = None) -> DominanceVerdict:
    """Reference decision: the object's labels must all be in the subject's included set.

    ``subject`` is a SubjectClearance or an already-included set of names.
    """
    subj, ob = _subject_names(subject), _object_names(obj)
    if schema is not None:
        schema.check_names(subj | ob)
    missing = ob - subj
    if not missing:
        return HOLDS
    return DominanceVerdict(False, min(missing))


def _same_scheme(subject: Token, obj: Token, scheme: str) -> None:
    if subject.scheme != scheme or obj.scheme != scheme:
        raise TokenError(f"{scheme} test needs two {scheme} tokens, got {subject.scheme}/{obj.scheme}")
    if subject.schema_id and obj.schema_id and subject.schema_id != obj.schema_id:
        raise TokenError("tokens are bound to different schemas")


def _witness(schema: PolicySchema | None, scheme: str, codes: Iterable[int]) -> DominanceVerdict:
    codes = list(codes)
    if schema is None:
        names = [_describe(scheme, c) for c in codes]
    else:
        names = [schema.label_for(scheme, c) or _describe(scheme, c) for c in codes]
    return DominanceVerdict(False, min(names))


def _describe(scheme: str, code: int) -> str:
    return {"bitvec": "bit {}", "expsum": "index {}", "primeprod": "prime {}"}[scheme].format(code)


def test_bitvec_and(subject: Token, obj: Token, schema: PolicySchema | None = None) -> DominanceVerdict:
    _same_scheme(subject, obj, "bitvec")
    if subject.value & obj.value == obj.value:
        return HOLDS
    missing = obj.value & ~subject.value
    return _witness(schema, "bitvec", (i for i in range(missing.bit_length()) if missing >> i & 1))


def _weight(schema: PolicySchema, scheme: str, label: str) -> int:
    code = schema.code(scheme, label)
    if scheme == "bitvec":
        return 1
    if scheme == "expsum":
        return schema.base ** code
    return code


def complement_dot(subject: Token, obj: Token, schema: PolicySchema) -> int:
    """Sum over the universe of complement(subject)[i] * object[i], entries weighted by code."""
    if subject.scheme != obj.scheme:
        raise TokenError(f"scheme mismatch: {subject.scheme}/{obj.scheme}")
    scheme = subject.scheme
    subj, ob = codecs.decode(schema, subject), codecs.decode(schema, obj)
    weights = [_weight(schema, scheme, label) for label in schema.labels]
    complement = [0 if label in subj else w for label, w in zip(schema.labels, weights)]
    object_vec = [w if label in ob else 0 for label, w in zip(schema.labels, weights)]
    return sum(c * o for c, o in zip(complement, object_vec))


def test_complement_dot(subject: Token, obj: Token, schema: PolicySchema) -> DominanceVerdict:
    if complement_dot(subject, obj, schema) == 0:
        return HOLDS
    encroaching = codecs.decode(schema, obj) - codecs.decode(schema, subject)
    return DominanceVerdict(False, min(encroaching))


def test_expsum_decode(subject: Token, obj: Token, base: int | None = None,
                       schema: PolicySchema | None = None) -> DominanceVerdict:
    """Walk both tokens from their highest index down; every object index must meet its twin.

    The outer loop peels subject indices, the inner loop inspects the current
    top object index: a larger subject index is skipped, an equal one consumes
    the object index, a smaller one means the object index is unmatched.
    """
    _same_scheme(subject, obj, "expsum")
    base = base or subject.base
    if subject.base != base or obj.base != base:
        raise TokenError("expsum tokens use different bases")
    a, b = subject.value, obj.value
    last_a = last_b = None
    ib = ilog(b, base) if b >= 1 else None
    while a >= 1:
        ia = ilog(a, base)
        if ia == last_a:
            raise TokenError(f"subject {subject.value} repeats index {ia}")
        last_a = ia
        while b >= 1:
            if ia > ib:
                break
            if ia == ib:
                b -= base ** ib
                last_b = ib
                ib = ilog(b, base) if b >= 1 else None
                if ib is not None and ib == last_b:
                    raise TokenError(f"object {obj.value} repeats index {ib}")
                break
            return _witness(schema, "expsum", [ib])
        a -= base ** ia
    if b >= 1:
        return _witness(schema, "expsum", [ib])
    return HOLDS


def test_prime_modulo(subject: Token, obj: Token, schema: PolicySchema | None = None) -> DominanceVerdict:
    _same_scheme(subject, obj, "primeprod")
    if obj.value == 0:
        raise TokenError("object token 0 is not a prime product")
    if subject.value % obj.value == 0:
        return HOLDS
    if schema is not None:
        absent = [p for p in schema.primes() if subject.value % p]
        return _witness(schema, "primeprod", [p for p in absent if obj.value % p == 0])
    rest = obj.value // math.gcd(subject.value, obj.value)
    p = 2
    while rest % p:
        p += 1
    return _witness(None, "primeprod", [p])


def native_test(subject: Token, obj: Token, schema: PolicySchema | None = None) -> DominanceVerdict:
    """The cheapest test for the tokens' scheme."""
    if subject.scheme == "bitvec":
        return test_bitvec_and(subject, obj, schema)
    if subject.scheme == "expsum":
        return test_expsum_decode(subject, obj, schema=schema)
    return test_prime_modulo(subject, obj, schema)


def dominates(schema: PolicySchema, subject, obj, scheme: str = "primeprod") -> DominanceVerdict:
    """Encode both sides and run the scheme's native test. A LabelSet subject is expanded first."""
    if isinstance(subject, LabelSet):
        subject = expand_subject(schema, subject)
    return native_test(encode(schema, subject, scheme), encode(schema, obj, scheme), schema)


@dataclass
class CrossCheckReport:
    verdict: DominanceVerdict
    results: dict[str, DominanceVerdict] = field(default_factory=dict)
    disagreements: list[str] = field(default_factory=list)

    @property
    def unanimous(self) -> bool:
        return not self.disagreements


def cross_check(schema: PolicySchema, subject, obj) -> CrossCheckReport:
    """Run every token test against the oracle; any disagreement is a defect."""
    if isinstance(subject, LabelSet):
        subject = expand_subject(schema, subject)
    subj, ob = _subject_names(subject), _object_names(obj)
    oracle = oracle_subset(subj, ob, schema)
    tok = {s: (encode(schema, subj, s), encode(schema, ob, s)) for s in ("bitvec", "expsum", "primeprod")}
    results = {
        "oracle": oracle,
        "bitvec_and": test_bitvec_and(*tok["bitvec"], schema),
        "expsum_decode": test_expsum_decode(*tok["expsum"], schema=schema),
        "prime_modulo": test_prime_modulo(*tok["primeprod"], schema),
    }
    for scheme, pair in tok.items():
        results[f"complement_dot/{scheme}"] = test_complement_dot(*pair, schema)
    missing = ob - subj
    report = CrossCheckReport(oracle, results)
    for name, verdict in results.items():
        if verdict.holds != oracle.holds:
            report.disagreements.append(f"{name}: holds={verdict.holds}, oracle says {oracle.holds}")
        elif not verdict.holds and verdict.witness not in missing:
            report.disagreements.append(f"{name}: witness {verdict.witness} is not an encroaching label")
    return report


def mersenne_token(schema: PolicySchema) -> Token:
    """All-ones bit vector over the universe: a forged subject that dominates everything."""
    return Token("bitvec", 2 ** len(schema.labels) - 1)


def prime_forgery_token(schema: PolicySchema) -> Token:
    return Token("primeprod", math.prod(schema.primes()))



# keep pytest from collecting these when a test module imports them
for _fn in (test_bitvec_and, test_complement_dot, test_expsum_decode, test_prime_modulo):
    _fn.__test__ = False
