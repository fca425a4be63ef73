"""Label sets <-> integer security tokens.

Three schemes share one universe of labels:

``bitvec``     each label owns a bit position; the token is the OR of its bits.
``expsum``     each label owns an exponent index k; the token is the sum of base**k.
``primeprod``  each label owns a prime; the token is the product of its primes.

Tokens serialize as ``b:0b0110110``, ``e3:1011`` (base after the ``e``) and
``p:124355``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from ibac.errors import LabelError, TokenError
from ibac.schema import SCHEMES, LabelSet, PolicySchema, SubjectClearance, is_prime

PREFIX = {"bitvec": "b", "expsum": "e", "primeprod": "p"}
_TOKEN_RE = re.compile(r"^(?:(b|p)|e(\d+)):(.+)$")


@dataclass(frozen=True)
class Token:
    scheme: str
    value: int
    base: int | None = None
    schema_id: str | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise TokenError(f"unknown scheme {self.scheme!r}")
        if self.value < 0:
            raise TokenError("token value must be non-negative")
        if self.scheme == "expsum" and self.base is None:
            raise TokenError("expsum token needs a base")

    def __str__(self):
        return format_token(self)


@dataclass(frozen=True)
class ObfuscatedToken:
    scheme: str
    value: int
    transform: str


def format_token(token: Token) -> str:
    if token.scheme == "bitvec":
        return f"b:{bin(token.value)}"
    if token.scheme == "expsum":
        return f"e{token.base}:{token.value}"
    return f"p:{token.value}"


def parse_token(text: str, scheme: str | None = None, base: int | None = None) -> Token:
    """Parse the prefixed form; a bare integer is accepted when ``scheme`` is given."""
    text = text.strip()
    m = _TOKEN_RE.match(text)
    if m:
        letter, ebase, body = m.groups()
        parsed = {"b": "bitvec", "p": "primeprod"}.get(letter, "expsum")
        if scheme is not None and scheme != parsed:
            raise TokenError(f"token {text!r} is {parsed}, expected {scheme}")
        scheme = parsed
        if ebase is not None:
            base = int(ebase)
    elif scheme is None:
        raise TokenError(f"token {text!r} has no scheme prefix")
    else:
        body = text
    if scheme == "expsum" and base is None:
        raise TokenError("expsum token needs a base")
    try:
        value = int(body, 0) if body.startswith(("0b", "0x", "0o")) else int(body)
    except ValueError:
        raise TokenError(f"bad token value {body!r}") from None
    return Token(scheme, value, base if scheme == "expsum" else None)


def ilog(x: int, base: int) -> int:
    """floor(log_base(x)) in exact integer arithmetic, for x >= 1."""
    if x < 1:
        raise ValueError("ilog needs x >= 1")
    if base == 2:
        return x.bit_length() - 1
    bl = base.bit_length()
    lo = (x.bit_length() - 1) // bl          # base**lo < 2**(bl*lo) <= x
    hi = x.bit_length() // (bl - 1) + 1      # base**hi >= 2**((bl-1)*hi) > x
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if base ** mid <= x:
            lo = mid
        else:
            hi = mid
    return lo


def iter_indices(value: int, base: int) -> Iterator[int]:
    """Peel base**floor(log_base(x)) off x until it drops below 1; yields descending indices."""
    x = value
    while x >= 1:
        index = ilog(x, base)
        yield index
        x -= base ** index


def deconstruct(value: int, base: int) -> list[int]:
    return list(iter_indices(value, base))


def _names(labels) -> frozenset[str]:
    if isinstance(labels, SubjectClearance):
        return labels.included_form
    if isinstance(labels, LabelSet):
        return labels.names()
    return frozenset(labels)


def _check(schema: PolicySchema, token: Token, scheme: str | None = None) -> None:
    if scheme is not None and token.scheme != scheme:
        raise TokenError(f"expected a {scheme} token, got {token.scheme}")
    if token.schema_id is not None and token.schema_id != schema.schema_id:
        raise TokenError(f"token bound to schema {token.schema_id}, not {schema.schema_id}")
    if token.scheme == "expsum" and token.base != schema.base:
        raise TokenError(f"token base {token.base} does not match schema base {schema.base}")


def encode(schema: PolicySchema, labels: LabelSet | SubjectClearance | Iterable[str],
           scheme: str = "primeprod") -> Token:
    """Aggregate a label set into one integer. Subject clearances encode their included form."""
    names = schema.check_names(_names(labels))
    codes = [schema.code(scheme, n) for n in names]
    if scheme == "bitvec":
        value = sum(1 << c for c in codes)
        return Token(scheme, value, schema_id=schema.schema_id)
    if scheme == "expsum":
        value = sum(schema.base ** c for c in codes)
        return Token(scheme, value, schema.base, schema.schema_id)
    if scheme == "primeprod":
        return Token(scheme, math.prod(codes), schema_id=schema.schema_id)
    raise TokenError(f"unknown scheme {scheme!r}")


def decode_codes(schema: PolicySchema, token: Token) -> list[int]:
    """The per-label codes present in a token (indices, primes or bit positions)."""
    _check(schema, token)
    value = token.value
    if token.scheme == "expsum":
        codes = []
        for index in iter_indices(value, token.base):
            if codes and index == codes[-1]:
                raise TokenError(f"{value} repeats index {index}: not generated from distinct labels")
            codes.append(index)
    elif token.scheme == "primeprod":
        if value == 0:
            raise TokenError("prime-product token cannot be 0")
        codes = []
        for p in sorted(schema.primes()):
            if value % p == 0:
                value //= p
                if value % p == 0:
                    raise TokenError(f"{token.value} is not squarefree in {p}")
                codes.append(p)
        if value != 1:
            raise TokenError(f"{token.value} leaves residue {value} after the schema primes")
    else:
        codes = [i for i in range(value.bit_length()) if value >> i & 1]
    unknown = [c for c in codes if schema.label_for(token.scheme, c) is None]
    if unknown:
        raise TokenError(f"{token.value} carries code(s) {unknown} outside the schema")
    return codes


def decode(schema: PolicySchema, token: Token) -> frozenset[str]:
    return frozenset(schema.label_for(token.scheme, c) for c in decode_codes(schema, token))


def _label_code(schema, token, label):
    _check(schema, token)
    if label not in schema.labels:
        raise LabelError(f"unknown label {label!r}")
    return schema.code(token.scheme, label)


def _contains(token: Token, code: int) -> bool:
    if token.scheme == "bitvec":
        return bool(token.value >> code & 1)
    if token.scheme == "primeprod":
        return token.value % code == 0
    # base-b digit at position code is 1
    return token.value // token.base ** code % token.base == 1


def add_label(schema: PolicySchema, token: Token, label: str) -> Token:
    code = _label_code(schema, token, label)
    if _contains(token, code):
        raise LabelError(f"{label} already present in {token}")
    if token.scheme == "bitvec":
        value = token.value | 1 << code
    elif token.scheme == "expsum":
        value = token.value + token.base ** code
    else:
        value = token.value * code
    return Token(token.scheme, value, token.base, token.schema_id)


def remove_label(schema: PolicySchema, token: Token, label: str) -> Token:
    code = _label_code(schema, token, label)
    if not _contains(token, code):
        raise LabelError(f"{label} absent from {token}")
    if token.scheme == "bitvec":
        value = token.value & ~(1 << code)
    elif token.scheme == "expsum":
        value = token.value - token.base ** code
    else:
        value = token.value // code
    return Token(token.scheme, value, token.base, token.schema_id)


TRANSFORMS = ("subtract-prime", "divide-prime", "hidden-base")


def obfuscate(schema: PolicySchema, token: Token, key: int,
              transform: str = "subtract-prime") -> ObfuscatedToken:
    """Shared-key transform for tokens in transit. Not encryption."""
    _check(schema, token)
    if transform == "hidden-base":
        if token.scheme != "expsum":
            raise TokenError("hidden-base applies to expsum tokens only")
        if key != token.base:
            raise TokenError("hidden-base key must be the token's base")
        return ObfuscatedToken(token.scheme, token.value, transform)
    if transform not in TRANSFORMS:
        raise TokenError(f"unknown transform {transform!r}")
    _check_prime_key(schema, key)
    value = token.value - key if transform == "subtract-prime" else token.value * key
    return ObfuscatedToken(token.scheme, value, transform)


def deobfuscate(schema: PolicySchema, obf: ObfuscatedToken, key: int) -> Token:
    if obf.transform == "hidden-base":
        return Token(obf.scheme, obf.value, key, schema.schema_id)
    _check_prime_key(schema, key)
    if obf.transform == "subtract-prime":
        value = obf.value + key
    elif obf.transform == "divide-prime":
        if obf.value % key:
            raise TokenError(f"{obf.value} is not divisible by the key")
        value = obf.value // key
    else:
        raise TokenError(f"unknown transform {obf.transform!r}")
    base = schema.base if obf.scheme == "expsum" else None
    return Token(obf.scheme, value, base, schema.schema_id)


def _check_prime_key(schema: PolicySchema, key: int) -> None:
    if not is_prime(key):
        raise TokenError(f"key {key} is not prime")
    if key in schema.primes():
        raise TokenError(f"key {key} in schema")


@dataclass(frozen=True)
class StorageRow:
    scheme: str
    value: int
    bits: int

    @property
    def mersenne_bound(self) -> int:
        return 2 ** self.bits - 1


def storage_report(schema: PolicySchema) -> list[StorageRow]:
    """Bit width of the full-universe token under each scheme."""
    rows = []
    for scheme in SCHEMES:
        value = encode(schema, schema.labels, scheme).value
        rows.append(StorageRow(scheme, value, value.bit_length()))
    return rows
