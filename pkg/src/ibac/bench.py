"""Timing harness: bit-vector AND against prime-product modulo on fixed 10-label token pairs."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from time import perf_counter

from ibac.dominance import oracle_subset
from ibac.errors import IbacError

DEFAULT_COUNTS = (1_000, 10_000, 100_000, 1_000_000)
USER_PRIMES = (2, 5, 7, 11, 13, 17, 19, 23, 31, 61)


@dataclass(frozen=True)
class TokenPair:
    name: str
    user_bits: str
    object_bits: str
    user_primes: tuple[int, ...]
    object_primes: tuple[int, ...]

    @property
    def bit_values(self) -> tuple[int, int]:
        return int(self.user_bits, 2), int(self.object_bits, 2)

    @property
    def prime_values(self) -> tuple[int, int]:
        return math.prod(self.user_primes), math.prod(self.object_primes)


DENSE = TokenPair("dense", "1011111111", "1110111111", USER_PRIMES,
                  (2, 3, 5, 13, 17, 19, 23, 31, 37, 61))
SPARSE = TokenPair("sparse", "1011111111", "1000000001", USER_PRIMES, (2, 61))


@dataclass(frozen=True)
class BenchConfig:
    counts: tuple[int, ...] = DEFAULT_COUNTS
    repetitions: int = 5
    warmup: int = 10_000
    pairs: tuple[TokenPair, ...] = (DENSE, SPARSE)

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("read counts must be non-negative")
        if self.repetitions < 1:
            raise ValueError("need at least one repetition")


@dataclass(frozen=True)
class BenchRow:
    count: int
    and_seconds: float
    modulo_seconds: float

    @property
    def ratio(self) -> float:
        """Median modulo time over median AND time."""
        return self.modulo_seconds / self.and_seconds if self.and_seconds else float("nan")


@dataclass
class BenchTable:
    pair: TokenPair
    holds: bool
    rows: list[BenchRow] = field(default_factory=list)


@dataclass
class BenchReport:
    tables: list[BenchTable] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"tables": [
            {"pair": t.pair.name, "dominance_holds": t.holds,
             "rows": [{"reads": r.count, "and_seconds": r.and_seconds,
                       "modulo_seconds": r.modulo_seconds, "ratio": r.ratio} for r in t.rows]}
            for t in self.tables
        ]}

    def format_plain(self) -> str:
        out = []
        for t in self.tables:
            verdict = "holds" if t.holds else "does not hold"
            out.append(f"{t.pair.name} pair: dominance {verdict}")
            out.append(f"  user bits {t.pair.user_bits}  object bits {t.pair.object_bits}")
            out.append(f"  user primes {'*'.join(map(str, t.pair.user_primes))}"
                       f"  object primes {'*'.join(map(str, t.pair.object_primes))}")
            out.append(f"  {'reads':>10}  {'10 bits AND (s)':>16}  {'10 primes modulo (s)':>21}")
            for r in t.rows:
                out.append(f"  {r.count:>10,}  {r.and_seconds:>16.9f}  {r.modulo_seconds:>21.9f}")
            out.append(f"  {'reads':>10}  modulo time / bit AND time")
            for r in t.rows:
                out.append(f"  {r.count:>10,}  modulo time, {100 * r.ratio:.3f} % of bit-vector AND operation")
            out.append("")
        return "\n".join(out)


class BenchError(IbacError):
    pass


def _time_and(user: int, obj: int, n: int) -> float:
    start = perf_counter()
    for _ in range(n):
        (user & obj) == obj
    return perf_counter() - start


def _time_modulo(user: int, obj: int, n: int) -> float:
    start = perf_counter()
    for _ in range(n):
        (user % obj) == 0
    return perf_counter() - start


def verify_pair(pair: TokenPair) -> bool:
    """Check both encodings against the set oracle before anything is timed."""
    bit_user, bit_obj = pair.bit_values
    prime_user, prime_obj = pair.prime_values
    width = len(pair.user_bits)
    bit_oracle = oracle_subset({i for i in range(width) if bit_user >> i & 1},
                               {i for i in range(width) if bit_obj >> i & 1}).holds
    prime_oracle = oracle_subset(set(pair.user_primes), set(pair.object_primes)).holds
    by_and = (bit_user & bit_obj) == bit_obj
    by_mod = prime_user % prime_obj == 0
    if by_and != bit_oracle or by_mod != prime_oracle:
        raise BenchError(f"{pair.name}: timed test disagrees with the set oracle")
    if by_and != by_mod:
        raise BenchError(f"{pair.name}: bit and prime encodings describe different relations")
    return by_and


def bench_dominance(config: BenchConfig = BenchConfig()) -> BenchReport:
    report = BenchReport()
    for pair in config.pairs:
        holds = verify_pair(pair)
        bit_user, bit_obj = pair.bit_values
        prime_user, prime_obj = pair.prime_values
        _time_and(bit_user, bit_obj, config.warmup)
        _time_modulo(prime_user, prime_obj, config.warmup)
        table = BenchTable(pair, holds)
        for count in config.counts:
            if count == 0:
                continue
            and_times, mod_times = [], []
            for _ in range(config.repetitions):
                and_times.append(_time_and(bit_user, bit_obj, count))
                mod_times.append(_time_modulo(prime_user, prime_obj, count))
            table.rows.append(BenchRow(count, statistics.median(and_times), statistics.median(mod_times)))
        report.tables.append(table)
    return report
