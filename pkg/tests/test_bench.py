import math

import pytest

from ibac.bench import DENSE, SPARSE, BenchConfig, BenchError, BenchReport, TokenPair, bench_dominance, verify_pair


def test_pairs_are_consistent_encodings():
    for pair in (DENSE, SPARSE):
        assert len(pair.user_bits) == len(pair.object_bits) == 10
        assert len(pair.user_primes) == 10
        assert all(math.gcd(a, b) == 1 for i, a in enumerate(pair.user_primes) for b in pair.user_primes[i + 1:])
    assert verify_pair(DENSE) is False
    assert verify_pair(SPARSE) is True


def test_mismatched_pair_is_rejected_before_timing():
    # bits say "holds", primes say "fails"
    bad = TokenPair("bad", "11", "01", (2, 3), (5,))
    with pytest.raises(BenchError):
        verify_pair(bad)
    with pytest.raises(BenchError):
        bench_dominance(BenchConfig(counts=(10,), repetitions=1, warmup=0, pairs=(bad,)))


def test_config_validation():
    with pytest.raises(ValueError):
        BenchConfig(counts=(-1,))
    with pytest.raises(ValueError):
        BenchConfig(repetitions=0)


def test_small_run_shape_and_determinism():
    config = BenchConfig(counts=(0, 100, 1000), repetitions=5, warmup=10)
    first, second = bench_dominance(config), bench_dominance(config)
    for report in (first, second):
        assert isinstance(report, BenchReport)
        assert [t.pair.name for t in report.tables] == ["dense", "sparse"]
        for table in report.tables:
            assert [r.count for r in table.rows] == [100, 1000]
            assert all(r.and_seconds > 0 and r.modulo_seconds > 0 for r in table.rows)
    assert [t.holds for t in first.tables] == [t.holds for t in second.tables] == [False, True]
    d = first.to_dict()
    assert d["tables"][0]["rows"][0]["ratio"] == first.tables[0].rows[0].ratio
    text = first.format_plain()
    assert "dominance does not hold" in text and "dominance holds" in text
    assert "% of bit-vector AND operation" in text
