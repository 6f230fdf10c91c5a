from hypothesis import given
from hypothesis import strategies as st

from rsspline.keyspace import validate_dataset
from rsspline.oracle import OracleIndex, oracle_lookup_eq, oracle_lower_bound


def linear_lower_bound(keys, q):
    return next((i for i, k in enumerate(keys) if k >= q), len(keys))


def test_known_answers(toy):
    keys = toy.keys
    assert oracle_lower_bound(keys, b"defg") == 8
    assert oracle_lower_bound(keys, b"ca") == 4
    assert oracle_lower_bound(keys, b"") == 0
    assert oracle_lower_bound(keys, b"zz") == 9
    assert oracle_lookup_eq(keys, b"cdeg") == 6
    assert oracle_lookup_eq(keys, b"cde") is None


@given(st.lists(st.binary(min_size=1, max_size=6), min_size=1, unique=True).map(sorted),
       st.lists(st.binary(max_size=7), max_size=10))
def test_matches_linear_scan(keys, qs):
    ix = OracleIndex(_clean(keys))
    for q in qs + list(ix.keys):
        lb = linear_lower_bound(ix.keys, q)
        assert ix.lower_bound(q) == lb
        want = lb if lb < len(ix.keys) and ix.keys[lb] == q else None
        assert ix.lookup_eq(q) == want
    assert ix.lower_bound_many(qs) == [ix.lower_bound(q) for q in qs]
    assert ix.lookup_eq_many(qs) == [ix.lookup_eq(q) for q in qs]


def _clean(keys):
    cleaned = sorted({k.replace(b"\x00", b"1").replace(b"\n", b"2") for k in keys})
    return validate_dataset(cleaned)


def test_memory_and_backend(toy):
    ix = OracleIndex(toy)
    assert ix.memory_bytes() == {"total_bytes": 0}
    assert ix.backend == "bisect"
