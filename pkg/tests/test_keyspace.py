import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsspline import kernels
from rsspline.keyspace import (
    DuplicateKey,
    EmptyDataset,
    ForbiddenByte,
    NotSorted,
    chunk_exhausted,
    extract_chunk,
    read_dataset,
    split_records,
    validate_dataset,
    write_dataset,
)

nul_free = st.binary(max_size=40).map(lambda b: b.replace(b"\x00", b"\x01"))


def test_validate_sorted_unique():
    assert validate_dataset([b"a", b"b", b"c"]).count == 3


def test_validate_reports_first_violation():
    with pytest.raises(NotSorted) as exc:
        validate_dataset([b"b", b"a"])
    assert exc.value.index == 1
    with pytest.raises(DuplicateKey) as exc:
        validate_dataset([b"a", b"b", b"b"])
    assert exc.value.index == 2
    with pytest.raises(ForbiddenByte) as exc:
        validate_dataset([b"a\x00b"])
    assert (exc.value.index, exc.value.offset) == (0, 1)
    with pytest.raises(ForbiddenByte) as exc:
        validate_dataset([b"a", b"xy\nz"])
    assert (exc.value.index, exc.value.offset) == (1, 2)


def test_empty_key_only_first():
    assert len(validate_dataset([b"", b"a"])) == 2
    with pytest.raises(NotSorted):
        validate_dataset([b"a", b""])


@pytest.mark.parametrize("s, depth, k, want", [
    (b"cdeg", 0, 2, 0x6364),
    (b"cdeg", 1, 2, 0x6567),
    (b"ab", 1, 2, 0x0000),
    (b"abc", 1, 2, 0x6300),
    (b"", 0, 16, 0),
    (b"\xff" * 16, 0, 16, (1 << 128) - 1),
])
def test_extract_chunk(s, depth, k, want, backend):
    assert extract_chunk(s, depth, k) == want
    assert kernels.get(backend).extract_chunk(s, depth, k) == want


@pytest.mark.parametrize("s, depth, k, want", [
    (b"ab", 1, 2, True),
    (b"abc", 1, 2, False),
    (b"", 0, 16, True),
])
def test_chunk_exhausted(s, depth, k, want):
    assert chunk_exhausted(s, depth, k) is want


@given(nul_free, nul_free, st.sampled_from([1, 2, 8, 16]))
def test_chunks_preserve_order(a, b, k):
    if a == b:
        return
    if a > b:
        a, b = b, a
    depth = 0
    while extract_chunk(a, depth, k) == extract_chunk(b, depth, k):
        depth += 1
        assert depth <= max(len(a), len(b)) // k + 1
    assert extract_chunk(a, depth, k) < extract_chunk(b, depth, k)


@given(st.binary(max_size=40), st.integers(0, 4), st.sampled_from([1, 2, 8, 16]))
def test_backends_extract_identically(s, depth, k):
    values = {kernels.get(name).extract_chunk(s, depth, k) for name in kernels.available()}
    assert values == {extract_chunk(s, depth, k)}


def test_split_records_trailing_newline_optional():
    assert split_records(b"a\nb") == split_records(b"a\nb\n") == [b"a", b"b"]
    assert split_records(b"") == []


def test_file_roundtrip_and_sort_dedup(tmp_path):
    path = tmp_path / "keys.txt"
    write_dataset(path, [b"a", b"b"])
    assert read_dataset(path).keys == (b"a", b"b")
    path.write_bytes(b"c\na\nc\nb")
    with pytest.raises(NotSorted):
        read_dataset(path)
    assert read_dataset(path, sort_dedup=True).keys == (b"a", b"b", b"c")
    path.write_bytes(b"")
    with pytest.raises(EmptyDataset):
        read_dataset(path)
