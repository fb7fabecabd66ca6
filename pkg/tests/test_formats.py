import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlgap.core import LabeledCodeSet
from mlgap.formats import (
    HEADER,
    FormatError,
    decode_binary,
    encode_binary,
    format_text,
    load,
    parse_text,
    record_size,
    save,
)


@st.composite
def datasets(draw):
    k = draw(st.integers(1, 256))
    n = draw(st.integers(1, 20))
    values = draw(st.lists(st.integers(0, 2**k - 1), min_size=n, max_size=n))
    labels = draw(st.lists(st.integers(0, 2**32 - 1), min_size=n, max_size=n))
    supers = draw(st.none() | st.lists(st.integers(0, 2**32 - 1), min_size=n, max_size=n))
    return LabeledCodeSet.from_values(k, values, labels, supers)


def test_header_layout():
    assert HEADER.size == 15
    data = encode_binary(LabeledCodeSet.from_values(9, [0b100000001], [7]))
    assert data[:4] == b"HMC1"
    assert struct.unpack_from("<HQB", data, 4) == (9, 1, 0)
    assert data[15:] == struct.pack("<I", 7) + bytes([1, 1])
    assert len(data) == 15 + record_size(9, False)


def test_text_bit_order():
    db = parse_text("3 1100\n")
    assert db[0].code.value == 0b0011


def test_text_skips_comments_and_blank_lines():
    db = parse_text("# header\n\n0,1 01\n  \n2,3 11\n")
    assert db.labels.tolist() == [0, 2] and db.superlabels.tolist() == [1, 3]


@settings(max_examples=100)
@given(datasets())
def test_round_trip(db):
    text = format_text(db)
    assert format_text(decode_binary(encode_binary(parse_text(text)))) == text
    assert decode_binary(encode_binary(db)) == db


@pytest.mark.parametrize("text,where", [
    ("", "line 1"),
    ("0 01\n1 011\n", "line 2"),
    ("0 01\n\n1 0x\n", "line 3"),
    ("a 01\n", "line 1"),
    ("0,1 01\n1 01\n", "line 2"),
    ("0 01 extra\n", "line 1"),
    ("-1 01\n", "line 1"),
    ("0 " + "1" * 257 + "\n", "line 1"),
])
def test_text_errors_name_the_line(text, where):
    with pytest.raises(FormatError) as info:
        parse_text(text, "data.txt")
    assert info.value.where == where and "data.txt" in str(info.value)


def _good():
    return encode_binary(LabeledCodeSet.from_values(12, [1, 4095, 77], [0, 1, 2], [5, 5, 6]))


@pytest.mark.parametrize("mutate", [
    lambda d: d[:10],
    lambda d: b"HMC2" + d[4:],
    lambda d: d[:4] + struct.pack("<H", 0) + d[6:],
    lambda d: d[:4] + struct.pack("<H", 300) + d[6:],
    lambda d: d[:14] + bytes([3]) + d[15:],
    lambda d: d[:6] + struct.pack("<Q", 4) + d[14:],
    lambda d: d[:-1],
    lambda d: d + b"\0",
    lambda d: d[:-1] + bytes([0xFF]),
])
def test_binary_rejects_corruption(mutate):
    with pytest.raises(FormatError):
        decode_binary(mutate(_good()))


def test_files(tmp_path):
    rng = np.random.default_rng(0)
    db = LabeledCodeSet.from_values(20, rng.integers(0, 2**20, 30).tolist(), rng.integers(0, 3, 30).tolist())
    for name in ("a.hmc", "a.txt", "a.bin"):
        save(db, tmp_path / name)
        assert load(tmp_path / name) == db
    assert (tmp_path / "a.txt").read_text().startswith(f"{db[0].label} ")
    save(db, tmp_path / "sniffed.dat", binary=True)
    assert load(tmp_path / "sniffed.dat") == db


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        load(tmp_path / "nope.txt")
