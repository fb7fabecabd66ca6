"""Dataset file formats.

Text: one record per line, ``<label>[,<superlabel>] <bitstring>``; the
leftmost bitstring character is bit 0. Blank lines and lines starting with
``#`` are skipped.

Binary (``HMC1``), all integers little-endian::

    magic  b"HMC1"   4 bytes
    k      uint16
    count  uint64
    flags  uint8     bit 0: superlabels present
    count x (label uint32, [superlabel uint32], ceil(k/8) code bytes)

Code bytes are packed least-significant-bit first (bit 0 is the LSB of the
first byte); padding bits past k must be zero.
"""
from __future__ import annotations

import struct
from pathlib import Path

from .core import MAX_WIDTH, BinaryCode, Entry, LabeledCodeSet, UsageError

MAGIC = b"HMC1"
HEADER = struct.Struct("<4sHQB")
U32 = struct.Struct("<I")
BINARY_SUFFIXES = (".hmc", ".bin")


class FormatError(UsageError):
    def __init__(self, path, where: str, message: str):
        self.path = str(path)
        self.where = where
        super().__init__(f"{path}: {where}: {message}")


def record_size(k: int, has_super: bool) -> int:
    return 4 + (4 if has_super else 0) + (k + 7) // 8


# -- text --------------------------------------------------------------------

def parse_text(text: str, path: str = "<text>") -> LabeledCodeSet:
    entries = []
    width = None
    has_super = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(path, f"line {lineno}", "expected '<label>[,<superlabel>] <bits>'")
        labels, bits = parts
        try:
            ids = [int(x) for x in labels.split(",")]
        except ValueError:
            raise FormatError(path, f"line {lineno}", f"bad label field {labels!r}") from None
        if len(ids) not in (1, 2) or any(i < 0 or i >= 2**32 for i in ids):
            raise FormatError(path, f"line {lineno}", f"bad label field {labels!r}")
        if set(bits) - {"0", "1"}:
            raise FormatError(path, f"line {lineno}", f"bitstring has characters other than 0/1")
        if width is None:
            width = len(bits)
            if not 1 <= width <= MAX_WIDTH:
                raise FormatError(path, f"line {lineno}", f"code width {width} outside [1, {MAX_WIDTH}]")
            has_super = len(ids) == 2
        elif len(bits) != width:
            raise FormatError(path, f"line {lineno}", f"bitstring length {len(bits)} != {width}")
        elif (len(ids) == 2) != has_super:
            raise FormatError(path, f"line {lineno}", "superlabels must be on every record or none")
        entries.append(Entry(BinaryCode.from_string(bits), ids[0], ids[1] if has_super else None))
    if width is None:
        raise FormatError(path, "line 1", "no records")
    return LabeledCodeSet(width, entries)


def format_text(db: LabeledCodeSet) -> str:
    lines = []
    for e in db:
        lab = f"{e.label},{e.superlabel}" if e.superlabel is not None else f"{e.label}"
        lines.append(f"{lab} {e.code.to_string()}")
    return "\n".join(lines) + ("\n" if lines else "")


# -- binary ------------------------------------------------------------------

def encode_binary(db: LabeledCodeSet) -> bytes:
    has_super = db.has_superlabels
    nbytes = (db.width + 7) // 8
    out = bytearray(HEADER.pack(MAGIC, db.width, len(db), 1 if has_super else 0))
    for e in db:
        if e.label >= 2**32 or (has_super and e.superlabel >= 2**32):
            raise UsageError("labels must fit in 32 bits")
        out += U32.pack(e.label)
        if has_super:
            out += U32.pack(e.superlabel)
        out += e.code.value.to_bytes(nbytes, "little")
    return bytes(out)


def decode_binary(data: bytes, path: str = "<bytes>") -> LabeledCodeSet:
    if len(data) < HEADER.size:
        raise FormatError(path, "offset 0", f"truncated header ({len(data)} bytes)")
    magic, k, count, flags = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(path, "offset 0", f"bad magic {magic!r}")
    if not 1 <= k <= MAX_WIDTH:
        raise FormatError(path, "offset 4", f"code width {k} outside [1, {MAX_WIDTH}]")
    if flags & ~1:
        raise FormatError(path, "offset 14", f"unknown flag bits {flags:#04x}")
    has_super = bool(flags & 1)
    rec = record_size(k, has_super)
    expected = HEADER.size + count * rec
    if len(data) != expected:
        raise FormatError(path, f"offset {min(len(data), expected)}",
                          f"file length {len(data)} != expected {expected}")
    nbytes = (k + 7) // 8
    entries = []
    off = HEADER.size
    for i in range(count):
        label = U32.unpack_from(data, off)[0]
        pos = off + 4
        sup = None
        if has_super:
            sup = U32.unpack_from(data, pos)[0]
            pos += 4
        value = int.from_bytes(data[pos:pos + nbytes], "little")
        if value >> k:
            raise FormatError(path, f"offset {pos}", f"record {i}: padding bits past k are set")
        entries.append(Entry(BinaryCode(k, value), label, sup))
        off += rec
    return LabeledCodeSet(k, entries)


# -- files -------------------------------------------------------------------

def is_binary(path: str | Path, head: bytes | None = None) -> bool:
    if Path(path).suffix.lower() in BINARY_SUFFIXES:
        return True
    return head is not None and head.startswith(MAGIC)


def load(path: str | Path) -> LabeledCodeSet:
    """Read a dataset; ``.hmc``/``.bin`` files and files starting with HMC1 are binary."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(path, "open", exc.strerror or str(exc)) from None
    if is_binary(path, data[:4]):
        return decode_binary(data, str(path))
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(path, f"offset {exc.start}", "not valid UTF-8 text") from None
    return parse_text(text, str(path))


def save(db: LabeledCodeSet, path: str | Path, binary: bool | None = None) -> None:
    if binary is None:
        binary = is_binary(path)
    p = Path(path)
    if binary:
        p.write_bytes(encode_binary(db))
    else:
        p.write_text(format_text(db))
