# src/edge_fabric/codecs/formats.py
"""
Wire formats for the uplink codecs. All multi-byte integers are little-endian.

json     [{"t":<int>,"s":<string>,"v":<shortest float repr>},...] with no whitespace
binpack  u32 count, u16 dict size, dict of (u16 len, utf-8 bytes), then count x (u64 t, u32 idx, f64 v)
delta    binpack dictionary header, then three columns:
           timestamps: u64 first, then count-1 zigzag varint deltas
           sensors:    u32 run count, then (u32 idx, u32 run length) pairs
           values:     f64 first, then per record (u8 nonzero-byte mask, nonzero bytes of prev XOR cur)
deflate  u32 inflated length, then the base payload as a raw DEFLATE stream
"""
import json
import math
import struct
import zlib
from typing import List, Sequence, Tuple

import numpy as np

from edge_fabric.errors import DecodeError, EncodeError
from edge_fabric.model.workload import Record

U64_MAX = 2 ** 64 - 1
BODY_DTYPE = np.dtype([("t", "<u8"), ("i", "<u4"), ("v", "<f8")])


def check_records(records: Sequence[Record]) -> None:
    if not records:
        raise EncodeError("cannot encode an empty batch")
    prev = 0
    for r in records:
        if not 0 <= r.timestamp_ms <= U64_MAX:
            raise EncodeError(f"timestamp {r.timestamp_ms} does not fit in u64")
        if r.timestamp_ms < prev:
            raise EncodeError(f"timestamps not sorted: {r.timestamp_ms} after {prev}")
        prev = r.timestamp_ms


# ---------------------------------------------------------------- json

def _json_text(records: Sequence[Record], allow_nonfinite: bool) -> str:
    parts = []
    for r in records:
        if not math.isfinite(r.value) and not allow_nonfinite:
            raise EncodeError(f"json cannot carry non-finite value {r.value!r} for {r.sensor_id}")
        sensor = json.dumps(r.sensor_id, ensure_ascii=False)
        parts.append(f'{{"t":{r.timestamp_ms},"s":{sensor},"v":{float(r.value)!r}}}')
    return "[" + ",".join(parts) + "]"


def json_size(records: Sequence[Record]) -> int:
    """Byte length of the canonical JSON form; non-finite values are sized as their repr."""
    return len(_json_text(records, allow_nonfinite=True).encode("utf-8"))


def encode_json(records: Sequence[Record]) -> bytes:
    return _json_text(records, allow_nonfinite=False).encode("utf-8")


def _ordered_pairs(pairs):
    keys = [k for k, _ in pairs]
    if keys != ["t", "s", "v"]:
        raise ValueError(f"record keys must be t, s, v in order, got {keys}")
    return dict(pairs)


def decode_json(payload: bytes) -> List[Record]:
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DecodeError("json payload is not valid UTF-8", e.start)
    try:
        items = json.loads(text, object_pairs_hook=_ordered_pairs)
    except json.JSONDecodeError as e:
        raise DecodeError(f"corrupt json payload: {e.msg}", len(text[: e.pos].encode("utf-8")))
    except ValueError as e:
        raise DecodeError(str(e))
    if not isinstance(items, list):
        raise DecodeError("json payload is not an array", 0)
    records = []
    for item in items:
        if not isinstance(item, dict):
            raise DecodeError(f"json record {len(records)} is not an object")
        t, s, v = item["t"], item["s"], item["v"]
        if isinstance(t, bool) or not isinstance(t, int) or not isinstance(s, str) \
                or isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DecodeError(f"json record {len(records)} has mistyped fields")
        records.append(Record(t, s, float(v)))
    return records


# ---------------------------------------------------------------- binpack

def _dictionary(records: Sequence[Record]) -> Tuple[List[str], np.ndarray]:
    index = {}
    ids = np.empty(len(records), dtype="<u4")
    for k, r in enumerate(records):
        if r.sensor_id not in index:
            index[r.sensor_id] = len(index)
        ids[k] = index[r.sensor_id]
    if len(index) > 0xFFFF:
        raise EncodeError(f"{len(index)} distinct sensor ids exceed the u16 dictionary")
    return list(index), ids


def _write_header(out: bytearray, count: int, names: List[str]) -> None:
    out += struct.pack("<IH", count, len(names))
    for name in names:
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise EncodeError(f"sensor id of {len(raw)} bytes is too long")
        out += struct.pack("<H", len(raw))
        out += raw


def _read(payload: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(payload):
        raise DecodeError(f"truncated {what}", len(payload))
    return payload[offset: offset + size]


def _read_header(payload: bytes) -> Tuple[int, List[str], int]:
    count, dict_count = struct.unpack("<IH", _read(payload, 0, 6, "header"))
    offset = 6
    names = []
    for _ in range(dict_count):
        (length,) = struct.unpack("<H", _read(payload, offset, 2, "dictionary entry"))
        raw = _read(payload, offset + 2, length, "sensor id")
        try:
            names.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise DecodeError("sensor id is not valid UTF-8", offset + 2)
        offset += 2 + length
    return count, names, offset


def _check_indices(indices: np.ndarray, names: List[str], base_offset: int, stride: int) -> None:
    bad = np.flatnonzero(indices >= len(names))
    if bad.size:
        raise DecodeError(f"dictionary index {int(indices[bad[0]])} out of range",
                          base_offset + stride * int(bad[0]))


def encode_binpack(records: Sequence[Record]) -> bytes:
    names, ids = _dictionary(records)
    out = bytearray()
    _write_header(out, len(records), names)
    body = np.empty(len(records), dtype=BODY_DTYPE)
    body["t"] = np.array([r.timestamp_ms for r in records], dtype=np.uint64)
    body["i"] = ids
    body["v"] = np.array([r.value for r in records], dtype="<f8")
    out += body.tobytes()
    return bytes(out)


def decode_binpack(payload: bytes) -> List[Record]:
    count, names, offset = _read_header(payload)
    expected = offset + count * BODY_DTYPE.itemsize
    if len(payload) < expected:
        raise DecodeError("truncated binpack body", len(payload))
    if len(payload) > expected:
        raise DecodeError("trailing bytes after binpack body", expected)
    body = np.frombuffer(payload, dtype=BODY_DTYPE, count=count, offset=offset)
    _check_indices(body["i"], names, offset + 8, BODY_DTYPE.itemsize)
    return [Record(t, names[i], v) for t, i, v in
            zip(body["t"].tolist(), body["i"].tolist(), body["v"].tolist())]


# ---------------------------------------------------------------- delta

def _put_varint(out: bytearray, value: int) -> None:
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def _get_varint(payload: bytes, offset: int) -> Tuple[int, int]:
    value = 0
    for shift in range(0, 70, 7):
        if offset >= len(payload):
            raise DecodeError("truncated varint", len(payload))
        byte = payload[offset]
        offset += 1
        value |= (byte & 0x7F) << shift
        if byte < 0x80:
            return value, offset
    raise DecodeError("varint longer than 10 bytes", offset)


def zigzag(value: int) -> int:
    return value << 1 if value >= 0 else ((-value) << 1) - 1


def unzigzag(value: int) -> int:
    return value >> 1 if not value & 1 else -((value + 1) >> 1)


def _xor_residues(values: Sequence[float]) -> Tuple[int, np.ndarray]:
    bits = np.array(values, dtype="<f8").view("<u8")
    first = int(bits[0])
    if len(bits) == 1:
        return first, np.empty(0, dtype=np.uint8)
    residues = (bits[1:] ^ bits[:-1]).astype("<u8")
    as_bytes = residues.view(np.uint8).reshape(-1, 8)
    nonzero = as_bytes != 0
    masks = np.packbits(nonzero, axis=1, bitorder="little")
    table = np.concatenate([masks, as_bytes], axis=1)
    keep = np.concatenate([np.ones((len(residues), 1), dtype=bool), nonzero], axis=1)
    return first, table[keep]


def encode_delta(records: Sequence[Record]) -> bytes:
    names, ids = _dictionary(records)
    out = bytearray()
    _write_header(out, len(records), names)

    stamps = [r.timestamp_ms for r in records]
    out += struct.pack("<Q", stamps[0])
    for prev, cur in zip(stamps, stamps[1:]):
        _put_varint(out, zigzag(cur - prev))

    starts = np.flatnonzero(np.concatenate([[True], ids[1:] != ids[:-1]]))
    runs = np.diff(np.append(starts, len(ids)))
    pairs = np.empty((len(starts), 2), dtype="<u4")
    pairs[:, 0] = ids[starts]
    pairs[:, 1] = runs
    out += struct.pack("<I", len(starts))
    out += pairs.tobytes()

    first, residue_bytes = _xor_residues([r.value for r in records])
    out += struct.pack("<Q", first)
    out += residue_bytes.tobytes()
    return bytes(out)


def decode_delta(payload: bytes) -> List[Record]:
    count, names, offset = _read_header(payload)
    if count == 0:
        if offset != len(payload):
            raise DecodeError("trailing bytes after empty delta payload", offset)
        return []

    (first_ts,) = struct.unpack("<Q", _read(payload, offset, 8, "first timestamp"))
    offset += 8
    stamps = [first_ts]
    for _ in range(count - 1):
        start = offset
        z, offset = _get_varint(payload, offset)
        nxt = stamps[-1] + unzigzag(z)
        if not 0 <= nxt <= U64_MAX:
            raise DecodeError("timestamp delta leaves the u64 range", start)
        stamps.append(nxt)

    (run_count,) = struct.unpack("<I", _read(payload, offset, 4, "run count"))
    offset += 4
    raw_pairs = _read(payload, offset, 8 * run_count, "sensor runs")
    pairs = np.frombuffer(raw_pairs, dtype="<u4").reshape(-1, 2)
    _check_indices(pairs[:, 0], names, offset, 8)
    if int(pairs[:, 1].sum(dtype=np.uint64)) != count:
        raise DecodeError("sensor runs do not add up to the record count", offset)
    ids = np.repeat(pairs[:, 0], pairs[:, 1].astype(np.int64))
    offset += 8 * run_count

    (first_bits,) = struct.unpack("<Q", _read(payload, offset, 8, "first value"))
    offset += 8
    residues = np.zeros((count - 1, 8), dtype=np.uint8)
    for k in range(count - 1):
        mask = _read(payload, offset, 1, "value mask")[0]
        width = bin(mask).count("1")
        chunk = _read(payload, offset + 1, width, "value residue")
        lanes = [j for j in range(8) if mask >> j & 1]
        residues[k, lanes] = np.frombuffer(chunk, dtype=np.uint8)
        offset += 1 + width
    if offset != len(payload):
        raise DecodeError("trailing bytes after delta payload", offset)

    xors = np.concatenate([np.array([first_bits], dtype="<u8"), residues.reshape(-1).view("<u8")])
    values = np.bitwise_xor.accumulate(xors).view("<f8")
    return [Record(t, names[i], v) for t, i, v in zip(stamps, ids.tolist(), values.tolist())]


# ---------------------------------------------------------------- deflate

def deflate_wrap(base_payload: bytes) -> bytes:
    compressor = zlib.compressobj(level=9, method=zlib.DEFLATED, wbits=-15)
    return struct.pack("<I", len(base_payload)) + compressor.compress(base_payload) + compressor.flush()


def deflate_unwrap(payload: bytes) -> bytes:
    (inflated_len,) = struct.unpack("<I", _read(payload, 0, 4, "deflate length prefix"))
    inflater = zlib.decompressobj(wbits=-15)
    try:
        inner = inflater.decompress(payload[4:])
    except zlib.error as e:
        raise DecodeError(f"corrupt deflate stream: {e}", 4)
    if not inflater.eof:
        raise DecodeError("truncated deflate stream", len(payload))
    if inflater.unused_data:
        raise DecodeError("trailing bytes after deflate stream", len(payload) - len(inflater.unused_data))
    if len(inner) != inflated_len:
        raise DecodeError(f"inflated {len(inner)} bytes, header says {inflated_len}", 0)
    return inner
