# src/edge_fabric/codecs/__init__.py
"""
Codec registry: base formats plus an optional DEFLATE wrapper.

New formats register with register_base() and immediately gain a +deflate variant;
existing wire formats are never touched.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from edge_fabric.codecs import formats
from edge_fabric.codecs.types import (
    BINPACK, BINPACK_DEFLATE, DELTA, DELTA_DEFLATE, JSON, JSON_DEFLATE, Batch, CodecId, EncodedBatch,
)
from edge_fabric.errors import DecodeError, EncodeError
from edge_fabric.model.workload import Record

logger = logging.getLogger("edge_fabric.codecs")

Encoder = Callable[[Sequence[Record]], bytes]
Decoder = Callable[[bytes], List[Record]]

_BASES: Dict[str, Tuple[Encoder, Decoder]] = {}
_ORDER: List[str] = []


def register_base(name: str, encoder: Encoder, decoder: Decoder) -> None:
    if name in _BASES:
        raise ValueError(f"codec {name} already registered")
    _BASES[name] = (encoder, decoder)
    _ORDER.append(name)


register_base("json", formats.encode_json, formats.decode_json)
register_base("binpack", formats.encode_binpack, formats.decode_binpack)
register_base("delta", formats.encode_delta, formats.decode_delta)


def all_codecs() -> List[CodecId]:
    """Every registered codec, each base followed by its deflate variant."""
    return [CodecId(base, deflate) for base in _ORDER for deflate in (False, True)]


def _lookup(codec: CodecId) -> Tuple[Encoder, Decoder]:
    try:
        return _BASES[codec.base]
    except KeyError:
        raise ValueError(f"unknown codec {codec.name}")


def encode(codec: CodecId, batch: Batch, raw_bytes: Optional[int] = None) -> EncodedBatch:
    """Encode a nonempty, timestamp-sorted batch. Same batch, same bytes."""
    encoder, _ = _lookup(codec)
    formats.check_records(batch.records)
    payload = encoder(batch.records)
    if codec.deflate:
        payload = formats.deflate_wrap(payload)
    if raw_bytes is None:
        raw_bytes = formats.json_size(batch.records)
    return EncodedBatch(codec, payload, len(batch.records), raw_bytes, batch.source_id)


def encode_all(batch: Batch, raw_bytes: Optional[int] = None) -> List[EncodedBatch]:
    """The batch under every registered codec, sharing each base encoding with its deflate variant."""
    formats.check_records(batch.records)
    if raw_bytes is None:
        raw_bytes = formats.json_size(batch.records)
    out = []
    for base in _ORDER:
        encoder, _ = _BASES[base]
        try:
            payload = encoder(batch.records)
        except EncodeError:
            continue
        for deflate in (False, True):
            body = formats.deflate_wrap(payload) if deflate else payload
            out.append(EncodedBatch(CodecId(base, deflate), body, len(batch.records), raw_bytes, batch.source_id))
    return out


def decode(codec: CodecId, payload: bytes, source_id: str = "") -> Batch:
    _, decoder = _lookup(codec)
    if codec.deflate:
        payload = formats.deflate_unwrap(payload)
    return Batch(tuple(decoder(payload)), source_id)


def measure_ratio(codec: CodecId, batch: Batch) -> float:
    """Encoded size over canonical JSON size for this batch."""
    encoded = encode(codec, batch)
    return encoded.size / encoded.raw_bytes


__all__ = [
    "Batch", "CodecId", "EncodedBatch", "EncodeError", "DecodeError",
    "JSON", "JSON_DEFLATE", "BINPACK", "BINPACK_DEFLATE", "DELTA", "DELTA_DEFLATE",
    "all_codecs", "decode", "encode", "encode_all", "measure_ratio", "register_base",
]
