# src/edge_fabric/codecs/types.py
from dataclasses import dataclass
from typing import Tuple

from edge_fabric.model.workload import Record


@dataclass(frozen=True, order=True)
class CodecId:
    base: str
    deflate: bool = False

    @property
    def name(self) -> str:
        return f"{self.base}+deflate" if self.deflate else self.base

    @classmethod
    def parse(cls, name: str) -> "CodecId":
        if name.endswith("+deflate"):
            return cls(name[: -len("+deflate")], True)
        return cls(name, False)

    def __str__(self) -> str:
        return self.name


JSON = CodecId("json")
JSON_DEFLATE = CodecId("json", True)
BINPACK = CodecId("binpack")
BINPACK_DEFLATE = CodecId("binpack", True)
DELTA = CodecId("delta")
DELTA_DEFLATE = CodecId("delta", True)


@dataclass(frozen=True)
class Batch:
    records: Tuple[Record, ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class EncodedBatch:
    codec: CodecId
    payload: bytes
    record_count: int
    # Size of the canonical JSON encoding of the same records.
    raw_bytes: int
    source_id: str = ""

    @property
    def size(self) -> int:
        return len(self.payload)

    @property
    def bits(self) -> int:
        return 8 * len(self.payload)
