"""JSON-lines dataset records and streaming ingestion."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator

from .errors import DatasetError

HUMAN, MACHINE = 0, 1


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    text: str
    label: int | None = None
    domain: str | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def iter_records(path: str | Path, mode: str = "detect") -> Iterator[DatasetRecord]:
    """Stream records from a JSON-lines file, validating as it goes.

    ``mode="train"`` additionally requires every record to carry a label.
    Errors carry the 1-based line number.
    """
    if mode not in ("train", "detect"):
        raise ValueError(f"unknown ingest mode {mode!r}")
    seen: set[str] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"malformed JSON ({exc.msg})", lineno) from None
            if not isinstance(obj, dict):
                raise DatasetError("record is not a JSON object", lineno)
            rid = obj.get("id")
            if rid is None:
                raise DatasetError("missing id", lineno)
            rid = str(rid)
            if rid in seen:
                raise DatasetError(f"duplicate id {rid!r}", lineno)
            seen.add(rid)
            text = obj.get("text")
            if not isinstance(text, str):
                raise DatasetError(f"missing text for id {rid!r}", lineno)
            label = obj.get("label")
            if label is not None:
                if label not in (0, 1) or isinstance(label, bool):
                    raise DatasetError(f"label must be 0 or 1, got {label!r}", lineno)
                if not text.strip():
                    raise DatasetError(f"empty text for labeled id {rid!r}", lineno)
            elif mode == "train":
                raise DatasetError(f"unlabeled record {rid!r} not allowed in train mode", lineno)
            yield DatasetRecord(rid, text, label, obj.get("domain"))


def ingest(path: str | Path, format: str = "jsonl", mode: str = "detect") -> list[DatasetRecord]:
    if format != "jsonl":
        raise ValueError(f"unsupported dataset format {format!r}")
    return list(iter_records(path, mode))


def write_records(path: str | Path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
