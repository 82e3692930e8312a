"""JSONL artifact I/O, content hashing and provenance sidecars.

Artifacts are deterministic: same inputs produce byte-identical files.
Anything time-dependent (timestamps, host info) goes into the ``.meta.json``
sidecar next to the artifact, never into the artifact itself.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Any, Iterable, Iterator

from ink import TOOL_VERSION
from ink.errors import DataError


def dumps(obj: Any) -> str:
    """Canonical single-line JSON used for every artifact line."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_jsonl(path: str | Path, rows: Iterable[dict], header: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(dumps(header) + "\n")
        for row in rows:
            fh.write(dumps(row) + "\n")


def read_jsonl(path: str | Path) -> Iterator[dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"artifact not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: bad JSON line: {exc}") from exc


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_sidecar(artifact: str | Path, inputs: dict[str, str | Path] | None = None,
                  **extra: Any) -> Path:
    """Record provenance for an artifact: tool version, input hashes, timestamp.

    ``inputs`` maps a label to the path of an input artifact; each is hashed so
    the provenance chain is verifiable after the fact.
    """
    artifact = Path(artifact)
    meta: dict[str, Any] = {
        "artifact": artifact.name,
        "tool_version": TOOL_VERSION,
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "inputs": {
            label: {"path": str(p), "sha256": sha256_file(p)}
            for label, p in (inputs or {}).items()
        },
    }
    meta.update(extra)
    sidecar = artifact.with_name(artifact.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return sidecar
