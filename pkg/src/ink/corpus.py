"""Corpus ingestion: directory trees in, content-addressed manifest out.

Discovery is glob-based over raw repository files. The manifest is ordered
lexicographically by (repo_id, rel_path) so the result is independent of
filesystem traversal order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from ink import TOOL_VERSION
from ink.artifacts import read_jsonl, sha256_bytes, write_jsonl
from ink.errors import ConfigError, DataError

log = logging.getLogger(__name__)

DEFAULT_GLOB = "*.py"


@dataclass(frozen=True)
class SourceUnit:
    repo_id: str
    rel_path: str
    content_hash: str
    text: str


@dataclass(frozen=True)
class SkipRecord:
    repo_id: str
    rel_path: str
    reason: str


@dataclass
class CorpusManifest:
    units: list[SourceUnit]
    skipped: list[SkipRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    tool_version: str = TOOL_VERSION


def _decode(data: bytes) -> tuple[str | None, str | None]:
    """Decode file bytes, returning (text, warning). NUL bytes mean binary."""
    if b"\x00" in data:
        return None, "binary content (NUL byte)"
    try:
        return data.decode("utf-8"), None
    except UnicodeDecodeError:
        return data.decode("utf-8", errors="replace"), "lossy utf-8 decode"


def ingest_corpus(roots: list[str | Path], include_glob: str = DEFAULT_GLOB) -> CorpusManifest:
    """Walk every root, hash matching files and build a deterministic manifest.

    Each root directory becomes one repo_id (its basename, disambiguated by
    position when basenames collide). Undecodable files become skip records;
    lossily decoded files are kept with a warning.
    """
    repo_roots: list[tuple[str, Path]] = []
    seen_ids: set[str] = set()
    for i, root in enumerate(roots):
        root = Path(root)
        if not root.is_dir():
            raise ConfigError(f"corpus root does not exist or is not a directory: {root}")
        repo_id = root.name
        if repo_id in seen_ids:
            repo_id = f"{repo_id}#{i}"
        seen_ids.add(repo_id)
        repo_roots.append((repo_id, root))

    units: list[SourceUnit] = []
    skipped: list[SkipRecord] = []
    warnings: list[str] = []
    for repo_id, root in repo_roots:
        for path in root.rglob(include_glob):
            if not path.is_file():
                continue
            rel = path.relative_to(root).as_posix()
            data = path.read_bytes()
            text, warning = _decode(data)
            if text is None:
                skipped.append(SkipRecord(repo_id, rel, warning or "undecodable"))
                continue
            if warning:
                warnings.append(f"{repo_id}/{rel}: {warning}")
                log.warning("%s/%s: %s", repo_id, rel, warning)
            units.append(SourceUnit(repo_id, rel, sha256_bytes(data), text))

    units.sort(key=lambda u: (u.repo_id, u.rel_path))
    skipped.sort(key=lambda s: (s.repo_id, s.rel_path))
    return CorpusManifest(units=units, skipped=skipped, warnings=sorted(warnings))


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    """Persist as JSONL: header line with tool_version, then one unit per line."""
    rows: list[dict] = []
    for u in manifest.units:
        rows.append({
            "repo_id": u.repo_id,
            "rel_path": u.rel_path,
            "content_hash": u.content_hash,
            "byte_len": len(u.text.encode("utf-8")),
        })
    for s in manifest.skipped:
        rows.append({
            "repo_id": s.repo_id,
            "rel_path": s.rel_path,
            "skipped": True,
            "reason": s.reason,
        })
    write_jsonl(path, rows, header={"tool_version": manifest.tool_version})


def load_manifest(path: str | Path, roots: list[str | Path]) -> CorpusManifest:
    """Re-materialize a manifest, reading unit text back from the given roots."""
    by_id = {}
    for i, root in enumerate(roots):
        root = Path(root)
        rid = root.name
        if rid in by_id:
            rid = f"{rid}#{i}"
        by_id[rid] = root

    lines = list(read_jsonl(path))
    if not lines or "tool_version" not in lines[0]:
        raise DataError(f"manifest {path} lacks a tool_version header line")
    units: list[SourceUnit] = []
    skipped: list[SkipRecord] = []
    for row in lines[1:]:
        if row.get("skipped"):
            skipped.append(SkipRecord(row["repo_id"], row["rel_path"], row["reason"]))
            continue
        root = by_id.get(row["repo_id"])
        if root is None:
            raise DataError(f"manifest references unknown repo_id {row['repo_id']!r}; "
                            f"pass the matching --roots")
        data = (root / row["rel_path"]).read_bytes()
        if sha256_bytes(data) != row["content_hash"]:
            raise DataError(f"content hash mismatch for {row['repo_id']}/{row['rel_path']}")
        units.append(SourceUnit(row["repo_id"], row["rel_path"], row["content_hash"],
                                data.decode("utf-8", errors="replace")))
    return CorpusManifest(units=units, skipped=skipped,
                          tool_version=lines[0]["tool_version"])
