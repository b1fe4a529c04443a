"""Lazy corpus readers for JSONL files, single multi-record SDF files and directories."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

from spectrakit.errors import InputNotFound, PermissionDenied
from spectrakit.molgraph import split_sdf

KINDS = ("jsonl", "sdf_dir", "text_dir", "sdf_file")
SDF_SUFFIXES = (".sdf", ".mol")


@dataclass(frozen=True)
class CorpusRecord:
    """One record: ``data`` is a JSON object for JSONL input, raw text otherwise."""

    id: str
    data: Union[dict, str]


@dataclass(frozen=True)
class CorpusError:
    """Marker for a record that could not be read; the stream continues past it."""

    id: str
    message: str


CorpusItem = Union[CorpusRecord, CorpusError]


def detect_kind(path: str | os.PathLike) -> str:
    p = Path(path)
    if p.is_dir():
        entries = [e for e in p.iterdir() if e.is_file()]
        if entries and all(e.suffix.lower() in SDF_SUFFIXES for e in entries):
            return "sdf_dir"
        return "text_dir"
    if p.suffix.lower() in SDF_SUFFIXES:
        return "sdf_file"
    return "jsonl"


def _check(path: Path) -> None:
    if not path.exists():
        raise InputNotFound(f"input not found: {path}")
    if not os.access(path, os.R_OK):
        raise PermissionDenied(f"cannot read {path}")


def _jsonl(path: Path) -> Iterator[CorpusItem]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fallback = f"line-{lineno}"
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                yield CorpusError(fallback, f"line {lineno}: invalid JSON ({exc.msg})")
                continue
            if not isinstance(data, dict):
                yield CorpusError(fallback, f"line {lineno}: expected a JSON object")
                continue
            yield CorpusRecord(str(data.get("id", fallback)), data)


def _directory(path: Path, sdf_only: bool) -> Iterator[CorpusItem]:
    for entry in sorted(path.iterdir(), key=lambda e: e.name):
        if not entry.is_file() or entry.name.startswith("."):
            continue
        if sdf_only and entry.suffix.lower() not in SDF_SUFFIXES:
            continue
        try:
            text = entry.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            yield CorpusError(entry.name, f"{entry.name}: {exc}")
            continue
        yield CorpusRecord(entry.name, text)


def _sdf_file(path: Path) -> Iterator[CorpusItem]:
    with path.open(encoding="utf-8") as fh:
        for k, block in enumerate(split_sdf(fh), start=1):
            yield CorpusRecord(f"{path.name}#{k}", block)


def load_corpus(path: str | os.PathLike, kind: str | None = None) -> Iterator[CorpusItem]:
    """Yield records (or error markers) in a stable order with stable ids.

    JSONL ids come from the object's ``id`` field, else ``line-N``; directory
    entries are read in lexicographic filename order and keyed by filename;
    records of a multi-record SDF file are keyed ``name#k``.
    """
    p = Path(path)
    _check(p)
    kind = kind or detect_kind(p)
    if kind not in KINDS:
        raise ValueError(f"unknown corpus kind {kind!r}; expected one of {KINDS}")
    if kind in ("sdf_dir", "text_dir"):
        if not p.is_dir():
            raise InputNotFound(f"{p} is not a directory")
        return _directory(p, kind == "sdf_dir")
    if p.is_dir():
        raise InputNotFound(f"{p} is a directory, expected a file")
    return _jsonl(p) if kind == "jsonl" else _sdf_file(p)
