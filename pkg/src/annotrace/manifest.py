"""Ingest manifests: which files make up which releases of which databases.

A manifest is a JSON document:

    {
      "databases": [
        {
          "name": "interpro",
          "releases": [
            {
              "label": "4.0",
              "date": "2001-11-23",
              "path": "dumps/interpro-4.0.xml.gz",
              "format": "xml-abstract",
              "topics": null,
              "date_estimated": false,
              "options": {"record_element": "interpro"}
            }
          ]
        }
      ]
    }

``path`` is resolved relative to the manifest file. ``topics`` (a list, or
null for everything) only affects line-prefixed-flat input. ``options`` maps
onto :class:`annotrace.extraction.ParseOptions` fields. Release order in the
manifest defines the ordinals; ingest order does not matter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterator

from .extraction import FormatKind, ParseOptions, ParseSummary, extract_release
from .model import CorpusError, valid_database_id
from .store import IngestSummary, Workspace

__all__ = [
    "ManifestError",
    "ReleaseSource",
    "DatabaseSource",
    "IngestManifest",
    "load_manifest",
    "run_manifest",
]


class ManifestError(CorpusError):
    pass


@dataclass
class ReleaseSource:
    label: str
    date: date
    path: Path
    format: FormatKind
    topics: list[str] | None = None
    date_estimated: bool = False
    options: ParseOptions = field(default_factory=ParseOptions)


@dataclass
class DatabaseSource:
    name: str
    releases: list[ReleaseSource]


@dataclass
class IngestManifest:
    databases: list[DatabaseSource]

    def release_plan(self) -> Iterator[tuple[str, ReleaseSource]]:
        for db in self.databases:
            for rel in db.releases:
                yield db.name, rel


def load_manifest(path: str | Path) -> IngestManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text("utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from None
    base = path.parent
    databases = []
    for db_doc in _require(doc, "databases", list, "manifest"):
        name = valid_database_id(_require(db_doc, "name", str, "database"))
        releases = []
        for rel_doc in _require(db_doc, "releases", list, f"database {name!r}"):
            where = f"{name}/{rel_doc.get('label', '?')}"
            label = _require(rel_doc, "label", str, where)
            raw_date = _require(rel_doc, "date", str, where)
            try:
                rel_date = date.fromisoformat(raw_date)
            except ValueError:
                raise ManifestError(f"{where}: bad date {raw_date!r}") from None
            raw_format = _require(rel_doc, "format", str, where)
            try:
                fmt = FormatKind(raw_format)
            except ValueError:
                raise ManifestError(
                    f"{where}: unknown format {raw_format!r}"
                ) from None
            topics = rel_doc.get("topics")
            if topics is not None and not isinstance(topics, list):
                raise ManifestError(f"{where}: topics must be a list or null")
            options = ParseOptions()
            for key, value in (rel_doc.get("options") or {}).items():
                if not hasattr(options, key):
                    raise ManifestError(f"{where}: unknown option {key!r}")
                setattr(options, key, value)
            releases.append(
                ReleaseSource(
                    label=label,
                    date=rel_date,
                    path=base / _require(rel_doc, "path", str, where),
                    format=fmt,
                    topics=topics,
                    date_estimated=bool(rel_doc.get("date_estimated", False)),
                    options=options,
                )
            )
        databases.append(DatabaseSource(name=name, releases=releases))
    return IngestManifest(databases=databases)


def _require(doc: dict, key: str, kind: type, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ManifestError(f"{where}: missing {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ManifestError(f"{where}: {key!r} must be a {kind.__name__}")
    return value


def register_manifest(workspace: Workspace, manifest: IngestManifest) -> None:
    """Register every database and release sequence (assigns ordinals)."""
    for db in manifest.databases:
        workspace.register_database(
            db.name,
            [(r.label, r.date, r.date_estimated) for r in db.releases],
        )


def run_manifest(
    workspace: Workspace, manifest: IngestManifest
) -> Iterator[IngestSummary]:
    """Register then ingest every release, in manifest order.

    Yields one summary per release as it completes, so callers can report
    partial progress before a failure aborts the run.
    """
    register_manifest(workspace, manifest)
    for db in manifest.databases:
        for source in db.releases:
            release = workspace.release(db.name, source.label)
            if not source.path.exists():
                raise ManifestError(f"release file not found: {source.path}")
            summary = ParseSummary()
            with open(source.path, "rb") as f:
                pairs = extract_release(
                    f,
                    source.format,
                    release,
                    topics=source.topics,
                    options=source.options,
                    summary=summary,
                )
                yield workspace.ingest(release, pairs, parse_summary=summary)
