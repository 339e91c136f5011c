"""Persistent versioned occurrence index.

A workspace is a directory tree:

    workspace.json            registry: format tag, databases, releases, counts
    lock                      writer mutex (flock)
    sentences/<db>.<ord>.tsv  fingerprint TAB text, the sentences first seen
                              while ingesting that release
    releases/<db>/<ord>.log   accession TAB fingerprint, arrival order
    releases/<db>/<ord>.byrec sorted unique rows, (accession, fingerprint)
    releases/<db>/<ord>.byfp  sorted unique rows, (fingerprint, accession)
    releases/<db>/<ord>.byfp.idx  sparse offset index into .byfp

Releases are immutable once ingested. Ingestion streams rows to the log,
then compacts them into the two sorted index files with an external merge
sort, so memory stays bounded at tens of millions of occurrences and the
per-release reuse counts fall out of the final merge pass for free.

Concurrency: one writer at a time (exclusive lock held for the whole
ingest); any number of readers, which only ever see fully ingested releases
because the registry is updated last, atomically.
"""

from __future__ import annotations

import bisect
import fcntl
import hashlib
import heapq
import json
import os
import shutil
import uuid
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .extraction import ParseSummary
from .model import (
    CorpusError,
    NormalizedSentence,
    Occurrence,
    RecordId,
    ReleaseVersion,
    SentenceTimeline,
    fingerprint as _fingerprint,
    normalize_text,
    valid_accession,
    valid_database_id,
)

__all__ = [
    "FORMAT_TAG",
    "Workspace",
    "IngestSummary",
    "WorkspaceError",
    "NotFoundError",
    "AlreadyIngestedError",
    "LockError",
    "StoreIntegrityError",
]

FORMAT_TAG = "annotrace.workspace/1"
SPARSE_INDEX_EVERY = 512
DEFAULT_RUN_SIZE = 1_000_000


class WorkspaceError(CorpusError):
    pass


class NotFoundError(WorkspaceError):
    pass


class AlreadyIngestedError(WorkspaceError):
    pass


class LockError(WorkspaceError):
    pass


class StoreIntegrityError(WorkspaceError):
    pass


@dataclass
class IngestSummary:
    """What one release ingest did."""

    release: ReleaseVersion
    records: int = 0
    occurrences: int = 0
    duplicates_collapsed: int = 0
    empty_sentences: int = 0
    parse_damage: int = 0


@dataclass
class _ReleaseMeta:
    release: ReleaseVersion
    ingested: bool = False
    records: int = 0
    total: int = 0
    unique: int = 0
    singleton: int = 0


class Workspace:
    """Directory-backed occurrence store. Use :meth:`create` or :meth:`open`."""

    def __init__(self, root: Path, registry: dict):
        self._root = Path(root)
        self._registry = registry
        self._sentences: dict[str, str] | None = None
        self._idx_cache: dict[tuple[str, int], tuple[list[bytes], list[int]]] = {}

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def create(cls, root: str | os.PathLike) -> "Workspace":
        root = Path(root)
        if (root / "workspace.json").exists():
            raise WorkspaceError(f"workspace already exists at {root}")
        root.mkdir(parents=True, exist_ok=True)
        (root / "sentences").mkdir(exist_ok=True)
        (root / "releases").mkdir(exist_ok=True)
        (root / "tmp").mkdir(exist_ok=True)
        registry = {
            "format": FORMAT_TAG,
            "workspace_id": str(uuid.uuid4()),
            "databases": {},
        }
        ws = cls(root, registry)
        ws._save_registry()
        return ws

    @classmethod
    def open(cls, root: str | os.PathLike) -> "Workspace":
        root = Path(root)
        path = root / "workspace.json"
        if not path.exists():
            raise NotFoundError(f"no workspace at {root}")
        registry = json.loads(path.read_text("utf-8"))
        tag = registry.get("format")
        if tag != FORMAT_TAG:
            raise WorkspaceError(
                f"incompatible workspace format {tag!r}, expected {FORMAT_TAG!r}"
            )
        return cls(root, registry)

    @classmethod
    def create_or_open(cls, root: str | os.PathLike) -> "Workspace":
        root = Path(root)
        if (root / "workspace.json").exists():
            return cls.open(root)
        return cls.create(root)

    @property
    def root(self) -> Path:
        return self._root

    @property
    def workspace_id(self) -> str:
        return self._registry["workspace_id"]

    def refresh(self) -> None:
        """Re-read the registry; picks up releases ingested by other processes."""
        self._registry = json.loads(
            (self._root / "workspace.json").read_text("utf-8")
        )
        self._idx_cache.clear()
        self._sentences = None

    # -- registry -----------------------------------------------------------

    def register_database(
        self,
        name: str,
        releases: Sequence[tuple],
    ) -> list[ReleaseVersion]:
        """Register a database and its full, ordered release sequence.

        ``releases`` is a sequence of ``(label, date)`` or ``(label, date,
        date_estimated)`` tuples in release order; ordinals are assigned from
        that order, 0-based, and never from ingestion order. Re-registering
        an identical definition is a no-op; a conflicting one is an error.
        """
        db = valid_database_id(name)
        parsed: list[ReleaseVersion] = []
        labels: set[str] = set()
        prev_date: date | None = None
        for ordinal, item in enumerate(releases):
            label, rel_date = item[0], item[1]
            estimated = bool(item[2]) if len(item) > 2 else False
            if isinstance(rel_date, str):
                rel_date = date.fromisoformat(rel_date)
            if label in labels:
                raise WorkspaceError(f"duplicate release label {label!r} in {db}")
            labels.add(label)
            if prev_date is not None and rel_date < prev_date:
                raise WorkspaceError(
                    f"release dates must be non-decreasing: {db} {label!r}"
                )
            prev_date = rel_date
            parsed.append(ReleaseVersion(db, label, ordinal, rel_date, estimated))
        existing = self._registry["databases"].get(db)
        if existing is not None:
            current = [m.release for m in self._metas(db)]
            if [(r.label, r.date, r.date_estimated) for r in current] != [
                (r.label, r.date, r.date_estimated) for r in parsed
            ]:
                raise WorkspaceError(
                    f"database {db!r} already registered with a different "
                    "release sequence"
                )
            return current
        with self._write_lock():
            self._registry["databases"][db] = {
                "releases": [
                    {
                        "label": r.label,
                        "date": r.date.isoformat(),
                        "date_estimated": r.date_estimated,
                        "ingested": False,
                        "records": 0,
                        "total": 0,
                        "unique": 0,
                        "singleton": 0,
                    }
                    for r in parsed
                ]
            }
            self._save_registry()
        return parsed

    def databases(self) -> list[str]:
        return sorted(self._registry["databases"])

    def releases(self, database: str) -> list[ReleaseVersion]:
        return [m.release for m in self._metas(database)]

    def release(self, database: str, selector: int | str) -> ReleaseVersion:
        """Look a release up by ordinal or by label."""
        metas = self._metas(database)
        if isinstance(selector, int):
            if 0 <= selector < len(metas):
                return metas[selector].release
            raise NotFoundError(f"{database} has no release ordinal {selector}")
        for m in metas:
            if m.release.label == selector:
                return m.release
        raise NotFoundError(f"{database} has no release labelled {selector!r}")

    def latest_release(self, database: str) -> ReleaseVersion:
        metas = self._metas(database)
        return metas[-1].release

    def is_ingested(self, release: ReleaseVersion) -> bool:
        return self._meta(release).ingested

    def ingested_releases(self, database: str) -> list[ReleaseVersion]:
        return [m.release for m in self._metas(database) if m.ingested]

    def all_ingested(self, database: str) -> bool:
        metas = self._metas(database)
        return bool(metas) and all(m.ingested for m in metas)

    def release_stats(self, release: ReleaseVersion) -> tuple[int, int, int, int]:
        """Cached (records, total, unique, singleton) for an ingested release."""
        meta = self._meta(release)
        if not meta.ingested:
            raise NotFoundError(
                f"release {release.database}/{release.label} is not ingested"
            )
        return meta.records, meta.total, meta.unique, meta.singleton

    def _metas(self, database: str) -> list[_ReleaseMeta]:
        db = valid_database_id(database)
        entry = self._registry["databases"].get(db)
        if entry is None:
            raise NotFoundError(f"unknown database {database!r}")
        metas = []
        for ordinal, rel in enumerate(entry["releases"]):
            metas.append(
                _ReleaseMeta(
                    release=ReleaseVersion(
                        db,
                        rel["label"],
                        ordinal,
                        date.fromisoformat(rel["date"]),
                        rel.get("date_estimated", False),
                    ),
                    ingested=rel["ingested"],
                    records=rel["records"],
                    total=rel["total"],
                    unique=rel["unique"],
                    singleton=rel["singleton"],
                )
            )
        return metas

    def _meta(self, release: ReleaseVersion) -> _ReleaseMeta:
        metas = self._metas(release.database)
        if release.ordinal >= len(metas):
            raise NotFoundError(
                f"release {release.database}/{release.label} is not registered"
            )
        meta = metas[release.ordinal]
        if (meta.release.label, meta.release.date) != (release.label, release.date):
            raise WorkspaceError(
                f"release {release.database}/{release.label} does not match "
                "the registered sequence"
            )
        return meta

    # -- sentences ----------------------------------------------------------

    def _load_sentences(self) -> dict[str, str]:
        if self._sentences is None:
            table: dict[str, str] = {}
            sdir = self._root / "sentences"
            for path in sorted(sdir.glob("*.tsv")):
                with open(path, "r", encoding="utf-8") as f:
                    for line in f:
                        fp, _, text = line.rstrip("\n").partition("\t")
                        prior = table.get(fp)
                        if prior is not None and prior != text:
                            raise StoreIntegrityError(
                                f"fingerprint collision in sentence table: {fp}"
                            )
                        table[fp] = text
            self._sentences = table
        return self._sentences

    def sentence_text(self, fingerprint: str) -> str:
        table = self._load_sentences()
        try:
            return table[fingerprint]
        except KeyError:
            raise NotFoundError(f"unknown fingerprint {fingerprint}") from None

    def has_fingerprint(self, fingerprint: str) -> bool:
        return fingerprint in self._load_sentences()

    def fingerprint_for_text(self, text: str) -> str:
        """Normalize free text and return its fingerprint (known or not)."""
        return _fingerprint(normalize_text(text))

    # -- ingestion ----------------------------------------------------------

    def ingest(
        self,
        release: ReleaseVersion,
        pairs: Iterable[tuple[RecordId, NormalizedSentence]],
        *,
        parse_summary: ParseSummary | None = None,
        run_size: int = DEFAULT_RUN_SIZE,
    ) -> IngestSummary:
        """Ingest one release's occurrence stream atomically.

        The release must be registered and not yet ingested. On any failure
        the workspace is left exactly as before; re-running is safe.
        """
        with self._write_lock():
            self.refresh()
            meta = self._meta(release)
            if meta.ingested:
                raise AlreadyIngestedError(
                    f"release {release.database}/{release.label} already ingested"
                )
            known = self._load_sentences()
            fresh: dict[str, str] = {}
            tmp = self._root / "tmp" / f"{release.database}.{release.ordinal}.{os.getpid()}"
            shutil.rmtree(tmp, ignore_errors=True)
            tmp.mkdir(parents=True)
            try:
                log_path = tmp / "log"
                with open(log_path, "wb", buffering=1 << 20) as log:
                    last_acc = None
                    acc_bytes = b""
                    for record, sentence in pairs:
                        if record.database != release.database:
                            raise WorkspaceError(
                                f"occurrence for {record.database!r} cannot be "
                                f"ingested into {release.database!r}"
                            )
                        if record.accession != last_acc:
                            last_acc = valid_accession(record.accession)
                            acc_bytes = last_acc.encode("utf-8")
                        fp = sentence.fingerprint
                        prior = known.get(fp)
                        if prior is None:
                            prior = fresh.get(fp)
                            if prior is None:
                                fresh[fp] = sentence.text
                            elif prior != sentence.text:
                                raise StoreIntegrityError(
                                    f"fingerprint collision: {fp} maps to two texts"
                                )
                        elif prior != sentence.text:
                            raise StoreIntegrityError(
                                f"fingerprint collision: {fp} maps to two texts"
                            )
                        log.write(acc_bytes + b"\t" + fp.encode("ascii") + b"\n")
                counts = self._compact(tmp, log_path, run_size)
                if fresh:
                    with open(tmp / "sentences.tsv", "w", encoding="utf-8") as f:
                        for fp in sorted(fresh):
                            f.write(f"{fp}\t{fresh[fp]}\n")
                # move data files into place, registry commit comes last
                rel_dir = self._root / "releases" / release.database
                rel_dir.mkdir(parents=True, exist_ok=True)
                stem = str(release.ordinal)
                os.replace(log_path, rel_dir / f"{stem}.log")
                os.replace(tmp / "byrec", rel_dir / f"{stem}.byrec")
                os.replace(tmp / "byfp", rel_dir / f"{stem}.byfp")
                os.replace(tmp / "byfp.idx", rel_dir / f"{stem}.byfp.idx")
                if fresh:
                    os.replace(
                        tmp / "sentences.tsv",
                        self._root
                        / "sentences"
                        / f"{release.database}.{release.ordinal}.tsv",
                    )
                records, total, unique, singleton, dups = counts
                entry = self._registry["databases"][release.database]["releases"][
                    release.ordinal
                ]
                entry.update(
                    ingested=True,
                    records=records,
                    total=total,
                    unique=unique,
                    singleton=singleton,
                )
                self._save_registry()
                known.update(fresh)
                self._idx_cache.pop((release.database, release.ordinal), None)
            except BaseException:
                self._sentences = None  # drop any half-applied view
                raise
            finally:
                shutil.rmtree(tmp, ignore_errors=True)
        summary = IngestSummary(release=release, records=records, occurrences=total)
        summary.duplicates_collapsed = dups
        if parse_summary is not None:
            summary.duplicates_collapsed += parse_summary.duplicates_collapsed
            summary.empty_sentences = parse_summary.empty_sentences
            summary.parse_damage = parse_summary.damaged_records
        return summary

    def _compact(
        self, tmp: Path, log_path: Path, run_size: int
    ) -> tuple[int, int, int, int, int]:
        """Sort the log into .byrec and .byfp, dropping duplicate rows.

        Returns (records, total, unique, singleton, duplicates_collapsed).
        """
        # pass 1: (accession, fingerprint) order
        records = kept = dups = 0
        with open(log_path, "rb") as log, open(
            tmp / "byrec", "wb", buffering=1 << 20
        ) as out:
            prev = None
            prev_acc = None
            for line in _external_sort(log, tmp, run_size):
                if line == prev:
                    dups += 1
                    continue
                prev = line
                acc = line.split(b"\t", 1)[0]
                if acc != prev_acc:
                    records += 1
                    prev_acc = acc
                out.write(line)
                kept += 1
        # pass 2: (fingerprint, accession) order, plus counts and sparse index
        total = unique = singleton = 0
        offset = 0
        run_len = 0
        prev_fp = None
        with open(tmp / "byrec", "rb") as src, open(
            tmp / "byfp", "wb", buffering=1 << 20
        ) as out, open(tmp / "byfp.idx", "wb") as idx:

            def swap(lines: Iterable[bytes]) -> Iterator[bytes]:
                for raw in lines:
                    acc, _, fp = raw.rstrip(b"\n").partition(b"\t")
                    yield fp + b"\t" + acc + b"\n"

            swapped = swap(src)
            for line in _external_sort(swapped, tmp, run_size):
                fp = line[:32]
                if fp != prev_fp:
                    if run_len == 1:
                        singleton += 1
                    run_len = 0
                    if unique % SPARSE_INDEX_EVERY == 0:
                        idx.write(fp + b"\t" + str(offset).encode() + b"\n")
                    unique += 1
                    prev_fp = fp
                run_len += 1
                total += 1
                out.write(line)
                offset += len(line)
            if run_len == 1:
                singleton += 1
        return records, kept, unique, singleton, dups

    # -- queries ------------------------------------------------------------

    def timeline(self, fingerprint: str) -> SentenceTimeline:
        """Exact per-record presence sets for one sentence, all databases."""
        if not self.has_fingerprint(fingerprint):
            raise NotFoundError(f"unknown fingerprint {fingerprint}")
        fp_bytes = fingerprint.encode("ascii")
        by_record: dict[RecordId, list[int]] = {}
        for db in self.databases():
            for meta in self._metas(db):
                if not meta.ingested:
                    continue
                for acc in self._release_accessions(db, meta.release.ordinal, fp_bytes):
                    by_record.setdefault(RecordId(db, acc), []).append(
                        meta.release.ordinal
                    )
        return SentenceTimeline(
            fingerprint=fingerprint,
            by_record={k: tuple(v) for k, v in by_record.items()},
        )

    def timeline_for_text(self, text: str) -> SentenceTimeline:
        return self.timeline(self.fingerprint_for_text(text))

    def _release_accessions(
        self, db: str, ordinal: int, fp_bytes: bytes
    ) -> Iterator[str]:
        """Accessions holding one fingerprint in one release (sparse-index seek)."""
        fps, offsets = self._sparse_index(db, ordinal)
        if not fps:
            return
        pos = bisect.bisect_right(fps, fp_bytes) - 1
        if pos < 0:
            return
        path = self._release_path(db, ordinal, "byfp")
        with open(path, "rb") as f:
            f.seek(offsets[pos])
            for line in f:
                fp, _, acc = line.rstrip(b"\n").partition(b"\t")
                if fp == fp_bytes:
                    yield acc.decode("utf-8")
                elif fp > fp_bytes:
                    break

    def _sparse_index(self, db: str, ordinal: int) -> tuple[list[bytes], list[int]]:
        key = (db, ordinal)
        cached = self._idx_cache.get(key)
        if cached is None:
            fps: list[bytes] = []
            offsets: list[int] = []
            with open(self._release_path(db, ordinal, "byfp.idx"), "rb") as f:
                for line in f:
                    fp, _, off = line.rstrip(b"\n").partition(b"\t")
                    fps.append(fp)
                    offsets.append(int(off))
            cached = (fps, offsets)
            self._idx_cache[key] = cached
        return cached

    def _release_path(self, db: str, ordinal: int, suffix: str) -> Path:
        return self._root / "releases" / db / f"{ordinal}.{suffix}"

    def release_occurrences(self, release: ReleaseVersion) -> Iterator[Occurrence]:
        """Every occurrence of a release, once, ordered by (record, fingerprint)."""
        meta = self._meta(release)
        if not meta.ingested:
            raise NotFoundError(
                f"release {release.database}/{release.label} is not ingested"
            )
        with open(
            self._release_path(release.database, release.ordinal, "byrec"), "rb"
        ) as f:
            for line in f:
                acc, _, fp = line.rstrip(b"\n").partition(b"\t")
                yield Occurrence(
                    fingerprint=fp.decode("ascii"),
                    record=RecordId(release.database, acc.decode("utf-8")),
                    release=release,
                )

    def iter_release_rows_by_fp(
        self, release: ReleaseVersion
    ) -> Iterator[tuple[str, str]]:
        """(fingerprint, accession) rows of one release in fingerprint order."""
        meta = self._meta(release)
        if not meta.ingested:
            raise NotFoundError(
                f"release {release.database}/{release.label} is not ingested"
            )
        with open(
            self._release_path(release.database, release.ordinal, "byfp"), "rb"
        ) as f:
            for line in f:
                fp, _, acc = line.rstrip(b"\n").partition(b"\t")
                yield fp.decode("ascii"), acc.decode("utf-8")

    def iter_database_rows_by_fp(
        self, database: str
    ) -> Iterator[tuple[str, str, int]]:
        """(fingerprint, accession, ordinal) over all ingested releases of a
        database, grouped by fingerprint (ascending)."""
        for line, ordinal in self._merged_lines(
            [
                (self._release_path(database, m.release.ordinal, "byfp"), m.release.ordinal)
                for m in self._metas(database)
                if m.ingested
            ]
        ):
            fp, _, acc = line.rstrip(b"\n").partition(b"\t")
            yield fp.decode("ascii"), acc.decode("utf-8"), ordinal

    def iter_workspace_rows_by_fp(
        self, databases: Sequence[str] | None = None
    ) -> Iterator[tuple[str, str, str, int]]:
        """(fingerprint, database, accession, ordinal) across databases,
        grouped by fingerprint (ascending)."""
        sources = []
        for db in databases if databases is not None else self.databases():
            for m in self._metas(db):
                if m.ingested:
                    sources.append(
                        (
                            self._release_path(db, m.release.ordinal, "byfp"),
                            (db, m.release.ordinal),
                        )
                    )
        for line, (db, ordinal) in self._merged_lines(sources):
            fp, _, acc = line.rstrip(b"\n").partition(b"\t")
            yield fp.decode("ascii"), db, acc.decode("utf-8"), ordinal

    @staticmethod
    def _merged_lines(sources: list[tuple[Path, object]]) -> Iterator[tuple[bytes, object]]:
        def tagged(path: Path, tag: object) -> Iterator[tuple[bytes, int, object]]:
            # the id() tiebreak keeps heapq from ever comparing tags
            with open(path, "rb") as f:
                for line in f:
                    yield line, id(tag), tag

        streams = [tagged(path, tag) for path, tag in sources]
        for line, _, tag in heapq.merge(*streams):
            yield line, tag

    def record_presence(self, database: str) -> dict[str, set[int]]:
        """accession -> set of ordinals in which the record has any sentence."""
        presence: dict[str, set[int]] = {}
        for meta in self._metas(database):
            if not meta.ingested:
                continue
            path = self._release_path(database, meta.release.ordinal, "byrec")
            prev_acc: bytes | None = None
            with open(path, "rb") as f:
                for line in f:
                    acc = line.split(b"\t", 1)[0]
                    if acc != prev_acc:
                        presence.setdefault(acc.decode("utf-8"), set()).add(
                            meta.release.ordinal
                        )
                        prev_acc = acc
        return presence

    def recount_release(self, release: ReleaseVersion) -> tuple[int, int, int]:
        """Streaming recount of (total, unique, singleton) from the sorted index."""
        total = unique = singleton = 0
        run_len = 0
        prev_fp: str | None = None
        for fp, _acc in self.iter_release_rows_by_fp(release):
            if fp != prev_fp:
                if run_len == 1:
                    singleton += 1
                unique += 1
                run_len = 0
                prev_fp = fp
            run_len += 1
            total += 1
        if run_len == 1:
            singleton += 1
        return total, unique, singleton

    # -- integrity ----------------------------------------------------------

    def integrity_check(self) -> list[str]:
        """Cross-verify indexes, counts and the sentence table.

        Returns a list of human-readable problems; empty means consistent.
        """
        problems: list[str] = []
        try:
            table = self._load_sentences()
        except StoreIntegrityError as exc:
            return [str(exc)]
        for db in self.databases():
            for meta in self._metas(db):
                if not meta.ingested:
                    continue
                ordinal = meta.release.ordinal
                name = f"{db}/{meta.release.label}"
                paths = {
                    s: self._release_path(db, ordinal, s)
                    for s in ("byrec", "byfp", "byfp.idx", "log")
                }
                missing = [s for s, p in paths.items() if not p.exists()]
                if missing:
                    problems.append(f"{name}: missing files {missing}")
                    continue
                rec_rows, rec_hash, rec_sorted = _scan_rows(paths["byrec"], swap=True)
                fp_rows, fp_hash, fp_sorted = _scan_rows(paths["byfp"], swap=False)
                if not rec_sorted:
                    problems.append(f"{name}: .byrec is not sorted/unique")
                if not fp_sorted:
                    problems.append(f"{name}: .byfp is not sorted/unique")
                if rec_rows != fp_rows or rec_hash != fp_hash:
                    problems.append(
                        f"{name}: .byrec and .byfp disagree "
                        f"({rec_rows} vs {fp_rows} rows)"
                    )
                total, unique, singleton = self.recount_release(meta.release)
                if (total, unique, singleton) != (
                    meta.total,
                    meta.unique,
                    meta.singleton,
                ):
                    problems.append(
                        f"{name}: cached counts {(meta.total, meta.unique, meta.singleton)} "
                        f"!= recount {(total, unique, singleton)}"
                    )
                for fp, _acc in self.iter_release_rows_by_fp(meta.release):
                    if fp not in table:
                        problems.append(f"{name}: fingerprint {fp} has no sentence")
                        break
        return problems

    # -- internals ----------------------------------------------------------

    def _save_registry(self) -> None:
        path = self._root / "workspace.json"
        tmp = self._root / "tmp" / f"registry.{os.getpid()}.json"
        tmp.parent.mkdir(exist_ok=True)
        tmp.write_text(
            json.dumps(self._registry, indent=1, sort_keys=True), "utf-8"
        )
        os.replace(tmp, path)

    @contextmanager
    def _write_lock(self):
        fd = os.open(self._root / "lock", os.O_CREAT | os.O_RDWR, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(fd)
            raise LockError("another writer holds the workspace lock") from None
        try:
            yield
        finally:
            fcntl.flock(fd, fcntl.LOCK_UN)
            os.close(fd)


def _external_sort(
    lines: Iterable[bytes], tmp: Path, run_size: int
) -> Iterator[bytes]:
    """Yield input lines in sorted order, spilling runs to disk as needed."""
    buf: list[bytes] = []
    run_paths: list[Path] = []
    for line in lines:
        buf.append(line)
        if len(buf) >= run_size:
            buf.sort()
            path = tmp / f"run.{len(run_paths)}.tmp"
            with open(path, "wb", buffering=1 << 20) as f:
                f.write(b"".join(buf))
            run_paths.append(path)
            buf = []
    buf.sort()
    if not run_paths:
        yield from buf
        return

    def run_lines(path: Path) -> Iterator[bytes]:
        with open(path, "rb", buffering=1 << 20) as f:
            yield from f

    try:
        yield from heapq.merge(*(run_lines(p) for p in run_paths), iter(buf))
    finally:
        for p in run_paths:
            p.unlink(missing_ok=True)


def _scan_rows(path: Path, *, swap: bool) -> tuple[int, int, bool]:
    """(row count, order-independent content hash, sorted+unique flag).

    Rows are canonicalized to (fingerprint, accession) before hashing so the
    two index orders can be compared.
    """
    rows = 0
    digest = 0
    ordered = True
    prev: bytes | None = None
    with open(path, "rb") as f:
        for line in f:
            if prev is not None and line <= prev:
                ordered = False
            prev = line
            rows += 1
            body = line.rstrip(b"\n")
            if swap:
                acc, _, fp = body.partition(b"\t")
                body = fp + b"\t" + acc
            digest = (
                digest
                + int.from_bytes(
                    hashlib.blake2b(body, digest_size=8).digest(), "big"
                )
            ) & 0xFFFFFFFFFFFFFFFF
    return rows, digest, ordered
