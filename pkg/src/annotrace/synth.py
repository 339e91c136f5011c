"""Synthetic corpora with planted propagation patterns, plus literal
brute-force reimplementations of every detector for oracle testing.

The generator is deterministic for a given seed. Planted sentences are
drawn from an id range disjoint from the noise vocabulary, so background
actions can never disturb a planted instance's uniqueness assumptions; the
generator still verifies every planted instance against the finished corpus
and refuses to emit files if one fails to replay.

Noise consumes a fixed number of RNG draws per (record, release)
opportunity whether or not the action fires. Raising one action rate
therefore turns a superset of the same opportunities into actions while
everything else stays put, which makes rate sweeps comparable corpus to
corpus.

Sentences are numbered tokens ("synthetic sentence 000042.") so corpora can
be debugged by eye; content is irrelevant to the detectors, identity is
everything.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping, Sequence

from .crossdb import (
    DATE_ORDERED,
    OVERLAPPING,
    CrossInstance,
    DateInterval,
)
from .model import (
    CorpusError,
    NormalizedSentence,
    RecordId,
    ReleaseVersion,
    fingerprint,
)
from .patterns import PatternInstance, PatternLabel
from .store import Workspace

__all__ = [
    "GenerationError",
    "DatabaseSpec",
    "Quotas",
    "GeneratorSpec",
    "PlantedPattern",
    "TruthManifest",
    "TinyCorpus",
    "DbTable",
    "build_corpus",
    "corpus_release_lines",
    "generate",
    "random_corpus",
    "corpus_to_store",
    "corpus_calendars",
    "brute_force_detect",
    "brute_force_cross",
    "BruteReport",
    "generate_scale_corpus",
]

BRUTE_FORCE_CELL_GUARD = 1_000_000


class GenerationError(CorpusError):
    pass


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------


@dataclass
class DatabaseSpec:
    name: str
    dates: list[date]
    records: int

    @property
    def releases(self) -> int:
        return len(self.dates)


@dataclass
class Quotas:
    transient: int = 0
    possibly_transient: int = 0
    missing_origin: int = 0
    cross: int = 0

    @property
    def planted_total(self) -> int:
        return (
            self.transient
            + self.possibly_transient
            + self.missing_origin
            + self.cross
        )


@dataclass
class GeneratorSpec:
    seed: int
    databases: list[DatabaseSpec]
    vocabulary: int = 1000
    copy_within: float = 0.0
    copy_cross: float = 0.0
    remove: float = 0.0
    add: float = 0.0
    quotas: Quotas = field(default_factory=Quotas)
    cross_origin: str | None = None
    cross_destination: str | None = None

    @classmethod
    def from_json(cls, doc: dict) -> "GeneratorSpec":
        databases = [
            DatabaseSpec(
                name=d["name"],
                dates=[date.fromisoformat(x) for x in d["dates"]],
                records=int(d["records"]),
            )
            for d in doc.get("databases", [])
        ]
        quotas = Quotas(**doc.get("quotas", {}))
        return cls(
            seed=int(doc["seed"]),
            databases=databases,
            vocabulary=int(doc.get("vocabulary", 1000)),
            copy_within=float(doc.get("copy_within", 0.0)),
            copy_cross=float(doc.get("copy_cross", 0.0)),
            remove=float(doc.get("remove", 0.0)),
            add=float(doc.get("add", 0.0)),
            quotas=quotas,
            cross_origin=doc.get("cross_origin"),
            cross_destination=doc.get("cross_destination"),
        )


def validate_spec(spec: GeneratorSpec) -> None:
    if not spec.databases:
        raise GenerationError("spec needs at least one database")
    names = [d.name for d in spec.databases]
    if len(set(names)) != len(names):
        raise GenerationError("database names must be distinct")
    for d in spec.databases:
        if not d.dates:
            raise GenerationError(f"database {d.name!r} needs at least one release")
        if any(b < a for a, b in zip(d.dates, d.dates[1:])):
            raise GenerationError(f"database {d.name!r} dates must be non-decreasing")
        if d.records < 1:
            raise GenerationError(f"database {d.name!r} needs at least one record")
    for rate_name in ("copy_within", "copy_cross", "remove", "add"):
        rate = getattr(spec, rate_name)
        if not 0.0 <= rate <= 1.0:
            raise GenerationError(f"{rate_name} must be in [0, 1], got {rate}")
    q = spec.quotas
    if min(q.transient, q.possibly_transient, q.missing_origin, q.cross) < 0:
        raise GenerationError("quotas must be non-negative")
    if spec.vocabulary < 1:
        raise GenerationError("vocabulary must be positive")
    if q.transient and not any(d.releases >= 2 for d in spec.databases):
        raise GenerationError(
            "transient quota needs a database with at least two releases: "
            "a sole presence in the only release would be possibly-transient"
        )
    if q.missing_origin and not any(
        d.releases >= 3 and d.records >= 2 for d in spec.databases
    ):
        raise GenerationError(
            "missing-origin quota needs a database with >=3 releases and >=2 records"
        )
    if q.cross:
        origin, dest = _cross_pair(spec)
        if origin.releases < 2:
            raise GenerationError(
                "cross quota needs >=2 origin releases so removal is observable"
            )
        if not any(x > origin.dates[0] for x in dest.dates):
            raise GenerationError(
                "cross quota needs a destination release dated after the "
                "origin's first release"
            )


def _cross_pair(spec: GeneratorSpec) -> tuple[DatabaseSpec, DatabaseSpec]:
    by_name = {d.name: d for d in spec.databases}
    origin_name = spec.cross_origin or spec.databases[0].name
    dest_name = spec.cross_destination or (
        spec.databases[1].name if len(spec.databases) > 1 else origin_name
    )
    if origin_name not in by_name or dest_name not in by_name:
        raise GenerationError("cross_origin/cross_destination must name databases")
    if origin_name == dest_name:
        raise GenerationError("cross instances need two distinct databases")
    return by_name[origin_name], by_name[dest_name]


# ---------------------------------------------------------------------------
# corpus model
# ---------------------------------------------------------------------------


@dataclass
class DbTable:
    dates: list[date]
    # sentence text -> record accession -> ordinals of presence
    presence: dict[str, dict[str, set[int]]] = field(default_factory=dict)

    def add(self, text: str, record: str, ordinal: int) -> None:
        self.presence.setdefault(text, {}).setdefault(record, set()).add(ordinal)

    def cells(self) -> int:
        return sum(
            len(ordinals)
            for rows in self.presence.values()
            for ordinals in rows.values()
        )


@dataclass
class TinyCorpus:
    databases: dict[str, DbTable] = field(default_factory=dict)


@dataclass(frozen=True)
class PlantedPattern:
    kind: str
    text: str
    fingerprint: str
    database: str  # origin group name for kind == "cross"
    record: str | None = None
    origin: str | None = None
    secondaries: tuple[str, ...] = ()
    destinations: tuple[str, ...] = ()
    witnesses: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "text": self.text,
            "fingerprint": self.fingerprint,
            "database": self.database,
            "record": self.record,
            "origin": self.origin,
            "secondaries": list(self.secondaries),
            "destinations": list(self.destinations),
            "witnesses": list(self.witnesses),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PlantedPattern":
        return cls(
            kind=doc["kind"],
            text=doc["text"],
            fingerprint=doc["fingerprint"],
            database=doc["database"],
            record=doc.get("record"),
            origin=doc.get("origin"),
            secondaries=tuple(doc.get("secondaries", ())),
            destinations=tuple(doc.get("destinations", ())),
            witnesses=tuple(doc.get("witnesses", ())),
        )


@dataclass
class TruthManifest:
    planted: list[PlantedPattern] = field(default_factory=list)

    def by_kind(self, kind: str) -> list[PlantedPattern]:
        return [p for p in self.planted if p.kind == kind]

    def to_json(self) -> str:
        return json.dumps(
            {"planted": [p.to_dict() for p in self.planted]},
            indent=1,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "TruthManifest":
        doc = json.loads(text)
        return cls(planted=[PlantedPattern.from_dict(d) for d in doc["planted"]])


def _sentence_text(sentence_id: int) -> str:
    return f"synthetic sentence {sentence_id:06d}."


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def build_corpus(spec: GeneratorSpec) -> tuple[TinyCorpus, TruthManifest]:
    """Deterministically build the corpus tables and the truth manifest."""
    validate_spec(spec)
    rng = random.Random(spec.seed)
    corpus = TinyCorpus(
        databases={d.name: DbTable(dates=list(d.dates)) for d in spec.databases}
    )
    records = {
        d.name: [f"R{i:05d}" for i in range(d.records)] for d in spec.databases
    }
    planted_ids = spec.quotas.planted_total
    truth = TruthManifest()
    next_id = 0

    def plant(db: str, record: str, ordinal: int, sentence_id: int) -> None:
        corpus.databases[db].add(_sentence_text(sentence_id), record, ordinal)

    # transient: a sole presence in a non-latest release
    eligible = [d for d in spec.databases if d.releases >= 2]
    for i in range(spec.quotas.transient):
        d = eligible[i % len(eligible)]
        record = rng.choice(records[d.name])
        ordinal = rng.randrange(d.releases - 1)
        plant(d.name, record, ordinal, next_id)
        truth.planted.append(
            PlantedPattern(
                kind=PatternLabel.TRANSIENT.value,
                text=_sentence_text(next_id),
                fingerprint=fingerprint(_sentence_text(next_id)),
                database=d.name,
                record=record,
                witnesses=(ordinal,),
            )
        )
        next_id += 1

    # possibly transient: a sole presence in the latest release
    for i in range(spec.quotas.possibly_transient):
        d = spec.databases[i % len(spec.databases)]
        record = rng.choice(records[d.name])
        ordinal = d.releases - 1
        plant(d.name, record, ordinal, next_id)
        truth.planted.append(
            PlantedPattern(
                kind=PatternLabel.POSSIBLY_TRANSIENT.value,
                text=_sentence_text(next_id),
                fingerprint=fingerprint(_sentence_text(next_id)),
                database=d.name,
                record=record,
                witnesses=(ordinal,),
            )
        )
        next_id += 1

    # missing origin: origin holds [v0, v2), secondary holds [v1, latest]
    eligible = [d for d in spec.databases if d.releases >= 3 and d.records >= 2]
    for i in range(spec.quotas.missing_origin):
        d = eligible[i % len(eligible)]
        n = d.releases
        origin, secondary = rng.sample(records[d.name], 2)
        v0 = rng.randrange(n - 2)
        v1 = rng.randrange(v0 + 1, n - 1)
        v2 = rng.randrange(v1, n)
        for v in range(v0, v2):
            plant(d.name, origin, v, next_id)
        for v in range(v1, n):
            plant(d.name, secondary, v, next_id)
        truth.planted.append(
            PlantedPattern(
                kind=PatternLabel.MISSING_ORIGIN.value,
                text=_sentence_text(next_id),
                fingerprint=fingerprint(_sentence_text(next_id)),
                database=d.name,
                origin=origin,
                secondaries=(secondary,),
                witnesses=(v0, v1, v2),
            )
        )
        next_id += 1

    # cross: leaves the origin database entirely, stays in the destination
    if spec.quotas.cross:
        origin_db, dest_db = _cross_pair(spec)
        # prefer a destination start whose uncertainty interval sits strictly
        # after the origin's first release, and an origin span that is only
        # dropped after the destination has the sentence; both fall back
        # gracefully when the calendars cannot support it
        starts = [
            k
            for k in range(1, dest_db.releases)
            if dest_db.dates[k - 1] > origin_db.dates[0]
        ]
        if starts:
            dest_start = starts[0]
        else:
            dest_start = min(
                k for k, x in enumerate(dest_db.dates) if x > origin_db.dates[0]
            )
        holds = [
            j
            for j in range(origin_db.releases - 1)
            if origin_db.dates[j] > dest_db.dates[dest_start]
        ]
        for _ in range(spec.quotas.cross):
            o_record = rng.choice(records[origin_db.name])
            d_record = rng.choice(records[dest_db.name])
            if holds:
                last_held = holds[rng.randrange(len(holds))]
            else:
                last_held = rng.randrange(origin_db.releases - 1)
            for v in range(0, last_held + 1):
                plant(origin_db.name, o_record, v, next_id)
            for v in range(dest_start, dest_db.releases):
                plant(dest_db.name, d_record, v, next_id)
            truth.planted.append(
                PlantedPattern(
                    kind="cross",
                    text=_sentence_text(next_id),
                    fingerprint=fingerprint(_sentence_text(next_id)),
                    database=origin_db.name,
                    origin=origin_db.name,
                    destinations=(dest_db.name,),
                    record=o_record,
                )
            )
            next_id += 1
    assert next_id == planted_ids

    _evolve_noise(spec, rng, corpus, records, planted_ids)
    _verify_planted(corpus, truth)
    return corpus, truth


def _evolve_noise(
    spec: GeneratorSpec,
    rng: random.Random,
    corpus: TinyCorpus,
    records: Mapping[str, list[str]],
    id_base: int,
) -> None:
    """Evolve background content release by release.

    Every opportunity consumes exactly ten RNG draws whether or not the
    action fires, so corpora generated from the same seed stay aligned when
    a single rate changes.
    """
    DRAW = 1 << 30
    alloc = 0

    def fresh_id() -> int:
        nonlocal alloc
        sentence_id = id_base + (alloc % spec.vocabulary)
        alloc += 1
        return sentence_id

    states: dict[str, list[dict[str, set[int]]]] = {}
    for d in spec.databases:
        db = d.name
        snapshots: list[dict[str, set[int]]] = []
        state: dict[str, set[int]] = {}
        for record in records[db]:
            count = 1 + rng.randrange(3)
            state[record] = {fresh_id() for _ in range(count)}
        snapshots.append({r: set(s) for r, s in state.items()})
        for ordinal in range(1, d.releases):
            previous = snapshots[ordinal - 1]
            for record in records[db]:
                held = state[record]
                u_remove = rng.random()
                idx_remove = rng.randrange(DRAW)
                u_add = rng.random()
                u_copy = rng.random()
                idx_src_record = rng.randrange(DRAW)
                idx_src_sentence = rng.randrange(DRAW)
                u_cross = rng.random()
                idx_src_db = rng.randrange(DRAW)
                idx_src_record2 = rng.randrange(DRAW)
                idx_src_sentence2 = rng.randrange(DRAW)
                if u_remove < spec.remove and held:
                    candidates = sorted(held)
                    held.discard(candidates[idx_remove % len(candidates)])
                if u_add < spec.add:
                    held.add(fresh_id())
                if u_copy < spec.copy_within and len(records[db]) > 1:
                    others = [r for r in records[db] if r != record]
                    source = previous.get(others[idx_src_record % len(others)], set())
                    if source:
                        pool = sorted(source)
                        held.add(pool[idx_src_sentence % len(pool)])
                if u_cross < spec.copy_cross and db in states and states:
                    ready = sorted(states)
                    src_db = ready[idx_src_db % len(ready)]
                    src_ord = min(ordinal, len(states[src_db]) - 1)
                    src_records = records[src_db]
                    source = states[src_db][src_ord].get(
                        src_records[idx_src_record2 % len(src_records)], set()
                    )
                    if source:
                        pool = sorted(source)
                        held.add(pool[idx_src_sentence2 % len(pool)])
            snapshots.append({r: set(s) for r, s in state.items()})
        states[db] = snapshots
    for d in spec.databases:
        table = corpus.databases[d.name]
        for ordinal, snapshot in enumerate(states[d.name]):
            for record, ids in snapshot.items():
                for sentence_id in ids:
                    table.add(_sentence_text(sentence_id), record, ordinal)


def _verify_planted(corpus: TinyCorpus, truth: TruthManifest) -> None:
    """Replay every planted instance against the finished tables."""
    for planted in truth.planted:
        if planted.kind == "cross":
            found = brute_force_cross(
                corpus, planted.origin or "", list(planted.destinations)
            )
            hits = [
                c
                for c in found
                if c.fingerprint == planted.fingerprint
                and c.destinations == planted.destinations
            ]
            if not hits:
                raise GenerationError(
                    f"planted cross instance failed to replay: {planted.text!r}"
                )
            continue
        report = _brute_force_db(
            corpus.databases[planted.database], planted.database, only=planted.text
        )
        pool = {
            PatternLabel.TRANSIENT.value: report.transient,
            PatternLabel.POSSIBLY_TRANSIENT.value: report.possibly_transient,
            PatternLabel.MISSING_ORIGIN.value: report.missing_origin,
        }[planted.kind]
        expected_record = planted.record if planted.record else planted.origin
        hits = [
            i
            for i in pool
            if i.fingerprint == planted.fingerprint
            and (i.record or i.origin) == expected_record
            and i.witnesses == planted.witnesses
        ]
        if not hits:
            raise GenerationError(
                f"planted {planted.kind} instance failed to replay: {planted.text!r}"
            )


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def corpus_release_lines(table: DbTable, ordinal: int) -> list[str]:
    """generic-tsv lines of one release, sorted by (record, text)."""
    rows = []
    for text, by_record in table.presence.items():
        for record, ordinals in by_record.items():
            if ordinal in ordinals:
                rows.append((record, text))
    rows.sort()
    return [f"{record}\t{text}" for record, text in rows]


def generate(spec: GeneratorSpec, out_dir: str | Path) -> tuple[Path, TruthManifest]:
    """Write release files, an ingest manifest and the truth manifest.

    Returns (manifest path, truth). Output is byte-identical for a fixed
    spec; nothing is written if validation or planting verification fails.
    """
    corpus, truth = build_corpus(spec)
    out = Path(out_dir)
    (out / "releases").mkdir(parents=True, exist_ok=True)
    manifest_doc: dict = {"databases": []}
    for name in sorted(corpus.databases):
        table = corpus.databases[name]
        releases = []
        for ordinal, rel_date in enumerate(table.dates):
            rel_path = f"releases/{name}.{ordinal}.tsv"
            lines = corpus_release_lines(table, ordinal)
            (out / rel_path).write_text(
                "".join(line + "\n" for line in lines), "utf-8"
            )
            releases.append(
                {
                    "label": f"r{ordinal}",
                    "date": rel_date.isoformat(),
                    "path": rel_path,
                    "format": "generic-tsv",
                }
            )
        manifest_doc["databases"].append({"name": name, "releases": releases})
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest_doc, indent=1, sort_keys=True), "utf-8")
    (out / "truth.json").write_text(truth.to_json(), "utf-8")
    return manifest_path, truth


def corpus_to_store(corpus: TinyCorpus, root: str | Path) -> Workspace:
    """Ingest a corpus into a fresh workspace at *root*."""
    ws = Workspace.create(root)
    for name in sorted(corpus.databases):
        table = corpus.databases[name]
        ws.register_database(
            name, [(f"r{i}", d) for i, d in enumerate(table.dates)]
        )
    for name in sorted(corpus.databases):
        table = corpus.databases[name]
        for ordinal in range(len(table.dates)):
            release = ws.release(name, ordinal)
            pairs = []
            for text, by_record in table.presence.items():
                for record, ordinals in by_record.items():
                    if ordinal in ordinals:
                        pairs.append((record, text))
            pairs.sort()
            ws.ingest(
                release,
                (
                    (RecordId(name, record), NormalizedSentence.from_text(text))
                    for record, text in pairs
                ),
            )
    return ws


def corpus_calendars(corpus: TinyCorpus) -> dict[str, list[ReleaseVersion]]:
    return {
        name: [
            ReleaseVersion(name, f"r{i}", i, d)
            for i, d in enumerate(table.dates)
        ]
        for name, table in corpus.databases.items()
    }


# ---------------------------------------------------------------------------
# random corpora for property testing
# ---------------------------------------------------------------------------


def random_corpus(
    rng: random.Random,
    *,
    max_databases: int = 2,
    max_records: int = 20,
    max_releases: int = 6,
    max_sentences: int = 200,
) -> TinyCorpus:
    """A small random corpus with arbitrary presence patterns."""
    corpus = TinyCorpus()
    n_dbs = rng.randint(1, max_databases)
    names = [f"db{i}" for i in range(n_dbs)]
    pools: dict[str, list[str]] = {}
    for name in names:
        n_rel = rng.randint(1, max_releases)
        start = date(2000 + rng.randint(0, 3), 1 + rng.randrange(12), 1)
        dates = []
        current = start
        for _ in range(n_rel):
            dates.append(current)
            current = _plus_days(current, rng.randint(0, 500))
        n_records = rng.randint(1, max_records)
        pools[name] = [f"E{i:03d}" for i in range(n_records)]
        corpus.databases[name] = DbTable(dates=dates)
    n_sentences = rng.randint(0, max_sentences)
    for i in range(n_sentences):
        text = f"s{i:04d}."
        for name in names:
            if rng.random() < (0.7 if len(names) == 1 else 0.5):
                table = corpus.databases[name]
                n_rel = len(table.dates)
                for record in rng.sample(
                    pools[name], rng.randint(1, min(3, len(pools[name])))
                ):
                    count = rng.randint(1, n_rel)
                    for ordinal in rng.sample(range(n_rel), count):
                        table.add(text, record, ordinal)
    return corpus


def _plus_days(d: date, days: int) -> date:
    return date.fromordinal(d.toordinal() + days)


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------


@dataclass
class BruteReport:
    transient: list[PatternInstance] = field(default_factory=list)
    possibly_transient: list[PatternInstance] = field(default_factory=list)
    missing_origin: list[PatternInstance] = field(default_factory=list)
    ambiguous_origin: int = 0


def _guard(corpus: TinyCorpus) -> None:
    cells = sum(table.cells() for table in corpus.databases.values())
    if cells > BRUTE_FORCE_CELL_GUARD:
        raise GenerationError(
            f"corpus too large for brute force: {cells} presence cells"
        )


def brute_force_detect(corpus: TinyCorpus) -> dict[str, BruteReport]:
    """Literal application of the pattern predicates, database by database.

    No indexing shortcuts: every (sentence, record, release) presence table
    is materialized and the definitions are evaluated directly. Use in
    tests only.
    """
    _guard(corpus)
    return {
        name: _brute_force_db(table, name)
        for name, table in sorted(corpus.databases.items())
    }


def _brute_force_db(table: DbTable, name: str, only: str | None = None) -> BruteReport:
    report = BruteReport()
    n = len(table.dates)
    latest = n - 1
    texts = [only] if only is not None else sorted(table.presence)
    for text in texts:
        rows = table.presence.get(text)
        if not rows:
            continue
        fp = fingerprint(text)
        for record in sorted(rows):
            present = sorted(rows[record])
            if len(present) == 1:
                sole = present[0]
                label = (
                    PatternLabel.POSSIBLY_TRANSIENT
                    if sole == latest
                    else PatternLabel.TRANSIENT
                )
                instance = PatternInstance(
                    label=label,
                    fingerprint=fp,
                    database=name,
                    witnesses=(sole,),
                    record=record,
                )
                if label is PatternLabel.TRANSIENT:
                    report.transient.append(instance)
                else:
                    report.possibly_transient.append(instance)
        first = min(min(ordinals) for ordinals in rows.values())
        holders_at_first = sorted(r for r in rows if first in rows[r])
        if len(holders_at_first) > 1:
            report.ambiguous_origin += 1
            continue
        origin = holders_at_first[0]
        removal = None
        for v in range(first + 1, n):
            if v in rows[origin]:
                continue
            if any(v in rows[r] for r in rows if r != origin):
                removal = v
                break
        if removal is None:
            continue
        qualifying = sorted(
            r
            for r in rows
            if r != origin
            and any(
                v not in rows[origin] and v in rows[r] for v in range(first + 1, n)
            )
        )
        v1 = min(min(rows[r]) for r in qualifying)
        report.missing_origin.append(
            PatternInstance(
                label=PatternLabel.MISSING_ORIGIN,
                fingerprint=fp,
                database=name,
                witnesses=(first, v1, removal),
                origin=origin,
                secondaries=tuple(qualifying),
            )
        )
    return report


def brute_force_cross(
    corpus: TinyCorpus, origin: str, destinations: Sequence[str]
) -> list[CrossInstance]:
    """Literal cross-database missing-origin evaluation (databases as groups)."""
    _guard(corpus)
    o_table = corpus.databases[origin]
    o_dates = o_table.dates

    def ordinals_in(table: DbTable, text: str) -> set[int]:
        merged: set[int] = set()
        for ordinals in table.presence.get(text, {}).values():
            merged |= ordinals
        return merged

    texts = sorted(
        {
            text
            for db in [origin, *destinations]
            for text in corpus.databases[db].presence
        }
    )
    out: list[CrossInstance] = []
    for text in texts:
        o_ordinals = ordinals_in(o_table, text)
        if not o_ordinals:
            continue
        o_first = min(o_ordinals)
        o_first_date = o_dates[o_first]
        seen_earlier_elsewhere = False
        for db in destinations:
            ordinals = ordinals_in(corpus.databases[db], text)
            if ordinals and corpus.databases[db].dates[min(ordinals)] < o_first_date:
                seen_earlier_elsewhere = True
                break
        if seen_earlier_elsewhere:
            continue
        if (len(o_dates) - 1) in o_ordinals:
            continue
        qualifying: list[tuple[date, str, int]] = []
        for db in destinations:
            table = corpus.databases[db]
            ordinals = ordinals_in(table, text)
            if not ordinals:
                continue
            d_first = min(ordinals)
            if table.dates[d_first] <= o_first_date:
                continue
            if (len(table.dates) - 1) not in ordinals:
                continue
            qualifying.append((table.dates[d_first], db, d_first))
        if not qualifying:
            continue
        qualifying.sort()
        fd_date, fd_db, fd_ord = qualifying[0]
        fd_dates = corpus.databases[fd_db].dates
        fo = DateInterval(
            start=o_dates[o_first - 1] if o_first > 0 else None,
            end=o_first_date,
        )
        fd = DateInterval(
            start=fd_dates[fd_ord - 1] if fd_ord > 0 else None, end=fd_date
        )
        o_last = max(o_ordinals)
        lo = DateInterval(start=o_dates[o_last], end=o_dates[o_last + 1])
        ordered = fo.strictly_before(fd) and fd.strictly_before(lo)
        out.append(
            CrossInstance(
                fingerprint=fingerprint(text),
                origin=origin,
                destinations=tuple(sorted(db for _, db, _ in qualifying)),
                first_seen_origin=fo,
                first_seen_destination=fd,
                last_seen_origin=lo,
                confidence=DATE_ORDERED if ordered else OVERLAPPING,
            )
        )
    return out


# ---------------------------------------------------------------------------
# bulk corpus for scale exercises
# ---------------------------------------------------------------------------


def generate_scale_corpus(
    out_dir: str | Path,
    *,
    releases: int = 4,
    records: int = 50_000,
    sentences_per_record: int = 50,
    vocabulary: int = 150_000,
    database: str = "bulk",
) -> Path:
    """Write a large deterministic generic-tsv corpus and its manifest.

    Produces ``releases * records * sentences_per_record`` occurrences with
    heavy reuse (vocabulary << occurrences), enough to exercise the store's
    external sorting without the in-memory corpus model. Returns the
    manifest path.
    """
    out = Path(out_dir)
    (out / "releases").mkdir(parents=True, exist_ok=True)
    texts = [_sentence_text(i) for i in range(vocabulary)]
    manifest_releases = []
    for r in range(releases):
        path = out / "releases" / f"{database}.{r}.tsv"
        with open(path, "w", encoding="utf-8", buffering=1 << 20) as f:
            base_r = r * 13
            for i in range(records):
                acc = f"R{i:06d}"
                base = i * 37 + base_r
                rows = [
                    f"{acc}\t{texts[(base + j * 101) % vocabulary]}\n"
                    for j in range(sentences_per_record)
                ]
                f.write("".join(rows))
        manifest_releases.append(
            {
                "label": f"r{r}",
                "date": date(2001 + r, 1, 1).isoformat(),
                "path": f"releases/{database}.{r}.tsv",
                "format": "generic-tsv",
            }
        )
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(
            {"databases": [{"name": database, "releases": manifest_releases}]},
            indent=1,
            sort_keys=True,
        ),
        "utf-8",
    )
    return manifest_path
