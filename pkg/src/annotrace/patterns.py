"""Propagation-pattern detection over per-entry sentence histories.

Patterns are judged per (sentence, record) pair within one database:

* ``transient`` -- present in exactly one release, and that release is not
  the latest one. Reappearance after a gap defeats the label.
* ``possibly-transient`` -- present in exactly one release, which is the
  latest; whether it will turn out transient is undecidable yet.
* ``missing-origin`` -- judged per sentence: first seen in exactly one
  record (the origin), later present in other records, and at some point
  absent from the origin while a later-arriving record still carries it.
  Sentences whose first release shows them in several records at once have
  no decidable origin and are tallied as ambiguous instead.

Record deletion is indistinguishable from sentence removal at release
granularity; both count as absence. Missing-origin instances carry an audit
flag saying whether the origin record as a whole was gone at the witness
release.

The ``*_from_presence`` helpers are pure functions over presence maps; the
``detect_*`` functions stream the same logic over a workspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import AbstractSet, Iterable, Mapping

from .model import RecordId
from .store import Workspace, WorkspaceError

__all__ = [
    "PatternLabel",
    "PatternInstance",
    "MissingOriginResult",
    "PatternReport",
    "classify_ordinals",
    "transient_from_presence",
    "missing_origin_from_presence",
    "classify_entry",
    "detect_patterns",
    "detect_transient",
    "detect_possibly_transient",
    "detect_missing_origin",
    "sentence_pattern_counts",
    "replay_instance",
]


class PatternLabel(str, Enum):
    TRANSIENT = "transient"
    POSSIBLY_TRANSIENT = "possibly-transient"
    MISSING_ORIGIN = "missing-origin"


@dataclass(frozen=True)
class PatternInstance:
    """One classified propagation event.

    ``witnesses`` holds the sole release of presence for the transient
    family, and ``(first_origin, first_secondary, first_removal)`` ordinals
    for missing-origin. ``record`` is set for the transient family,
    ``origin``/``secondaries`` for missing-origin.
    """

    label: PatternLabel
    fingerprint: str
    database: str
    witnesses: tuple[int, ...]
    record: str | None = None
    origin: str | None = None
    secondaries: tuple[str, ...] = ()
    origin_record_absent: bool | None = None


@dataclass
class MissingOriginResult:
    """Missing-origin instances plus the sentences excluded for having
    several simultaneous first-release records."""

    instances: list[PatternInstance] = field(default_factory=list)
    ambiguous_origin: int = 0

    def origin_record_absences(self) -> int:
        return sum(1 for i in self.instances if i.origin_record_absent)


@dataclass
class PatternReport:
    database: str
    releases: int
    transient: list[PatternInstance] = field(default_factory=list)
    possibly_transient: list[PatternInstance] = field(default_factory=list)
    missing_origin: MissingOriginResult = field(default_factory=MissingOriginResult)


# ---------------------------------------------------------------------------
# pure layer
# ---------------------------------------------------------------------------


def classify_ordinals(ordinals: AbstractSet[int], latest: int) -> set[PatternLabel]:
    """Transient-family classification of one (sentence, record) history."""
    if len(ordinals) != 1:
        return set()
    (sole,) = ordinals
    if sole == latest:
        return {PatternLabel.POSSIBLY_TRANSIENT}
    return {PatternLabel.TRANSIENT}


def transient_from_presence(
    fingerprint: str,
    database: str,
    by_record: Mapping[str, AbstractSet[int]],
    n_releases: int,
) -> tuple[list[PatternInstance], list[PatternInstance]]:
    """(transient, possibly_transient) instances for one sentence."""
    latest = n_releases - 1
    transient: list[PatternInstance] = []
    possibly: list[PatternInstance] = []
    for accession in sorted(by_record):
        ordinals = by_record[accession]
        labels = classify_ordinals(ordinals, latest)
        if not labels:
            continue
        (sole,) = ordinals
        instance = PatternInstance(
            label=next(iter(labels)),
            fingerprint=fingerprint,
            database=database,
            witnesses=(sole,),
            record=accession,
        )
        (transient if PatternLabel.TRANSIENT in labels else possibly).append(instance)
    return transient, possibly


def missing_origin_from_presence(
    fingerprint: str,
    database: str,
    by_record: Mapping[str, AbstractSet[int]],
    n_releases: int,
    record_presence: Mapping[str, AbstractSet[int]] | None = None,
) -> PatternInstance | None | str:
    """Missing-origin judgment for one sentence.

    Returns an instance, ``None`` for no pattern, or the string
    ``"ambiguous"`` when the first release of presence spans several records.
    """
    if not by_record:
        return None
    v0 = min(min(ordinals) for ordinals in by_record.values())
    origin_set = [acc for acc, ordinals in by_record.items() if v0 in ordinals]
    if len(origin_set) > 1:
        return "ambiguous"
    origin = origin_set[0]
    origin_ordinals = by_record[origin]
    others = [acc for acc in by_record if acc != origin]
    if not others:
        return None
    removal_ordinals = [
        v
        for v in range(v0 + 1, n_releases)
        if v not in origin_ordinals
        and any(v in by_record[acc] for acc in others)
    ]
    if not removal_ordinals:
        return None
    v2 = removal_ordinals[0]
    qualifying = sorted(
        acc
        for acc in others
        if any(v in by_record[acc] for v in removal_ordinals)
    )
    v1 = min(min(by_record[acc]) for acc in qualifying)
    absent_flag: bool | None = None
    if record_presence is not None:
        absent_flag = v2 not in record_presence.get(origin, frozenset())
    return PatternInstance(
        label=PatternLabel.MISSING_ORIGIN,
        fingerprint=fingerprint,
        database=database,
        witnesses=(v0, v1, v2),
        origin=origin,
        secondaries=tuple(qualifying),
        origin_record_absent=absent_flag,
    )


# ---------------------------------------------------------------------------
# store-backed detection
# ---------------------------------------------------------------------------


def _require_complete(workspace: Workspace, database: str) -> int:
    releases = workspace.releases(database)
    missing = [
        r.label for r in releases if not workspace.is_ingested(r)
    ]
    if not releases:
        raise WorkspaceError(f"database {database!r} has no registered releases")
    if missing:
        raise WorkspaceError(
            f"database {database!r} has uningested releases: {missing}; "
            "pattern detection needs the full history"
        )
    return len(releases)


def _sentence_groups(
    workspace: Workspace, database: str
) -> Iterable[tuple[str, dict[str, set[int]]]]:
    current_fp: str | None = None
    by_record: dict[str, set[int]] = {}
    for fp, acc, ordinal in workspace.iter_database_rows_by_fp(database):
        if fp != current_fp:
            if current_fp is not None:
                yield current_fp, by_record
            current_fp = fp
            by_record = {}
        by_record.setdefault(acc, set()).add(ordinal)
    if current_fp is not None:
        yield current_fp, by_record


def detect_patterns(
    workspace: Workspace, database: str, *, audit_record_absence: bool = True
) -> PatternReport:
    """Single streaming pass computing all three pattern families."""
    n_releases = _require_complete(workspace, database)
    record_presence = (
        workspace.record_presence(database) if audit_record_absence else None
    )
    report = PatternReport(database=database, releases=n_releases)
    for fp, by_record in _sentence_groups(workspace, database):
        transient, possibly = transient_from_presence(
            fp, database, by_record, n_releases
        )
        report.transient.extend(transient)
        report.possibly_transient.extend(possibly)
        verdict = missing_origin_from_presence(
            fp, database, by_record, n_releases, record_presence
        )
        if verdict == "ambiguous":
            report.missing_origin.ambiguous_origin += 1
        elif verdict is not None:
            report.missing_origin.instances.append(verdict)
    return report


def classify_entry(
    workspace: Workspace, fingerprint: str, record: RecordId
) -> set[PatternLabel]:
    """Transient-family labels of one sentence in one record."""
    n_releases = _require_complete(workspace, record.database)
    timeline = workspace.timeline(fingerprint)
    ordinals = timeline.by_record.get(record)
    if not ordinals:
        raise WorkspaceError(
            f"sentence {fingerprint} never occurs in {record.accession}"
        )
    return classify_ordinals(set(ordinals), n_releases - 1)


def detect_transient(workspace: Workspace, database: str) -> list[PatternInstance]:
    return detect_patterns(workspace, database, audit_record_absence=False).transient


def detect_possibly_transient(
    workspace: Workspace, database: str
) -> list[PatternInstance]:
    return detect_patterns(
        workspace, database, audit_record_absence=False
    ).possibly_transient


def detect_missing_origin(
    workspace: Workspace, database: str
) -> MissingOriginResult:
    return detect_patterns(workspace, database).missing_origin


def sentence_pattern_counts(report: PatternReport) -> dict[str, int]:
    """Distinct-sentence counts per label: a sentence counts once per label
    no matter how many of its entries exhibit the pattern."""
    return {
        PatternLabel.TRANSIENT.value: len({i.fingerprint for i in report.transient}),
        PatternLabel.POSSIBLY_TRANSIENT.value: len(
            {i.fingerprint for i in report.possibly_transient}
        ),
        PatternLabel.MISSING_ORIGIN.value: len(
            {i.fingerprint for i in report.missing_origin.instances}
        ),
        "ambiguous-origin": report.missing_origin.ambiguous_origin,
    }


def replay_instance(workspace: Workspace, instance: PatternInstance) -> bool:
    """Check an instance's witnesses against the store's timeline."""
    timeline = workspace.timeline(instance.fingerprint)
    db = instance.database
    by_record = {
        rec.accession: set(ordinals)
        for rec, ordinals in timeline.by_record.items()
        if rec.database == db
    }
    n_releases = len(workspace.releases(db))
    latest = n_releases - 1
    if instance.label in (PatternLabel.TRANSIENT, PatternLabel.POSSIBLY_TRANSIENT):
        ordinals = by_record.get(instance.record or "", set())
        if ordinals != {instance.witnesses[0]}:
            return False
        at_latest = instance.witnesses[0] == latest
        return at_latest == (instance.label is PatternLabel.POSSIBLY_TRANSIENT)
    v0, v1, v2 = instance.witnesses
    origin = instance.origin or ""
    origin_ordinals = by_record.get(origin, set())
    if v0 not in origin_ordinals or min(
        min(o) for o in by_record.values()
    ) != v0:
        return False
    if sum(1 for o in by_record.values() if v0 in o) != 1:
        return False
    if v2 <= v0 or v2 in origin_ordinals:
        return False
    if not instance.secondaries:
        return False
    if not any(v2 in by_record.get(s, set()) for s in instance.secondaries):
        return False
    firsts = [min(by_record[s]) for s in instance.secondaries if s in by_record]
    if len(firsts) != len(instance.secondaries):
        return False
    if min(firsts) != v1 or any(f <= v0 for f in firsts):
        return False
    return True
