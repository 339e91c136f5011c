"""Cross-database sentence sharing and knowledge-flow analysis.

Databases can be merged into named groups (for databases that are really
one resource split in two); every unlisted database forms its own implicit
group. Sharing is summarized as a combination partition: each distinct
sentence is assigned to the exact set of groups it has ever appeared in.

Event dating works at release granularity. A release date is an upper
bound on when content entered, so every event carries a closed uncertainty
interval reaching back to the previous release's date (open-ended for a
database's first release). Cross-database ordering compares intervals;
overlap degrades a finding's confidence to "overlapping" instead of forcing
a guess.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Iterator, Mapping, Sequence

from .model import ReleaseVersion
from .store import NotFoundError, Workspace, WorkspaceError

__all__ = [
    "MergeGroup",
    "CombinationRow",
    "DateInterval",
    "CrossEvent",
    "CrossTimeline",
    "CrossInstance",
    "resolve_groups",
    "combination_partition",
    "cross_timeline",
    "detect_cross_missing_origin",
    "replay_cross_instance",
    "DATE_ORDERED",
    "OVERLAPPING",
]

DATE_ORDERED = "date-ordered"
OVERLAPPING = "overlapping"


@dataclass(frozen=True)
class MergeGroup:
    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class CombinationRow:
    combination: tuple[str, ...]
    count: int


@dataclass(frozen=True)
class DateInterval:
    """Closed interval bounding when an event really happened.

    ``start=None`` means unbounded: the event's release is the database's
    first, so nothing constrains how old the content is.
    """

    start: date | None
    end: date

    def strictly_before(self, other: "DateInterval") -> bool:
        return other.start is not None and self.end < other.start

    def isoformat(self) -> str:
        lo = self.start.isoformat() if self.start is not None else ""
        return f"[{lo}..{self.end.isoformat()}]"


@dataclass(frozen=True)
class CrossEvent:
    kind: str  # "appear" | "disappear"
    group: str
    database: str
    accession: str
    release_label: str
    date: date
    interval: DateInterval


@dataclass(frozen=True)
class CrossTimeline:
    fingerprint: str
    presence: tuple[tuple[str, str, str, tuple[int, ...]], ...]
    # rows of (group, database, accession, ordinals)
    events: tuple[CrossEvent, ...]


@dataclass(frozen=True)
class CrossInstance:
    """A heuristic cross-database missing-origin candidate."""

    fingerprint: str
    origin: str
    destinations: tuple[str, ...]
    first_seen_origin: DateInterval
    first_seen_destination: DateInterval
    last_seen_origin: DateInterval
    confidence: str


def resolve_groups(
    workspace: Workspace, merges: Iterable[MergeGroup] = ()
) -> dict[str, tuple[str, ...]]:
    """Map group name -> member databases, adding implicit singleton groups.

    Members must be registered databases and may belong to at most one
    group.
    """
    known = set(workspace.databases())
    assigned: dict[str, str] = {}
    groups: dict[str, tuple[str, ...]] = {}
    for merge in merges:
        name = merge.name.lower()
        if name in groups:
            raise WorkspaceError(f"duplicate merge group {name!r}")
        members = tuple(m.lower() for m in merge.members)
        if not members:
            raise WorkspaceError(f"merge group {name!r} has no members")
        for member in members:
            if member not in known:
                raise NotFoundError(f"merge group {name!r}: unknown database {member!r}")
            if member in assigned:
                raise WorkspaceError(
                    f"database {member!r} is in two merge groups "
                    f"({assigned[member]!r} and {name!r})"
                )
            assigned[member] = name
        groups[name] = members
    for db in sorted(known - set(assigned)):
        if db in groups:
            raise WorkspaceError(
                f"implicit group {db!r} collides with a merge group name"
            )
        groups[db] = (db,)
    return groups


def _group_of(groups: Mapping[str, tuple[str, ...]]) -> dict[str, str]:
    return {member: name for name, members in groups.items() for member in members}


def combination_partition(
    workspace: Workspace, merges: Iterable[MergeGroup] = ()
) -> list[CombinationRow]:
    """Partition all distinct sentences by the exact set of groups they ever
    appeared in. Rows are sorted by count descending, then combination name;
    counts sum to the workspace-wide number of distinct sentences."""
    groups = resolve_groups(workspace, merges)
    by_db = _group_of(groups)
    counts: dict[tuple[str, ...], int] = {}
    current_fp: str | None = None
    seen: set[str] = set()
    for fp, db, _acc, _ordinal in workspace.iter_workspace_rows_by_fp():
        if fp != current_fp:
            if current_fp is not None:
                key = tuple(sorted(seen))
                counts[key] = counts.get(key, 0) + 1
            current_fp = fp
            seen = set()
        seen.add(by_db[db])
    if current_fp is not None:
        key = tuple(sorted(seen))
        counts[key] = counts.get(key, 0) + 1
    return sorted(
        (CombinationRow(combination=k, count=v) for k, v in counts.items()),
        key=lambda row: (-row.count, row.combination),
    )


def _interval_for(releases: Sequence[ReleaseVersion], ordinal: int) -> DateInterval:
    start = releases[ordinal - 1].date if ordinal > 0 else None
    return DateInterval(start=start, end=releases[ordinal].date)


def cross_timeline(
    workspace: Workspace, fingerprint: str, merges: Iterable[MergeGroup] = ()
) -> CrossTimeline:
    """Merged multi-database history of one sentence.

    Presence rows carry the raw ordinals; the event list flattens every
    appearance and observed disappearance, sorted by upper-bound date, each
    with its uncertainty interval.
    """
    groups = resolve_groups(workspace, merges)
    by_db = _group_of(groups)
    timeline = workspace.timeline(fingerprint)
    calendars = {db: workspace.releases(db) for db in workspace.databases()}
    presence_rows = []
    events: list[CrossEvent] = []
    for record, ordinals in timeline.by_record.items():
        db = record.database
        group = by_db[db]
        releases = calendars[db]
        presence_rows.append((group, db, record.accession, tuple(ordinals)))
        latest = len(releases) - 1
        held = set(ordinals)
        for ordinal in ordinals:
            if ordinal - 1 not in held:  # run start
                events.append(
                    CrossEvent(
                        kind="appear",
                        group=group,
                        database=db,
                        accession=record.accession,
                        release_label=releases[ordinal].label,
                        date=releases[ordinal].date,
                        interval=_interval_for(releases, ordinal),
                    )
                )
            if ordinal + 1 not in held and ordinal < latest:  # run end observed
                gone = ordinal + 1
                events.append(
                    CrossEvent(
                        kind="disappear",
                        group=group,
                        database=db,
                        accession=record.accession,
                        release_label=releases[gone].label,
                        date=releases[gone].date,
                        interval=DateInterval(
                            start=releases[ordinal].date, end=releases[gone].date
                        ),
                    )
                )
    events.sort(key=lambda e: (e.date, e.group, e.database, e.accession, e.kind))
    presence_rows.sort()
    return CrossTimeline(
        fingerprint=fingerprint,
        presence=tuple(presence_rows),
        events=tuple(events),
    )


# ---------------------------------------------------------------------------
# cross-database missing origin
# ---------------------------------------------------------------------------


@dataclass
class _GroupView:
    """Per-sentence presence of one group, folded over its member databases."""

    first: tuple[date, str, int] | None = None  # (date, db, ordinal)
    last: tuple[date, str, int] | None = None
    present_at_latest: bool = False
    any_presence: bool = False


def _fold_group(
    presence: Mapping[str, set[int]],
    members: Sequence[str],
    calendars: Mapping[str, Sequence[ReleaseVersion]],
) -> _GroupView:
    view = _GroupView()
    for db in members:
        ordinals = presence.get(db)
        if not ordinals:
            continue
        view.any_presence = True
        releases = calendars[db]
        first_ord = min(ordinals)
        last_ord = max(ordinals)
        first = (releases[first_ord].date, db, first_ord)
        last = (releases[last_ord].date, db, last_ord)
        if view.first is None or first < view.first:
            view.first = first
        if view.last is None or last > view.last:
            view.last = last
        if last_ord == len(releases) - 1:
            view.present_at_latest = True
    return view


def _judge_cross(
    fingerprint: str,
    presence: Mapping[str, set[int]],
    origin: str,
    destinations: Sequence[str],
    groups: Mapping[str, tuple[str, ...]],
    calendars: Mapping[str, Sequence[ReleaseVersion]],
) -> CrossInstance | None:
    origin_view = _fold_group(presence, groups[origin], calendars)
    if not origin_view.any_presence or origin_view.present_at_latest:
        return None
    assert origin_view.first is not None and origin_view.last is not None
    origin_first_date = origin_view.first[0]
    qualifying: list[tuple[tuple[date, str, int], str]] = []
    for dest in destinations:
        view = _fold_group(presence, groups[dest], calendars)
        if not view.any_presence:
            continue
        assert view.first is not None
        if view.first[0] <= origin_first_date:
            # the sentence is at least as old elsewhere: either it beats the
            # origin (condition fails) or ties it (origin not clearly first)
            if view.first[0] < origin_first_date:
                return None
            continue
        if view.present_at_latest:
            qualifying.append((view.first, dest))
    if not qualifying:
        return None
    qualifying.sort()
    first_dest, _ = qualifying[0]
    fo = _interval_for(calendars[origin_view.first[1]], origin_view.first[2])
    fd = _interval_for(calendars[first_dest[1]], first_dest[2])
    last_date, last_db, last_ord = origin_view.last
    lo = DateInterval(
        start=last_date, end=calendars[last_db][last_ord + 1].date
    )
    ordered = fo.strictly_before(fd) and fd.strictly_before(lo)
    return CrossInstance(
        fingerprint=fingerprint,
        origin=origin,
        destinations=tuple(sorted(dest for _, dest in qualifying)),
        first_seen_origin=fo,
        first_seen_destination=fd,
        last_seen_origin=lo,
        confidence=DATE_ORDERED if ordered else OVERLAPPING,
    )


def detect_cross_missing_origin(
    workspace: Workspace,
    origin: str,
    destinations: Sequence[str],
    merges: Iterable[MergeGroup] = (),
) -> list[CrossInstance]:
    """Missing-origin candidates across database groups.

    A sentence qualifies when its earliest dated appearance is in the origin
    group, some destination first sees it strictly later (by release-date
    upper bounds), the origin group's latest release no longer carries it at
    all, and a later-arriving destination's latest release still does.
    Interval overlap does not suppress a finding, it only downgrades the
    confidence field.
    """
    groups = resolve_groups(workspace, merges)
    origin = origin.lower()
    destinations = [d.lower() for d in destinations]
    for name in [origin, *destinations]:
        if name not in groups:
            raise NotFoundError(f"unknown group {name!r}")
    if origin in destinations:
        raise WorkspaceError("origin group cannot be its own destination")
    involved = sorted({db for name in [origin, *destinations] for db in groups[name]})
    for db in involved:
        if not workspace.all_ingested(db):
            raise WorkspaceError(
                f"database {db!r} has uningested releases; cross-database "
                "detection needs the full history"
            )
    calendars = {db: workspace.releases(db) for db in involved}
    instances: list[CrossInstance] = []
    current_fp: str | None = None
    presence: dict[str, set[int]] = {}
    for fp, db, _acc, ordinal in workspace.iter_workspace_rows_by_fp(involved):
        if fp != current_fp:
            if current_fp is not None:
                verdict = _judge_cross(
                    current_fp, presence, origin, destinations, groups, calendars
                )
                if verdict is not None:
                    instances.append(verdict)
            current_fp = fp
            presence = {}
        presence.setdefault(db, set()).add(ordinal)
    if current_fp is not None:
        verdict = _judge_cross(
            current_fp, presence, origin, destinations, groups, calendars
        )
        if verdict is not None:
            instances.append(verdict)
    return instances


def replay_cross_instance(
    workspace: Workspace,
    instance: CrossInstance,
    destinations: Sequence[str],
    merges: Iterable[MergeGroup] = (),
) -> bool:
    """Re-derive one sentence's cross-database judgment and compare."""
    groups = resolve_groups(workspace, merges)
    involved = sorted(
        {
            db
            for name in [instance.origin, *(d.lower() for d in destinations)]
            for db in groups[name]
        }
    )
    calendars = {db: workspace.releases(db) for db in involved}
    timeline = workspace.timeline(instance.fingerprint)
    presence: dict[str, set[int]] = {}
    for record, ordinals in timeline.by_record.items():
        if record.database in calendars:
            presence.setdefault(record.database, set()).update(ordinals)
    verdict = _judge_cross(
        instance.fingerprint,
        presence,
        instance.origin,
        [d.lower() for d in destinations],
        groups,
        calendars,
    )
    return verdict == instance
