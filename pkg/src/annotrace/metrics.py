"""Per-release and lifetime reuse measures.

Three counts describe how redundant a release is: ``total`` counts
occurrences (a sentence present in k records counts k times), ``unique``
counts distinct sentences, and ``singleton`` counts sentences occurring
exactly once in the whole release. ``singleton <= unique <= total`` always;
the functions here assert it on every computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Iterable, Sequence

from .model import ReleaseVersion
from .store import NotFoundError, StoreIntegrityError, Workspace

__all__ = [
    "ReleaseCounts",
    "LifetimeCounts",
    "ProfileRow",
    "release_counts",
    "lifetime_unique",
    "workspace_unique",
    "redundancy_profile",
    "percentage",
]


@dataclass(frozen=True)
class ReleaseCounts:
    release: ReleaseVersion
    total: int
    unique: int
    singleton: int


@dataclass(frozen=True)
class LifetimeCounts:
    database: str
    total_unique: int


@dataclass(frozen=True)
class ProfileRow:
    database: str
    release: ReleaseVersion
    total: int
    unique_pct: Decimal
    singleton_pct: Decimal
    empty: bool


def _checked(release: ReleaseVersion, total: int, unique: int, singleton: int) -> ReleaseCounts:
    if not (0 <= singleton <= unique <= total) or (unique == 0) != (total == 0):
        raise StoreIntegrityError(
            f"impossible counts for {release.database}/{release.label}: "
            f"total={total} unique={unique} singleton={singleton}"
        )
    return ReleaseCounts(release, total, unique, singleton)


def release_counts(
    workspace: Workspace, release: ReleaseVersion, *, recount: bool = False
) -> ReleaseCounts:
    """Counts for one ingested release.

    By default the counts cached at ingest time are returned; ``recount=True``
    re-derives them by streaming the sorted index.
    """
    if recount:
        total, unique, singleton = workspace.recount_release(release)
    else:
        _, total, unique, singleton = workspace.release_stats(release)
    return _checked(release, total, unique, singleton)


def lifetime_unique(workspace: Workspace, database: str) -> LifetimeCounts:
    """Distinct sentences over the union of all ingested releases."""
    if not workspace.ingested_releases(database):
        raise NotFoundError(f"database {database!r} has no ingested releases")
    count = 0
    prev = None
    for fp, _acc, _ordinal in workspace.iter_database_rows_by_fp(database):
        if fp != prev:
            count += 1
            prev = fp
    return LifetimeCounts(database=database, total_unique=count)


def workspace_unique(
    workspace: Workspace, databases: Sequence[str] | None = None
) -> int:
    """Distinct sentences across every ingested release of the workspace."""
    count = 0
    prev = None
    for fp, _db, _acc, _ordinal in workspace.iter_workspace_rows_by_fp(databases):
        if fp != prev:
            count += 1
            prev = fp
    return count


def percentage(part: int, whole: int) -> Decimal:
    """part/whole as a percentage with two decimals, rounded half-to-even."""
    if whole == 0:
        return Decimal("0.00")
    return (Decimal(part) * 100 / Decimal(whole)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_EVEN
    )


def redundancy_profile(
    workspace: Workspace,
    databases: Iterable[str] | None = None,
    selector: str = "latest",
) -> list[ProfileRow]:
    """Percentage-of-total view of unique and singleton sentences.

    ``selector`` is ``"latest"`` (last ingested release per database) or
    ``"all"``. Rows are ordered by database then release ordinal. A release
    with no occurrences reports zero percentages and ``empty=True``.
    """
    if selector not in ("latest", "all"):
        raise ValueError(f"selector must be 'latest' or 'all', got {selector!r}")
    names = sorted(databases) if databases is not None else workspace.databases()
    rows: list[ProfileRow] = []
    for db in names:
        ingested = workspace.ingested_releases(db)
        if not ingested:
            continue
        chosen = ingested[-1:] if selector == "latest" else ingested
        for release in chosen:
            counts = release_counts(workspace, release)
            rows.append(
                ProfileRow(
                    database=db,
                    release=release,
                    total=counts.total,
                    unique_pct=percentage(counts.unique, counts.total),
                    singleton_pct=percentage(counts.singleton, counts.total),
                    empty=counts.total == 0,
                )
            )
    return rows
