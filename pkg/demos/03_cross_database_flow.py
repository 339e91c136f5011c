"""Walkthrough: sentence sharing between databases and cross-database flow.

Two databases with uncoordinated release calendars share one sentence. The
demo prints the combination partition (which sentences live in which set of
databases), the sentence's merged event timeline with uncertainty
intervals, and the cross-database missing-origin finding: the sentence
starts in one database, shows up in the other, then leaves the first
entirely.

Run:  python3 demos/03_cross_database_flow.py
"""

import tempfile
from datetime import date

from annotrace.crossdb import (
    combination_partition,
    cross_timeline,
    detect_cross_missing_origin,
)
from annotrace.model import NormalizedSentence, RecordId
from annotrace.store import Workspace

SHARED = "conserved cysteines stabilise the folded domain."

SOURCE_RELEASES = [
    ("r1999", date(1999, 1, 1)),
    ("r2003", date(2003, 1, 1)),
    ("r2008", date(2008, 1, 1)),
]
SOURCE_PRESENCE = {
    SHARED: {"PR00001": {0, 1}},
    "this fingerprint identifies the receptor family.": {"PR00001": {0, 1, 2}},
}

MIRROR_RELEASES = [
    ("r1999", date(1999, 6, 1)),
    ("r2000", date(2000, 6, 1)),
    ("r2008", date(2008, 6, 1)),
]
MIRROR_PRESENCE = {
    SHARED: {"IPR001055": {1, 2}, "IPR018298": {2}},
    "a description of the family follows.": {"IPR001055": {0, 1, 2}},
}


def load(ws: Workspace, name, releases, presence) -> None:
    ws.register_database(name, releases)
    for ordinal in range(len(releases)):
        release = ws.release(name, ordinal)
        pairs = [
            (RecordId(name, record), NormalizedSentence.from_text(text))
            for text, by_record in sorted(presence.items())
            for record, held in sorted(by_record.items())
            if ordinal in held
        ]
        ws.ingest(release, pairs)


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        ws = Workspace.create(tmp + "/ws")
        load(ws, "source", SOURCE_RELEASES, SOURCE_PRESENCE)
        load(ws, "mirror", MIRROR_RELEASES, MIRROR_PRESENCE)

        print("combination partition (distinct sentences per database set):")
        for row in combination_partition(ws):
            print(f"  {';'.join(row.combination):16s} {row.count}")

        fp = ws.fingerprint_for_text(SHARED)
        print(f"\nevent timeline of {SHARED!r}:")
        for event in cross_timeline(ws, fp).events:
            print(
                f"  {event.date} {event.kind:9s} {event.database}/{event.accession}"
                f"  (really happened within {event.interval.isoformat()})"
            )

        print("\ncross-database missing-origin candidates, origin=source:")
        for inst in detect_cross_missing_origin(ws, "source", ["mirror"]):
            print(f"  sentence: {ws.sentence_text(inst.fingerprint)!r}")
            print(f"  first seen in source within {inst.first_seen_origin.isoformat()}")
            print(
                f"  first seen in mirror within "
                f"{inst.first_seen_destination.isoformat()}"
            )
            print(f"  left source within {inst.last_seen_origin.isoformat()}")
            print(f"  confidence: {inst.confidence}")


if __name__ == "__main__":
    main()
