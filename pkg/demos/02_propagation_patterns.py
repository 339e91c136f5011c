"""Walkthrough: classify per-entry sentence histories into propagation patterns.

Builds a three-release database where each kind of history appears once:

  * a sentence that vanishes after one release          -> transient
  * a sentence that only just arrived                   -> possibly transient
  * a sentence copied to a second entry and then
    removed from where it started                       -> missing origin
  * a stable sentence                                   -> no pattern

Run:  python3 demos/02_propagation_patterns.py
"""

import tempfile
from datetime import date

from annotrace.model import NormalizedSentence, RecordId
from annotrace.patterns import detect_patterns, replay_instance, sentence_pattern_counts
from annotrace.store import Workspace

RELEASES = [("2001", date(2001, 1, 1)), ("2002", date(2002, 1, 1)), ("2003", date(2003, 1, 1))]

# sentence -> record -> release ordinals of presence
PRESENCE = {
    "appears once then vanishes.": {"A": {0}},
    "arrived in the newest release.": {"B": {2}},
    "starts in a, spreads to b, leaves a.": {"A": {0, 1}, "B": {1, 2}},
    "stable throughout.": {"A": {0, 1, 2}},
}


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        ws = Workspace.create(tmp + "/ws")
        ws.register_database("demo", RELEASES)
        for ordinal in range(len(RELEASES)):
            release = ws.release("demo", ordinal)
            pairs = [
                (RecordId("demo", record), NormalizedSentence.from_text(text))
                for text, by_record in sorted(PRESENCE.items())
                for record, held in sorted(by_record.items())
                if ordinal in held
            ]
            ws.ingest(release, pairs)

        report = detect_patterns(ws, "demo")
        releases = ws.releases("demo")

        print("transient (present exactly once, not in the latest release):")
        for inst in report.transient:
            label = releases[inst.witnesses[0]].label
            print(f"  {ws.sentence_text(inst.fingerprint)!r} in {inst.record} at {label}")

        print("\npossibly transient (single presence IS the latest release):")
        for inst in report.possibly_transient:
            label = releases[inst.witnesses[0]].label
            print(f"  {ws.sentence_text(inst.fingerprint)!r} in {inst.record} at {label}")

        print("\nmissing origin (copied onward, then removed at the source):")
        for inst in report.missing_origin.instances:
            v0, v1, v2 = inst.witnesses
            print(f"  {ws.sentence_text(inst.fingerprint)!r}")
            print(f"    origin {inst.origin} first held it at {releases[v0].label}")
            print(f"    secondary {', '.join(inst.secondaries)} picked it up at {releases[v1].label}")
            print(
                f"    gone from {inst.origin} by {releases[v2].label} "
                f"while a secondary still carries it"
            )
            print(f"    replay against the store: {replay_instance(ws, inst)}")

        print("\nsentence-level counts:", sentence_pattern_counts(report))


if __name__ == "__main__":
    main()
