"""Command-line interface.

Subcommands: ingest, stats, patterns, crossdb, timeline, integrity, synth.
The workspace path comes from --workspace or the ANNOTRACE_WORKSPACE
environment variable. Output is UTF-8 with LF line endings; --format picks
TSV (default) or JSON. Exit status is 0 iff no error was reported.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .crossdb import (
    MergeGroup,
    combination_partition,
    cross_timeline,
    detect_cross_missing_origin,
    resolve_groups,
)
from .manifest import load_manifest, run_manifest
from .metrics import lifetime_unique, percentage, release_counts, workspace_unique
from .model import CorpusError, is_fingerprint
from .patterns import PatternLabel, detect_patterns, sentence_pattern_counts
from .report import ReportEnvelope, emit
from .store import Workspace
from .synth import GeneratorSpec, generate

log = logging.getLogger("annotrace")

ENV_WORKSPACE = "ANNOTRACE_WORKSPACE"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annotrace",
        description="Sentence reuse and propagation-pattern mining over "
        "versioned annotation databases.",
    )
    parser.add_argument(
        "--workspace",
        default=os.environ.get(ENV_WORKSPACE),
        help=f"workspace directory (default: ${ENV_WORKSPACE})",
    )
    parser.add_argument(
        "--format", choices=("tsv", "json"), default="tsv", help="output format"
    )
    parser.add_argument(
        "--quiet", action="store_true", help="suppress progress messages"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="register and ingest releases from a manifest")
    p.add_argument("manifest", help="path to the ingest manifest (JSON)")

    p = sub.add_parser("stats", help="per-release reuse counts")
    p.add_argument("--database", help="restrict to one database")
    p.add_argument(
        "--release", choices=("latest", "all"), default="latest", dest="selector"
    )

    p = sub.add_parser("patterns", help="propagation-pattern report")
    p.add_argument("--database", required=True)
    p.add_argument(
        "--label",
        choices=("all", "transient", "possibly-transient", "missing-origin"),
        default="all",
    )

    p = sub.add_parser("crossdb", help="cross-database sharing and patterns")
    p.add_argument(
        "--merge",
        action="append",
        default=[],
        metavar="GROUP=DB1,DB2",
        help="merge databases into one named group (repeatable)",
    )
    p.add_argument("--mode", choices=("partition", "patterns"), default="partition")
    p.add_argument("--origin", help="origin group for --mode patterns")
    p.add_argument(
        "--destinations",
        help="comma-separated destination groups for --mode patterns",
    )

    p = sub.add_parser("timeline", help="one sentence's history")
    p.add_argument("sentence", help="sentence text or 32-hex fingerprint")
    p.add_argument(
        "--chart",
        action="store_true",
        help="emit step-series JSON suitable for plotting",
    )

    sub.add_parser("integrity", help="verify store index consistency")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("spec", help="generator spec (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    handler = {
        "ingest": cmd_ingest,
        "stats": cmd_stats,
        "patterns": cmd_patterns,
        "crossdb": cmd_crossdb,
        "timeline": cmd_timeline,
        "integrity": cmd_integrity,
        "synth": cmd_synth,
    }[args.command]
    try:
        return handler(args)
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _workspace_path(args) -> Path:
    if not args.workspace:
        raise CorpusError(
            f"no workspace given: use --workspace or set ${ENV_WORKSPACE}"
        )
    return Path(args.workspace)


def _open_workspace(args) -> Workspace:
    return Workspace.open(_workspace_path(args))


def _envelope(ws_id: str, args, **parameters) -> ReportEnvelope:
    return ReportEnvelope(
        tool="annotrace",
        version=__version__,
        workspace_id=ws_id,
        command=args.command,
        parameters=parameters,
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

_INGEST_COLUMNS = (
    "database",
    "release",
    "date",
    "records",
    "occurrences",
    "duplicates_collapsed",
    "empty_sentences",
    "parse_damage",
)


def cmd_ingest(args) -> int:
    ws = Workspace.create_or_open(_workspace_path(args))
    manifest = load_manifest(args.manifest)
    envelope = _envelope(ws.workspace_id, args, manifest=str(args.manifest))
    rows = []
    failure: CorpusError | None = None
    try:
        for summary in run_manifest(ws, manifest):
            r = summary.release
            log.info("ingested %s/%s: %d occurrences", r.database, r.label, summary.occurrences)
            rows.append(
                (
                    r.database,
                    r.label,
                    r.date.isoformat(),
                    summary.records,
                    summary.occurrences,
                    summary.duplicates_collapsed,
                    summary.empty_sentences,
                    summary.parse_damage,
                )
            )
    except CorpusError as exc:
        failure = exc
    emit(
        sys.stdout,
        envelope,
        fmt=args.format,
        columns=_INGEST_COLUMNS,
        rows=rows,
    )
    if failure is not None:
        print(f"error: {failure}", file=sys.stderr)
        return 1
    return 0


_STATS_COLUMNS = (
    "database",
    "release",
    "date",
    "total",
    "unique",
    "singleton",
    "unique_pct",
    "singleton_pct",
    "lifetime_unique",
)


def cmd_stats(args) -> int:
    ws = _open_workspace(args)
    databases = [args.database] if args.database else ws.databases()
    rows = []
    for db in databases:
        ingested = ws.ingested_releases(db)
        if not ingested:
            raise CorpusError(f"database {db!r} has no ingested releases")
        lifetime = lifetime_unique(ws, db).total_unique
        chosen = ingested[-1:] if args.selector == "latest" else ingested
        for release in chosen:
            counts = release_counts(ws, release)
            rows.append(
                (
                    db,
                    release.label,
                    release.date.isoformat(),
                    counts.total,
                    counts.unique,
                    counts.singleton,
                    percentage(counts.unique, counts.total),
                    percentage(counts.singleton, counts.total),
                    lifetime,
                )
            )
    emit(
        sys.stdout,
        _envelope(ws.workspace_id, args, database=args.database, release=args.selector),
        fmt=args.format,
        columns=_STATS_COLUMNS,
        rows=rows,
    )
    return 0


_PATTERN_COLUMNS = (
    "label",
    "fingerprint",
    "records",
    "witness_releases",
    "witness_dates",
    "origin_record_absent",
    "sentence",
)


def cmd_patterns(args) -> int:
    ws = _open_workspace(args)
    report = detect_patterns(ws, args.database)
    counts = sentence_pattern_counts(report)
    releases = ws.releases(args.database)
    wanted = args.label

    def selected(label: str) -> bool:
        return wanted in ("all", label)

    instances = []
    if selected(PatternLabel.TRANSIENT.value):
        instances.extend(report.transient)
    if selected(PatternLabel.POSSIBLY_TRANSIENT.value):
        instances.extend(report.possibly_transient)
    if selected(PatternLabel.MISSING_ORIGIN.value):
        instances.extend(report.missing_origin.instances)
    rows = []
    payload_instances = []
    for inst in instances:
        if inst.label is PatternLabel.MISSING_ORIGIN:
            records = f"{inst.origin}->" + ";".join(inst.secondaries)
        else:
            records = inst.record or ""
        witness_labels = ";".join(releases[w].label for w in inst.witnesses)
        witness_dates = ";".join(releases[w].date.isoformat() for w in inst.witnesses)
        sentence = ws.sentence_text(inst.fingerprint)
        rows.append(
            (
                inst.label.value,
                inst.fingerprint,
                records,
                witness_labels,
                witness_dates,
                inst.origin_record_absent,
                sentence,
            )
        )
        payload_instances.append(
            {
                "label": inst.label.value,
                "fingerprint": inst.fingerprint,
                "record": inst.record,
                "origin": inst.origin,
                "secondaries": list(inst.secondaries),
                "witnesses": [
                    {
                        "ordinal": w,
                        "release": releases[w].label,
                        "date": releases[w].date.isoformat(),
                    }
                    for w in inst.witnesses
                ],
                "origin_record_absent": inst.origin_record_absent,
                "sentence": sentence,
            }
        )
    notes = {f"sentences_{k}": v for k, v in counts.items()}
    notes["origin_record_absences"] = report.missing_origin.origin_record_absences()
    emit(
        sys.stdout,
        _envelope(ws.workspace_id, args, database=args.database, label=args.label),
        fmt=args.format,
        columns=_PATTERN_COLUMNS,
        rows=rows,
        notes=notes,
        payload={"instances": payload_instances, "sentence_counts": counts}
        if args.format == "json"
        else None,
    )
    return 0


def _parse_merges(raw: list[str]) -> list[MergeGroup]:
    merges = []
    for item in raw:
        name, sep, members = item.partition("=")
        if not sep or not name or not members:
            raise CorpusError(f"bad --merge value {item!r}, expected NAME=DB1,DB2")
        merges.append(
            MergeGroup(name=name, members=tuple(m for m in members.split(",") if m))
        )
    return merges


def cmd_crossdb(args) -> int:
    ws = _open_workspace(args)
    merges = _parse_merges(args.merge)
    if args.mode == "partition":
        rows = [
            (";".join(row.combination), row.count)
            for row in combination_partition(ws, merges)
        ]
        emit(
            sys.stdout,
            _envelope(ws.workspace_id, args, merge=args.merge, mode=args.mode),
            fmt=args.format,
            columns=("combination", "count"),
            rows=rows,
            notes={"workspace_unique": workspace_unique(ws)},
        )
        return 0
    groups = resolve_groups(ws, merges)
    if args.origin:
        origins = [args.origin.lower()]
    else:
        origins = sorted(groups)
    rows = []
    for origin in origins:
        if args.destinations:
            destinations = [d for d in args.destinations.split(",") if d]
        else:
            destinations = [g for g in sorted(groups) if g != origin]
        if not destinations:
            continue
        for inst in detect_cross_missing_origin(ws, origin, destinations, merges):
            rows.append(
                (
                    inst.origin,
                    ";".join(inst.destinations),
                    inst.fingerprint,
                    inst.confidence,
                    inst.first_seen_origin.isoformat(),
                    inst.first_seen_destination.isoformat(),
                    inst.last_seen_origin.isoformat(),
                    ws.sentence_text(inst.fingerprint),
                )
            )
    emit(
        sys.stdout,
        _envelope(
            ws.workspace_id,
            args,
            merge=args.merge,
            mode=args.mode,
            origin=args.origin,
            destinations=args.destinations,
        ),
        fmt=args.format,
        columns=(
            "origin",
            "destinations",
            "fingerprint",
            "confidence",
            "first_seen_origin",
            "first_seen_destination",
            "last_seen_origin",
            "sentence",
        ),
        rows=rows,
    )
    return 0


def cmd_timeline(args) -> int:
    ws = _open_workspace(args)
    raw = args.sentence
    fp = raw if is_fingerprint(raw) else ws.fingerprint_for_text(raw)
    timeline = ws.timeline(fp)
    sentence = ws.sentence_text(fp)
    calendars = {db: ws.releases(db) for db in ws.databases()}
    if args.chart:
        series = []
        for record in sorted(
            timeline.by_record, key=lambda r: (r.database, r.accession)
        ):
            held = set(timeline.by_record[record])
            points = [
                [rel.date.isoformat(), 1 if rel.ordinal in held else 0]
                for rel in calendars[record.database]
            ]
            series.append(
                {
                    "database": record.database,
                    "record": record.accession,
                    "points": points,
                }
            )
        payload = {"fingerprint": fp, "sentence": sentence, "series": series}
        envelope = _envelope(ws.workspace_id, args, sentence=raw, chart=True)
        sys.stdout.write(
            json.dumps(
                {"envelope": envelope.to_dict(), "payload": payload},
                indent=1,
                sort_keys=True,
                ensure_ascii=False,
            )
            + "\n"
        )
        return 0
    rows = []
    for record in sorted(timeline.by_record, key=lambda r: (r.database, r.accession)):
        held = set(timeline.by_record[record])
        for rel in calendars[record.database]:
            rows.append(
                (
                    record.database,
                    record.accession,
                    rel.label,
                    rel.date.isoformat(),
                    1 if rel.ordinal in held else 0,
                )
            )
    emit(
        sys.stdout,
        _envelope(ws.workspace_id, args, sentence=raw),
        fmt=args.format,
        columns=("database", "record", "release", "date", "present"),
        rows=rows,
        notes={"fingerprint": fp, "sentence": sentence},
    )
    return 0


def cmd_integrity(args) -> int:
    ws = _open_workspace(args)
    problems = ws.integrity_check()
    emit(
        sys.stdout,
        _envelope(ws.workspace_id, args),
        fmt=args.format,
        columns=("problem",),
        rows=[(p,) for p in problems],
        notes={"problems": len(problems)},
    )
    return 1 if problems else 0


def cmd_synth(args) -> int:
    try:
        doc = json.loads(Path(args.spec).read_text("utf-8"))
    except FileNotFoundError:
        raise CorpusError(f"spec not found: {args.spec}") from None
    except json.JSONDecodeError as exc:
        raise CorpusError(f"spec {args.spec} is not valid JSON: {exc}") from None
    spec = GeneratorSpec.from_json(doc)
    manifest_path, truth = generate(spec, args.out)
    envelope = ReportEnvelope(
        tool="annotrace",
        version=__version__,
        workspace_id="-",
        command="synth",
        parameters={"spec": str(args.spec), "out": str(args.out)},
    )
    kinds = sorted({p.kind for p in truth.planted})
    rows = [(k, len(truth.by_kind(k))) for k in kinds]
    emit(
        sys.stdout,
        envelope,
        fmt=args.format,
        columns=("planted_kind", "count"),
        rows=rows,
        notes={"manifest": str(manifest_path), "truth": str(Path(args.out) / "truth.json")},
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
