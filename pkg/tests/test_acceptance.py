"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the line per
criterion as it completes. The scale exercise sits last; it moves ten
million occurrences and takes a couple of minutes.
"""

import io
import itertools
import json
import random
import resource
import shutil
import tempfile
import time
from datetime import date
from pathlib import Path

import pytest

from annotrace.cli import main as cli_main
from annotrace.crossdb import (
    MergeGroup,
    combination_partition,
    detect_cross_missing_origin,
    replay_cross_instance,
)
from annotrace.extraction import FormatKind, extract_release
from annotrace.manifest import load_manifest, run_manifest
from annotrace.metrics import release_counts, workspace_unique
from annotrace.model import ReleaseVersion
from annotrace.patterns import detect_patterns, replay_instance
from annotrace.store import Workspace
from annotrace.synth import (
    DatabaseSpec,
    GeneratorSpec,
    Quotas,
    brute_force_cross,
    brute_force_detect,
    corpus_to_store,
    generate,
    generate_scale_corpus,
    random_corpus,
)

from conftest import (
    INTERPRO_DATES,
    INTERPRO_PRESENCE,
    INTERPRO_FLOW_DATES,
    INTERPRO_FLOW_PRESENCE,
    PILI_SENTENCE,
    PRINTS_DATES,
    PRINTS_PRESENCE,
    TOY_DATES,
    TOY_PRESENCE,
    ingest_presence,
)


def passed(name: str) -> None:
    print(f"\nACCEPTANCE PASS: {name}", flush=True)


def fast_dir() -> str:
    base = Path("/dev/shm")
    if base.is_dir():
        return tempfile.mkdtemp(dir=base)
    return tempfile.mkdtemp()


def instance_key(instance):
    return (
        instance.label.value,
        instance.fingerprint,
        instance.record,
        instance.origin,
        instance.secondaries,
        instance.witnesses,
    )


# ---------------------------------------------------------------------------
# 1. oracle equivalence on 1,000 random corpora
# ---------------------------------------------------------------------------


def test_oracle_equivalence_on_1000_random_corpora():
    started = time.monotonic()
    rng = random.Random(20260809)
    base = fast_dir()
    mismatches = 0
    try:
        for trial in range(1000):
            corpus = random_corpus(
                rng, max_databases=2, max_records=20, max_releases=6, max_sentences=200
            )
            root = Path(base) / str(trial)
            ws = corpus_to_store(corpus, root)
            oracle = brute_force_detect(corpus)
            for db, expected in oracle.items():
                report = detect_patterns(ws, db, audit_record_absence=False)
                if (
                    sorted(map(instance_key, report.transient))
                    != sorted(map(instance_key, expected.transient))
                    or sorted(map(instance_key, report.possibly_transient))
                    != sorted(map(instance_key, expected.possibly_transient))
                    or sorted(map(instance_key, report.missing_origin.instances))
                    != sorted(map(instance_key, expected.missing_origin))
                    or report.missing_origin.ambiguous_origin
                    != expected.ambiguous_origin
                ):
                    mismatches += 1
            names = sorted(corpus.databases)
            if len(names) == 2:
                for origin in names:
                    destinations = [n for n in names if n != origin]
                    expected_cross = sorted(
                        brute_force_cross(corpus, origin, destinations),
                        key=lambda c: c.fingerprint,
                    )
                    got_cross = sorted(
                        detect_cross_missing_origin(ws, origin, destinations),
                        key=lambda c: c.fingerprint,
                    )
                    if got_cross != expected_cross:
                        mismatches += 1
            shutil.rmtree(root, ignore_errors=True)
    finally:
        shutil.rmtree(base, ignore_errors=True)
    elapsed = time.monotonic() - started
    assert mismatches == 0, f"{mismatches} detector/oracle mismatches"
    assert elapsed < 60, f"oracle equivalence took {elapsed:.1f}s (budget 60s)"
    passed(
        "oracle equivalence: 1000 random corpora, 0 mismatches "
        f"({elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# 2. planted-pattern recovery
# ---------------------------------------------------------------------------


def test_planted_pattern_recovery(tmp_path):
    spec = GeneratorSpec(
        seed=424242,
        databases=[
            # interleaved calendars, no shared dates
            DatabaseSpec("alpha", [date(2000 + i, 1, 15) for i in range(8)], 120),
            DatabaseSpec("beta", [date(2000 + i, 7, 15) for i in range(8)], 120),
        ],
        vocabulary=800,
        copy_within=0.1,
        copy_cross=0.05,
        remove=0.08,
        add=0.35,
        quotas=Quotas(
            transient=50, possibly_transient=50, missing_origin=50, cross=20
        ),
        cross_origin="alpha",
        cross_destination="beta",
    )
    out = tmp_path / "corpus"
    manifest_path, truth = generate(spec, out)
    ws = Workspace.create(tmp_path / "ws")
    list(run_manifest(ws, load_manifest(manifest_path)))

    reports = {db: detect_patterns(ws, db) for db in ws.databases()}
    pools = {
        db: {
            "transient": {
                (i.fingerprint, i.record, i.witnesses) for i in r.transient
            },
            "possibly-transient": {
                (i.fingerprint, i.record, i.witnesses)
                for i in r.possibly_transient
            },
            "missing-origin": {
                (i.fingerprint, i.origin, i.witnesses)
                for i in r.missing_origin.instances
            },
        }
        for db, r in reports.items()
    }
    cross_found = detect_cross_missing_origin(ws, "alpha", ["beta"])
    cross_keys = {(c.fingerprint, c.origin, c.destinations) for c in cross_found}

    missed = []
    for planted in truth.planted:
        if planted.kind == "cross":
            key = (planted.fingerprint, planted.origin, planted.destinations)
            if key not in cross_keys:
                missed.append(planted)
        else:
            who = planted.record if planted.kind != "missing-origin" else planted.origin
            key = (planted.fingerprint, who, planted.witnesses)
            if key not in pools[planted.database][planted.kind]:
                missed.append(planted)
    assert not missed, f"recall < 1.0: {len(missed)} planted instances missed"

    unsound = 0
    for db, report in reports.items():
        for instance in (
            report.transient
            + report.possibly_transient
            + report.missing_origin.instances
        ):
            if not replay_instance(ws, instance):
                unsound += 1
    for instance in cross_found:
        if not replay_cross_instance(ws, instance, ["beta"]):
            unsound += 1
    assert unsound == 0, f"soundness < 1.0: {unsound} instances fail replay"
    reported = sum(
        len(r.transient) + len(r.possibly_transient) + len(r.missing_origin.instances)
        for r in reports.values()
    ) + len(cross_found)
    passed(
        f"planted-pattern recovery: {len(truth.planted)} planted recalled, "
        f"{reported} reported instances all replay true"
    )


# ---------------------------------------------------------------------------
# 3. normalization fidelity
# ---------------------------------------------------------------------------


def test_normalization_fidelity():
    block = (
        b"ID A1\n"
        b"CC -!- FUNCTION: May be a transcription factor with important functions\n"
        b"CC     in eye and nasal development.\n"
        b"//\n"
    )
    release = ReleaseVersion("uni", "r0", 0, date(2001, 1, 1))
    out = list(
        extract_release(
            io.BytesIO(block),
            FormatKind.LINE_PREFIXED_FLAT,
            release,
            topics=["FUNCTION"],
        )
    )
    assert len(out) == 1
    record, sentence = out[0]
    expected = (
        "may be a transcription factor with important functions in eye and "
        "nasal development."
    )
    assert sentence.text == expected
    assert record.accession == "A1"
    passed("normalization fidelity: annotation block transforms byte-exactly")


# ---------------------------------------------------------------------------
# 4. fixture classifications
# ---------------------------------------------------------------------------


def test_fixture_classifications(tmp_path):
    ws = Workspace.create(tmp_path / "interpro")
    ingest_presence(ws, "interpro", INTERPRO_DATES, INTERPRO_PRESENCE)
    result = detect_patterns(ws, "interpro").missing_origin
    matching = [
        i
        for i in result.instances
        if ws.sentence_text(i.fingerprint) == PILI_SENTENCE
    ]
    assert len(matching) == 1
    assert matching[0].origin == "IPR004086"

    flow = Workspace.create(tmp_path / "flow")
    ingest_presence(flow, "prints", PRINTS_DATES, PRINTS_PRESENCE)
    ingest_presence(flow, "interpro", INTERPRO_FLOW_DATES, INTERPRO_FLOW_PRESENCE)
    instances = detect_cross_missing_origin(flow, "prints", ["interpro"])
    assert len(instances) == 1
    assert instances[0].origin == "prints"
    assert instances[0].destinations == ("interpro",)
    passed(
        "fixture classifications: within-database origin IPR004086; "
        "one cross-database instance prints->interpro"
    )


# ---------------------------------------------------------------------------
# 5. counting invariants
# ---------------------------------------------------------------------------


def test_counting_invariants(tmp_path):
    workspaces = []
    toy = Workspace.create(tmp_path / "toy")
    ingest_presence(toy, "x", TOY_DATES, TOY_PRESENCE)
    workspaces.append(toy)
    flow = Workspace.create(tmp_path / "flow")
    ingest_presence(flow, "prints", PRINTS_DATES, PRINTS_PRESENCE)
    ingest_presence(flow, "interpro", INTERPRO_FLOW_DATES, INTERPRO_FLOW_PRESENCE)
    workspaces.append(flow)
    rng = random.Random(5150)
    for i in range(25):
        corpus = random_corpus(rng, max_sentences=120)
        workspaces.append(corpus_to_store(corpus, tmp_path / f"r{i}"))

    releases_checked = 0
    for ws in workspaces:
        for db in ws.databases():
            for release in ws.ingested_releases(db):
                counts = release_counts(ws, release, recount=True)
                assert 0 <= counts.singleton <= counts.unique <= counts.total
                releases_checked += 1
        rows = combination_partition(ws)
        total_unique = workspace_unique(ws)
        assert sum(r.count for r in rows) == total_unique
        names = ws.databases()
        if len(names) >= 2:
            merged = combination_partition(
                ws, [MergeGroup("fused", tuple(names[:2]))]
            )
            assert sum(r.count for r in merged) == total_unique
            assert len(merged) <= len(rows)
    passed(
        f"counting invariants: {releases_checked} releases obey "
        "singleton <= unique <= total; partitions sum to workspace unique; "
        "merging preserves the sum"
    )


# ---------------------------------------------------------------------------
# 6. determinism and persistence
# ---------------------------------------------------------------------------


def payload_of(argv) -> list[str]:
    import contextlib

    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        code = cli_main(argv)
    assert code == 0, buffer.getvalue()
    return [
        line for line in buffer.getvalue().splitlines() if not line.startswith("## ")
    ]


def test_determinism_and_persistence(tmp_path):
    payloads = []
    for i, order in enumerate(itertools.permutations(range(3))):
        root = tmp_path / f"perm{i}"
        ws = Workspace.create(root)
        ingest_presence(ws, "x", TOY_DATES, TOY_PRESENCE, order=list(order))
        snapshot = (
            payload_of(["--workspace", str(root), "--quiet", "stats", "--release", "all"]),
            payload_of(["--workspace", str(root), "--quiet", "patterns", "--database", "x"]),
            payload_of(["--workspace", str(root), "--quiet", "crossdb"]),
            payload_of(["--workspace", str(root), "--quiet", "timeline", "gamma spans the membrane."]),
        )
        payloads.append(snapshot)
    assert all(p == payloads[0] for p in payloads[1:]), (
        "ingest-order permutations changed a query payload"
    )

    # reopening the workspace must not change any payload either
    root = tmp_path / "perm0"
    again = (
        payload_of(["--workspace", str(root), "--quiet", "stats", "--release", "all"]),
        payload_of(["--workspace", str(root), "--quiet", "patterns", "--database", "x"]),
        payload_of(["--workspace", str(root), "--quiet", "crossdb"]),
        payload_of(["--workspace", str(root), "--quiet", "timeline", "gamma spans the membrane."]),
    )
    assert again == payloads[0]
    passed(
        "determinism and persistence: 6 ingest permutations and a reopen "
        "produce byte-identical payloads"
    )


# ---------------------------------------------------------------------------
# 7. scale smoke test (last: minutes, not seconds)
# ---------------------------------------------------------------------------


def test_zz_scale_smoke():
    budget_seconds = 600
    budget_bytes = 4 * 1024**3
    occurrences = 10_000_000
    started = time.monotonic()
    base = fast_dir()
    try:
        manifest_path = generate_scale_corpus(
            Path(base) / "bulk",
            releases=4,
            records=50_000,
            sentences_per_record=50,
            vocabulary=150_000,
        )
        ws = Workspace.create(Path(base) / "ws")
        total_ingested = 0
        for summary in run_manifest(ws, load_manifest(manifest_path)):
            total_ingested += summary.occurrences
        assert total_ingested == occurrences
        for release in ws.ingested_releases("bulk"):
            cached = release_counts(ws, release)
            recounted = release_counts(ws, release, recount=True)
            assert cached == recounted
            assert cached.total == occurrences // 4
    finally:
        shutil.rmtree(base, ignore_errors=True)
    elapsed = time.monotonic() - started
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    assert elapsed < budget_seconds, f"scale run took {elapsed:.0f}s"
    assert peak < budget_bytes, f"peak memory {peak / 1024**2:.0f} MiB"
    passed(
        f"scale smoke: {occurrences:,} occurrences ingested and recounted in "
        f"{elapsed:.0f}s, peak memory {peak / 1024**2:.0f} MiB"
    )
