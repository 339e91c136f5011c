import itertools
from datetime import date

import pytest

from annotrace.model import CorpusError, NormalizedSentence, RecordId, fingerprint
from annotrace.store import (
    AlreadyIngestedError,
    LockError,
    NotFoundError,
    StoreIntegrityError,
    Workspace,
    WorkspaceError,
)

from conftest import S1, S2, S3, S4, TOY_DATES, TOY_PRESENCE, ingest_presence


def pairs_for(database, presence, ordinal):
    rows = sorted(
        (record, text)
        for text, by_record in presence.items()
        for record, held in by_record.items()
        if ordinal in held
    )
    return [
        (RecordId(database, record), NormalizedSentence.from_text(text))
        for record, text in rows
    ]


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def test_register_assigns_ordinals_and_validates(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    releases = ws.register_database("X", TOY_DATES)
    assert [r.ordinal for r in releases] == [0, 1, 2]
    assert [r.database for r in releases] == ["x", "x", "x"]
    # identical re-registration is a no-op
    assert ws.register_database("x", TOY_DATES) == releases
    with pytest.raises(WorkspaceError):
        ws.register_database("x", TOY_DATES[:2])


def test_register_rejects_unsorted_dates_and_duplicate_labels(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    with pytest.raises(WorkspaceError):
        ws.register_database(
            "bad", [("a", date(2002, 1, 1)), ("b", date(2001, 1, 1))]
        )
    with pytest.raises(WorkspaceError):
        ws.register_database(
            "bad2", [("a", date(2001, 1, 1)), ("a", date(2002, 1, 1))]
        )


def test_open_rejects_foreign_format(tmp_path):
    root = tmp_path / "ws"
    Workspace.create(root)
    registry = (root / "workspace.json").read_text()
    (root / "workspace.json").write_text(
        registry.replace("annotrace.workspace/1", "other.tool/9")
    )
    with pytest.raises(WorkspaceError):
        Workspace.open(root)


def test_open_missing_workspace(tmp_path):
    with pytest.raises(NotFoundError):
        Workspace.open(tmp_path / "nowhere")


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def test_ingest_summary_counts(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("x", TOY_DATES)
    summary = ws.ingest(ws.release("x", 0), pairs_for("x", TOY_PRESENCE, 0))
    assert summary.occurrences == 3
    assert summary.records == 1  # only record A holds sentences at ordinal 0
    assert summary.duplicates_collapsed == 0
    assert ws.is_ingested(ws.release("x", 0))


def test_ingest_empty_stream_marks_release(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("x", TOY_DATES)
    summary = ws.ingest(ws.release("x", 0), [])
    assert summary.occurrences == 0
    assert ws.is_ingested(ws.release("x", 0))
    assert ws.release_stats(ws.release("x", 0)) == (0, 0, 0, 0)


def test_double_ingest_rejected_store_unchanged(toy_workspace):
    release = toy_workspace.release("x", 1)
    before = toy_workspace.release_stats(release)
    with pytest.raises(AlreadyIngestedError):
        toy_workspace.ingest(release, [])
    assert toy_workspace.release_stats(release) == before


def test_ingest_unregistered_release_rejected(tmp_path):
    from annotrace.model import ReleaseVersion

    ws = Workspace.create(tmp_path / "ws")
    ghost = ReleaseVersion("x", "v0", 0, date(2001, 1, 1))
    with pytest.raises(NotFoundError):
        ws.ingest(ghost, [])


def test_ingest_collapses_duplicate_rows(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("x", TOY_DATES[:1])
    sentence = NormalizedSentence.from_text("twice stated.")
    record = RecordId("x", "A")
    summary = ws.ingest(ws.release("x", 0), [(record, sentence), (record, sentence)])
    assert summary.occurrences == 1
    assert summary.duplicates_collapsed == 1


def test_fingerprint_collision_is_fatal(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("x", TOY_DATES[:2])
    good = NormalizedSentence.from_text("one text.")
    forged = NormalizedSentence(text="another text.", fingerprint=good.fingerprint)
    ws.ingest(ws.release("x", 0), [(RecordId("x", "A"), good)])
    with pytest.raises(StoreIntegrityError):
        ws.ingest(ws.release("x", 1), [(RecordId("x", "A"), forged)])
    assert not ws.is_ingested(ws.release("x", 1))


def test_ingest_rejects_wrong_database_and_bad_accession(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("x", TOY_DATES[:1])
    ws.register_database("y", TOY_DATES[:1])
    s = NormalizedSentence.from_text("text.")
    with pytest.raises(WorkspaceError):
        ws.ingest(ws.release("x", 0), [(RecordId("y", "A"), s)])
    with pytest.raises(CorpusError):
        ws.ingest(ws.release("x", 0), [(RecordId("x", "A\tB"), s)])


def test_failed_ingest_leaves_no_partial_release(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("x", TOY_DATES[:1])

    def exploding():
        yield (RecordId("x", "A"), NormalizedSentence.from_text("fine."))
        raise RuntimeError("source died")

    with pytest.raises(RuntimeError):
        ws.ingest(ws.release("x", 0), exploding())
    assert not ws.is_ingested(ws.release("x", 0))
    assert not ws.has_fingerprint(fingerprint("fine."))
    # retry succeeds
    summary = ws.ingest(ws.release("x", 0), pairs_for("x", TOY_PRESENCE, 0))
    assert summary.occurrences == 3


def test_write_lock_excludes_second_writer(toy_workspace):
    with toy_workspace._write_lock():
        with pytest.raises(LockError):
            with toy_workspace._write_lock():
                pass


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


def test_timeline_multi_record(toy_workspace):
    timeline = toy_workspace.timeline(fingerprint(S3))
    assert {
        (r.accession): v for r, v in timeline.by_record.items()
    } == {"A": (0, 1), "B": (1, 2)}


def test_timeline_single_occurrence(toy_workspace):
    timeline = toy_workspace.timeline(fingerprint(S2))
    assert {(r.accession): v for r, v in timeline.by_record.items()} == {"B": (2,)}


def test_timeline_by_text_equals_by_fingerprint(toy_workspace):
    via_text = toy_workspace.timeline_for_text("Gamma  SPANS the membrane.")
    via_fp = toy_workspace.timeline(fingerprint(S3))
    assert via_text == via_fp


def test_timeline_unknown_fingerprint(toy_workspace):
    with pytest.raises(NotFoundError):
        toy_workspace.timeline("0" * 32)


def test_release_occurrences_exactly_once_in_order(toy_workspace):
    release = toy_workspace.release("x", 1)
    occurrences = list(toy_workspace.release_occurrences(release))
    keys = [(o.record.accession, o.fingerprint) for o in occurrences]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys) == 3
    assert {(o.record.accession, toy_workspace.sentence_text(o.fingerprint)) for o in occurrences} == {
        ("A", S3),
        ("A", S4),
        ("B", S3),
    }
    again = [
        (o.record.accession, o.fingerprint)
        for o in toy_workspace.release_occurrences(release)
    ]
    assert again == keys


def test_release_occurrences_requires_ingested(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("x", TOY_DATES)
    with pytest.raises(NotFoundError):
        list(ws.release_occurrences(ws.release("x", 0)))


def test_timelines_reconstruct_occurrence_multiset(toy_workspace):
    from_releases = set()
    for ordinal in range(3):
        release = toy_workspace.release("x", ordinal)
        for occ in toy_workspace.release_occurrences(release):
            from_releases.add((occ.fingerprint, occ.record.accession, ordinal))
    from_timelines = set()
    seen_fps = {
        fp for fp, _, _ in toy_workspace.iter_database_rows_by_fp("x")
    }
    for fp in seen_fps:
        timeline = toy_workspace.timeline(fp)
        for record, ordinals in timeline.by_record.items():
            for ordinal in ordinals:
                from_timelines.add((fp, record.accession, ordinal))
    assert from_timelines == from_releases


def test_by_record_and_by_fp_indexes_consistent(toy_workspace):
    for ordinal in range(3):
        release = toy_workspace.release("x", ordinal)
        via_rec = {
            (o.fingerprint, o.record.accession)
            for o in toy_workspace.release_occurrences(release)
        }
        via_fp = {
            (fp, acc) for fp, acc in toy_workspace.iter_release_rows_by_fp(release)
        }
        assert via_rec == via_fp


def test_record_presence(toy_workspace):
    presence = toy_workspace.record_presence("x")
    assert presence == {"A": {0, 1, 2}, "B": {1, 2}}


# ---------------------------------------------------------------------------
# permutation and persistence invariance
# ---------------------------------------------------------------------------


def query_snapshot(ws: Workspace) -> tuple:
    stats = tuple(ws.release_stats(ws.release("x", o)) for o in range(3))
    rows = tuple(
        tuple(ws.iter_release_rows_by_fp(ws.release("x", o))) for o in range(3)
    )
    occurrences = tuple(
        tuple(
            (o.record.accession, o.fingerprint)
            for o in ws.release_occurrences(ws.release("x", ordinal))
        )
        for ordinal in range(3)
    )
    sentences = tuple(
        sorted((fp, ws.sentence_text(fp)) for fp, _, _ in ws.iter_database_rows_by_fp("x"))
    )
    return stats, rows, occurrences, sentences


def test_ingest_order_permutation_invariance(tmp_path):
    snapshots = []
    for i, order in enumerate(itertools.permutations(range(3))):
        ws = Workspace.create(tmp_path / f"ws{i}")
        ingest_presence(ws, "x", TOY_DATES, TOY_PRESENCE, order=list(order))
        snapshots.append(query_snapshot(ws))
    assert all(snapshot == snapshots[0] for snapshot in snapshots[1:])


def test_reopen_preserves_all_queries(tmp_path):
    root = tmp_path / "ws"
    ws = Workspace.create(root)
    ingest_presence(ws, "x", TOY_DATES, TOY_PRESENCE)
    before = query_snapshot(ws)
    reopened = Workspace.open(root)
    assert query_snapshot(reopened) == before


def test_integrity_check_clean_and_detects_tampering(toy_workspace):
    assert toy_workspace.integrity_check() == []
    path = toy_workspace._release_path("x", 1, "byfp")
    data = path.read_bytes()
    path.write_bytes(data + data[: data.index(b"\n") + 1])
    problems = toy_workspace.integrity_check()
    assert problems


# ---------------------------------------------------------------------------
# sparse index at moderate size
# ---------------------------------------------------------------------------


def test_sparse_index_lookup_spans_blocks(tmp_path):
    ws = Workspace.create(tmp_path / "ws")
    ws.register_database("big", [("r0", date(2001, 1, 1))])
    n = 1500
    rows = [
        (RecordId("big", f"R{i % 7}"), NormalizedSentence.from_text(f"sentence {i:05d}."))
        for i in range(n)
    ]
    ws.ingest(ws.release("big", 0), rows)
    assert ws.release_stats(ws.release("big", 0))[1] == n
    for i in (0, 1, 511, 512, 513, 1024, 1499):
        fp = fingerprint(f"sentence {i:05d}.")
        timeline = ws.timeline(fp)
        assert {r.accession for r in timeline.by_record} == {f"R{i % 7}"}
