"""Shared fixtures: a small hand-checked corpus and two scenario corpora."""

from __future__ import annotations

from datetime import date

import pytest

from annotrace.model import NormalizedSentence, RecordId
from annotrace.store import Workspace

# Hand-checked toy corpus: one database "x", three dated releases, two
# records. Presence sets by release ordinal:
#   S1: A@{0}            gone after the first release
#   S2: B@{2}            arrives in the latest release only
#   S3: A@{0,1}, B@{1,2} copied to B, then dropped from A
#   S4: A@{0,1,2}        stable
TOY_DATES = [
    ("v0", date(2001, 1, 1)),
    ("v1", date(2002, 1, 1)),
    ("v2", date(2003, 1, 1)),
]

S1 = "alpha binds dna."
S2 = "beta folds quickly."
S3 = "gamma spans the membrane."
S4 = "delta hydrolyses atp."

TOY_PRESENCE: dict[str, dict[str, set[int]]] = {
    S1: {"A": {0}},
    S2: {"B": {2}},
    S3: {"A": {0, 1}, "B": {1, 2}},
    S4: {"A": {0, 1, 2}},
}


def ingest_presence(
    ws: Workspace,
    database: str,
    releases: list[tuple[str, date]],
    presence: dict[str, dict[str, set[int]]],
    order: list[int] | None = None,
) -> None:
    """Register a database and ingest its presence table release by release."""
    ws.register_database(database, releases)
    ordinals = order if order is not None else list(range(len(releases)))
    for ordinal in ordinals:
        release = ws.release(database, ordinal)
        pairs = sorted(
            (record, text)
            for text, by_record in presence.items()
            for record, held in by_record.items()
            if ordinal in held
        )
        ws.ingest(
            release,
            (
                (RecordId(database, record), NormalizedSentence.from_text(text))
                for record, text in pairs
            ),
        )


@pytest.fixture
def toy_workspace(tmp_path) -> Workspace:
    ws = Workspace.create(tmp_path / "toy-ws")
    ingest_presence(ws, "x", TOY_DATES, TOY_PRESENCE)
    return ws


# A within-database missing-origin scenario: the sentence starts in entry
# IPR004086, is copied to IPR005430 a release later, then disappears from
# IPR004086 while IPR005430 keeps it. Background sentences keep both
# records non-empty in every release they exist in.
PILI_SENTENCE = (
    "pyelonephritogenic e.coli specifically invade the uroepithelium by "
    "expressing between 100 and 300 pili on their cell surface."
)

INTERPRO_DATES = [
    ("2001", date(2001, 3, 1)),
    ("2002", date(2002, 3, 1)),
    ("2003", date(2003, 3, 1)),
    ("2004", date(2004, 3, 1)),
]

INTERPRO_PRESENCE = {
    PILI_SENTENCE: {"IPR004086": {0, 1}, "IPR005430": {1, 2, 3}},
    "these proteins share a conserved amino-terminal domain.": {
        "IPR004086": {0, 1, 2, 3}
    },
    "members of this family are membrane anchored.": {"IPR005430": {1, 2, 3}},
}


@pytest.fixture
def interpro_workspace(tmp_path) -> Workspace:
    ws = Workspace.create(tmp_path / "interpro-ws")
    ingest_presence(ws, "interpro", INTERPRO_DATES, INTERPRO_PRESENCE)
    return ws


# A cross-database flow: the sentence appears first in prints (1999), turns
# up in interpro from 2000 (record IPR001055, later also IPR018298), and
# leaves prints entirely around 2008 while interpro keeps it.
FLOW_SENTENCE = "conserved cysteines stabilise the folded domain."

PRINTS_DATES = [
    ("r0", date(1999, 1, 1)),
    ("r1", date(2003, 1, 1)),
    ("r2", date(2008, 1, 1)),
]
PRINTS_PRESENCE = {
    FLOW_SENTENCE: {"PR00001": {0, 1}},
    "this fingerprint identifies the receptor family.": {"PR00001": {0, 1, 2}},
}

INTERPRO_FLOW_DATES = [
    ("r0", date(1999, 6, 1)),
    ("r1", date(2000, 6, 1)),
    ("r2", date(2008, 6, 1)),
]
INTERPRO_FLOW_PRESENCE = {
    FLOW_SENTENCE: {"IPR001055": {1, 2}, "IPR018298": {2}},
    "a description of the family follows.": {"IPR001055": {0, 1, 2}},
    "this entry covers several receptor subtypes.": {"IPR018298": {2}},
}


@pytest.fixture
def flow_workspace(tmp_path) -> Workspace:
    ws = Workspace.create(tmp_path / "flow-ws")
    ingest_presence(ws, "prints", PRINTS_DATES, PRINTS_PRESENCE)
    ingest_presence(ws, "interpro", INTERPRO_FLOW_DATES, INTERPRO_FLOW_PRESENCE)
    return ws
