"""Shared domain vocabulary: databases, releases, records, sentences, occurrences.

All types here are immutable values and safe to share between threads.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import date
from typing import Mapping

__all__ = [
    "CorpusError",
    "NormalizationError",
    "EmptySentenceError",
    "FINGERPRINT_HEX_LEN",
    "valid_database_id",
    "valid_accession",
    "normalize_text",
    "is_normalized",
    "fingerprint",
    "ReleaseVersion",
    "RecordId",
    "NormalizedSentence",
    "Occurrence",
    "SentenceTimeline",
]


class CorpusError(Exception):
    """Base class for domain-level errors."""


class NormalizationError(CorpusError):
    """Text violates the canonical-sentence invariants."""


class EmptySentenceError(NormalizationError):
    """Sentence reduced to nothing after normalization; caller should drop it."""


# 128-bit fingerprints, hex encoded.  64 bits would carry non-negligible
# birthday-collision odds at tens of millions of distinct sentences.
FINGERPRINT_HEX_LEN = 32

_WHITESPACE_RUN = re.compile(r"\s+")
_DB_ID_FORBIDDEN = re.compile(r"[\s/\\]")
_HEX_FP = re.compile(r"^[0-9a-f]{32}$")


def valid_database_id(name: str) -> str:
    """Case-fold and validate a database identifier.

    Identifiers are compared case-insensitively; the folded form is the
    canonical one used everywhere (registry keys, file names, reports).
    """
    if not isinstance(name, str) or not name:
        raise CorpusError("database id must be a non-empty string")
    folded = name.lower()
    if _DB_ID_FORBIDDEN.search(folded):
        raise CorpusError(
            f"database id {name!r} must not contain whitespace or path separators"
        )
    return folded


def valid_accession(accession: str) -> str:
    """Validate a record accession. Tabs and newlines would corrupt the store."""
    if not accession:
        raise CorpusError("record accession must be non-empty")
    if "\t" in accession or "\n" in accession or "\r" in accession:
        raise CorpusError(f"record accession {accession!r} contains control whitespace")
    return accession


def normalize_text(raw: str) -> str:
    """Canonical sentence form: lower-cased, whitespace runs collapsed to one space.

    Simple one-to-one case folding (str.lower), not locale-aware, so the
    result is deterministic across platforms. Idempotent by construction.
    """
    return _WHITESPACE_RUN.sub(" ", raw.lower()).strip()


def is_normalized(text: str) -> bool:
    """True iff *text* is a non-empty fixed point of :func:`normalize_text`."""
    return bool(text) and normalize_text(text) == text


def fingerprint(text: str) -> str:
    """128-bit content hash of a canonical sentence, as 32 hex characters.

    Deterministic and platform-independent. The store keeps the text next to
    the fingerprint, so a collision is detectable by direct comparison.
    Rejects text that is not in canonical form: hashing un-normalized text
    would silently split identical sentences into distinct identities.
    """
    if not text:
        raise EmptySentenceError("cannot fingerprint an empty sentence")
    if not is_normalized(text):
        raise NormalizationError(f"text is not in canonical form: {text!r}")
    return hashlib.blake2b(text.encode("utf-8"), digest_size=16).hexdigest()


def is_fingerprint(value: str) -> bool:
    return bool(_HEX_FP.match(value))


@dataclass(frozen=True, slots=True)
class ReleaseVersion:
    """One dated snapshot of a database.

    ``date`` is an upper bound on when content entered the database: a
    sentence first seen in this release may have been added any time since
    the previous one. ``date_estimated`` marks dates inherited from
    workspace configuration rather than declared by the source file.
    """

    database: str
    label: str
    ordinal: int
    date: date
    date_estimated: bool = False

    def __post_init__(self) -> None:
        if self.ordinal < 0:
            raise CorpusError("release ordinal must be >= 0")
        if not self.label:
            raise CorpusError("release label must be non-empty")


@dataclass(frozen=True, slots=True)
class RecordId:
    """A database entry, identified by its accession string verbatim.

    The same accession in two releases denotes the same entry; accession
    renames and merges are not modeled.
    """

    database: str
    accession: str


@dataclass(frozen=True, slots=True)
class NormalizedSentence:
    """A canonical sentence plus its content fingerprint: the unit of reuse."""

    text: str
    fingerprint: str

    @classmethod
    def from_text(cls, text: str) -> "NormalizedSentence":
        return cls(text=text, fingerprint=fingerprint(text))


@dataclass(frozen=True, slots=True)
class Occurrence:
    """The atomic observation: sentence X was in record Y at release Z."""

    fingerprint: str
    record: RecordId
    release: ReleaseVersion


@dataclass(frozen=True)
class SentenceTimeline:
    """Per-record presence history of one sentence.

    ``by_record`` maps each record that ever contained the sentence to the
    sorted release ordinals in which it was present. Records without any
    presence are absent from the map, never stored as empty sets.
    """

    fingerprint: str
    by_record: Mapping[RecordId, tuple[int, ...]] = field(default_factory=dict)

    def occurrences(self) -> int:
        return sum(len(v) for v in self.by_record.values())
