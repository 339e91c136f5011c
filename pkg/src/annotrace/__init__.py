"""annotrace: sentence reuse and propagation-pattern mining over versioned
annotation databases."""

__version__ = "0.1.0"

from .extraction import (
    FormatKind,
    ParseOptions,
    ParseSummary,
    RawRecordText,
    extract_release,
    normalize,
    parse_release,
    split_sentences,
    strip_markup,
)
from .model import (
    CorpusError,
    NormalizedSentence,
    Occurrence,
    RecordId,
    ReleaseVersion,
    SentenceTimeline,
    fingerprint,
    normalize_text,
)
from .store import IngestSummary, Workspace

__all__ = [
    "__version__",
    "CorpusError",
    "FormatKind",
    "IngestSummary",
    "NormalizedSentence",
    "Occurrence",
    "ParseOptions",
    "ParseSummary",
    "RawRecordText",
    "RecordId",
    "ReleaseVersion",
    "SentenceTimeline",
    "Workspace",
    "extract_release",
    "fingerprint",
    "normalize",
    "normalize_text",
    "parse_release",
    "split_sentences",
    "strip_markup",
]
