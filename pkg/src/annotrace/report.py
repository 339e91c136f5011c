"""Report envelopes and table rendering.

Every emitted report carries an envelope (tool version, workspace id,
command, parameters, timestamp). In TSV output the envelope rides in
``##``-prefixed comment lines and payload-level notes in ``#``-prefixed
lines, so consumers can compare payloads across runs by dropping the ``##``
lines; only the envelope may vary between identical queries. JSON output
nests the same split under "envelope" and "payload" keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Mapping, Sequence

__all__ = ["ReportEnvelope", "render_tsv", "render_json"]


@dataclass
class ReportEnvelope:
    tool: str
    version: str
    workspace_id: str
    command: str
    parameters: dict = field(default_factory=dict)
    generated_at: str = ""

    def __post_init__(self) -> None:
        if not self.generated_at:
            self.generated_at = datetime.now(timezone.utc).isoformat(
                timespec="seconds"
            )

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "workspace_id": self.workspace_id,
            "command": self.command,
            "parameters": self.parameters,
            "generated_at": self.generated_at,
        }

    def tsv_lines(self) -> list[str]:
        params = json.dumps(self.parameters, sort_keys=True, ensure_ascii=False)
        return [
            f"## {self.tool} {self.version}",
            f"## workspace: {self.workspace_id}",
            f"## command: {self.command}",
            f"## parameters: {params}",
            f"## generated: {self.generated_at}",
        ]


def render_tsv(
    envelope: ReportEnvelope,
    columns: Sequence[str],
    rows: Sequence[Sequence[object]],
    notes: Mapping[str, object] | None = None,
) -> str:
    lines = envelope.tsv_lines()
    for key in sorted(notes or {}):
        lines.append(f"# {key}: {notes[key]}")
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(_cell(value) for value in row))
    return "\n".join(lines) + "\n"


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_json(envelope: ReportEnvelope, payload: object) -> str:
    return (
        json.dumps(
            {"envelope": envelope.to_dict(), "payload": payload},
            indent=1,
            sort_keys=True,
            ensure_ascii=False,
            default=str,
        )
        + "\n"
    )


def emit(
    stream: IO[str],
    envelope: ReportEnvelope,
    *,
    fmt: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[object]],
    notes: Mapping[str, object] | None = None,
    payload: object = None,
) -> None:
    """Write one report in the chosen format.

    ``payload`` overrides the default JSON payload (which mirrors the
    columns/rows as a list of objects plus the notes).
    """
    if fmt == "json":
        if payload is None:
            payload = {
                "rows": [
                    {col: _jsonable(val) for col, val in zip(columns, row)}
                    for row in rows
                ],
            }
            if notes:
                payload.update({k: _jsonable(v) for k, v in notes.items()})
        stream.write(render_json(envelope, payload))
    else:
        stream.write(render_tsv(envelope, columns, rows, notes))


def _jsonable(value: object) -> object:
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)
