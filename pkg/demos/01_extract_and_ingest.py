"""Walkthrough: parse release files in two formats and build a workspace.

Creates a tiny two-database corpus on disk (one flat-file database, one
XML database), describes it with an ingest manifest, ingests everything
and prints the per-release reuse statistics.

Run:  python3 demos/01_extract_and_ingest.py
"""

import json
import tempfile
from pathlib import Path

from annotrace.manifest import load_manifest, run_manifest
from annotrace.metrics import lifetime_unique, redundancy_profile, release_counts
from annotrace.store import Workspace

FLAT_2001 = """\
ID P10000
CC -!- FUNCTION: May be a transcription factor with important functions
CC     in eye and nasal development.
CC -!- SUBUNIT: Homodimer.
//
ID P20000
CC -!- FUNCTION: Binds DNA.
//
"""

FLAT_2002 = """\
ID P10000
CC -!- FUNCTION: May be a transcription factor with important functions
CC     in eye and nasal development.
//
ID P20000
CC -!- FUNCTION: Binds DNA.
CC -!- FUNCTION: May be a transcription factor with important functions
CC     in eye and nasal development.
//
"""

XML_2001 = """\
<interprodb>
  <interpro id="IPR000001">
    <abstract>This family binds <i>E. coli</i> pili. Two motifs. One family.</abstract>
  </interpro>
</interprodb>
"""

XML_2002 = """\
<interprodb>
  <interpro id="IPR000001">
    <abstract>Two motifs. One family.</abstract>
  </interpro>
  <interpro id="IPR000002">
    <abstract>This family binds <i>E. coli</i> pili.</abstract>
  </interpro>
</interprodb>
"""


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp)
        dumps = base / "dumps"
        dumps.mkdir()
        (dumps / "flat-2001.dat").write_text(FLAT_2001)
        (dumps / "flat-2002.dat").write_text(FLAT_2002)
        (dumps / "xml-2001.xml").write_text(XML_2001)
        (dumps / "xml-2002.xml").write_text(XML_2002)

        manifest = {
            "databases": [
                {
                    "name": "flatdb",
                    "releases": [
                        {
                            "label": "2001",
                            "date": "2001-06-01",
                            "path": "dumps/flat-2001.dat",
                            "format": "line-prefixed-flat",
                            "topics": ["FUNCTION"],
                        },
                        {
                            "label": "2002",
                            "date": "2002-06-01",
                            "path": "dumps/flat-2002.dat",
                            "format": "line-prefixed-flat",
                            "topics": ["FUNCTION"],
                        },
                    ],
                },
                {
                    "name": "xmldb",
                    "releases": [
                        {
                            "label": "2001",
                            "date": "2001-09-01",
                            "path": "dumps/xml-2001.xml",
                            "format": "xml-abstract",
                        },
                        {
                            "label": "2002",
                            "date": "2002-09-01",
                            "path": "dumps/xml-2002.xml",
                            "format": "xml-abstract",
                        },
                    ],
                },
            ]
        }
        manifest_path = base / "manifest.json"
        manifest_path.write_text(json.dumps(manifest, indent=1))

        ws = Workspace.create(base / "workspace")
        print("ingesting releases listed in", manifest_path.name)
        for summary in run_manifest(ws, load_manifest(manifest_path)):
            r = summary.release
            print(
                f"  {r.database}/{r.label}: {summary.records} records, "
                f"{summary.occurrences} occurrences "
                f"({summary.duplicates_collapsed} duplicates collapsed)"
            )

        print("\nper-release counts (total / unique / singleton):")
        for db in ws.databases():
            for release in ws.ingested_releases(db):
                c = release_counts(ws, release)
                print(
                    f"  {db}/{release.label}: {c.total} / {c.unique} / {c.singleton}"
                )
            lifetime = lifetime_unique(ws, db)
            print(f"  {db} lifetime unique sentences: {lifetime.total_unique}")

        print("\nredundancy profile of the latest releases:")
        for row in redundancy_profile(ws):
            print(
                f"  {row.database}/{row.release.label}: "
                f"unique {row.unique_pct}%, singleton {row.singleton_pct}%"
            )


if __name__ == "__main__":
    main()
