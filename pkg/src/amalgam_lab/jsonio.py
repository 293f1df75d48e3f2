"""Stable JSON emission and re-loading of CLI artifacts.

Payloads carry ``schema_version`` and ``kind``; serialization sorts keys and
contains no timestamps, so identical runs are byte-identical.  Run metadata
(timestamp, argv) goes to a sidecar ``<output>.log`` only.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

SCHEMA_VERSION = 1


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit(text: str, output: str | None, argv: list[str] | None = None):
    """Write an artifact to a file or stdout; log run metadata to a sidecar."""
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    path.write_text(text)
    if argv is not None:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
        with open(f"{output}.log", "a") as log:
            log.write(f"{stamp} {' '.join(argv)}\n")


def load_artifact(path: str, expected_kind: str | None = None) -> dict:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict) or "kind" not in data:
        raise ValueError(f"{path} is not an amalgam-lab artifact")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema_version {data.get('schema_version')!r} in {path}")
    if expected_kind is not None and data["kind"] != expected_kind:
        raise ValueError(f"expected a {expected_kind} artifact, found {data['kind']}")
    return data
