"""Run manifests and canonical JSON output.

Every output file embeds a manifest (command, config echo, seed, version,
input hashes, timestamp) so a run can be reproduced from the file alone.
Files are emitted by a small canonical serializer: floats carry 17
significant digits (exact round-trip), keys keep insertion order, and the
byte stream is a pure function of the data, which is what makes
fixed-seed reruns byte-identical. Deterministic outputs (search results)
null out the timestamp, the one volatile manifest field.
"""

import datetime
import hashlib
import json
import math

from .errors import SchemaViolation

__all__ = ["dumps_canonical", "build_manifest", "write_output", "load_json"]

TOOL_VERSION = "0.1.0"


def _format_float(x):
    if not math.isfinite(x):
        raise SchemaViolation("non-finite float cannot be serialized")
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "E" not in s and "n" not in s:
        s += ".0"
    return s


def dumps_canonical(obj, indent=None, _level=0):
    """Serialize to JSON with 17-significant-digit floats and stable layout."""
    pad = "" if indent is None else "\n" + " " * indent * (_level + 1)
    end = "" if indent is None else "\n" + " " * indent * _level
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {dumps_canonical(v, indent, _level + 1)}"
            for k, v in obj.items()
        ]
        return "{" + ",".join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{dumps_canonical(v, indent, _level + 1)}" for v in obj]
        return "[" + ",".join(items) + end + "]"
    raise SchemaViolation(f"cannot serialize {type(obj).__name__}")


def _hash_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(command, config=None, seed=None, inputs=(), deterministic=False):
    """Manifest dict embedded in every output file.

    ``deterministic`` replaces the wall-clock timestamp with null so that
    reruns with the same seed produce byte-identical files.
    """
    timestamp = (
        None
        if deterministic
        else datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    )
    return {
        "command": command,
        "config": config or {},
        "seed": seed,
        "version": TOOL_VERSION,
        "input_hashes": {str(p): _hash_file(p) for p in inputs},
        "timestamp": timestamp,
    }


def write_output(path, payload, manifest, pretty=False):
    doc = dict(payload)
    doc["manifest"] = manifest
    text = dumps_canonical(doc, indent=2 if pretty else None)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON ({exc})") from exc
