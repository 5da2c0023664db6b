"""Parsing external evidence files into Attack records.

Two formats map onto the same model: CSV for analyst hand-entry and
JSON for tool integration. Parsing is deterministic and order
preserving, and no invalid Attack ever escapes: the parsed record is
validated before it is returned.

CSV dialect: UTF-8, comma separated, double-quote escaping, header row
required. Columns are ``id, kind, description, confidence`` followed by
any number of attribute cells, each holding one ``key=value`` token.
A blank confidence cell defaults to 1.0 (the analyst asserted the
evidence). Unknown kind strings map to ``other`` with a warning.

JSON: either a full attack document (``id``, ``name``,
``detection_state``, ``evidence`` array) or a bare array of evidence
documents with the attack metadata supplied by the caller.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

from .errors import (
    ConfidenceOutOfRange,
    DuplicateEvidenceId,
    IoFailure,
    MalformedRecord,
)
from .model import Attack, Evidence, EvidenceKind, validate_attack

logger = logging.getLogger(__name__)

_EXPECTED_HEADER = ("id", "kind", "description", "confidence")

# Case-insensitive aliases accepted for evidence kinds. Canonical values
# map to themselves so serialized attacks re-parse unchanged.
KIND_ALIASES: dict[str, EvidenceKind] = {
    **{kind.value: kind for kind in EvidenceKind},
    "port": EvidenceKind.PORT_EXPLOIT,
    "exploit-port": EvidenceKind.PORT_EXPLOIT,
    "function": EvidenceKind.FUNCTION_IMPLEMENTATION,
    "functions": EvidenceKind.FUNCTION_IMPLEMENTATION,
    "tool": EvidenceKind.TOOL_USAGE,
    "tools": EvidenceKind.TOOL_USAGE,
    "command": EvidenceKind.COMMAND_USAGE,
    "commands": EvidenceKind.COMMAND_USAGE,
    "registry": EvidenceKind.REGISTRY_ACCESS,
    "address": EvidenceKind.ADDRESS_INDICATOR,
    "ip": EvidenceKind.ADDRESS_INDICATOR,
    "ip-address": EvidenceKind.ADDRESS_INDICATOR,
    "protocol": EvidenceKind.PROTOCOL_INDICATOR,
    "vulnerability": EvidenceKind.VULNERABILITY_INDICATOR,
    "vuln": EvidenceKind.VULNERABILITY_INDICATOR,
}


def map_kind(raw_kind: str) -> EvidenceKind:
    """Map a raw kind string onto the enumeration; no match means other."""
    return KIND_ALIASES.get(raw_kind.strip().lower(), EvidenceKind.OTHER)


def parse_evidence_file(
    path,
    format: str,
    attack_id: str | None = None,
    attack_name: str | None = None,
    detection_state: float | None = None,
) -> Attack:
    """Parse a CSV or JSON evidence file into an Attack.

    The optional attack metadata arguments override whatever the file
    carries (they are the only source for CSV, which has no metadata).
    """
    path = Path(path)
    if format not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {format!r}")
    if not path.exists():
        raise IoFailure(f"no such file: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if format == "csv":
        evidence = _parse_csv(text)
        attack = Attack(
            id=attack_id or path.stem,
            name=attack_name or attack_id or path.stem,
            detection_state=1.0 if detection_state is None else detection_state,
            evidence=evidence,
        )
    else:
        attack = _parse_json(text, attack_id, attack_name, detection_state)

    violations = validate_attack(attack)
    if violations:
        raise MalformedRecord(0, "; ".join(violations))
    return attack


def _parse_csv(text: str) -> tuple[Evidence, ...]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise MalformedRecord(1, "empty file; at least one evidence record required")
    normalized = tuple(cell.strip().lower() for cell in header[:4])
    if normalized != _EXPECTED_HEADER:
        raise MalformedRecord(
            1, f"header must start with {','.join(_EXPECTED_HEADER)}"
        )
    evidence: list[Evidence] = []
    seen: set[str] = set()
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2:
            raise MalformedRecord(line, "expected at least id and kind columns")
        ev_id = row[0].strip()
        if not ev_id:
            raise MalformedRecord(line, "evidence id must be non-empty")
        if ev_id in seen:
            raise DuplicateEvidenceId(line, f"duplicate evidence id '{ev_id}'")
        seen.add(ev_id)
        raw_kind = row[1].strip()
        kind = map_kind(raw_kind)
        if kind is EvidenceKind.OTHER and raw_kind.lower() not in KIND_ALIASES:
            logger.warning("line %d: unknown kind %r mapped to 'other'", line, raw_kind)
        description = row[2].strip() if len(row) > 2 else ""
        confidence = _parse_confidence(row[3] if len(row) > 3 else "", line)
        attributes = _parse_attribute_cells(row[4:], line)
        evidence.append(
            Evidence(
                id=ev_id,
                kind=kind,
                attributes=attributes,
                description=description,
                confidence=confidence,
            )
        )
    if not evidence:
        raise MalformedRecord(1, "no evidence records; an attack needs at least one")
    return tuple(evidence)


def _parse_json(
    text: str,
    attack_id: str | None,
    attack_name: str | None,
    detection_state: float | None,
) -> Attack:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(exc.lineno, f"invalid JSON: {exc.msg}") from exc

    if isinstance(doc, list):
        meta: dict = {}
        items = doc
    elif isinstance(doc, dict):
        meta = doc
        items = doc.get("evidence")
        if not isinstance(items, list):
            raise MalformedRecord(0, "attack document needs an 'evidence' array")
    else:
        raise MalformedRecord(0, "top level must be an object or an array")

    resolved_id = attack_id or meta.get("id")
    if not resolved_id:
        raise MalformedRecord(0, "attack id missing (pass attack_id or set 'id')")
    evidence: list[Evidence] = []
    seen: set[str] = set()
    for index, item in enumerate(items, start=1):
        if not isinstance(item, dict):
            raise MalformedRecord(index, "evidence record must be an object")
        ev_id = str(item.get("id", "")).strip()
        if not ev_id:
            raise MalformedRecord(index, "evidence id must be non-empty")
        if ev_id in seen:
            raise DuplicateEvidenceId(index, f"duplicate evidence id '{ev_id}'")
        seen.add(ev_id)
        raw_kind = str(item.get("kind", "other"))
        kind = map_kind(raw_kind)
        if kind is EvidenceKind.OTHER and raw_kind.strip().lower() not in KIND_ALIASES:
            logger.warning(
                "record %d: unknown kind %r mapped to 'other'", index, raw_kind
            )
        raw_conf = item.get("confidence", 1.0)
        if isinstance(raw_conf, bool) or not isinstance(raw_conf, (int, float)):
            raise MalformedRecord(index, f"confidence must be a number, got {raw_conf!r}")
        if not 0.0 <= float(raw_conf) <= 1.0:
            raise ConfidenceOutOfRange(
                index, f"confidence {raw_conf!r} outside [0,1]"
            )
        attributes = item.get("attributes", {})
        if not isinstance(attributes, dict):
            raise MalformedRecord(index, "attributes must be an object")
        evidence.append(
            Evidence(
                id=ev_id,
                kind=kind,
                attributes={str(k): str(v) for k, v in attributes.items()},
                description=str(item.get("description", "")),
                confidence=float(raw_conf),
            )
        )
    if not evidence:
        raise MalformedRecord(0, "no evidence records; an attack needs at least one")

    if detection_state is None:
        detection_state = meta.get("detection_state", 1.0)
        if isinstance(detection_state, bool) or not isinstance(
            detection_state, (int, float)
        ):
            raise MalformedRecord(0, "detection_state must be a number")
    return Attack(
        id=str(resolved_id),
        name=str(attack_name or meta.get("name") or resolved_id),
        detection_state=float(detection_state),
        evidence=tuple(evidence),
    )


def _parse_confidence(cell: str, line: int) -> float:
    cell = cell.strip()
    if not cell:
        return 1.0
    try:
        value = float(cell)
    except ValueError:
        raise MalformedRecord(line, f"confidence {cell!r} is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise ConfidenceOutOfRange(line, f"confidence {value!r} outside [0,1]")
    return value


def _parse_attribute_cells(cells: list[str], line: int) -> dict[str, str]:
    attributes: dict[str, str] = {}
    for cell in cells:
        token = cell.strip()
        if not token:
            continue
        if "=" not in token:
            raise MalformedRecord(
                line, f"attribute cell {token!r} must look like key=value"
            )
        key, value = token.split("=", 1)
        key = key.strip()
        if not key:
            raise MalformedRecord(line, f"attribute cell {token!r} has an empty key")
        if key in attributes:
            raise MalformedRecord(line, f"duplicate attribute key '{key}'")
        attributes[key] = value.strip()
    return attributes
