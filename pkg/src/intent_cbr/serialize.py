"""Canonical JSON wire format for the domain model.

One schema serves disk storage and interchange: sorted keys, two-space
indent, floats rounded to 12 significant digits. Equal values therefore
always serialize to identical bytes, which keeps golden-file tests and
repository round-trips stable. Mass-function subset keys are encoded as
the sorted member ids joined with "|".
"""

from __future__ import annotations

import json
from typing import Any

from .errors import ValidationFailure
from .model import (
    Attack,
    BeliefReport,
    Case,
    CaseStatus,
    CausalNetwork,
    Evidence,
    EvidenceKind,
    Hypothesis,
    Intention,
    MassFunction,
    SimilarityResult,
)


def canonical_float(x: float) -> float:
    """Round to 12 significant digits; idempotent."""
    return float(format(float(x), ".12g"))


def canonical_dumps(data: Any) -> str:
    """Serialize to the canonical byte form (trailing newline included)."""
    return (
        json.dumps(
            _round_floats(data),
            sort_keys=True,
            indent=2,
            ensure_ascii=False,
            allow_nan=False,
        )
        + "\n"
    )


def _round_floats(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, float):
        return canonical_float(value)
    if isinstance(value, dict):
        return {key: _round_floats(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(item) for item in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


# --- per-type codecs -------------------------------------------------------


def evidence_to_dict(ev: Evidence) -> dict:
    return {
        "id": ev.id,
        "kind": ev.kind.value,
        "attributes": dict(ev.attributes),
        "description": ev.description,
        "confidence": ev.confidence,
    }


def evidence_from_dict(doc: dict) -> Evidence:
    return Evidence(
        id=_req(doc, "id", str),
        kind=EvidenceKind(_req(doc, "kind", str)),
        attributes={str(k): str(v) for k, v in doc.get("attributes", {}).items()},
        description=str(doc.get("description", "")),
        confidence=_num(doc.get("confidence", 1.0), "confidence"),
    )


def attack_to_dict(attack: Attack) -> dict:
    return {
        "id": attack.id,
        "name": attack.name,
        "detection_state": attack.detection_state,
        "evidence": [evidence_to_dict(ev) for ev in attack.evidence],
    }


def attack_from_dict(doc: dict) -> Attack:
    return Attack(
        id=_req(doc, "id", str),
        name=str(doc.get("name", doc.get("id", ""))),
        detection_state=_num(doc.get("detection_state", 1.0), "detection_state"),
        evidence=tuple(evidence_from_dict(item) for item in _req(doc, "evidence", list)),
    )


def intention_to_dict(it: Intention) -> dict:
    return {"id": it.id, "label": it.label, "category": it.category}


def intention_from_dict(doc: dict) -> Intention:
    category = doc.get("category")
    return Intention(
        id=_req(doc, "id", str),
        label=_req(doc, "label", str),
        category=None if category is None else str(category),
    )


def hypothesis_to_dict(h: Hypothesis) -> dict:
    return {"id": h.id, "accuracy": h.accuracy, "applies_to": h.applies_to}


def hypothesis_from_dict(doc: dict) -> Hypothesis:
    return Hypothesis(
        id=_req(doc, "id", str),
        accuracy=_num(_req(doc, "accuracy", (int, float)), "accuracy"),
        applies_to=str(doc.get("applies_to", "*")),
    )


def network_to_dict(net: CausalNetwork) -> dict:
    return {
        "attack_id": net.attack_id,
        "intentions": [intention_to_dict(it) for it in net.intentions],
        "evidence_ids": list(net.evidence_ids),
        "priors": dict(net.priors),
        "likelihoods": {ev: dict(row) for ev, row in net.likelihoods.items()},
    }


def network_from_dict(doc: dict) -> CausalNetwork:
    intentions = tuple(
        intention_from_dict(item) for item in _req(doc, "intentions", list)
    )
    priors = doc.get("priors")
    if priors is None:
        # Documents may omit priors; default to uniform over the frame.
        n = len(intentions)
        priors = {it.id: 1.0 / n for it in intentions} if n else {}
    return CausalNetwork(
        attack_id=_req(doc, "attack_id", str),
        intentions=intentions,
        evidence_ids=tuple(str(e) for e in _req(doc, "evidence_ids", list)),
        priors={str(k): _num(v, f"priors[{k}]") for k, v in priors.items()},
        likelihoods={
            str(ev): {str(i): _num(p, f"likelihoods[{ev}][{i}]") for i, p in row.items()}
            for ev, row in _req(doc, "likelihoods", dict).items()
        },
    )


def case_to_dict(case: Case) -> dict:
    return {
        "case_id": case.case_id,
        "attack": attack_to_dict(case.attack),
        "intention": None if case.intention is None else intention_to_dict(case.intention),
        "evidence_weights": dict(case.evidence_weights),
        "status": case.status.value,
        "provenance": case.provenance,
        "created_at": case.created_at,
    }


def case_from_dict(doc: dict) -> Case:
    intention_doc = doc.get("intention")
    return Case(
        case_id=_req(doc, "case_id", str),
        attack=attack_from_dict(_req(doc, "attack", dict)),
        intention=None if intention_doc is None else intention_from_dict(intention_doc),
        evidence_weights={
            str(k): _num(v, f"evidence_weights[{k}]")
            for k, v in _req(doc, "evidence_weights", dict).items()
        },
        status=CaseStatus(_req(doc, "status", str)),
        provenance=str(doc.get("provenance", "")),
        created_at=str(doc.get("created_at", "")),
    )


def subset_key(subset: frozenset[str]) -> str:
    return "|".join(sorted(subset))


def mass_to_dict(m: MassFunction) -> dict:
    return {
        "frame": list(m.frame),
        "masses": {subset_key(s): v for s, v in m.masses.items()},
    }


def mass_from_dict(doc: dict) -> MassFunction:
    return MassFunction(
        frame=tuple(str(i) for i in _req(doc, "frame", list)),
        masses={
            frozenset(key.split("|")): _num(v, f"masses[{key}]")
            for key, v in _req(doc, "masses", dict).items()
        },
    )


def belief_report_to_dict(report: BeliefReport) -> dict:
    return {
        "per_intention": {
            iid: {"belief": bel, "plausibility": pl}
            for iid, (bel, pl) in report.per_intention.items()
        },
        "selected": report.selected,
        "mass": mass_to_dict(report.mass),
    }


def similarity_to_dict(result: SimilarityResult) -> dict:
    return {
        "new_case_id": result.new_case_id,
        "precedent_case_id": result.precedent_case_id,
        "alignment": [
            {"new_evidence_id": n, "precedent_evidence_id": p, "local_sim": s}
            for n, p, s in result.alignment
        ],
        "score": result.score,
    }


# --- helpers ---------------------------------------------------------------


def _req(doc: dict, key: str, expected: type | tuple) -> Any:
    if key not in doc:
        raise ValidationFailure(f"missing required field '{key}'")
    value = doc[key]
    if not isinstance(value, expected):
        raise ValidationFailure(f"field '{key}' has wrong type {type(value).__name__}")
    return value


def _num(value: Any, label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationFailure(f"field '{label}' must be a number")
    return float(value)
