"""The five-process reasoning cycle over the precedent repository.

Retrieve similar precedents by weighted evidence similarity, reuse the
best precedent's intention as a proposal, initialize the incipient case
handed to the investigator, apply the human revise verdict, and retain
confirmed cases back into the repository.

Similarity is asymmetric by design: weights come from the precedent
side (they live in the repository), and unmatched precedent evidence
contributes nothing, which penalizes missing evidence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import IO

from .errors import (
    EmptyRanking,
    EmptyRepository,
    IllegalTransition,
    UnnormalizedWeights,
    ValidationFailure,
)
from .model import (
    SUM_TOLERANCE,
    Case,
    CaseStatus,
    Evidence,
    Intention,
    SimilarityResult,
    transition,
)


@dataclass(frozen=True)
class RetrievalRanking:
    """Precedents ordered by descending score, ties by ascending case id."""

    new_case_id: str
    entries: tuple[SimilarityResult, ...]
    # Intention of each ranked precedent, so reuse and report need no
    # repository handle of their own.
    precedent_intentions: dict[str, Intention] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))


@dataclass(frozen=True)
class ReviseVerdict:
    """Investigator judgment on an incipient intention."""

    verdict: str  # "accept" | "reject"
    rationale: str = ""
    crime_type: str = ""
    damage_note: str = ""

    def __post_init__(self):
        if self.verdict not in ("accept", "reject"):
            raise ValidationFailure(f"verdict must be accept or reject, got {self.verdict!r}")
        if self.verdict == "reject" and not self.rationale.strip():
            raise ValidationFailure("a reject verdict requires a rationale")


def local_similarity(n_ev: Evidence, p_ev: Evidence) -> float:
    """Similarity of two evidence items in [0, 1].

    Different kinds never match. Same kind scores 0.5 plus 0.5 times
    the Jaccard overlap of the key=value attribute sets, with two empty
    sets counting as a full overlap.
    """
    if n_ev.kind != p_ev.kind:
        return 0.0
    new_attrs = set(n_ev.attributes.items())
    precedent_attrs = set(p_ev.attributes.items())
    if not new_attrs and not precedent_attrs:
        overlap = 1.0
    else:
        overlap = len(new_attrs & precedent_attrs) / len(new_attrs | precedent_attrs)
    return 0.5 + 0.5 * overlap


def align_evidence(
    new_case: Case, precedent: Case
) -> tuple[tuple[str, str, float], ...]:
    """Greedy best-first matching of new evidence to precedent evidence.

    Repeatedly pairs the highest-similarity unmatched pair with a
    positive similarity; ties break on ascending (new id, precedent id).
    Each evidence item is used at most once. May be empty.
    """
    candidates: list[tuple[float, str, str]] = []
    for n_ev in new_case.attack.evidence:
        for p_ev in precedent.attack.evidence:
            sim = local_similarity(n_ev, p_ev)
            if sim > 0.0:
                candidates.append((sim, n_ev.id, p_ev.id))
    candidates.sort(key=lambda item: (-item[0], item[1], item[2]))
    used_new: set[str] = set()
    used_precedent: set[str] = set()
    pairs: list[tuple[str, str, float]] = []
    for sim, n_id, p_id in candidates:
        if n_id in used_new or p_id in used_precedent:
            continue
        used_new.add(n_id)
        used_precedent.add(p_id)
        pairs.append((n_id, p_id, sim))
    return tuple(pairs)


def similarity(new_case: Case, precedent: Case) -> SimilarityResult:
    """Weighted sum of local similarities over the greedy alignment.

    Weights are the precedent's stored evidence weights and must be
    normalized; unmatched precedent evidence contributes 0.
    """
    weight_sum = math.fsum(precedent.evidence_weights.values())
    if abs(weight_sum - 1.0) > SUM_TOLERANCE:
        raise UnnormalizedWeights(
            f"precedent '{precedent.case_id}' weights sum to {weight_sum!r}"
        )
    alignment = align_evidence(new_case, precedent)
    score = math.fsum(
        sim * precedent.evidence_weights.get(p_id, 0.0) for _, p_id, sim in alignment
    )
    return SimilarityResult(
        new_case_id=new_case.case_id,
        precedent_case_id=precedent.case_id,
        alignment=alignment,
        score=score,
    )


def retrieve(new_case: Case, repository, k: int | None) -> RetrievalRanking:
    """Score `new_case` against every confirmed precedent, keep the top k.

    ``k=None`` keeps every precedent (used by full reports).
    """
    if k is not None and k < 1:
        raise ValidationFailure(f"k must be positive, got {k}")
    precedents = repository.list_cases(status=("precedent", "retained"))
    if not precedents:
        raise EmptyRepository("no precedent or retained cases stored")
    results = [similarity(new_case, p) for p in precedents]
    results.sort(key=lambda r: (-r.score, r.precedent_case_id))
    top = results if k is None else results[:k]
    intentions = {
        p.case_id: p.intention
        for p in precedents
        if p.intention is not None and any(r.precedent_case_id == p.case_id for r in top)
    }
    return RetrievalRanking(
        new_case_id=new_case.case_id,
        entries=tuple(top),
        precedent_intentions=intentions,
    )


def reuse(new_case: Case, ranking: RetrievalRanking) -> Case:
    """Copy the top precedent's intention onto the new case as a proposal."""
    if not ranking.entries:
        raise EmptyRanking("cannot reuse from an empty ranking")
    top = ranking.entries[0]
    intention = ranking.precedent_intentions.get(top.precedent_case_id)
    if intention is None:
        raise ValidationFailure(
            f"precedent '{top.precedent_case_id}' carries no intention"
        )
    note = f"reuse precedent={top.precedent_case_id} score={top.score:.12g}"
    if top.score <= 0.0:
        note += " (low-confidence)"
    return replace(
        new_case,
        intention=intention,
        status=CaseStatus.PROPOSED,
        provenance=_extend(new_case.provenance, note),
    )


def initialize_incipient(proposed: Case) -> Case:
    """Prepare the proposal for the investigator.

    Weights are evidence confidences normalized to sum 1 (uniform when
    every confidence is zero), and a readable summary of the proposal is
    appended to the provenance.
    """
    if proposed.status != CaseStatus.PROPOSED:
        raise IllegalTransition(
            f"case '{proposed.case_id}': initialize requires status proposed, "
            f"got {proposed.status.value}"
        )
    evidence = proposed.attack.evidence
    total = math.fsum(ev.confidence for ev in evidence)
    if total > 0.0:
        weights = {ev.id: ev.confidence / total for ev in evidence}
    else:
        weights = {ev.id: 1.0 / len(evidence) for ev in evidence}
    summary = _incipient_summary(proposed)
    case = transition(proposed, CaseStatus.INCIPIENT)
    return replace(
        case,
        evidence_weights=weights,
        provenance=_extend(case.provenance, summary),
    )


def revise(incipient: Case, verdict: ReviseVerdict) -> Case:
    """Apply the investigator's accept/reject verdict."""
    target = (
        CaseStatus.REVISED_ACCEPTED
        if verdict.verdict == "accept"
        else CaseStatus.REVISED_REJECTED
    )
    case = transition(incipient, target)
    note = f"revise {verdict.verdict}"
    if verdict.crime_type:
        note += f" crime_type={verdict.crime_type}"
    if verdict.damage_note:
        note += f" damage={verdict.damage_note}"
    if verdict.rationale:
        note += f" rationale={verdict.rationale}"
    return replace(case, provenance=_extend(case.provenance, note))


def retain(case: Case, repository) -> Case:
    """Store an accepted case as a retained precedent.

    Mutates the repository handle in place and returns the retained
    copy. An id collision with anything but this case's own in-flight
    record raises DuplicateCaseId.
    """
    retained = transition(case, CaseStatus.RETAINED)
    repository.store_confirmed(retained)
    return retained


def write_ranking_csv(ranking: RetrievalRanking, out: IO[str], decimals: int = 2) -> None:
    """Ranking as CSV rows (rank, precedent_case_id, intention_label, score)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rank", "precedent_case_id", "intention_label", "score"])
    for rank, entry in enumerate(ranking.entries, start=1):
        intention = ranking.precedent_intentions.get(entry.precedent_case_id)
        label = "" if intention is None else intention.label
        writer.writerow(
            [rank, entry.precedent_case_id, label, f"{entry.score:.{decimals}f}"]
        )


def _extend(provenance: str, note: str) -> str:
    return f"{provenance}; {note}" if provenance else note


def _incipient_summary(proposed: Case) -> str:
    label = proposed.intention.label if proposed.intention else "(none)"
    lines = [f"incipient summary: intention={label}", "evidence:"]
    for ev in proposed.attack.evidence:
        lines.append(
            f"  - {ev.id} [{ev.kind.value}] confidence={ev.confidence:g}: {ev.description}"
        )
    return "\n".join(lines)
