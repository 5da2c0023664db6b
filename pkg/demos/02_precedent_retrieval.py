#!/usr/bin/env python3
"""Score the bundled keylogging evidence against the botnet precedents.

Builds the demo repository in a temporary directory, retrieves the most
similar precedents for the keylogging case, and shows how the top score
decomposes into per-evidence contributions.
"""

import tempfile
from pathlib import Path

from intent_cbr import Case, CaseStatus, retrieve
from intent_cbr import fixtures as demo

with tempfile.TemporaryDirectory() as tmp:
    repo = demo.install_demo_repository(Path(tmp) / "repo")
    print(f"repository holds {repo.case_count()} precedents")

    new_case = Case(
        case_id="keylogging-demo",
        attack=demo.keylogging_attack(),
        intention=None,
        evidence_weights={},
        status=CaseStatus.PROPOSED,
    )

    ranking = retrieve(new_case, repo, k=None)
    print("\n=== ranking ===")
    for rank, entry in enumerate(ranking.entries, start=1):
        label = ranking.precedent_intentions[entry.precedent_case_id].label
        print(f"{rank:>2}. {entry.score:.2f}  {entry.precedent_case_id}  {label[:60]}")

    print("\n=== alignment behind the top score ===")
    top = ranking.entries[0]
    precedent = repo.get_case(top.precedent_case_id)
    for new_id, prec_id, sim in top.alignment:
        weight = precedent.evidence_weights[prec_id]
        print(f"{new_id} ~ {prec_id}: local_sim={sim:.2f}  weight={weight:.2f}  contributes {sim * weight:.4f}")
    unmatched = set(precedent.evidence_weights) - {p for _, p, _ in top.alignment}
    for prec_id in sorted(unmatched):
        print(f"(unmatched) {prec_id}: weight={precedent.evidence_weights[prec_id]:.2f}  contributes 0")
    print(f"total score: {top.score:.4f}")
