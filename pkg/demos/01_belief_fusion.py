#!/usr/bin/env python3
"""Walk through the intention estimator on a small causal network.

Two candidate intentions, two evidence items. We compute the Bayesian
posteriors per evidence item, discount them into mass functions, fuse
the masses with Dempster's rule, and read off belief/plausibility
intervals for each intention.
"""

from intent_cbr import (
    Attack,
    CausalNetwork,
    Evidence,
    EvidenceKind,
    Hypothesis,
    Intention,
    analyze_attack,
    build_mass_function,
    combine,
    evidence_marginal,
    posteriors_for_evidence,
)

network = CausalNetwork(
    attack_id="walkthrough",
    intentions=(
        Intention("int-exfil", "Exfiltrate sensitive data"),
        Intention("int-recon", "Map the host and its network"),
    ),
    evidence_ids=("ev-a", "ev-b"),
    priors={"int-exfil": 0.5, "int-recon": 0.5},
    likelihoods={
        "ev-a": {"int-exfil": 0.8, "int-recon": 0.4},  # archive+copy commands
        "ev-b": {"int-exfil": 0.7, "int-recon": 0.5},  # traffic to one host
    },
)

print("=== per-evidence marginals and posteriors ===")
for ev_id in network.evidence_ids:
    marginal = evidence_marginal(network, ev_id)
    posts = posteriors_for_evidence(network, ev_id)
    print(f"{ev_id}: P(evidence)={marginal:.3f}", {k: round(v, 3) for k, v in posts.items()})

print()
print("=== discounting by detection accuracy 0.9 ===")
hypothesis = Hypothesis(id="collection-quality", accuracy=0.9)
masses = []
for ev_id in network.evidence_ids:
    m = build_mass_function(posteriors_for_evidence(network, ev_id), hypothesis)
    masses.append(m)
    rendered = {"|".join(sorted(s)): round(v, 4) for s, v in m.masses.items()}
    print(f"{ev_id}: {rendered}")

print()
print("=== Dempster fusion of the two sources ===")
fused = combine(masses[0], masses[1])
for subset, value in sorted(fused.masses.items(), key=lambda kv: sorted(kv[0])):
    print(f"m({'|'.join(sorted(subset))}) = {value:.4f}")

print()
print("=== end-to-end report ===")
attack = Attack(
    id="walkthrough",
    name="Walkthrough incident",
    detection_state=0.9,
    evidence=(
        Evidence(id="ev-a", kind=EvidenceKind.COMMAND_USAGE, attributes={"commands": "tar,scp"}),
        Evidence(id="ev-b", kind=EvidenceKind.ADDRESS_INDICATOR, attributes={"destination": "c2.example.net"}),
    ),
)
report = analyze_attack(attack, network)
for iid, (bel, pl) in sorted(report.per_intention.items()):
    print(f"{iid}: belief={bel:.4f}  plausibility={pl:.4f}")
print(f"selected intention: {report.selected}")
