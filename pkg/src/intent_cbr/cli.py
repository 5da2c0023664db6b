"""Command-line front end wiring the five-process workflow.

Exit codes are stable and machine-friendly: 0 ok, 1 I/O failure,
2 validation failure, 3 empty repository, 4 analysis failure.
Diagnostics go to stderr; data (rankings, reports, case ids) goes to
stdout or the requested output files.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import cbr
from .errors import IntentCbrError, ValidationFailure
from .inference import analyze_attack
from .ingest import parse_evidence_file
from .model import Attack, Case, CaseStatus, now_utc, validate_network
from .repository import Repository
from .serialize import canonical_dumps, network_from_dict

_REPO_ENV = "INTENT_CBR_REPO"


def entrypoint() -> None:
    sys.exit(main())


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except IntentCbrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intent-cbr",
        description="Analyze the intention behind a cyber-attack from its evidence.",
        epilog=(
            "Exit codes: 0 ok, 1 I/O failure, 2 validation failure, "
            "3 empty repository, 4 analysis failure."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "ingest",
        help="parse an evidence file and store the attack in the repository",
        description=(
            "Parse a CSV or JSON evidence file into an attack record. "
            "Evidence rows without a confidence value default to 1.0 "
            "(the analyst asserted the evidence)."
        ),
    )
    p.add_argument("--input", required=True, help="evidence file to parse")
    p.add_argument("--format", required=True, choices=("json", "csv"))
    _add_repo_flag(p)
    p.add_argument("--attack-id", required=True, help="id to store the attack under")
    p.add_argument("--attack-name", default=None, help="display name (defaults to the id)")
    p.add_argument(
        "--detection-state",
        type=float,
        default=None,
        help="detection accuracy ratio in [0,1] (default 1.0 for CSV)",
    )
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser(
        "analyze",
        help="retrieve similar precedents and prepare an incipient case",
        description=(
            "Run retrieval, reuse the best precedent's intention, and "
            "initialize the incipient case. Without --interactive the "
            "incipient case is stored for a later 'revise'."
        ),
    )
    _add_repo_flag(p)
    p.add_argument("--attack-id", required=True, help="previously ingested attack id")
    p.add_argument("--top", type=int, default=5, help="number of precedents to rank")
    p.add_argument(
        "--interactive",
        action="store_true",
        help="prompt for the revise verdict and retain on accept",
    )
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("revise", help="record the investigator verdict on an incipient case")
    _add_repo_flag(p)
    p.add_argument("--case-id", required=True)
    p.add_argument("--verdict", required=True, choices=("accept", "reject"))
    p.add_argument("--rationale", default="", help="required when rejecting")
    p.add_argument("--crime-type", default="")
    p.add_argument("--damage-note", default="")
    p.set_defaults(func=cmd_revise)

    p = sub.add_parser("retain", help="store an accepted case as a retained precedent")
    _add_repo_flag(p)
    p.add_argument("--case-id", required=True)
    p.set_defaults(func=cmd_retain)

    p = sub.add_parser(
        "seed-aia",
        help="seed the repository from the standalone intention estimator",
        description=(
            "Estimate the attack intention from a causal network "
            "(Bayesian posteriors fused with Dempster's rule) and store "
            "the result as a precedent case."
        ),
    )
    _add_repo_flag(p)
    p.add_argument("--network", required=True, help="causal network JSON document")
    p.add_argument("--attack", required=True, help="attack JSON document")
    p.add_argument(
        "--priors",
        choices=("uniform", "frequency"),
        default=None,
        help=(
            "override the network's priors: uniform over its intentions, "
            "or intention frequencies observed in the repository"
        ),
    )
    p.set_defaults(func=cmd_seed_aia)

    p = sub.add_parser("report", help="write the full similarity ranking as CSV")
    _add_repo_flag(p)
    p.add_argument("--attack-id", required=True)
    p.add_argument("--out", required=True, help="CSV output path (scores at 2 decimals)")
    p.add_argument(
        "--chart-data",
        default=None,
        help="also write {label, score} JSON rows at full precision",
    )
    p.set_defaults(func=cmd_report)

    return parser


# --- commands ----------------------------------------------------------------


def cmd_ingest(args) -> int:
    repo = Repository.open(_repo_path(args))
    attack = parse_evidence_file(
        args.input,
        args.format,
        attack_id=args.attack_id,
        attack_name=args.attack_name,
        detection_state=args.detection_state,
    )
    repo.save_attack(attack)
    print(f"{len(attack.evidence)} evidence items ingested")
    return 0


def cmd_analyze(args) -> int:
    repo = Repository.open(_repo_path(args))
    attack = repo.load_attack(args.attack_id)
    new_case = _fresh_case(repo, attack)
    ranking = cbr.retrieve(new_case, repo, k=args.top)
    _print_ranking(ranking)
    proposed = cbr.reuse(new_case, ranking)
    incipient = cbr.initialize_incipient(proposed)
    if args.interactive:
        verdict = _prompt_verdict()
        revised = cbr.revise(incipient, verdict)
        if verdict.verdict == "accept":
            retained = cbr.retain(revised, repo)
            print(f"case {retained.case_id} retained")
        else:
            repo.add_case(revised)
            print(f"case {revised.case_id} rejected; stored for audit")
    else:
        repo.add_case(incipient)
        print(f"incipient case {incipient.case_id} written; revise it with:")
        print(f"  intent-cbr revise --case-id {incipient.case_id} --verdict accept")
    return 0


def cmd_revise(args) -> int:
    repo = Repository.open(_repo_path(args))
    case = repo.get_case(args.case_id)
    verdict = cbr.ReviseVerdict(
        verdict=args.verdict,
        rationale=args.rationale,
        crime_type=args.crime_type,
        damage_note=args.damage_note,
    )
    revised = cbr.revise(case, verdict)
    repo.update_case(revised)
    print(f"case {revised.case_id} now {revised.status.value}")
    return 0


def cmd_retain(args) -> int:
    repo = Repository.open(_repo_path(args))
    case = repo.get_case(args.case_id)
    retained = cbr.retain(case, repo)
    print(f"case {retained.case_id} retained")
    return 0


def cmd_seed_aia(args) -> int:
    repo = Repository.open(_repo_path(args))
    network = _load_network(args.network)
    attack = parse_evidence_file(args.attack, "json")
    if args.priors == "uniform":
        ids = network.intention_ids()
        network = replace(network, priors={iid: 1.0 / len(ids) for iid in ids})
    elif args.priors == "frequency":
        frequencies = repo.intention_frequencies()
        priors = {iid: frequencies.get(iid, 0.0) for iid in network.intention_ids()}
        total = math.fsum(priors.values())
        if total <= 0.0:
            raise ValidationFailure(
                "repository frequencies cover none of the network's intentions"
            )
        network = replace(network, priors={i: v / total for i, v in priors.items()})

    report = analyze_attack(attack, network)
    _print_belief_report(report)

    case = Case(
        case_id=f"aia-{attack.id}",
        attack=attack,
        intention=network.find_intention(report.selected),
        evidence_weights=_confidence_weights(attack),
        status=CaseStatus.PRECEDENT,
        provenance="seeded-by-AIA",
        created_at=now_utc(),
    )
    repo.add_case(case)
    repo.save_network(network, overwrite=True)
    if not repo.has_attack(attack.id):
        repo.save_attack(attack)
    print(f"case {case.case_id} stored as precedent (intention {report.selected})")
    return 0


def cmd_report(args) -> int:
    repo = Repository.open(_repo_path(args))
    attack = repo.load_attack(args.attack_id)
    new_case = _fresh_case(repo, attack)
    ranking = cbr.retrieve(new_case, repo, k=None)
    out = Path(args.out)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        cbr.write_ranking_csv(ranking, fh)
    print(f"wrote {out}", file=sys.stderr)
    if args.chart_data:
        rows = [
            {
                "label": ranking.precedent_intentions[e.precedent_case_id].label,
                "score": e.score,
            }
            for e in ranking.entries
        ]
        Path(args.chart_data).write_text(canonical_dumps(rows), encoding="utf-8")
        print(f"wrote {args.chart_data}", file=sys.stderr)
    return 0


# --- helpers ------------------------------------------------------------------


def _add_repo_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--repo",
        default=None,
        help=f"repository directory (default: ${_REPO_ENV})",
    )


def _repo_path(args) -> Path:
    repo = args.repo or os.environ.get(_REPO_ENV)
    if not repo:
        raise ValidationFailure(f"--repo required (or set ${_REPO_ENV})")
    return Path(repo)


def _fresh_case(repo: Repository, attack: Attack) -> Case:
    """New in-flight case for an attack, with an unused case id."""
    n = 1
    case_id = f"{attack.id}-c{n}"
    while repo.has_case(case_id):
        n += 1
        case_id = f"{attack.id}-c{n}"
    return Case(
        case_id=case_id,
        attack=attack,
        intention=None,
        evidence_weights={},
        status=CaseStatus.PROPOSED,
        provenance="analyst",
        created_at=now_utc(),
    )


def _confidence_weights(attack: Attack) -> dict[str, float]:
    total = math.fsum(ev.confidence for ev in attack.evidence)
    if total > 0.0:
        return {ev.id: ev.confidence / total for ev in attack.evidence}
    return {ev.id: 1.0 / len(attack.evidence) for ev in attack.evidence}


def _load_network(path: str):
    p = Path(path)
    if not p.exists():
        raise ValidationFailure(f"no such network file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"invalid network JSON: {exc.msg} (line {exc.lineno})")
    network = network_from_dict(doc)
    violations = validate_network(network)
    if violations:
        raise ValidationFailure("network invalid: " + "; ".join(violations))
    return network


def _print_ranking(ranking: cbr.RetrievalRanking) -> None:
    print(f"ranking for case {ranking.new_case_id}")
    print(f"{'rank':>4}  {'score':>6}  {'precedent':<12}  intention")
    for rank, entry in enumerate(ranking.entries, start=1):
        intention = ranking.precedent_intentions.get(entry.precedent_case_id)
        label = "" if intention is None else intention.label
        print(f"{rank:>4}  {entry.score:6.4f}  {entry.precedent_case_id:<12}  {label}")


def _print_belief_report(report) -> None:
    print(f"{'intention':<12}  {'belief':>8}  {'plausibility':>12}")
    for iid in sorted(report.per_intention):
        bel, pl = report.per_intention[iid]
        print(f"{iid:<12}  {bel:8.4f}  {pl:12.4f}")
    print(f"selected: {report.selected}")


def _prompt_verdict() -> cbr.ReviseVerdict:
    while True:
        print("accept proposed intention? [accept/reject]: ", file=sys.stderr, end="", flush=True)
        try:
            answer = input().strip().lower()
        except EOFError:
            raise ValidationFailure("no verdict given") from None
        if answer in ("accept", "reject"):
            break
        print("please answer 'accept' or 'reject'", file=sys.stderr)
    rationale = ""
    if answer == "reject":
        print("rationale: ", file=sys.stderr, end="", flush=True)
        try:
            rationale = input().strip()
        except EOFError:
            rationale = ""
    return cbr.ReviseVerdict(verdict=answer, rationale=rationale)
