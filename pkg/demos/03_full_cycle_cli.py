#!/usr/bin/env python3
"""Drive the CLI through the whole reasoning cycle in a scratch repository.

ingest -> analyze -> revise(accept) -> retain, then re-analyze the same
evidence and watch the retained case win with score 1.0. Also seeds one
precedent from the standalone intention estimator.
"""

import tempfile
from pathlib import Path

from intent_cbr import fixtures as demo
from intent_cbr.cli import main


def run(*argv: str) -> None:
    pretty = " ".join(argv)
    print(f"\n$ intent-cbr {pretty}")
    rc = main(list(argv))
    print(f"(exit code {rc})")
    assert rc == 0, f"command failed: {pretty}"


with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    repo = str(root / "repo")
    demo.install_demo_repository(repo)
    demo.write_keylogging_csv(root / "keylog.csv")
    demo.write_demo_network(root / "network.json")
    demo.write_demo_attack(root / "attack.json")

    run("ingest", "--input", str(root / "keylog.csv"), "--format", "csv",
        "--repo", repo, "--attack-id", "keylogging", "--detection-state", "0.9")

    run("analyze", "--repo", repo, "--attack-id", "keylogging", "--top", "3")

    run("revise", "--repo", repo, "--case-id", "keylogging-c1",
        "--verdict", "accept", "--crime-type", "data theft")

    run("retain", "--repo", repo, "--case-id", "keylogging-c1")

    print("\n--- the retained case now wins retrieval for the same evidence ---")
    run("analyze", "--repo", repo, "--attack-id", "keylogging", "--top", "3")

    print("\n--- seeding a precedent from the intention estimator ---")
    run("seed-aia", "--repo", repo, "--network", str(root / "network.json"),
        "--attack", str(root / "attack.json"))

    run("report", "--repo", repo, "--attack-id", "keylogging",
        "--out", str(root / "report.csv"), "--chart-data", str(root / "chart.json"))
    print("\nreport.csv:")
    print((root / "report.csv").read_text(encoding="utf-8"))
