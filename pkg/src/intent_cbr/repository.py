"""File-backed precedent repository.

One canonical-JSON document per record: cases under ``cases/``, causal
networks under ``networks/``, ingested attacks under ``attacks/``, and a
``meta.json`` carrying the schema version. Documents are human-readable
forensic artifacts; writes are temp-file-then-rename so an interrupted
write never leaves a partial record visible.

Concurrency: single writer, many readers. Mutating operations take an
exclusive advisory flock on ``meta.json``.
"""

from __future__ import annotations

import fcntl
import json
import math
import os
from contextlib import contextmanager
from pathlib import Path

from .errors import (
    CorruptRecord,
    DuplicateCaseId,
    EmptyRepository,
    IoFailure,
    SchemaVersionMismatch,
    UnknownCaseId,
    ValidationFailure,
)
from .model import (
    Attack,
    Case,
    CaseStatus,
    CausalNetwork,
    CONFIRMED_STATUSES,
    IN_FLIGHT_STATUSES,
    is_safe_id,
    validate_attack,
    validate_case,
    validate_network,
)
from .serialize import (
    attack_from_dict,
    attack_to_dict,
    canonical_dumps,
    case_from_dict,
    case_to_dict,
    network_from_dict,
    network_to_dict,
)

SCHEMA_VERSION = 1


class Repository:
    """Handle over a repository directory. Use :meth:`open` to construct."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._cases: dict[str, Case] = {}

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def open(cls, root) -> "Repository":
        """Open (creating if needed) and load + validate every stored case.

        Corrupt records are reported together via CorruptRecord, never
        silently dropped.
        """
        root = Path(root)
        repo = cls(root)
        try:
            for sub in ("cases", "networks", "attacks"):
                (root / sub).mkdir(parents=True, exist_ok=True)
            meta_path = root / "meta.json"
            if meta_path.exists():
                try:
                    meta = json.loads(meta_path.read_text(encoding="utf-8"))
                except ValueError as exc:
                    raise CorruptRecord({"meta.json": f"unparseable: {exc}"}) from exc
                if not isinstance(meta, dict):
                    raise CorruptRecord({"meta.json": "not a JSON object"})
                version = meta.get("schema_version")
                if version != SCHEMA_VERSION:
                    raise SchemaVersionMismatch(
                        f"repository at {root} has schema_version {version!r}, "
                        f"supported: {SCHEMA_VERSION}"
                    )
            else:
                _atomic_write(meta_path, canonical_dumps({"schema_version": SCHEMA_VERSION}))
        except OSError as exc:
            raise IoFailure(f"cannot open repository at {root}: {exc}") from exc

        corrupt: dict[str, str] = {}
        for path in sorted((root / "cases").glob("*.json")):
            record_id = path.stem
            try:
                case = case_from_dict(json.loads(path.read_text(encoding="utf-8")))
            except OSError as exc:
                raise IoFailure(f"cannot read {path}: {exc}") from exc
            except Exception as exc:
                corrupt[record_id] = f"unparseable: {exc}"
                continue
            violations = validate_case(case)
            if violations:
                corrupt[record_id] = "; ".join(violations)
            elif case.case_id != record_id:
                corrupt[record_id] = f"file name does not match case_id '{case.case_id}'"
            else:
                repo._cases[case.case_id] = case
        if corrupt:
            raise CorruptRecord(corrupt)
        return repo

    # -- cases ---------------------------------------------------------------

    def add_case(self, case: Case) -> None:
        """Store a new case; atomic, validated, id must be unused."""
        self._check_case(case)
        if case.case_id in self._cases:
            raise DuplicateCaseId(f"case '{case.case_id}' already stored")
        self._write_case(case)

    def update_case(self, case: Case) -> None:
        """Replace an existing case record; atomic, validated."""
        self._check_case(case)
        if case.case_id not in self._cases:
            raise UnknownCaseId(f"case '{case.case_id}' not stored")
        self._write_case(case)

    def store_confirmed(self, case: Case) -> None:
        """Store a retained case, replacing only its own in-flight record."""
        existing = self._cases.get(case.case_id)
        if existing is None:
            self.add_case(case)
        elif existing.status in IN_FLIGHT_STATUSES:
            self.update_case(case)
        else:
            raise DuplicateCaseId(
                f"case '{case.case_id}' already stored with status "
                f"'{existing.status.value}'"
            )

    def get_case(self, case_id: str) -> Case:
        """Exact stored value (as parsed back from disk)."""
        try:
            return self._cases[case_id]
        except KeyError:
            raise UnknownCaseId(f"case '{case_id}' not stored") from None

    def has_case(self, case_id: str) -> bool:
        return case_id in self._cases

    def list_cases(self, status=None) -> list[Case]:
        """All cases ordered by case_id, optionally filtered by status.

        ``status`` may be a single status or an iterable of statuses,
        given as CaseStatus members or their string values.
        """
        wanted = _status_set(status)
        return [
            case
            for case_id, case in sorted(self._cases.items())
            if wanted is None or case.status in wanted
        ]

    def case_count(self) -> int:
        return len(self._cases)

    def intention_frequencies(self) -> dict[str, float]:
        """Normalized intention frequencies over confirmed cases."""
        counts: dict[str, int] = {}
        for case in self._cases.values():
            if case.status in CONFIRMED_STATUSES and case.intention is not None:
                counts[case.intention.id] = counts.get(case.intention.id, 0) + 1
        if not counts:
            raise EmptyRepository("no confirmed case with an intention stored")
        total = sum(counts.values())
        return {iid: counts[iid] / total for iid in sorted(counts)}

    # -- attacks ---------------------------------------------------------------

    def save_attack(self, attack: Attack, overwrite: bool = False) -> None:
        _check_id(attack.id, "attack")
        violations = validate_attack(attack)
        if violations:
            raise ValidationFailure("; ".join(violations))
        path = self.root / "attacks" / f"{attack.id}.json"
        if path.exists() and not overwrite:
            raise DuplicateCaseId(f"attack '{attack.id}' already stored")
        with self._writer_lock():
            _atomic_write(path, canonical_dumps(attack_to_dict(attack)))

    def load_attack(self, attack_id: str) -> Attack:
        path = self.root / "attacks" / f"{attack_id}.json"
        if not path.exists():
            raise UnknownCaseId(f"attack '{attack_id}' not stored")
        return attack_from_dict(json.loads(path.read_text(encoding="utf-8")))

    def has_attack(self, attack_id: str) -> bool:
        return (self.root / "attacks" / f"{attack_id}.json").exists()

    # -- networks ----------------------------------------------------------------

    def save_network(self, network: CausalNetwork, overwrite: bool = False) -> None:
        _check_id(network.attack_id, "network attack_id")
        violations = validate_network(network)
        if violations:
            raise ValidationFailure("; ".join(violations))
        path = self.root / "networks" / f"{network.attack_id}.json"
        if path.exists() and not overwrite:
            raise DuplicateCaseId(f"network for '{network.attack_id}' already stored")
        with self._writer_lock():
            _atomic_write(path, canonical_dumps(network_to_dict(network)))

    def load_network(self, attack_id: str) -> CausalNetwork:
        path = self.root / "networks" / f"{attack_id}.json"
        if not path.exists():
            raise UnknownCaseId(f"network for '{attack_id}' not stored")
        return network_from_dict(json.loads(path.read_text(encoding="utf-8")))

    # -- internals ------------------------------------------------------------

    def _check_case(self, case: Case) -> None:
        _check_id(case.case_id, "case")
        violations = validate_case(case)
        if violations:
            raise ValidationFailure(
                f"case '{case.case_id}': " + "; ".join(violations)
            )

    def _write_case(self, case: Case) -> None:
        doc = canonical_dumps(case_to_dict(case))
        path = self.root / "cases" / f"{case.case_id}.json"
        with self._writer_lock():
            _atomic_write(path, doc)
        # Cache what the disk now holds, not the pre-rounding value.
        self._cases[case.case_id] = case_from_dict(json.loads(doc))

    @contextmanager
    def _writer_lock(self):
        meta_path = self.root / "meta.json"
        try:
            with open(meta_path, "r+", encoding="utf-8") as fh:
                fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
                try:
                    yield
                finally:
                    fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
        except OSError as exc:
            raise IoFailure(f"cannot lock {meta_path}: {exc}") from exc


def weight_sum(case: Case) -> float:
    """Sum of the case's evidence weights (diagnostic helper)."""
    return math.fsum(case.evidence_weights.values())


def _status_set(status) -> frozenset[CaseStatus] | None:
    if status is None:
        return None
    if isinstance(status, (str, CaseStatus)):
        status = [status]
    return frozenset(CaseStatus(s) for s in status)


def _check_id(record_id: str, label: str) -> None:
    if not is_safe_id(record_id):
        raise ValidationFailure(
            f"{label} id {record_id!r} not usable as a file name"
        )


def _atomic_write(path: Path, text: str) -> None:
    """Write-temp-then-rename so readers never see a partial document."""
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
