"""Append-only run archive: newline-delimited JSON, one record per molecule.

A run owns one archive file, truncated when the run starts and only appended
to afterwards. Records never carry wall-clock data, so identical runs produce
byte-identical archives; timestamps and other run metadata go in a sidecar
``<archive>.meta.json``. Searching is a linear scan over the in-memory index,
which is plenty for the few hundred thousand records a run can produce.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .chem import ElementTable, molecular_weight
from .evolve import Chromosome
from .exsmiles import IncompleteMoleculeError, to_standard_smiles

logger = logging.getLogger(__name__)

ORDER_BY_CHOICES = ("generation-asc", "fitness-desc", "weight-asc")

# Serialized field order; every record line carries exactly these keys.
_FIELDS = (
    "run_id",
    "generation",
    "chromosome_id",
    "genome",
    "standard_smiles",
    "fitness",
    "user_score",
    "heavy_atoms",
    "weight",
    "parent_ids",
    "op_log",
)


class DuplicateIdError(Exception):
    """A (run_id, chromosome_id) pair was archived twice."""


class IOFailureError(Exception):
    """The archive file could not be read, written, or decoded."""


class MalformedQueryError(Exception):
    """A search query had an unknown sort order or a non-positive limit."""


@dataclass
class GenerationRecord:
    run_id: str
    generation: int
    chromosome_id: int
    genome: str
    standard_smiles: str
    fitness: float
    user_score: float | None
    heavy_atoms: int
    weight: float
    parent_ids: list[int] = field(default_factory=list)
    op_log: list[str] = field(default_factory=list)

    def to_json_line(self) -> str:
        obj = {name: getattr(self, name) for name in _FIELDS}
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json_line(cls, line: str) -> "GenerationRecord":
        obj = json.loads(line)
        return cls(**{name: obj[name] for name in _FIELDS})


def record_from_chromosome(
    run_id: str, generation: int, ch: Chromosome, table: ElementTable
) -> GenerationRecord:
    try:
        smiles = to_standard_smiles(ch.graph, table)
    except IncompleteMoleculeError:
        smiles = ""
    return GenerationRecord(
        run_id=run_id,
        generation=generation,
        chromosome_id=ch.id,
        genome=ch.genome,
        standard_smiles=smiles,
        fitness=ch.fitness,
        user_score=ch.user_score,
        heavy_atoms=ch.graph.heavy_atom_count,
        weight=molecular_weight(table, ch.graph),
        parent_ids=list(ch.parent_ids),
        op_log=list(ch.op_log),
    )


@dataclass(frozen=True)
class ArchiveQuery:
    """Conjunction of optional range/substring filters plus ordering.

    Inverted ranges are legal and simply match nothing. ``substr`` matches
    against the genome text. Results are sorted by ``order_by`` with ties
    broken by (generation, chromosome_id); ``limit`` truncates afterwards.
    """

    gen_min: int | None = None
    gen_max: int | None = None
    fit_min: float | None = None
    fit_max: float | None = None
    wt_min: float | None = None
    wt_max: float | None = None
    atoms_min: int | None = None
    atoms_max: int | None = None
    substr: str | None = None
    limit: int | None = None
    order_by: str = "generation-asc"

    def __post_init__(self):
        if self.order_by not in ORDER_BY_CHOICES:
            raise MalformedQueryError(f"unknown order_by: {self.order_by!r}")
        if self.limit is not None and self.limit < 1:
            raise MalformedQueryError(f"limit must be >= 1, got {self.limit}")

    def matches(self, r: GenerationRecord) -> bool:
        if self.gen_min is not None and r.generation < self.gen_min:
            return False
        if self.gen_max is not None and r.generation > self.gen_max:
            return False
        if self.fit_min is not None and r.fitness < self.fit_min:
            return False
        if self.fit_max is not None and r.fitness > self.fit_max:
            return False
        if self.wt_min is not None and r.weight < self.wt_min:
            return False
        if self.wt_max is not None and r.weight > self.wt_max:
            return False
        if self.atoms_min is not None and r.heavy_atoms < self.atoms_min:
            return False
        if self.atoms_max is not None and r.heavy_atoms > self.atoms_max:
            return False
        if self.substr is not None and self.substr not in r.genome:
            return False
        return True

    def sort_key(self, r: GenerationRecord):
        if self.order_by == "fitness-desc":
            return (-r.fitness, r.generation, r.chromosome_id)
        if self.order_by == "weight-asc":
            return (r.weight, r.generation, r.chromosome_id)
        return (r.generation, r.chromosome_id)


class ArchiveStore:
    """One run's archive. Create for writing, open for browsing."""

    def __init__(self, path: Path, handle, records: list[GenerationRecord]):
        self.path = path
        self._handle = handle  # None = read-only
        self._records = records
        self._seen = {(r.run_id, r.chromosome_id) for r in records}
        self._lock = threading.Lock()

    @classmethod
    def create(cls, path: str | os.PathLike) -> "ArchiveStore":
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            handle = path.open("w", encoding="utf-8")
        except OSError as e:
            raise IOFailureError(f"cannot create archive {path}: {e}") from e
        return cls(path, handle, [])

    @classmethod
    def open(cls, path: str | os.PathLike) -> "ArchiveStore":
        path = Path(path)
        records = []
        try:
            with path.open("r", encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        records.append(GenerationRecord.from_json_line(line))
                    except (ValueError, KeyError, TypeError) as e:
                        raise IOFailureError(
                            f"{path}:{lineno}: bad archive record: {e}"
                        ) from e
        except OSError as e:
            raise IOFailureError(f"cannot read archive {path}: {e}") from e
        return cls(path, None, records)

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[GenerationRecord]:
        with self._lock:
            return list(self._records)

    def append_generation(self, records: list[GenerationRecord]) -> None:
        if self._handle is None:
            raise IOFailureError(f"archive {self.path} is open read-only")
        with self._lock:
            for r in records:
                key = (r.run_id, r.chromosome_id)
                if key in self._seen:
                    raise DuplicateIdError(f"chromosome {key[1]} already archived for {key[0]}")
            try:
                for r in records:
                    self._handle.write(r.to_json_line() + "\n")
                self._handle.flush()
                os.fsync(self._handle.fileno())
            except OSError as e:
                raise IOFailureError(f"cannot append to {self.path}: {e}") from e
            for r in records:
                self._seen.add((r.run_id, r.chromosome_id))
                self._records.append(r)

    def search(self, query: ArchiveQuery) -> list[GenerationRecord]:
        with self._lock:
            hits = [r for r in self._records if query.matches(r)]
        hits.sort(key=query.sort_key)
        if query.limit is not None:
            hits = hits[: query.limit]
        return hits

    def meta_path(self) -> Path:
        return self.path.with_name(self.path.name + ".meta.json")

    def write_meta(self, meta: dict) -> None:
        try:
            self.meta_path().write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        except OSError as e:
            raise IOFailureError(f"cannot write {self.meta_path()}: {e}") from e

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
