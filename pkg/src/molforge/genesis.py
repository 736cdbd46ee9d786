"""Random construction of valid starting molecules.

Molecules are grown one unit at a time (single atoms or library fragments)
from a random seed unit, then hydrogen-capped. Growth stops stochastically
once the minimum size is reached, or earlier when another unit would burst
the size/weight limits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from random import Random
from typing import Iterator

from .chem import ElementTable, MoleculeBuilder, MoleculeGraph, ValidityRules, molecular_weight, validate
from .evolve import Chromosome, Population, chromosome_from_graph
from .exsmiles import ParseError, parse
from .fragments import Fragment

logger = logging.getLogger(__name__)


class GenerationExhaustedError(Exception):
    """Repeated attempts failed to produce a molecule inside the rules."""


class InvalidLeadError(Exception):
    def __init__(self, index: int, message: str):
        super().__init__(f"lead[{index}]: {message}")
        self.index = index


@dataclass
class GenSpec:
    """Everything generate_molecule needs, minus the RNG."""

    table: ElementTable
    rules: ValidityRules
    fragments: list[Fragment] = field(default_factory=list)
    atom_vs_fragment_pct: float = 50.0
    growth_stop_pct: float = 30.0
    max_attempts: int = 100

    def __post_init__(self):
        for name in ("atom_vs_fragment_pct", "growth_stop_pct"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} must be in 0..100")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if not self.table.enabled_heavy_symbols():
            raise ValueError("no enabled elements to build from")


def _fragment_capped_weight(spec: GenSpec, fragment: Fragment) -> float:
    w_h = spec.table.atomic_weight_of("H")
    spare = sum(free for _, free in fragment.open_sites)
    return molecular_weight(spec.table, fragment.graph) + spare * w_h


def _pick_atom_seed(spec: GenSpec, rng: Random) -> bool:
    if not spec.fragments:
        return True
    return rng.random() * 100.0 < spec.atom_vs_fragment_pct


def _attach_unit(spec: GenSpec, builder: MoleculeBuilder, rng: Random) -> bool:
    """Bond one more atom/fragment at a random open site.

    Returns False (without touching the builder) when the picked unit would
    push the molecule past the size or weight limits; the caller caps.
    """
    sites = builder.open_sites()
    host, host_free = sites[rng.randrange(len(sites))]
    w_h = spec.table.atomic_weight_of("H")
    rules = spec.rules

    if _pick_atom_seed(spec, rng):
        element = rng.choice(spec.table.enabled_heavy_symbols())
        valence = spec.table.valence_of(element)
        order = rng.randint(1, min(3, host_free, valence))
        if builder.heavy_count + 1 > rules.max_atoms:
            return False
        capped = (
            builder.capped_weight()
            - order * w_h
            + spec.table.atomic_weight_of(element)
            + (valence - order) * w_h
        )
        if capped > rules.max_weight:
            return False
        new = builder.add_atom(element, 0)
        builder.add_bond(host, new, order)
        return True

    fragment = spec.fragments[rng.randrange(len(spec.fragments))]
    site, site_free = fragment.open_sites[rng.randrange(len(fragment.open_sites))]
    order = rng.randint(1, min(3, host_free, site_free))
    if builder.heavy_count + fragment.heavy_atoms > rules.max_atoms:
        return False
    capped = builder.capped_weight() + _fragment_capped_weight(spec, fragment) - 2 * order * w_h
    if capped > rules.max_weight:
        return False
    offset = builder.merge(fragment.graph)
    builder.add_bond(host, offset + site, order)
    return True


def generate_molecule(spec: GenSpec, rng: Random) -> MoleculeGraph:
    """Grow-and-cap one random molecule satisfying the validity rules."""
    for attempt in range(spec.max_attempts):
        builder = MoleculeBuilder(spec.table)
        if _pick_atom_seed(spec, rng):
            builder.add_atom(rng.choice(spec.table.enabled_heavy_symbols()), 0)
        else:
            fragment = spec.fragments[rng.randrange(len(spec.fragments))]
            builder.merge(fragment.graph)
        while True:
            if not builder.open_sites():
                break
            if (
                builder.heavy_count >= spec.rules.min_atoms
                and rng.random() * 100.0 < spec.growth_stop_pct
            ):
                builder.cap_open_sites()
                break
            if not _attach_unit(spec, builder, rng):
                builder.cap_open_sites()
                break
        g = builder.build(root=0)
        if validate(spec.table, spec.rules, g).valid:
            return g
    raise GenerationExhaustedError(
        f"no valid molecule after {spec.max_attempts} attempts"
    )


def initial_population(
    spec: GenSpec,
    leads: list[str],
    size: int,
    rng: Random,
    ids: Iterator[int],
) -> Population:
    """Generation zero: user-supplied lead molecules first, then random ones."""
    if size < 1:
        raise ValueError("population size must be >= 1")
    if len(leads) > size:
        raise ValueError(f"{len(leads)} leads exceed population size {size}")
    members: list[Chromosome] = []
    for k, text in enumerate(leads):
        try:
            g = parse(spec.table, text)
        except ParseError as e:
            raise InvalidLeadError(k, str(e)) from e
        report = validate(spec.table, spec.rules, g)
        if not report.valid:
            kinds = ", ".join(v.kind for v in report.violations)
            raise InvalidLeadError(k, f"violates rules: {kinds}")
        members.append(chromosome_from_graph(g, next(ids), op_log=["lead"]))
    while len(members) < size:
        g = generate_molecule(spec, rng)
        members.append(chromosome_from_graph(g, next(ids), op_log=["genesis"]))
    logger.info("generation 0 built: %d leads, %d generated", len(leads), size - len(leads))
    return Population(members=members, generation=0)
