"""Fitness scoring and the human steering loop.

System fitness is a multiset Tanimoto similarity between compositional
fingerprints, scaled down by a penalty factor for each violated rule class.
User scores submitted through an interaction session replace (or, for the
banding strategy, scale) system fitness before a generation is archived.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from random import Random
from typing import TYPE_CHECKING, Callable

from .chem import (
    DEFAULT_TABLE,
    ElementTable,
    MoleculeGraph,
    ValidityRules,
    VIOLATION_OVER_WEIGHT,
    VIOLATION_TOO_FEW,
    VIOLATION_TOO_MANY,
    molecular_weight,
    validate,
)
from .exsmiles import IncompleteMoleculeError, parse, to_standard_smiles

if TYPE_CHECKING:
    from .evolve import Chromosome, Population

logger = logging.getLogger(__name__)

# Feature keys: ("elem", symbol), ("hcount", symbol), ("bond", lo, order, hi)
Fingerprint = dict[tuple, int]

STRATEGY_ALL = "all"
STRATEGY_TOP_N = "top-n"
STRATEGY_BANDING = "banding"
STRATEGY_PARTIAL_SEQUENTIAL = "partial-sequential"
STRATEGY_PARTIAL_RANDOM = "partial-random"

_STRATEGIES_WITH_PARAM = (
    STRATEGY_TOP_N,
    STRATEGY_BANDING,
    STRATEGY_PARTIAL_SEQUENTIAL,
    STRATEGY_PARTIAL_RANDOM,
)

DEFAULT_SCORE_SCALE: tuple[tuple[str, float], ...] = (
    ("Excellent", 1.0),
    ("Good", 0.75),
    ("Average", 0.5),
    ("Poor", 0.25),
    ("Dreadful", 0.0),
)


class StrategyParamTooLargeError(Exception):
    """Display strategy parameter exceeds the population size."""


class UnknownChromosomeIdError(Exception):
    def __init__(self, chromosome_id: int):
        super().__init__(f"chromosome {chromosome_id} was not displayed this session")
        self.chromosome_id = chromosome_id


class ScoreOffScaleError(Exception):
    def __init__(self, value: float):
        super().__init__(f"score {value} is not on the configured scale")
        self.value = value


def fingerprint(g: MoleculeGraph) -> Fingerprint:
    """Compositional feature multiset: elements, H totals, bond triples."""
    fp: Fingerprint = {}
    h_totals: dict[str, int] = {}
    for atom in g.atoms:
        key = ("elem", atom.element)
        fp[key] = fp.get(key, 0) + 1
        h_totals[atom.element] = h_totals.get(atom.element, 0) + atom.h_count
    for element, total in h_totals.items():
        if total > 0:
            fp[("hcount", element)] = total
    for a, b, order in g.bonds:
        ea, eb = g.atoms[a].element, g.atoms[b].element
        lo, hi = (ea, eb) if ea <= eb else (eb, ea)
        key = ("bond", lo, order, hi)
        fp[key] = fp.get(key, 0) + 1
    return fp


def similarity(a: Fingerprint, b: Fingerprint) -> float:
    """Multiset Tanimoto: sum of per-key minima over sum of per-key maxima."""
    if not a and not b:
        return 1.0
    mins = 0
    maxs = 0
    for key in a.keys() | b.keys():
        ca = a.get(key, 0)
        cb = b.get(key, 0)
        mins += ca if ca < cb else cb
        maxs += ca if ca > cb else cb
    return mins / maxs if maxs else 1.0


@dataclass
class FitnessConfig:
    target_text: str
    rules: ValidityRules
    violation_penalty: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.violation_penalty <= 1.0:
            raise ValueError("violation_penalty must be in [0, 1]")


def evaluate(g: MoleculeGraph, cfg: FitnessConfig, table: ElementTable) -> float:
    """Target similarity, penalized per violated rule class, clamped to [0, 1]."""
    return make_evaluator(cfg, table)(g)


def make_evaluator(cfg: FitnessConfig, table: ElementTable) -> Callable[[MoleculeGraph], float]:
    """Precompute the target fingerprint once; returns the scoring function."""
    target_fp = fingerprint(parse(table, cfg.target_text))
    count_kinds = (VIOLATION_TOO_FEW, VIOLATION_TOO_MANY)

    def score(g: MoleculeGraph) -> float:
        value = similarity(fingerprint(g), target_fp)
        report = validate(table, cfg.rules, g)
        if not report.valid:
            kinds = {v.kind for v in report.violations}
            if kinds & set(count_kinds):
                value *= cfg.violation_penalty
            if VIOLATION_OVER_WEIGHT in kinds:
                value *= cfg.violation_penalty
        return min(1.0, max(0.0, value))

    return score


def make_pairwise_similarity(table: ElementTable) -> Callable[[str, str], float]:
    """Genome-text similarity with a fingerprint cache (for selection methods)."""
    cache: dict[str, Fingerprint] = {}

    def fp_of(genome: str) -> Fingerprint:
        fp = cache.get(genome)
        if fp is None:
            fp = fingerprint(parse(table, genome))
            cache[genome] = fp
        return fp

    def sim(genome_a: str, genome_b: str) -> float:
        return similarity(fp_of(genome_a), fp_of(genome_b))

    return sim


@dataclass(frozen=True)
class DisplayStrategy:
    kind: str
    param: int | None = None

    def __post_init__(self):
        if self.kind == STRATEGY_ALL:
            if self.param is not None:
                raise ValueError("'all' takes no parameter")
        elif self.kind in _STRATEGIES_WITH_PARAM:
            if self.param is None or self.param < 1:
                raise ValueError(f"{self.kind} needs a positive parameter")
        else:
            raise ValueError(f"unknown display strategy: {self.kind!r}")


@dataclass
class InteractionConfig:
    interval_generations: int
    strategy: DisplayStrategy
    score_scale: tuple[tuple[str, float], ...] = DEFAULT_SCORE_SCALE
    timeout_s: float | None = None

    def __post_init__(self):
        if not 1 <= self.interval_generations <= 100:
            raise ValueError("interval_generations must be in 1..100")
        values = [v for _, v in self.score_scale]
        if not values:
            raise ValueError("score scale must not be empty")
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("scale values must be in [0, 1]")
        if len(set(values)) != len(values):
            raise ValueError("scale values must be distinct")
        if self.timeout_s is not None and self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")

    def scale_values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.score_scale)


@dataclass
class InteractionSession:
    generation: int
    displayed: list[dict]  # rendering payloads, one per displayed chromosome
    pending_scores: dict[int, float] = field(default_factory=dict)
    strategy_state: dict = field(default_factory=dict)
    scale: tuple[tuple[str, float], ...] = ()

    def displayed_ids(self) -> list[int]:
        return [p["chromosome_id"] for p in self.displayed]


def molecule_payload(ch: "Chromosome", table: ElementTable) -> dict:
    """Everything a client needs to draw and judge one molecule."""
    g = ch.graph
    try:
        standard = to_standard_smiles(g, table)
    except IncompleteMoleculeError:
        standard = ""
    return {
        "chromosome_id": ch.id,
        "genome": ch.genome,
        "standard_smiles": standard,
        "fitness": ch.fitness,
        "user_score": ch.user_score,
        "heavy_atoms": g.heavy_atom_count,
        "weight": molecular_weight(table, g),
        "graph": {
            "nodes": [{"element": a.element, "h_count": a.h_count} for a in g.atoms],
            "edges": [{"a": b.a, "b": b.b, "order": b.order} for b in g.bonds],
        },
    }


def _by_fitness(members: list) -> list:
    return sorted(members, key=lambda c: (-c.fitness, c.id))


def select_for_display(
    pop: "Population",
    cfg: InteractionConfig,
    rng: Random,
    table: ElementTable | None = None,
) -> InteractionSession:
    """Pick which members the user gets to judge this generation."""
    table = table or DEFAULT_TABLE
    members = pop.members
    size = len(members)
    strategy = cfg.strategy
    state: dict = {"strategy": strategy.kind}

    if strategy.kind == STRATEGY_ALL:
        chosen = _by_fitness(members)
    elif strategy.kind == STRATEGY_TOP_N:
        if strategy.param > size:
            raise StrategyParamTooLargeError(f"top-n {strategy.param} > population {size}")
        chosen = _by_fitness(members)[: strategy.param]
    elif strategy.kind == STRATEGY_BANDING:
        bands = strategy.param
        if bands > size:
            raise StrategyParamTooLargeError(f"banding {bands} > population {size}")
        ranked = _by_fitness(members)
        base, extra = divmod(size, bands)
        chosen = []
        band_members: dict[int, list[int]] = {}
        start = 0
        for b in range(bands):
            width = base + (1 if b < extra else 0)
            band = ranked[start : start + width]
            start += width
            band_members[b] = [c.id for c in band]
            chosen.append(band[rng.randrange(len(band))])
        state["bands"] = band_members
        state["representatives"] = {b: chosen[b].id for b in range(bands)}
    elif strategy.kind == STRATEGY_PARTIAL_SEQUENTIAL:
        step = strategy.param
        if step > size:
            raise StrategyParamTooLargeError(f"step {step} > population {size}")
        ranked = _by_fitness(members)
        chosen = [ranked[i] for i in range(0, size, step)]
    elif strategy.kind == STRATEGY_PARTIAL_RANDOM:
        count = strategy.param
        if count > size:
            raise StrategyParamTooLargeError(f"partial-random {count} > population {size}")
        chosen = rng.sample(members, count)
    else:  # pragma: no cover - DisplayStrategy already rejects unknown kinds
        raise ValueError(strategy.kind)

    payloads = [molecule_payload(c, table) for c in chosen]
    return InteractionSession(
        generation=pop.generation,
        displayed=payloads,
        strategy_state=state,
        scale=cfg.score_scale,
    )


def merge_user_scores(
    pop: "Population", session: InteractionSession, cfg: InteractionConfig
) -> "Population":
    """Fold the session's pending scores back into the population.

    Non-banding strategies: a scored member's fitness is replaced by the user
    score. Banding: every member of a scored representative's band has its
    system fitness multiplied by the representative's score. Unscored members
    keep their system fitness either way.
    """
    displayed = set(session.displayed_ids())
    values = cfg.scale_values()
    for cid, value in session.pending_scores.items():
        if cid not in displayed:
            raise UnknownChromosomeIdError(cid)
        if not any(abs(value - v) < 1e-9 for v in values):
            raise ScoreOffScaleError(value)

    by_id = {c.id: c for c in pop.members}
    if cfg.strategy.kind == STRATEGY_BANDING:
        bands: dict[int, list[int]] = session.strategy_state.get("bands", {})
        reps: dict[int, int] = session.strategy_state.get("representatives", {})
        for band, rep_id in reps.items():
            if rep_id not in session.pending_scores:
                continue
            score = session.pending_scores[rep_id]
            for member_id in bands[band]:
                member = by_id[member_id]
                member.fitness = member.fitness * score
            by_id[rep_id].user_score = score
    else:
        for cid, value in session.pending_scores.items():
            member = by_id.get(cid)
            if member is None:
                raise UnknownChromosomeIdError(cid)
            member.fitness = value
            member.user_score = value
    if session.pending_scores:
        logger.info(
            "merged %d user score(s) into generation %d",
            len(session.pending_scores),
            session.generation,
        )
    return pop
