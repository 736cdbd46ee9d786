"""Run orchestration: config parsing, the generation loop, and run control.

A run is fully determined by its config (including the seed): one RNG stream
drives generation, breeding, and display sampling in a fixed order, so the
same config always produces byte-identical archives. Wall-clock details live
in the archive's sidecar meta file, never in the records themselves.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from random import Random
from typing import Callable

from .archive import ArchiveStore, record_from_chromosome
from .chem import DEFAULT_TABLE, ElementTable, ValidityRules
from .evolve import EvolveParams, step_generation
from .exsmiles import ParseError, parse
from .fitness import (
    DEFAULT_SCORE_SCALE,
    DisplayStrategy,
    FitnessConfig,
    InteractionConfig,
    InteractionSession,
    make_evaluator,
    make_pairwise_similarity,
    merge_user_scores,
    select_for_display,
)
from .fragments import FragmentError, load_fragments
from .genesis import GenSpec, initial_population

logger = logging.getLogger(__name__)

STATE_IDLE = "idle"
STATE_RUNNING = "running"
STATE_AWAITING_SCORES = "awaiting-scores"
STATE_FINISHED = "finished"
STATE_FAILED = "failed"

CONTROL_COMMANDS = ("pause", "resume", "stop", "skip-interaction")


class ConfigError(Exception):
    """A config field is missing, mistyped, or out of range."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8765


@dataclass
class RunConfig:
    seed: int
    archive_path: str
    table: ElementTable
    rules: ValidityRules
    fragment_texts: list[str]
    leads: list[str]
    genesis: GenSpec
    evolve: EvolveParams
    fitness: FitnessConfig
    interaction: InteractionConfig | None
    api: ApiConfig | None
    run_id: str
    canonical: dict

    @property
    def fragments(self):
        return self.genesis.fragments


@dataclass
class RunStatus:
    """Mutable status record; the run loop is its only writer."""

    run_id: str
    state: str = STATE_IDLE
    generation: int = 0
    best_fitness: float | None = None
    best_genome: str | None = None
    population_size: int | None = None
    reason: str | None = None
    error: Exception | None = None
    session: InteractionSession | None = None

    def as_dict(self) -> dict:
        out = {
            "run_id": self.run_id,
            "state": self.state,
            "generation": self.generation,
            "population_size": self.population_size,
            "best": None,
        }
        if self.best_fitness is not None:
            out["best"] = {"genome": self.best_genome, "fitness": self.best_fitness}
        if self.reason is not None:
            out["reason"] = self.reason
        if self.session is not None:
            out["awaiting"] = {
                "generation": self.session.generation,
                "displayed": self.session.displayed_ids(),
                "scale": [
                    {"label": label, "value": value}
                    for label, value in self.session.scale
                ],
            }
        return out


class RunControl:
    """Thread-safe command mailbox checked at generation boundaries."""

    def __init__(self):
        self.cond = threading.Condition()
        self.paused = False
        self.stopped = False
        self._skip = False

    def post(self, command: str) -> None:
        if command not in CONTROL_COMMANDS:
            raise ValueError(f"unknown control command: {command!r}")
        with self.cond:
            if command == "pause":
                self.paused = True
            elif command == "resume":
                self.paused = False
            elif command == "stop":
                self.stopped = True
                self.paused = False
            else:
                self._skip = True
            self.cond.notify_all()

    def wake(self) -> None:
        """Nudge anything blocked on the condition (e.g. a score waiter)."""
        with self.cond:
            self.cond.notify_all()

    def wait_while_paused(self) -> None:
        with self.cond:
            while self.paused and not self.stopped:
                self.cond.wait()

    def skip_pending(self) -> bool:
        with self.cond:
            return self._skip

    def consume_skip(self) -> bool:
        with self.cond:
            skip = self._skip
            self._skip = False
            return skip


# --- config parsing ---------------------------------------------------------

_MISSING = object()


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _reject_unknown(obj: dict, allowed: set[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(_join(path, key), "unknown field")


def _field(obj: dict, key: str, path: str, check: Callable, default=_MISSING):
    full = _join(path, key)
    value = obj.get(key)
    if value is None:
        if default is _MISSING:
            raise ConfigError(full, "required field is missing")
        return default
    return check(value, full)


def _expect_int(value, full: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(full, "expected an integer")
    return value


def _expect_num(value, full: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(full, "expected a number")
    return float(value)


def _expect_str(value, full: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(full, "expected a string")
    return value

def _expect_dict(value, full: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(full, "expected an object")
    return value


def _expect_str_list(value, full: str) -> list[str]:
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise ConfigError(full, "expected a list of strings")
    return value


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config: {e}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from None
    return parse_config(obj)


def parse_config(obj) -> RunConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config", "top level must be a JSON object")
    _reject_unknown(
        obj,
        {
            "seed", "archive_path", "elements", "element_overrides", "rules",
            "fragments", "leads", "generation", "evolution", "fitness",
            "interaction", "api",
        },
        "",
    )
    seed = _field(obj, "seed", "", _expect_int)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", "must fit in 64 unsigned bits")
    archive_path = _field(obj, "archive_path", "", _expect_str)

    table = DEFAULT_TABLE
    overrides = _field(obj, "element_overrides", "", _expect_dict, default=None)
    if overrides is not None:
        parsed = {}
        for symbol, fields in overrides.items():
            sub = _expect_dict(fields, _join("element_overrides", symbol))
            _reject_unknown(
                sub, {"valence", "atomic_weight", "enabled"},
                _join("element_overrides", symbol),
            )
            entry = {}
            if "valence" in sub:
                entry["valence"] = _expect_int(
                    sub["valence"], f"element_overrides.{symbol}.valence"
                )
            if "atomic_weight" in sub:
                entry["atomic_weight"] = _expect_num(
                    sub["atomic_weight"], f"element_overrides.{symbol}.atomic_weight"
                )
            if "enabled" in sub:
                if not isinstance(sub["enabled"], bool):
                    raise ConfigError(f"element_overrides.{symbol}.enabled", "expected a boolean")
                entry["enabled"] = sub["enabled"]
            parsed[symbol] = entry
        try:
            table = table.with_overrides(parsed)
        except ValueError as e:
            raise ConfigError("element_overrides", str(e)) from None
    elements = _field(obj, "elements", "", _expect_str_list, default=None)
    if elements is not None:
        try:
            table = table.restricted_to(elements)
        except Exception as e:
            raise ConfigError("elements", str(e)) from None

    rules_obj = _field(obj, "rules", "", _expect_dict)
    _reject_unknown(rules_obj, {"min_atoms", "max_atoms", "max_weight"}, "rules")
    try:
        rules = ValidityRules(
            min_atoms=_field(rules_obj, "min_atoms", "rules", _expect_int),
            max_atoms=_field(rules_obj, "max_atoms", "rules", _expect_int),
            max_weight=_field(rules_obj, "max_weight", "rules", _expect_num),
        )
    except ValueError as e:
        raise ConfigError("rules", str(e)) from None

    fragment_texts = _field(obj, "fragments", "", _expect_str_list, default=[])
    try:
        fragments = load_fragments(table, fragment_texts)
    except FragmentError as e:
        raise ConfigError("fragments", str(e)) from None

    leads = _field(obj, "leads", "", _expect_str_list, default=[])
    for i, text in enumerate(leads):
        try:
            parse(table, text)
        except ParseError as e:
            raise ConfigError(f"leads[{i}]", str(e)) from None

    gen_obj = _field(obj, "generation", "", _expect_dict, default={})
    _reject_unknown(
        gen_obj, {"atom_vs_fragment_pct", "growth_stop_pct", "max_attempts"}, "generation"
    )
    try:
        genesis = GenSpec(
            table=table,
            rules=rules,
            fragments=fragments,
            atom_vs_fragment_pct=_field(
                gen_obj, "atom_vs_fragment_pct", "generation", _expect_num, default=50.0
            ),
            growth_stop_pct=_field(
                gen_obj, "growth_stop_pct", "generation", _expect_num, default=30.0
            ),
            max_attempts=_field(gen_obj, "max_attempts", "generation", _expect_int, default=100),
        )
    except ValueError as e:
        raise ConfigError("generation", str(e)) from None

    evo_obj = _field(obj, "evolution", "", _expect_dict)
    _reject_unknown(
        evo_obj,
        {
            "population_size", "iterations", "mutation_rate_pct", "crossover_rate_pct",
            "selection_method", "tournament_size", "sample_size", "elitism",
            "max_op_attempts",
        },
        "evolution",
    )
    try:
        evolve = EvolveParams(
            population_size=_field(evo_obj, "population_size", "evolution", _expect_int),
            iterations=_field(evo_obj, "iterations", "evolution", _expect_int),
            mutation_rate_pct=_field(evo_obj, "mutation_rate_pct", "evolution", _expect_num),
            crossover_rate_pct=_field(evo_obj, "crossover_rate_pct", "evolution", _expect_num),
            selection_method=_field(
                evo_obj, "selection_method", "evolution", _expect_str, default="roulette"
            ),
            tournament_size=_field(evo_obj, "tournament_size", "evolution", _expect_int, default=3),
            sample_size=_field(evo_obj, "sample_size", "evolution", _expect_int, default=5),
            elitism=_field(evo_obj, "elitism", "evolution", _expect_int, default=1),
            max_op_attempts=_field(evo_obj, "max_op_attempts", "evolution", _expect_int, default=10),
        )
    except ValueError as e:
        raise ConfigError("evolution", str(e)) from None
    if len(leads) > evolve.population_size:
        raise ConfigError("leads", f"{len(leads)} leads exceed population size")

    fit_obj = _field(obj, "fitness", "", _expect_dict)
    _reject_unknown(fit_obj, {"target", "violation_penalty"}, "fitness")
    target = _field(fit_obj, "target", "fitness", _expect_str)
    try:
        parse(table, target)
    except ParseError as e:
        raise ConfigError("fitness.target", str(e)) from None
    try:
        fitness = FitnessConfig(
            target_text=target,
            rules=rules,
            violation_penalty=_field(
                fit_obj, "violation_penalty", "fitness", _expect_num, default=0.5
            ),
        )
    except ValueError as e:
        raise ConfigError("fitness", str(e)) from None

    interaction = None
    inter_obj = _field(obj, "interaction", "", _expect_dict, default=None)
    if inter_obj is not None:
        _reject_unknown(
            inter_obj,
            {"interval_generations", "strategy", "score_scale", "timeout_s"},
            "interaction",
        )
        strat_obj = _field(inter_obj, "strategy", "interaction", _expect_dict)
        _reject_unknown(strat_obj, {"kind", "param"}, "interaction.strategy")
        try:
            strategy = DisplayStrategy(
                kind=_field(strat_obj, "kind", "interaction.strategy", _expect_str),
                param=_field(strat_obj, "param", "interaction.strategy", _expect_int, default=None),
            )
        except ValueError as e:
            raise ConfigError("interaction.strategy", str(e)) from None
        scale_obj = _field(inter_obj, "score_scale", "interaction", _expect_dict, default=None)
        if scale_obj is None:
            scale = DEFAULT_SCORE_SCALE
        else:
            scale = tuple(
                (label, _expect_num(value, f"interaction.score_scale.{label}"))
                for label, value in scale_obj.items()
            )
        try:
            interaction = InteractionConfig(
                interval_generations=_field(
                    inter_obj, "interval_generations", "interaction", _expect_int
                ),
                strategy=strategy,
                score_scale=scale,
                timeout_s=_field(inter_obj, "timeout_s", "interaction", _expect_num, default=None),
            )
        except ValueError as e:
            raise ConfigError("interaction", str(e)) from None

    api = None
    api_obj = _field(obj, "api", "", _expect_dict, default=None)
    if api_obj is not None:
        _reject_unknown(api_obj, {"host", "port"}, "api")
        port = _field(api_obj, "port", "api", _expect_int, default=8765)
        if not 1 <= port <= 65535:
            raise ConfigError("api.port", "must be in 1..65535")
        api = ApiConfig(
            host=_field(api_obj, "host", "api", _expect_str, default="127.0.0.1"),
            port=port,
        )

    config = RunConfig(
        seed=seed,
        archive_path=archive_path,
        table=table,
        rules=rules,
        fragment_texts=list(fragment_texts),
        leads=list(leads),
        genesis=genesis,
        evolve=evolve,
        fitness=fitness,
        interaction=interaction,
        api=api,
        run_id="",
        canonical={},
    )
    config.canonical = canonical_config(config)
    digest = hashlib.sha256(
        json.dumps(config.canonical, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    config.run_id = f"run-{digest[:12]}"
    return config


def canonical_config(cfg: RunConfig) -> dict:
    """Normalized config dict: the run's identity.

    Every effective parameter appears with defaults applied. The archive path
    and api binding are deliberately excluded: where a run stores or serves
    its results doesn't change what the run computes.
    """
    elements = {}
    for symbol in sorted(cfg.table.symbols()):
        info = cfg.table.info(symbol)
        elements[symbol] = {
            "valence": info.valence,
            "atomic_weight": info.atomic_weight,
            "enabled": info.enabled,
        }
    interaction = None
    if cfg.interaction is not None:
        interaction = {
            "interval_generations": cfg.interaction.interval_generations,
            "strategy": {
                "kind": cfg.interaction.strategy.kind,
                "param": cfg.interaction.strategy.param,
            },
            "score_scale": {label: value for label, value in cfg.interaction.score_scale},
            "timeout_s": cfg.interaction.timeout_s,
        }
    return {
        "seed": cfg.seed,
        "elements": elements,
        "rules": {
            "min_atoms": cfg.rules.min_atoms,
            "max_atoms": cfg.rules.max_atoms,
            "max_weight": cfg.rules.max_weight,
        },
        "fragments": list(cfg.fragment_texts),
        "leads": list(cfg.leads),
        "generation": {
            "atom_vs_fragment_pct": cfg.genesis.atom_vs_fragment_pct,
            "growth_stop_pct": cfg.genesis.growth_stop_pct,
            "max_attempts": cfg.genesis.max_attempts,
        },
        "evolution": {
            "population_size": cfg.evolve.population_size,
            "iterations": cfg.evolve.iterations,
            "mutation_rate_pct": cfg.evolve.mutation_rate_pct,
            "crossover_rate_pct": cfg.evolve.crossover_rate_pct,
            "selection_method": cfg.evolve.selection_method,
            "tournament_size": cfg.evolve.tournament_size,
            "sample_size": cfg.evolve.sample_size,
            "elitism": cfg.evolve.elitism,
            "max_op_attempts": cfg.evolve.max_op_attempts,
        },
        "fitness": {
            "target": cfg.fitness.target_text,
            "violation_penalty": cfg.fitness.violation_penalty,
        },
        "interaction": interaction,
    }


# --- the run loop -----------------------------------------------------------


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _note_population(status: RunStatus, pop) -> None:
    best = max(pop.members, key=lambda c: (c.fitness, -c.id))
    status.generation = pop.generation
    status.population_size = len(pop.members)
    status.best_fitness = best.fitness
    status.best_genome = best.genome


def run(
    config: RunConfig,
    *,
    interaction_handler: Callable[[InteractionSession], dict[int, float] | None] | None = None,
    control: RunControl | None = None,
    store: ArchiveStore | None = None,
    status_cb: Callable[[RunStatus], None] | None = None,
) -> RunStatus:
    """Execute one run to completion; returns the terminal status.

    The handler is called whenever an interaction falls due; ``None`` (or a
    handler returning ``None``) skips the scoring round, which is how headless
    runs behave. Control commands are honored at generation boundaries.
    """
    status = RunStatus(run_id=config.run_id, state=STATE_RUNNING)

    def report() -> None:
        if status_cb is not None:
            status_cb(status)

    rng = Random(config.seed)
    ids = itertools.count(0)
    own_store = store is None
    started = _now()
    meta = {"run_id": config.run_id, "config": config.canonical, "started_at": started}
    report()
    try:
        if store is None:
            store = ArchiveStore.create(config.archive_path)
        store.write_meta({**meta, "state": STATE_RUNNING})
        evaluator = make_evaluator(config.fitness, config.table)
        similarity = make_pairwise_similarity(config.table)
        pop = initial_population(
            config.genesis, config.leads, config.evolve.population_size, rng, ids
        )
        for member in pop.members:
            member.fitness = evaluator(member.graph)
        logger.info("run %s: generation 0 ready", config.run_id)
        while True:
            if control is not None:
                control.wait_while_paused()
            g = pop.generation
            _note_population(status, pop)
            report()
            due = (
                config.interaction is not None
                and g % config.interaction.interval_generations == 0
                and not (control is not None and control.stopped)
            )
            if due:
                if control is not None and control.consume_skip():
                    logger.info("generation %d: interaction skipped on request", g)
                else:
                    session = select_for_display(pop, config.interaction, rng, config.table)
                    status.state = STATE_AWAITING_SCORES
                    status.session = session
                    report()
                    scores = interaction_handler(session) if interaction_handler else None
                    status.state = STATE_RUNNING
                    status.session = None
                    report()
                    if scores:
                        session.pending_scores.clear()
                        session.pending_scores.update(scores)
                        merge_user_scores(pop, session, config.interaction)
                        _note_population(status, pop)
            store.append_generation(
                [
                    record_from_chromosome(config.run_id, g, c, config.table)
                    for c in pop.members
                ]
            )
            if g >= config.evolve.iterations:
                break
            if control is not None and control.stopped:
                logger.info("run %s stopped at generation %d", config.run_id, g)
                break
            pop = step_generation(
                pop,
                config.evolve,
                evaluator,
                config.rules,
                config.fragments,
                config.table,
                rng,
                ids,
                similarity,
            )
        status.state = STATE_FINISHED
        _note_population(status, pop)
        logger.info(
            "run %s finished at generation %d (best %.4f)",
            config.run_id,
            status.generation,
            status.best_fitness,
        )
    except Exception as e:
        logger.exception("run %s failed", config.run_id)
        status.state = STATE_FAILED
        status.reason = f"{type(e).__name__}: {e}"
        status.error = e
        status.session = None
    finally:
        if store is not None:
            try:
                store.write_meta(
                    {
                        **meta,
                        "state": status.state,
                        "finished_at": _now(),
                        "reason": status.reason,
                        "records": len(store),
                    }
                )
            except Exception:
                logger.exception("could not write archive meta for %s", config.run_id)
            if own_store:
                store.close()
    report()
    return status
