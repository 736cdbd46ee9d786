"""Genetic operators over molecule genomes.

Genomes are canonical expanded SMILES strings; every chromosome also carries
its parsed graph so operators work structurally. All operators either produce
a molecule that passes the run's validity rules or declare failure cleanly,
so the population never contains broken structures.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from random import Random
from typing import Callable, Iterator

from .chem import (
    Atom,
    Bond,
    ElementTable,
    MoleculeBuilder,
    MoleculeGraph,
    ValidityRules,
    validate,
)
from .exsmiles import serialize
from .fragments import Fragment

logger = logging.getLogger(__name__)

SELECTION_METHODS = (
    "roulette",
    "tournament",
    "random",
    "attractive",
    "difference",
    "sequential",
)


class PopulationTooSmallError(Exception):
    """Parent selection needs at least two members."""


@dataclass
class Chromosome:
    id: int
    genome: str
    graph: MoleculeGraph
    fitness: float = 0.0
    user_score: float | None = None
    parent_ids: tuple[int, ...] = ()
    op_log: list[str] = field(default_factory=list)


@dataclass
class Population:
    members: list[Chromosome]
    generation: int = 0

    def __post_init__(self):
        if not self.members:
            raise ValueError("population must not be empty")


def chromosome_from_graph(
    g: MoleculeGraph,
    chromosome_id: int,
    parent_ids: tuple[int, ...] = (),
    op_log: list[str] | None = None,
) -> Chromosome:
    return Chromosome(
        id=chromosome_id,
        genome=serialize(g),
        graph=g,
        parent_ids=parent_ids,
        op_log=list(op_log or []),
    )


@dataclass
class EvolveParams:
    population_size: int
    iterations: int
    mutation_rate_pct: float
    crossover_rate_pct: float
    selection_method: str = "roulette"
    tournament_size: int = 3
    sample_size: int = 5
    elitism: int = 1
    max_op_attempts: int = 10

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        for name in ("mutation_rate_pct", "crossover_rate_pct"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 100.0:
                raise ValueError(f"{name} must be in 0..100")
        if self.selection_method not in SELECTION_METHODS:
            raise ValueError(f"unknown selection method: {self.selection_method!r}")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be >= 2")
        if self.sample_size < 2:
            raise ValueError("sample_size must be >= 2")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must be in 0..population_size-1")
        if self.max_op_attempts < 1:
            raise ValueError("max_op_attempts must be >= 1")


def _ranked(members: list[Chromosome]) -> list[Chromosome]:
    """Descending fitness; ties broken by ascending chromosome id."""
    return sorted(members, key=lambda c: (-c.fitness, c.id))


def _random_pair(members: list[Chromosome], rng: Random) -> tuple[Chromosome, Chromosome]:
    a, b = rng.sample(members, 2)
    return a, b


def _roulette_draw(members: list[Chromosome], total: float, rng: Random) -> Chromosome:
    r = rng.random() * total
    acc = 0.0
    for c in members:
        acc += c.fitness
        if r < acc:
            return c
    return members[-1]


def select_parents(
    pop: Population,
    params: EvolveParams,
    similarity: Callable[[str, str], float] | None,
    cursor: int,
    rng: Random,
) -> tuple[Chromosome, Chromosome]:
    """Pick a breeding pair using the configured selection method.

    `cursor` only matters for sequential selection (the caller advances it per
    pair). `similarity` is required by the attractive/difference methods.
    """
    members = pop.members
    if len(members) < 2:
        raise PopulationTooSmallError(f"population of {len(members)} cannot breed")
    method = params.selection_method

    if method == "roulette":
        total = sum(c.fitness for c in members)
        if total <= 0.0:
            # Nothing to weight by; fall back to uniform selection.
            return _random_pair(members, rng)
        first = _roulette_draw(members, total, rng)
        second = _roulette_draw(members, total, rng)
        redraws = 0
        while second is first and redraws < 10:
            second = _roulette_draw(members, total, rng)
            redraws += 1
        return first, second

    if method == "tournament":
        entrants = rng.sample(members, min(params.tournament_size, len(members)))
        top = _ranked(entrants)
        return top[0], top[1]

    if method == "random":
        return _random_pair(members, rng)

    if method in ("attractive", "difference"):
        if similarity is None:
            raise ValueError(f"{method} selection needs a similarity function")
        sample = rng.sample(members, min(params.sample_size, len(members)))
        want_max = method == "attractive"
        best: tuple[Chromosome, Chromosome] | None = None
        best_value = 0.0
        for i in range(len(sample)):
            for j in range(i + 1, len(sample)):
                x, y = sample[i], sample[j]
                if x.id > y.id:
                    x, y = y, x
                value = similarity(x.genome, y.genome)
                if best is None:
                    better = True
                elif value != best_value:
                    better = value > best_value if want_max else value < best_value
                else:
                    better = (x.id, y.id) < (best[0].id, best[1].id)
                if better:
                    best = (x, y)
                    best_value = value
        assert best is not None
        return best

    if method == "sequential":
        first = members[cursor % len(members)]
        rest = [c for c in members if c is not first]
        return first, rest[rng.randrange(len(rest))]

    raise ValueError(f"unknown selection method: {method!r}")


def _bridges_and_cut_vertices(g: MoleculeGraph) -> tuple[set[tuple[int, int]], set[int]]:
    """Tarjan lowlink pass: edges/vertices whose removal disconnects the graph."""
    n = len(g.atoms)
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    bridges: set[tuple[int, int]] = set()
    cuts: set[int] = set()
    timer = 0
    for start in range(n):
        if disc[start] != -1:
            continue
        disc[start] = low[start] = timer
        timer += 1
        root_children = 0
        stack: list[tuple[int, int]] = [(start, 0)]
        while stack:
            u, k = stack[-1]
            neighbors = g.neighbors(u)
            if k < len(neighbors):
                stack[-1] = (u, k + 1)
                v, _ = neighbors[k]
                if v == parent[u]:
                    continue
                if disc[v] != -1:
                    if disc[v] < low[u]:
                        low[u] = disc[v]
                else:
                    parent[v] = u
                    disc[v] = low[v] = timer
                    timer += 1
                    if u == start:
                        root_children += 1
                    stack.append((v, 0))
            else:
                stack.pop()
                p = parent[u]
                if p != -1:
                    if low[u] < low[p]:
                        low[p] = low[u]
                    if low[u] > disc[p]:
                        bridges.add((min(p, u), max(p, u)))
                    if p != start and low[u] >= disc[p]:
                        cuts.add(p)
        if root_children > 1:
            cuts.add(start)
    return bridges, cuts


def _side_atoms(g: MoleculeGraph, start: int, blocked: tuple[int, int]) -> set[int]:
    """Atoms reachable from `start` without crossing the blocked edge."""
    x, y = blocked
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, _ in g.neighbors(u):
            if (u == x and v == y) or (u == y and v == x):
                continue
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _detachable_units(g: MoleculeGraph) -> list[tuple[int, int, int]]:
    """(host atom, unit root, bond order) per bridge; unit is the non-root side."""
    bridges, _ = _bridges_and_cut_vertices(g)
    units = []
    for a, b in sorted(bridges):
        order = dict(g.neighbors(a))[b]
        if g.root in _side_atoms(g, b, (a, b)):
            host, unit_root = b, a
        else:
            host, unit_root = a, b
        units.append((host, unit_root, order))
    return units


def _graft(
    g_keep: MoleculeGraph,
    keep_host: int,
    keep_unit_root: int,
    g_donor: MoleculeGraph,
    donor_host: int,
    donor_unit_root: int,
    order: int,
    table: ElementTable,
) -> MoleculeGraph:
    """Replace g_keep's detached unit with g_donor's, joined by `order`."""
    keep = sorted(_side_atoms(g_keep, g_keep.root, (keep_host, keep_unit_root)))
    unit = sorted(_side_atoms(g_donor, donor_unit_root, (donor_host, donor_unit_root)))
    keep_map = {old: new for new, old in enumerate(keep)}
    unit_map = {old: new + len(keep) for new, old in enumerate(unit)}
    atoms = [g_keep.atoms[i] for i in keep] + [g_donor.atoms[i] for i in unit]
    bonds = [
        Bond(keep_map[a], keep_map[b], o)
        for a, b, o in g_keep.bonds
        if a in keep_map and b in keep_map
    ]
    bonds += [
        Bond(unit_map[a], unit_map[b], o)
        for a, b, o in g_donor.bonds
        if a in unit_map and b in unit_map
    ]
    bonds.append(Bond(keep_map[keep_host], unit_map[donor_unit_root], order))
    return MoleculeGraph(atoms, bonds, root=keep_map[g_keep.root], table=table)


def crossover(
    a: Chromosome,
    b: Chromosome,
    table: ElementTable,
    rules: ValidityRules,
    params: EvolveParams,
    rng: Random,
    ids: Iterator[int],
) -> tuple[Chromosome, Chromosome]:
    """Valence-matched subtree exchange.

    Picks a detachable unit in each parent joined by the same bond order and
    swaps them. After `max_op_attempts` failures the parents are copied
    verbatim (fresh ids) with op_log noting the failure.
    """
    parent_ids = (a.id, b.id)
    units_a = _detachable_units(a.graph)
    units_b = _detachable_units(b.graph)
    if units_a and units_b:
        for _ in range(params.max_op_attempts):
            host_a, root_a, beta = units_a[rng.randrange(len(units_a))]
            compatible = [u for u in units_b if u[2] == beta]
            if not compatible:
                continue
            host_b, root_b, _ = compatible[rng.randrange(len(compatible))]
            try:
                child1 = _graft(a.graph, host_a, root_a, b.graph, host_b, root_b, beta, table)
                child2 = _graft(b.graph, host_b, root_b, a.graph, host_a, root_a, beta, table)
            except Exception:  # pragma: no cover - graft of matched bridges is total
                logger.exception("crossover graft failed unexpectedly")
                continue
            if validate(table, rules, child1).valid and validate(table, rules, child2).valid:
                return (
                    chromosome_from_graph(child1, next(ids), parent_ids, ["crossover"]),
                    chromosome_from_graph(child2, next(ids), parent_ids, ["crossover"]),
                )
    return (
        Chromosome(
            id=next(ids), genome=a.genome, graph=a.graph,
            parent_ids=parent_ids, op_log=["crossover-failed"],
        ),
        Chromosome(
            id=next(ids), genome=b.genome, graph=b.graph,
            parent_ids=parent_ids, op_log=["crossover-failed"],
        ),
    )


# --- mutation operators -----------------------------------------------------
# Each takes (graph, table, rules, fragment lib, rng) and returns a new graph,
# or None when no applicable site exists. Size/weight fitness of the result is
# the caller's problem (mutate() re-validates); structural soundness is not:
# an operator never emits an oversaturated, disconnected, or incomplete result
# given a complete input.


def _rebuild(
    table: ElementTable,
    atoms: list[Atom],
    bonds: list[Bond],
    root: int,
) -> MoleculeGraph:
    return MoleculeGraph(atoms, bonds, root=root, table=table)


def _insertion_units(order: int, table: ElementTable, lib: list[Fragment]) -> list[tuple]:
    need = 2 * order
    units: list[tuple] = []
    for element in table.enabled_heavy_symbols():
        if table.valence_of(element) >= need:
            units.append(("atom", element))
    for fi, fragment in enumerate(lib):
        for s1, free1 in fragment.open_sites:
            for s2, free2 in fragment.open_sites:
                if s1 == s2:
                    if free1 >= need:
                        units.append(("frag", fi, s1, s2))
                elif free1 >= order and free2 >= order:
                    units.append(("frag", fi, s1, s2))
    return units


def _op_insert_atom(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Split a single or double bond and bridge it with a new atom or fragment."""
    sites = []
    for idx, (_, _, order) in enumerate(g.bonds):
        if order <= 2:
            units = _insertion_units(order, table, lib)
            if units:
                sites.append((idx, units))
    if not sites:
        return None
    idx, units = sites[rng.randrange(len(sites))]
    unit = units[rng.randrange(len(units))]
    a, b, order = g.bonds[idx]

    builder = MoleculeBuilder(table)
    for atom in g.atoms:
        builder.add_atom(atom.element, atom.h_count)
    for j, (x, y, o) in enumerate(g.bonds):
        if j != idx:
            builder.add_bond(x, y, o)
    if unit[0] == "atom":
        element = unit[1]
        x = builder.add_atom(element, table.valence_of(element) - 2 * order)
        builder.add_bond(a, x, order)
        builder.add_bond(x, b, order)
    else:
        _, fi, s1, s2 = unit
        offset = builder.merge(lib[fi].graph)
        builder.add_bond(a, offset + s1, order)
        builder.add_bond(offset + s2, b, order)
        builder.cap_open_sites()
    return builder.build(root=g.root)


def _op_replace_h(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Swap one hydrogen for a new branch (single atom or fragment)."""
    h_slots = [i for i, atom in enumerate(g.atoms) for _ in range(atom.h_count)]
    units: list[tuple] = [("atom", e) for e in table.enabled_heavy_symbols()]
    units += [("frag", fi, s) for fi, f in enumerate(lib) for s, _ in f.open_sites]
    if not h_slots or not units:
        return None
    i = h_slots[rng.randrange(len(h_slots))]
    unit = units[rng.randrange(len(units))]

    builder = MoleculeBuilder(table)
    for j, atom in enumerate(g.atoms):
        builder.add_atom(atom.element, atom.h_count - 1 if j == i else atom.h_count)
    for x, y, o in g.bonds:
        builder.add_bond(x, y, o)
    if unit[0] == "atom":
        element = unit[1]
        x = builder.add_atom(element, table.valence_of(element) - 1)
        builder.add_bond(i, x, 1)
    else:
        _, fi, s = unit
        offset = builder.merge(lib[fi].graph)
        builder.add_bond(i, offset + s, 1)
        builder.cap_open_sites()
    return builder.build(root=g.root)


def _removed_atom_graph(
    g: MoleculeGraph, table: ElementTable, removed: int,
    h_gain: dict[int, int], extra_bond: tuple[int, int, int] | None = None,
) -> MoleculeGraph:
    keep = [i for i in range(len(g.atoms)) if i != removed]
    index = {old: new for new, old in enumerate(keep)}
    atoms = [
        Atom(g.atoms[i].element, g.atoms[i].h_count + h_gain.get(i, 0)) for i in keep
    ]
    bonds = [
        Bond(index[a], index[b], o) for a, b, o in g.bonds if a != removed and b != removed
    ]
    if extra_bond is not None:
        u, v, o = extra_bond
        bonds.append(Bond(index[u], index[v], o))
    root = index.get(g.root, 0)
    return _rebuild(table, atoms, bonds, root)


def _op_remove_atom(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Delete an atom, topping its neighbors back up with hydrogen."""
    if len(g.atoms) < 2:
        return None
    _, cuts = _bridges_and_cut_vertices(g)
    candidates = [i for i in range(len(g.atoms)) if i not in cuts]
    if not candidates:
        return None
    removed = candidates[rng.randrange(len(candidates))]
    h_gain = {v: o for v, o in g.neighbors(removed)}
    return _removed_atom_graph(g, table, removed, h_gain)


def _op_remove_bond_and_atom(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Collapse an atom with two equal-order bonds into a direct bond."""
    candidates = []
    bonded = {(a, b) for a, b, _ in g.bonds}
    for i in range(len(g.atoms)):
        nbrs = g.neighbors(i)
        if len(nbrs) != 2:
            continue
        (u, o1), (v, o2) = nbrs
        if o1 != o2:
            continue
        if (min(u, v), max(u, v)) in bonded:
            continue
        candidates.append((i, u, v, o1))
    if not candidates:
        return None
    removed, u, v, order = candidates[rng.randrange(len(candidates))]
    return _removed_atom_graph(g, table, removed, {}, extra_bond=(u, v, order))


def _op_change_atom_to_fragment(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Replace a terminal atom with a whole fragment."""
    sites = []
    for i in range(len(g.atoms)):
        nbrs = g.neighbors(i)
        if len(nbrs) != 1:
            continue
        _, order = nbrs[0]
        choices = [
            (fi, s)
            for fi, f in enumerate(lib)
            for s, free in f.open_sites
            if free >= order
        ]
        if choices:
            sites.append((i, order, choices))
    if not sites:
        return None
    i, order, choices = sites[rng.randrange(len(sites))]
    fi, s = choices[rng.randrange(len(choices))]
    neighbor = g.neighbors(i)[0][0]

    trimmed = _removed_atom_graph(g, table, i, {neighbor: 0})
    # Index of the severed neighbor in the trimmed graph.
    host = neighbor if neighbor < i else neighbor - 1
    builder = MoleculeBuilder.from_graph(trimmed, table)
    offset = builder.merge(lib[fi].graph)
    builder.add_bond(host, offset + s, order)
    builder.cap_open_sites()
    return builder.build(root=trimmed.root)


def _op_switch_atom(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Swap one atom's element for another of the same or greater valence."""
    pairs = []
    for i, atom in enumerate(g.atoms):
        old_valence = table.valence_of(atom.element)
        for element in table.enabled_heavy_symbols():
            if element != atom.element and table.valence_of(element) >= old_valence:
                pairs.append((i, element))
    if not pairs:
        return None
    i, element = pairs[rng.randrange(len(pairs))]
    atoms = list(g.atoms)
    atoms[i] = Atom(element, table.valence_of(element) - g.bond_load(i))
    return _rebuild(table, atoms, list(g.bonds), g.root)


def _op_increase_bond(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Promote a single bond to a double one, spending an H at each end."""
    candidates = [
        idx
        for idx, (a, b, order) in enumerate(g.bonds)
        if order == 1 and g.atoms[a].h_count >= 1 and g.atoms[b].h_count >= 1
    ]
    if not candidates:
        return None
    idx = candidates[rng.randrange(len(candidates))]
    a, b, order = g.bonds[idx]
    atoms = list(g.atoms)
    atoms[a] = Atom(atoms[a].element, atoms[a].h_count - 1)
    atoms[b] = Atom(atoms[b].element, atoms[b].h_count - 1)
    bonds = list(g.bonds)
    bonds[idx] = Bond(a, b, order + 1)
    return _rebuild(table, atoms, bonds, g.root)


def _op_decrease_bond(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Demote a double/triple bond one step, returning an H to each end."""
    candidates = [idx for idx, (_, _, order) in enumerate(g.bonds) if order >= 2]
    if not candidates:
        return None
    idx = candidates[rng.randrange(len(candidates))]
    a, b, order = g.bonds[idx]
    atoms = list(g.atoms)
    atoms[a] = Atom(atoms[a].element, atoms[a].h_count + 1)
    atoms[b] = Atom(atoms[b].element, atoms[b].h_count + 1)
    bonds = list(g.bonds)
    bonds[idx] = Bond(a, b, order - 1)
    return _rebuild(table, atoms, bonds, g.root)


def _op_cut_ring(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Open a ring: remove a cycle bond and hydrogen-cap both ends."""
    bridges, _ = _bridges_and_cut_vertices(g)
    candidates = [
        idx for idx, (a, b, _) in enumerate(g.bonds) if (a, b) not in bridges
    ]
    if not candidates:
        return None
    idx = candidates[rng.randrange(len(candidates))]
    a, b, order = g.bonds[idx]
    atoms = list(g.atoms)
    atoms[a] = Atom(atoms[a].element, atoms[a].h_count + order)
    atoms[b] = Atom(atoms[b].element, atoms[b].h_count + order)
    bonds = [bond for j, bond in enumerate(g.bonds) if j != idx]
    return _rebuild(table, atoms, bonds, g.root)


def _op_add_ring(
    g: MoleculeGraph, table: ElementTable, rules: ValidityRules,
    lib: list[Fragment], rng: Random,
) -> MoleculeGraph | None:
    """Close a ring: bond two hydrogen-bearing atoms that are not yet joined."""
    bonded = {(a, b) for a, b, _ in g.bonds}
    pairs = [
        (i, j)
        for i in range(len(g.atoms))
        for j in range(i + 1, len(g.atoms))
        if g.atoms[i].h_count >= 1
        and g.atoms[j].h_count >= 1
        and (i, j) not in bonded
    ]
    if not pairs:
        return None
    i, j = pairs[rng.randrange(len(pairs))]
    atoms = list(g.atoms)
    atoms[i] = Atom(atoms[i].element, atoms[i].h_count - 1)
    atoms[j] = Atom(atoms[j].element, atoms[j].h_count - 1)
    bonds = list(g.bonds) + [Bond(i, j, 1)]
    return _rebuild(table, atoms, bonds, g.root)


MUTATION_OPERATORS: tuple[tuple[str, Callable], ...] = (
    ("insert-atom", _op_insert_atom),
    ("replace-h", _op_replace_h),
    ("remove-atom", _op_remove_atom),
    ("remove-bond-and-atom", _op_remove_bond_and_atom),
    ("change-atom-to-fragment", _op_change_atom_to_fragment),
    ("switch-atom", _op_switch_atom),
    ("increase-bond", _op_increase_bond),
    ("decrease-bond", _op_decrease_bond),
    ("cut-ring", _op_cut_ring),
    ("add-ring", _op_add_ring),
)


def mutate(
    c: Chromosome,
    lib: list[Fragment],
    table: ElementTable,
    rules: ValidityRules,
    params: EvolveParams,
    rng: Random,
) -> Chromosome:
    """Apply at most one mutation operator, gated by the mutation rate.

    Operators are tried in a shuffled order without replacement; the first
    whose result passes validation wins. If all ten fail the chromosome is
    returned unchanged with "mutation-exhausted" noted in its op_log.
    """
    if rng.random() * 100.0 >= params.mutation_rate_pct:
        return c
    order = rng.sample(range(len(MUTATION_OPERATORS)), len(MUTATION_OPERATORS))
    for k in order:
        name, op = MUTATION_OPERATORS[k]
        result = op(c.graph, table, rules, lib, rng)
        if result is None:
            continue
        if not validate(table, rules, result).valid:
            continue
        return Chromosome(
            id=c.id,
            genome=serialize(result),
            graph=result,
            fitness=0.0,
            parent_ids=c.parent_ids,
            op_log=c.op_log + [name],
        )
    return replace(c, op_log=c.op_log + ["mutation-exhausted"])


def step_generation(
    pop: Population,
    params: EvolveParams,
    fitness_fn: Callable[[MoleculeGraph], float],
    rules: ValidityRules,
    lib: list[Fragment],
    table: ElementTable,
    rng: Random,
    ids: Iterator[int],
    similarity: Callable[[str, str], float] | None = None,
) -> Population:
    """Breed the next generation: elites, then select/cross/mutate to size."""
    if len(pop.members) < 2:
        raise PopulationTooSmallError("cannot step a population of one")
    next_members: list[Chromosome] = []
    for elite in _ranked(pop.members)[: params.elitism]:
        next_members.append(
            Chromosome(
                id=next(ids),
                genome=elite.genome,
                graph=elite.graph,
                fitness=elite.fitness,
                parent_ids=(elite.id,),
                op_log=["elite"],
            )
        )
    cursor = 0
    while len(next_members) < params.population_size:
        a, b = select_parents(pop, params, similarity, cursor, rng)
        cursor += 1
        if rng.random() * 100.0 < params.crossover_rate_pct:
            children = crossover(a, b, table, rules, params, rng, ids)
        else:
            children = (
                Chromosome(
                    id=next(ids), genome=a.genome, graph=a.graph,
                    parent_ids=(a.id,), op_log=["copy"],
                ),
                Chromosome(
                    id=next(ids), genome=b.genome, graph=b.graph,
                    parent_ids=(b.id,), op_log=["copy"],
                ),
            )
        for child in children:
            if len(next_members) >= params.population_size:
                break
            child = mutate(child, lib, table, rules, params, rng)
            child.fitness = fitness_fn(child.graph)
            next_members.append(child)
    return Population(members=next_members, generation=pop.generation + 1)
