"""Selection methods, crossover, the ten mutation operators, generation step."""

import itertools
import random
from collections import Counter

import pytest

from conftest import random_molecules, ring_enriched_molecules
from molforge.chem import DEFAULT_TABLE, ValidityRules, handshake_sum, validate
from molforge.evolve import (
    MUTATION_OPERATORS,
    Chromosome,
    EvolveParams,
    Population,
    PopulationTooSmallError,
    chromosome_from_graph,
    crossover,
    mutate,
    select_parents,
    step_generation,
)
from molforge.exsmiles import parse, serialize
from molforge.fitness import FitnessConfig, make_evaluator, make_pairwise_similarity
from molforge.fragments import load_fragments

OPS = dict(MUTATION_OPERATORS)
RULES = ValidityRules(min_atoms=1, max_atoms=50, max_weight=500.0)
SIMILARITY = make_pairwise_similarity(DEFAULT_TABLE)


def params_with(**kwargs):
    base = dict(
        population_size=10, iterations=5, mutation_rate_pct=40.0,
        crossover_rate_pct=80.0,
    )
    base.update(kwargs)
    return EvolveParams(**base)


def population_from(genome_fitness_pairs, generation=0):
    members = []
    for k, (text, fit) in enumerate(genome_fitness_pairs):
        ch = chromosome_from_graph(parse(DEFAULT_TABLE, text), k)
        ch.fitness = fit
        members.append(ch)
    return Population(members=members, generation=generation)


def apply_op(name, text, seed=0, lib=(), table=DEFAULT_TABLE, rules=RULES):
    g = parse(table, text)
    out = OPS[name](g, table, rules, list(lib), random.Random(seed))
    return None if out is None else serialize(out)


class TestSelectParents:
    def test_registry_has_six_methods(self):
        from molforge.evolve import SELECTION_METHODS

        assert sorted(SELECTION_METHODS) == [
            "attractive", "difference", "random", "roulette", "sequential", "tournament",
        ]

    def test_roulette_equal_fitness_is_uniform(self):
        pop = population_from([("[CH4]", 1.0)] * 4)
        params = params_with(selection_method="roulette")
        rng = random.Random(5501)
        counts = Counter()
        draws = 20000
        for _ in range(draws):
            first, _ = select_parents(pop, params, None, 0, rng)
            counts[first.id] += 1
        for member_id in range(4):
            assert counts[member_id] / draws == pytest.approx(0.25, abs=0.02)

    def test_roulette_tracks_fitness_proportions(self):
        pop = population_from(
            [("[CH4]", 0.1), ("[CH4]", 0.2), ("[CH4]", 0.3), ("[CH4]", 0.4)]
        )
        params = params_with(selection_method="roulette")
        rng = random.Random(5502)
        counts = Counter()
        draws = 20000
        for _ in range(draws):
            first, _ = select_parents(pop, params, None, 0, rng)
            counts[first.id] += 1
        for member_id, expect in enumerate([0.1, 0.2, 0.3, 0.4]):
            assert counts[member_id] / draws == pytest.approx(expect, abs=0.02)

    def test_roulette_all_zero_falls_back_to_uniform(self):
        pop = population_from([("[CH4]", 0.0)] * 5)
        params = params_with(selection_method="roulette")
        rng = random.Random(5503)
        for _ in range(50):
            a, b = select_parents(pop, params, None, 0, rng)
            assert a.id != b.id

    def test_tournament_full_size_returns_global_top_two(self):
        pop = population_from(
            [("[CH4]", 0.2), ("[CH4]", 0.9), ("[CH4]", 0.5), ("[CH4]", 0.7)]
        )
        params = params_with(selection_method="tournament", tournament_size=4)
        rng = random.Random(5504)
        for _ in range(30):
            a, b = select_parents(pop, params, None, 0, rng)
            assert {a.id, b.id} == {1, 3}
            assert a.fitness >= b.fitness

    def test_tournament_ties_break_by_id(self):
        pop = population_from([("[CH4]", 0.5)] * 4)
        params = params_with(selection_method="tournament", tournament_size=4)
        a, b = select_parents(pop, params, None, 0, random.Random(5505))
        assert (a.id, b.id) == (0, 1)

    def test_random_is_roughly_uniform_and_distinct(self):
        pop = population_from([("[CH4]", k / 10) for k in range(5)])
        params = params_with(selection_method="random")
        rng = random.Random(5506)
        counts = Counter()
        draws = 20000
        for _ in range(draws):
            a, b = select_parents(pop, params, None, 0, rng)
            assert a.id != b.id
            counts[a.id] += 1
        for member_id in range(5):
            assert counts[member_id] / draws == pytest.approx(0.2, abs=0.02)

    def test_attractive_finds_the_identical_pair(self):
        pop = population_from(
            [("[CH3]-[OH]", 0.5), ("[CH3]-[OH]", 0.5), ("[CH3]-[CH3]", 0.5)]
        )
        params = params_with(selection_method="attractive", sample_size=3)
        for seed in range(10):
            a, b = select_parents(pop, params, SIMILARITY, 0, random.Random(seed))
            assert {a.id, b.id} == {0, 1}

    def test_difference_finds_a_least_similar_pair(self):
        pop = population_from(
            [("[CH3]-[OH]", 0.5), ("[CH3]-[OH]", 0.5), ("[OH2]", 0.5)]
        )
        params = params_with(selection_method="difference", sample_size=3)
        for seed in range(10):
            a, b = select_parents(pop, params, SIMILARITY, 0, random.Random(seed))
            # ties between (0,2) and (1,2) break toward the lower id pair
            assert {a.id, b.id} == {0, 2}

    def test_sequential_walks_the_population(self):
        pop = population_from([("[CH4]", 0.5)] * 4)
        params = params_with(selection_method="sequential")
        rng = random.Random(5507)
        for cursor in range(8):
            a, b = select_parents(pop, params, None, cursor, rng)
            assert a.id == cursor % 4
            assert b.id != a.id

    def test_single_member_cannot_breed(self):
        pop = population_from([("[CH4]", 1.0)])
        with pytest.raises(PopulationTooSmallError):
            select_parents(pop, params_with(), None, 0, random.Random(1))


class TestCrossover:
    def test_terminal_swap(self):
        a = chromosome_from_graph(parse(DEFAULT_TABLE, "[CH3]-[CH2]-[OH]"), 0)
        b = chromosome_from_graph(parse(DEFAULT_TABLE, "[CH3]-[NH2]"), 1)
        c1, c2 = crossover(
            a, b, DEFAULT_TABLE, RULES, params_with(), random.Random(0),
            itertools.count(10),
        )
        assert c1.genome == "[CH3]-[CH2]-[NH2]"
        assert c2.genome == "[CH3]-[OH]"
        assert c1.op_log == ["crossover"] and c2.op_log == ["crossover"]
        assert c1.parent_ids == (0, 1) and c2.parent_ids == (0, 1)
        assert c1.id == 10 and c2.id == 11
        assert c1.fitness == 0.0

    def test_methane_pair_has_nothing_to_swap(self):
        a = chromosome_from_graph(parse(DEFAULT_TABLE, "[CH4]"), 0)
        b = chromosome_from_graph(parse(DEFAULT_TABLE, "[CH4]"), 1)
        c1, c2 = crossover(
            a, b, DEFAULT_TABLE, RULES, params_with(), random.Random(3),
            itertools.count(10),
        )
        assert c1.genome == "[CH4]" and c2.genome == "[CH4]"
        assert c1.op_log == ["crossover-failed"]
        assert c2.op_log == ["crossover-failed"]
        assert c1.id == 10 and c2.id == 11

    def test_children_always_validate(self):
        mols = random_molecules(60, seed=5508, min_atoms=2, max_atoms=10)
        chroms = [chromosome_from_graph(g, k) for k, g in enumerate(mols)]
        rng = random.Random(5509)
        ids = itertools.count(1000)
        params = params_with()
        for _ in range(2000):
            a, b = rng.sample(chroms, 2)
            c1, c2 = crossover(a, b, DEFAULT_TABLE, RULES, params, rng, ids)
            for child in (c1, c2):
                assert validate(DEFAULT_TABLE, RULES, child.graph).valid
                lhs, rhs = handshake_sum(DEFAULT_TABLE, child.graph)
                assert lhs == rhs
                assert serialize(child.graph) == child.genome


class TestMutationOperators:
    def test_registry_order(self):
        assert [name for name, _ in MUTATION_OPERATORS] == [
            "insert-atom",
            "replace-h",
            "remove-atom",
            "remove-bond-and-atom",
            "change-atom-to-fragment",
            "switch-atom",
            "increase-bond",
            "decrease-bond",
            "cut-ring",
            "add-ring",
        ]

    def test_increase_bond(self):
        assert apply_op("increase-bond", "[CH3]-[CH3]") == "[CH2]=[CH2]"

    def test_increase_bond_needs_hydrogens_both_ends(self):
        assert apply_op("increase-bond", "[CH3]-[C](-[F])(-[F])-[F]") is None

    def test_decrease_bond(self):
        assert apply_op("decrease-bond", "[CH2]=[CH2]") == "[CH3]-[CH3]"

    def test_decrease_bond_needs_a_multiple_bond(self):
        assert apply_op("decrease-bond", "[CH3]-[CH3]") is None

    def test_remove_atom(self):
        assert apply_op("remove-atom", "[CH3]-[OH]", seed=0) == "[CH4]"

    def test_remove_atom_keeps_connectivity(self):
        # the middle carbon is a cut vertex, so only the ends are removable
        for seed in range(20):
            out = apply_op("remove-atom", "[CH3]-[CH2]-[OH]", seed=seed)
            assert out in ("[CH3]-[CH3]", "[CH3]-[OH]")

    def test_remove_bond_and_atom(self):
        assert apply_op("remove-bond-and-atom", "[CH3]-[O]-[CH3]") == "[CH3]-[CH3]"

    def test_remove_bond_and_atom_requires_equal_orders(self):
        assert apply_op("remove-bond-and-atom", "[CH3]-[CH]=[CH2]") is None

    def test_insert_atom(self):
        table = DEFAULT_TABLE.restricted_to(["O"])
        assert apply_op("insert-atom", "[CH3]-[CH3]", table=table) == "[CH3]-[O]-[CH3]"

    def test_replace_h(self):
        table = DEFAULT_TABLE.restricted_to(["O"])
        assert apply_op("replace-h", "[CH4]", table=table) == "[CH3]-[OH]"

    def test_replace_h_with_fragment(self):
        lib = load_fragments(DEFAULT_TABLE, ["[C](=[O])-[OH]"])
        table = DEFAULT_TABLE.restricted_to([])  # no single atoms on offer
        outcomes = set()
        for seed in range(10):
            outcomes.add(
                apply_op("replace-h", "[CH4]", seed=seed, lib=lib,
                         table=DEFAULT_TABLE.restricted_to(["C"]))
            )
        assert "[CH3]-[C](=[O])-[OH]" in outcomes

    def test_switch_atom(self):
        table = DEFAULT_TABLE.restricted_to(["N"])
        assert apply_op("switch-atom", "[CH3]-[OH]", table=table) == "[CH3]-[NH2]"

    def test_change_atom_to_fragment(self):
        lib = load_fragments(DEFAULT_TABLE, ["[C](=[O])-[OH]"])
        out = apply_op("change-atom-to-fragment", "[CH3]-[OH]", seed=0, lib=lib)
        assert out == "[CH3]-[C](=[O])-[OH]"

    def test_change_atom_to_fragment_needs_a_library(self):
        assert apply_op("change-atom-to-fragment", "[CH3]-[OH]", lib=[]) is None

    def test_cut_ring(self):
        out = apply_op("cut-ring", "[CH2](-{1})-[CH2]-[CH2]-{1}", seed=1)
        assert out == "[CH3]-[CH2]-[CH3]"

    def test_cut_ring_needs_a_ring(self):
        assert apply_op("cut-ring", "[CH3]-[CH2]-[CH3]") is None

    def test_add_ring(self):
        out = apply_op("add-ring", "[CH3]-[CH2]-[CH3]")
        assert out == "[CH2](-{1})-[CH2]-[CH2]-{1}"

    def test_add_ring_needs_two_open_hydrogens(self):
        assert apply_op("add-ring", "[CH4]") is None

    def test_operators_preserve_validity_on_random_inputs(self):
        lib = load_fragments(DEFAULT_TABLE, ["[C]=[O]", "[OH]", "[NH2]"])
        mols = ring_enriched_molecules(40, seed=5510, min_atoms=2, max_atoms=10)
        rng = random.Random(5511)
        rules = ValidityRules(min_atoms=1, max_atoms=14, max_weight=500.0)
        for name, op in MUTATION_OPERATORS:
            applied = 0
            for g in mols:
                for _ in range(25):
                    out = op(g, DEFAULT_TABLE, rules, lib, rng)
                    if out is None:
                        continue
                    applied += 1
                    lhs, rhs = handshake_sum(DEFAULT_TABLE, out)
                    assert lhs == rhs, name
                    assert out.is_connected(), name
            assert applied > 0, f"{name} never applied"


class TestMutate:
    def test_zero_rate_is_identity(self):
        ch = chromosome_from_graph(parse(DEFAULT_TABLE, "[CH3]-[OH]"), 0)
        ch.fitness = 0.7
        params = params_with(mutation_rate_pct=0.0)
        out = mutate(ch, [], DEFAULT_TABLE, RULES, params, random.Random(1))
        assert out is ch

    def test_full_rate_applies_exactly_one_operator(self):
        ch = chromosome_from_graph(parse(DEFAULT_TABLE, "[CH3]-[CH2]-[OH]"), 7)
        params = params_with(mutation_rate_pct=100.0)
        names = {name for name, _ in MUTATION_OPERATORS}
        for seed in range(30):
            out = mutate(ch, [], DEFAULT_TABLE, RULES, params, random.Random(seed))
            assert out.id == 7
            assert len(out.op_log) == 1
            assert out.op_log[0] in names
            assert out.fitness == 0.0
            assert validate(DEFAULT_TABLE, RULES, out.graph).valid

    def test_exhaustion_is_reported_not_raised(self):
        """A saturated two-fluorine molecule under a min-size rule defeats
        every operator: nothing can attach, detach, or rewire."""
        table = DEFAULT_TABLE.restricted_to(["F"])
        rules = ValidityRules(min_atoms=2, max_atoms=2, max_weight=100.0)
        ch = chromosome_from_graph(parse(table, "[F]-[F]"), 3)
        ch.fitness = 0.4
        params = params_with(mutation_rate_pct=100.0)
        out = mutate(ch, [], table, rules, params, random.Random(9))
        assert out.genome == "[F]-[F]"
        assert out.op_log == ["mutation-exhausted"]

    def test_mutated_genome_matches_graph(self):
        lib = load_fragments(DEFAULT_TABLE, ["[C]=[O]"])
        params = params_with(mutation_rate_pct=100.0)
        rng = random.Random(5512)
        for k, g in enumerate(random_molecules(100, seed=5513, min_atoms=2)):
            ch = chromosome_from_graph(g, k)
            out = mutate(ch, lib, DEFAULT_TABLE, RULES, params, rng)
            assert serialize(out.graph) == out.genome


class TestStepGeneration:
    def setup_method(self):
        self.fitness_cfg = FitnessConfig("[CH3]-[C](=[O])-[OH]", RULES)
        self.fitness_fn = make_evaluator(self.fitness_cfg, DEFAULT_TABLE)
        self.lib = load_fragments(DEFAULT_TABLE, ["[C]=[O]", "[OH]"])

    def start_population(self, size=10, seed=6601):
        mols = random_molecules(size, seed=seed, min_atoms=2, max_atoms=10)
        members = []
        for k, g in enumerate(mols):
            ch = chromosome_from_graph(g, k)
            ch.fitness = self.fitness_fn(g)
            members.append(ch)
        return Population(members=members, generation=0)

    def step(self, pop, params, seed, start_id=1000):
        return step_generation(
            pop, params, self.fitness_fn, RULES, self.lib, DEFAULT_TABLE,
            random.Random(seed), itertools.count(start_id), similarity=SIMILARITY,
        )

    def test_size_and_generation(self):
        pop = self.start_population()
        nxt = self.step(pop, params_with(), seed=1)
        assert len(nxt.members) == 10
        assert nxt.generation == 1

    def test_elite_carried_over_unchanged(self):
        pop = self.start_population()
        best = max(pop.members, key=lambda c: (c.fitness, -c.id))
        nxt = self.step(pop, params_with(elitism=1), seed=2)
        elite = nxt.members[0]
        assert elite.op_log == ["elite"]
        assert elite.genome == best.genome
        assert elite.fitness == best.fitness
        assert elite.parent_ids == (best.id,)
        assert elite.id != best.id

    def test_no_variation_means_genomes_come_from_parents(self):
        pop = self.start_population()
        parent_genomes = {c.genome for c in pop.members}
        nxt = self.step(
            pop, params_with(mutation_rate_pct=0.0, crossover_rate_pct=0.0), seed=3
        )
        assert {c.genome for c in nxt.members} <= parent_genomes

    def test_every_child_is_valid_with_fresh_id(self):
        pop = self.start_population()
        nxt = self.step(pop, params_with(), seed=4)
        for c in nxt.members:
            assert c.id >= 1000
            assert validate(DEFAULT_TABLE, RULES, c.graph).valid
        assert len({c.id for c in nxt.members}) == len(nxt.members)

    def test_rerun_equality(self):
        params = params_with()
        runs = []
        for _ in range(2):
            pop = self.start_population()
            for g in range(5):
                pop = self.step(pop, params, seed=100 + g, start_id=1000 * (g + 1))
            runs.append([(c.id, c.genome, c.fitness) for c in pop.members])
        assert runs[0] == runs[1]

    def test_best_fitness_never_drops_with_elitism(self):
        pop = self.start_population(size=12)
        params = params_with(elitism=1)
        best = max(c.fitness for c in pop.members)
        rng = random.Random(5514)
        ids = itertools.count(10_000)
        for _ in range(8):
            pop = step_generation(
                pop, params, self.fitness_fn, RULES, self.lib, DEFAULT_TABLE,
                rng, ids, similarity=SIMILARITY,
            )
            new_best = max(c.fitness for c in pop.members)
            assert new_best >= best
            best = new_best

    def test_every_selection_method_steps_cleanly(self):
        for method in ("roulette", "tournament", "random", "attractive",
                       "difference", "sequential"):
            pop = self.start_population()
            nxt = self.step(pop, params_with(selection_method=method), seed=5)
            assert len(nxt.members) == 10
