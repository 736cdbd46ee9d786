"""Random molecule growth and initial population assembly."""

import itertools
import random

import pytest

from conftest import make_spec
from molforge.chem import DEFAULT_TABLE, ValidityRules, molecular_weight, validate
from molforge.exsmiles import serialize
from molforge.fragments import load_fragments
from molforge.genesis import (
    GenerationExhaustedError,
    GenSpec,
    InvalidLeadError,
    generate_molecule,
    initial_population,
)


class TestGenerateMolecule:
    def test_single_carbon_is_always_methane(self):
        spec = make_spec(elements=("C",), min_atoms=1, max_atoms=1)
        for seed in range(20):
            g = generate_molecule(spec, random.Random(seed))
            assert serialize(g) == "[CH4]"

    def test_monovalent_vocabulary_cannot_chain(self):
        """Two fluorines saturate each other, so a third can never attach."""
        spec = make_spec(elements=("F",), min_atoms=3, max_atoms=8, max_attempts=30)
        with pytest.raises(GenerationExhaustedError):
            generate_molecule(spec, random.Random(0))

    def test_fluorine_pair_is_reachable(self):
        spec = make_spec(elements=("F",), min_atoms=2, max_atoms=2, max_attempts=200)
        g = generate_molecule(spec, random.Random(1))
        assert serialize(g) == "[F]-[F]"

    def test_output_always_passes_rules(self):
        spec = make_spec(
            elements=("C", "N", "O", "S"), min_atoms=2, max_atoms=10, max_weight=250.0
        )
        rng = random.Random(4401)
        for _ in range(1000):
            g = generate_molecule(spec, rng)
            report = validate(spec.table, spec.rules, g)
            assert report.valid, report.violations
            assert 2 <= g.heavy_atom_count <= 10
            assert molecular_weight(spec.table, g) <= 250.0

    def test_identical_seed_gives_identical_sequence(self):
        spec_a = make_spec(fragments=load_fragments(DEFAULT_TABLE, ["[C]=[O]"]),
                           atom_vs_fragment_pct=60.0)
        spec_b = make_spec(fragments=load_fragments(DEFAULT_TABLE, ["[C]=[O]"]),
                           atom_vs_fragment_pct=60.0)
        rng_a = random.Random(4403)
        rng_b = random.Random(4403)
        seq_a = [serialize(generate_molecule(spec_a, rng_a)) for _ in range(50)]
        seq_b = [serialize(generate_molecule(spec_b, rng_b)) for _ in range(50)]
        assert seq_a == seq_b

    def test_fragments_show_up_in_output(self):
        """With a carbonyl fragment in the mix, some outputs must contain C=O."""
        fragments = load_fragments(DEFAULT_TABLE, ["[C]=[O]"])
        spec = make_spec(
            elements=("C",), fragments=fragments, atom_vs_fragment_pct=50.0,
            min_atoms=2, max_atoms=8,
        )
        rng = random.Random(4404)
        hits = 0
        for _ in range(300):
            g = generate_molecule(spec, rng)
            if any(
                {g.atoms[b.a].element, g.atoms[b.b].element} == {"C", "O"} and b.order == 2
                for b in g.bonds
            ):
                hits += 1
        assert hits > 0

    def test_fragment_only_vocabulary_needs_enabled_elements(self):
        table = DEFAULT_TABLE.restricted_to([])
        with pytest.raises(ValueError):
            GenSpec(table=table, rules=ValidityRules(1, 8, 300.0))

    def test_percentage_bounds_checked(self):
        with pytest.raises(ValueError):
            make_spec(atom_vs_fragment_pct=101.0)
        with pytest.raises(ValueError):
            make_spec(growth_stop_pct=-0.5)


class TestInitialPopulation:
    def test_leads_come_first_in_order(self):
        spec = make_spec(min_atoms=1, max_atoms=8)
        pop = initial_population(
            spec, ["[CH4]", "[CH3]-[OH]"], 5, random.Random(1), itertools.count(0)
        )
        assert pop.generation == 0
        assert len(pop.members) == 5
        assert pop.members[0].genome == "[CH4]"
        assert pop.members[1].genome == "[CH3]-[OH]"
        assert pop.members[0].op_log == ["lead"]
        assert pop.members[2].op_log == ["genesis"]
        assert [c.id for c in pop.members] == [0, 1, 2, 3, 4]

    def test_all_members_valid(self):
        spec = make_spec(min_atoms=2, max_atoms=10)
        pop = initial_population(spec, [], 30, random.Random(2), itertools.count(0))
        for c in pop.members:
            assert validate(spec.table, spec.rules, c.graph).valid

    def test_incomplete_lead_rejected(self):
        spec = make_spec()
        with pytest.raises(InvalidLeadError):
            initial_population(spec, ["[C]#[N]"], 3, random.Random(1), itertools.count(0))

    def test_rule_breaking_lead_rejected(self):
        spec = make_spec(min_atoms=3, max_atoms=10)
        with pytest.raises(InvalidLeadError) as exc:
            initial_population(spec, ["[CH4]"], 3, random.Random(1), itertools.count(0))
        assert "lead[0]" in str(exc.value)

    def test_malformed_lead_reports_index(self):
        spec = make_spec()
        with pytest.raises(InvalidLeadError) as exc:
            initial_population(
                spec, ["[CH4]", "[C]-["], 4, random.Random(1), itertools.count(0)
            )
        assert "lead[1]" in str(exc.value)

    def test_more_leads_than_seats(self):
        spec = make_spec()
        with pytest.raises(ValueError):
            initial_population(
                spec, ["[CH4]", "[OH2]", "[NH3]"], 2, random.Random(1), itertools.count(0)
            )
