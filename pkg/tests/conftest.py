"""Shared helpers for the test suite.

Property tests all draw their inputs from `random_molecules`, a deterministic
stream of complete, rule-abiding molecules built by the package's own
generator with a fixed seed.
"""

import random

from molforge.chem import DEFAULT_TABLE, ValidityRules
from molforge.evolve import MUTATION_OPERATORS
from molforge.genesis import GenSpec, generate_molecule

_ADD_RING = dict(MUTATION_OPERATORS)["add-ring"]


def make_spec(
    elements=("C", "N", "O", "S"),
    min_atoms=1,
    max_atoms=12,
    max_weight=400.0,
    fragments=(),
    atom_vs_fragment_pct=100.0,
    growth_stop_pct=30.0,
    max_attempts=200,
):
    table = DEFAULT_TABLE.restricted_to(elements)
    rules = ValidityRules(min_atoms=min_atoms, max_atoms=max_atoms, max_weight=max_weight)
    return GenSpec(
        table=table,
        rules=rules,
        fragments=list(fragments),
        atom_vs_fragment_pct=atom_vs_fragment_pct,
        growth_stop_pct=growth_stop_pct,
        max_attempts=max_attempts,
    )


def random_molecules(count, seed, **spec_kwargs):
    spec = make_spec(**spec_kwargs)
    rng = random.Random(seed)
    return [generate_molecule(spec, rng) for _ in range(count)]


def ring_enriched_molecules(count, seed, ring_rounds=2, **spec_kwargs):
    """Random molecules with extra ring closures applied where possible.

    The growth procedure only ever attaches, so its output is acyclic; ring
    coverage comes from closing hydrogen-bearing pairs afterwards.
    """
    spec = make_spec(**spec_kwargs)
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        g = generate_molecule(spec, rng)
        for _ in range(ring_rounds):
            closed = _ADD_RING(g, spec.table, spec.rules, [], rng)
            if closed is not None:
                g = closed
        out.append(g)
    return out
