"""Molecular graph model: element data, valence accounting, validity checks.

Molecules are undirected graphs of heavy atoms. Hydrogens are never graph
nodes; each atom carries an explicit hydrogen count. Oversaturation (hydrogen
count plus incident bond orders exceeding the element's valence) is rejected
at construction time, so an oversaturated molecule cannot be represented.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

BOND_ORDERS = (1, 2, 3)

# Lowest common valence and standard atomic weight for the default vocabulary.
# Alternate valence states (P5, S6, ...) are expressed via table overrides.
_DEFAULT_ELEMENTS: tuple[tuple[str, int, float], ...] = (
    ("H", 1, 1.008),
    ("B", 3, 10.811),
    ("C", 4, 12.011),
    ("N", 3, 14.007),
    ("O", 2, 15.999),
    ("F", 1, 18.998),
    ("P", 3, 30.974),
    ("S", 2, 32.06),
    ("Cl", 1, 35.453),
    ("Br", 1, 79.904),
    ("I", 1, 126.904),
)


class ChemistryError(Exception):
    """Base class for molecular model errors."""


class UnknownElementError(ChemistryError):
    def __init__(self, symbol: str):
        super().__init__(f"unknown element symbol: {symbol!r}")
        self.symbol = symbol


class EmptyGraphError(ChemistryError):
    """Raised by operations that are undefined on an empty graph."""


class GraphConstructionError(ChemistryError):
    """A proposed atom/bond list does not describe a representable molecule."""


class OversaturatedAtomError(GraphConstructionError):
    def __init__(self, atom_index: int, message: str):
        super().__init__(message)
        self.atom_index = atom_index


@dataclass(frozen=True)
class ElementInfo:
    valence: int
    atomic_weight: float
    enabled: bool = True


class ElementTable:
    """Element vocabulary: fixed valences, atomic weights, enabled flags.

    Hydrogen is always present (valence 1) but is never part of the heavy-atom
    vocabulary returned by :meth:`enabled_heavy_symbols`.
    """

    def __init__(self, entries: dict[str, ElementInfo]):
        if "H" not in entries:
            entries = {"H": ElementInfo(1, 1.008), **entries}
        for symbol, info in entries.items():
            if not (1 <= len(symbol) <= 2) or not symbol[0].isupper():
                raise ValueError(f"bad element symbol: {symbol!r}")
            if info.valence < 1:
                raise ValueError(f"{symbol}: valence must be >= 1")
            if info.atomic_weight <= 0:
                raise ValueError(f"{symbol}: atomic weight must be positive")
        self._entries = dict(entries)

    @classmethod
    def default(cls) -> "ElementTable":
        return cls({s: ElementInfo(v, w) for s, v, w in _DEFAULT_ELEMENTS})

    def info(self, symbol: str) -> ElementInfo:
        try:
            return self._entries[symbol]
        except KeyError:
            raise UnknownElementError(symbol) from None

    def valence_of(self, symbol: str) -> int:
        return self.info(symbol).valence

    def atomic_weight_of(self, symbol: str) -> float:
        return self.info(symbol).atomic_weight

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._entries

    def symbols(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def enabled_heavy_symbols(self) -> tuple[str, ...]:
        return tuple(s for s, e in self._entries.items() if e.enabled and s != "H")

    def restricted_to(self, enabled: Iterable[str]) -> "ElementTable":
        """Copy of the table with exactly `enabled` switched on (H unaffected)."""
        wanted = set(enabled)
        for symbol in wanted:
            if symbol not in self._entries:
                raise UnknownElementError(symbol)
        entries = {
            s: ElementInfo(e.valence, e.atomic_weight, s in wanted or s == "H")
            for s, e in self._entries.items()
        }
        return ElementTable(entries)

    def with_overrides(self, overrides: dict[str, dict]) -> "ElementTable":
        """Copy with per-symbol valence/weight/enabled overrides; may add symbols."""
        entries = dict(self._entries)
        for symbol, fields in overrides.items():
            base = entries.get(symbol)
            if base is None:
                if "valence" not in fields or "atomic_weight" not in fields:
                    raise ValueError(
                        f"new element {symbol!r} needs both valence and atomic_weight"
                    )
                base = ElementInfo(fields["valence"], fields["atomic_weight"])
            entries[symbol] = ElementInfo(
                fields.get("valence", base.valence),
                fields.get("atomic_weight", base.atomic_weight),
                fields.get("enabled", base.enabled),
            )
        return ElementTable(entries)


DEFAULT_TABLE = ElementTable.default()


class Atom(NamedTuple):
    element: str
    h_count: int


class Bond(NamedTuple):
    a: int
    b: int
    order: int


class MoleculeGraph:
    """Immutable heavy-atom graph.

    Construction validates indices, bond orders, pair uniqueness, and the
    valence budget of every atom against `table` (the default organic table
    when omitted). Connectivity is NOT enforced here; `validate` reports it,
    since fragments and mid-surgery graphs are legitimately checked for it.
    """

    __slots__ = ("atoms", "bonds", "root", "_adj", "_load")

    def __init__(
        self,
        atoms: Iterable[Atom | tuple],
        bonds: Iterable[Bond | tuple] = (),
        root: int = 0,
        table: ElementTable | None = None,
    ):
        table = table or DEFAULT_TABLE
        atom_list = tuple(Atom(*a) for a in atoms)
        n = len(atom_list)
        for i, atom in enumerate(atom_list):
            if atom.h_count < 0:
                raise GraphConstructionError(f"atom {i}: negative h_count")
            table.info(atom.element)  # raises UnknownElementError

        norm: list[Bond] = []
        seen: set[tuple[int, int]] = set()
        load = [0] * n
        for bond in bonds:
            a, b, order = Bond(*bond)
            if not (0 <= a < n and 0 <= b < n):
                raise GraphConstructionError(f"bond ({a},{b}) out of range")
            if a == b:
                raise GraphConstructionError(f"self-bond on atom {a}")
            if order not in BOND_ORDERS:
                raise GraphConstructionError(f"bond ({a},{b}): bad order {order}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise GraphConstructionError(f"duplicate bond between {a} and {b}")
            seen.add(key)
            norm.append(Bond(key[0], key[1], order))
            load[a] += order
            load[b] += order

        for i, atom in enumerate(atom_list):
            valence = table.valence_of(atom.element)
            if load[i] + atom.h_count > valence:
                raise OversaturatedAtomError(
                    i,
                    f"atom {i} ({atom.element}): bonds {load[i]} + H {atom.h_count}"
                    f" exceed valence {valence}",
                )

        if n == 0:
            if norm:
                raise GraphConstructionError("bonds without atoms")
            root = 0
        elif not (0 <= root < n):
            raise GraphConstructionError(f"root {root} out of range")

        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for a, b, order in norm:
            adj[a].append((b, order))
            adj[b].append((a, order))

        object.__setattr__(self, "atoms", atom_list)
        object.__setattr__(self, "bonds", tuple(norm))
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(x)) for x in adj))
        object.__setattr__(self, "_load", tuple(load))

    def __setattr__(self, name, value):
        raise AttributeError("MoleculeGraph is immutable")

    @property
    def heavy_atom_count(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        """(neighbor index, bond order) pairs, ascending by neighbor index."""
        return self._adj[i]

    def bond_load(self, i: int) -> int:
        return self._load[i]

    def free_valence(self, i: int, table: ElementTable | None = None) -> int:
        table = table or DEFAULT_TABLE
        atom = self.atoms[i]
        return table.valence_of(atom.element) - atom.h_count - self._load[i]

    def open_sites(self, table: ElementTable | None = None) -> tuple[tuple[int, int], ...]:
        """(atom index, free valence) for every atom with spare valence."""
        out = []
        for i in range(len(self.atoms)):
            free = self.free_valence(i, table)
            if free > 0:
                out.append((i, free))
        return tuple(out)

    def is_complete(self, table: ElementTable | None = None) -> bool:
        return not self.open_sites(table)

    def is_connected(self) -> bool:
        n = len(self.atoms)
        if n <= 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, _ in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == n

    def __eq__(self, other) -> bool:
        if not isinstance(other, MoleculeGraph):
            return NotImplemented
        return (
            self.atoms == other.atoms
            and frozenset(self.bonds) == frozenset(other.bonds)
            and self.root == other.root
        )

    def __hash__(self) -> int:
        return hash((self.atoms, frozenset(self.bonds), self.root))

    def __repr__(self) -> str:
        return (
            f"MoleculeGraph({len(self.atoms)} atoms, {len(self.bonds)} bonds,"
            f" root={self.root})"
        )


def molecular_weight(table: ElementTable, g: MoleculeGraph) -> float:
    """Sum of atomic weights including implicit hydrogens."""
    if g.heavy_atom_count == 0:
        raise EmptyGraphError("molecular weight of an empty graph is undefined")
    w_h = table.atomic_weight_of("H")
    total = 0.0
    for atom in g.atoms:
        total += table.atomic_weight_of(atom.element) + atom.h_count * w_h
    return total


@dataclass(frozen=True)
class ValidityRules:
    min_atoms: int
    max_atoms: int
    max_weight: float
    require_complete: bool = True

    def __post_init__(self):
        if self.min_atoms < 1:
            raise ValueError("min_atoms must be >= 1")
        if self.max_atoms < self.min_atoms:
            raise ValueError("max_atoms must be >= min_atoms")
        if self.max_weight <= 0:
            raise ValueError("max_weight must be positive")


VIOLATION_DISCONNECTED = "disconnected"
VIOLATION_TOO_FEW = "too-few-atoms"
VIOLATION_TOO_MANY = "too-many-atoms"
VIOLATION_OVER_WEIGHT = "over-weight"
VIOLATION_INCOMPLETE = "incomplete-atom"


class Violation(NamedTuple):
    kind: str
    atom_index: int | None = None


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[Violation, ...]


def validate(table: ElementTable, rules: ValidityRules, g: MoleculeGraph) -> ValidityReport:
    """Check a molecule against size, weight, and completeness rules.

    Violations are reported in a fixed order: connectivity, atom counts,
    weight, then per-atom completeness ascending by atom index.
    """
    violations: list[Violation] = []
    n = g.heavy_atom_count
    if not g.is_connected():
        violations.append(Violation(VIOLATION_DISCONNECTED))
    if n < rules.min_atoms:
        violations.append(Violation(VIOLATION_TOO_FEW))
    elif n > rules.max_atoms:
        violations.append(Violation(VIOLATION_TOO_MANY))
    if n > 0 and molecular_weight(table, g) > rules.max_weight:
        violations.append(Violation(VIOLATION_OVER_WEIGHT))
    if rules.require_complete:
        for i in range(n):
            if g.free_valence(i, table) > 0:
                violations.append(Violation(VIOLATION_INCOMPLETE, i))
    return ValidityReport(valid=not violations, violations=tuple(violations))


def handshake_sum(table: ElementTable, g: MoleculeGraph) -> tuple[int, int]:
    """(sum of valence - h_count over atoms, 2 * sum of bond orders).

    The two are equal exactly when every atom is complete.
    """
    lhs = sum(table.valence_of(a.element) - a.h_count for a in g.atoms)
    rhs = 2 * sum(b.order for b in g.bonds)
    return lhs, rhs


def is_isomorphic(a: MoleculeGraph, b: MoleculeGraph) -> bool:
    """Attribute-preserving graph isomorphism (element, h_count, bond order).

    Backtracking matcher with signature pruning; molecules at desk scale are
    small enough that worst cases do not matter.
    """
    n = len(a.atoms)
    if n != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False

    def signature(g: MoleculeGraph, i: int) -> tuple:
        atom = g.atoms[i]
        orders = tuple(sorted(o for _, o in g.neighbors(i)))
        return (atom.element, atom.h_count, orders)

    sig_a = [signature(a, i) for i in range(n)]
    sig_b = [signature(b, i) for i in range(n)]
    if sorted(sig_a) != sorted(sig_b):
        return False
    if n == 0:
        return True

    # Order a's atoms so each (after the first per component) touches an
    # earlier one, keeping candidate sets small.
    order: list[int] = []
    placed = [False] * n
    for start in range(n):
        if placed[start]:
            continue
        queue = [start]
        placed[start] = True
        while queue:
            u = queue.pop()
            order.append(u)
            for v, _ in a.neighbors(u):
                if not placed[v]:
                    placed[v] = True
                    queue.append(v)

    b_edges = {(x, y): o for x, y, o in b.bonds}
    b_edges.update({(y, x): o for x, y, o in b.bonds})
    mapping = [-1] * n
    used = [False] * n

    def extend(k: int) -> bool:
        if k == n:
            return True
        u = order[k]
        anchored = [(w, o) for w, o in a.neighbors(u) if mapping[w] != -1]
        for v in range(n):
            if used[v] or sig_b[v] != sig_a[u]:
                continue
            ok = True
            for w, o in anchored:
                if b_edges.get((mapping[w], v)) != o:
                    ok = False
                    break
            if not ok:
                continue
            mapping[u] = v
            used[v] = True
            if extend(k + 1):
                return True
            mapping[u] = -1
            used[v] = False
        return False

    return extend(0)


class MoleculeBuilder:
    """Mutable scratch structure for assembling molecules piece by piece."""

    def __init__(self, table: ElementTable):
        self.table = table
        self.elements: list[str] = []
        self.h_counts: list[int] = []
        self.bonds: list[Bond] = []
        self._pairs: set[tuple[int, int]] = set()
        self._load: list[int] = []

    @classmethod
    def from_graph(cls, g: MoleculeGraph, table: ElementTable) -> "MoleculeBuilder":
        builder = cls(table)
        builder.merge(g)
        return builder

    def add_atom(self, element: str, h_count: int = 0) -> int:
        valence = self.table.valence_of(element)
        if h_count < 0 or h_count > valence:
            raise GraphConstructionError(f"{element}: bad h_count {h_count}")
        self.elements.append(element)
        self.h_counts.append(h_count)
        self._load.append(0)
        return len(self.elements) - 1

    def add_bond(self, a: int, b: int, order: int) -> None:
        if a == b:
            raise GraphConstructionError("self-bond")
        key = (min(a, b), max(a, b))
        if key in self._pairs:
            raise GraphConstructionError(f"duplicate bond {key}")
        if self.free_valence(a) < order or self.free_valence(b) < order:
            raise OversaturatedAtomError(
                a if self.free_valence(a) < order else b, "bond exceeds free valence"
            )
        self._pairs.add(key)
        self.bonds.append(Bond(key[0], key[1], order))
        self._load[a] += order
        self._load[b] += order

    def merge(self, g: MoleculeGraph) -> int:
        """Copy another graph in; returns the index offset of its atoms."""
        offset = len(self.elements)
        for atom in g.atoms:
            self.elements.append(atom.element)
            self.h_counts.append(atom.h_count)
            self._load.append(g.bond_load(len(self._load) - offset))
        for a, b, order in g.bonds:
            key = (a + offset, b + offset)
            self._pairs.add(key)
            self.bonds.append(Bond(key[0], key[1], order))
        return offset

    def free_valence(self, i: int) -> int:
        return self.table.valence_of(self.elements[i]) - self.h_counts[i] - self._load[i]

    def open_sites(self) -> list[tuple[int, int]]:
        return [(i, f) for i in range(len(self.elements)) if (f := self.free_valence(i)) > 0]

    def cap_open_sites(self) -> None:
        """Fill every remaining free valence unit with hydrogen."""
        for i in range(len(self.elements)):
            free = self.free_valence(i)
            if free > 0:
                self.h_counts[i] += free

    @property
    def heavy_count(self) -> int:
        return len(self.elements)

    def capped_weight(self) -> float:
        """Weight the molecule would have if all open sites were H-capped now."""
        w_h = self.table.atomic_weight_of("H")
        total = 0.0
        for i, element in enumerate(self.elements):
            total += self.table.atomic_weight_of(element)
            total += (self.h_counts[i] + self.free_valence(i)) * w_h
        return total

    def build(self, root: int = 0) -> MoleculeGraph:
        atoms = [Atom(e, h) for e, h in zip(self.elements, self.h_counts)]
        return MoleculeGraph(atoms, self.bonds, root=root, table=self.table)
