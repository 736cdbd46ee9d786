"""Expanded SMILES: the engine's canonical molecule text format.

Every atom is bracketed with an explicit hydrogen count ([C], [CH], [NH2]),
every bond is written (- = #), branches use round brackets, and ring closures
use curly-bracket markers ({1}) carrying the bond symbol at both endpoints.
The parser accepts incomplete molecules (free valence left open) so the same
reader loads fragments and whole molecules.
"""

from __future__ import annotations

from .chem import (
    Atom,
    Bond,
    DEFAULT_TABLE,
    ElementTable,
    EmptyGraphError,
    MoleculeGraph,
    is_isomorphic,
)

BOND_CHAR_TO_ORDER = {"-": 1, "=": 2, "#": 3}
ORDER_TO_BOND_CHAR = {1: "-", 2: "=", 3: "#"}

# ParseError kinds
UNEXPECTED_CHAR = "unexpected-char"
UNKNOWN_ELEMENT = "unknown-element"
UNMATCHED_RING = "unmatched-ring"
RING_BOND_MISMATCH = "ring-bond-mismatch"
OVERSATURATED = "oversaturated"
EMPTY_INPUT = "empty-input"


class ParseError(Exception):
    """Text rejection with a character offset and a machine-readable kind."""

    def __init__(self, position: int, kind: str, message: str):
        super().__init__(f"{kind} at {position}: {message}")
        self.position = position
        self.kind = kind
        self.reason = message


class IncompleteMoleculeError(Exception):
    """Standard SMILES export requires every atom's valence to be satisfied."""


def parse(table: ElementTable, text: str) -> MoleculeGraph:
    """Parse expanded SMILES into a molecule graph (root = first atom).

    Never raises anything but ParseError, whatever the input bytes; the
    reported position is a character offset <= len(text).
    """
    n = len(text)
    if n == 0:
        raise ParseError(0, EMPTY_INPUT, "empty input")

    atoms: list[Atom] = []
    capacity: list[int] = []  # remaining valence units per atom
    bonds: list[Bond] = []
    bonded: set[tuple[int, int]] = set()
    open_rings: dict[int, tuple[int, int, int]] = {}  # num -> (atom, order, pos)
    branch_stack: list[int] = []
    current: int | None = None
    pending: tuple[int, int] | None = None  # (order, position of bond char)
    must_bond = False  # immediately after '(' only a bond may follow
    i = 0

    def fail(pos: int, kind: str, message: str) -> ParseError:
        return ParseError(pos, kind, message)

    def consume(atom_index: int, order: int, pos: int) -> None:
        if capacity[atom_index] < order:
            element = atoms[atom_index].element
            raise fail(pos, OVERSATURATED, f"bond exceeds valence of atom {atom_index} ({element})")
        capacity[atom_index] -= order

    while i < n:
        ch = text[i]
        if ch == "[":
            if must_bond:
                raise fail(i, UNEXPECTED_CHAR, "expected a bond after '('")
            if current is not None and pending is None:
                raise fail(i, UNEXPECTED_CHAR, "atom must be joined by a bond")
            start = i
            i += 1
            if i >= n or not ("A" <= text[i] <= "Z"):
                raise fail(min(i, n), UNEXPECTED_CHAR, "expected an element symbol")
            symbol = text[i]
            i += 1
            if i < n and "a" <= text[i] <= "z":
                symbol += text[i]
                i += 1
            if symbol not in table:
                raise fail(start + 1, UNKNOWN_ELEMENT, f"element {symbol!r} not in table")
            if symbol == "H":
                raise fail(
                    start + 1,
                    UNKNOWN_ELEMENT,
                    "hydrogen is implicit and cannot be a heavy-atom node",
                )
            h_count = 0
            if i < n and text[i] == "H":
                i += 1
                digits = ""
                while i < n and text[i].isdigit():
                    digits += text[i]
                    i += 1
                h_count = int(digits) if digits else 1
            if i >= n or text[i] != "]":
                raise fail(min(i, n), UNEXPECTED_CHAR, "expected ']' to close atom")
            i += 1
            valence = table.valence_of(symbol)
            if h_count > valence:
                raise fail(start, OVERSATURATED, f"h_count {h_count} exceeds valence {valence}")
            atoms.append(Atom(symbol, h_count))
            capacity.append(valence - h_count)
            idx = len(atoms) - 1
            if pending is not None:
                order, bond_pos = pending
                consume(current, order, bond_pos)  # type: ignore[arg-type]
                consume(idx, order, bond_pos)
                bonds.append(Bond(current, idx, order))  # type: ignore[arg-type]
                bonded.add((min(current, idx), max(current, idx)))  # type: ignore[arg-type]
                pending = None
            current = idx
        elif ch in BOND_CHAR_TO_ORDER:
            if current is None or pending is not None:
                raise fail(i, UNEXPECTED_CHAR, "bond has no preceding atom")
            pending = (BOND_CHAR_TO_ORDER[ch], i)
            must_bond = False
            i += 1
        elif ch == "(":
            if must_bond:
                raise fail(i, UNEXPECTED_CHAR, "expected a bond after '('")
            if current is None or pending is not None:
                raise fail(i, UNEXPECTED_CHAR, "branch has no preceding atom")
            branch_stack.append(current)
            must_bond = True
            i += 1
        elif ch == ")":
            if must_bond or pending is not None:
                raise fail(i, UNEXPECTED_CHAR, "branch is missing its link")
            if not branch_stack:
                raise fail(i, UNEXPECTED_CHAR, "unmatched ')'")
            current = branch_stack.pop()
            i += 1
        elif ch == "{":
            if pending is None:
                raise fail(i, UNEXPECTED_CHAR, "ring marker must follow a bond")
            start = i
            i += 1
            digits = ""
            while i < n and text[i].isdigit():
                digits += text[i]
                i += 1
            if not digits:
                raise fail(min(i, n), UNEXPECTED_CHAR, "expected a ring number")
            if i >= n or text[i] != "}":
                raise fail(min(i, n), UNEXPECTED_CHAR, "expected '}' to close ring marker")
            i += 1
            number = int(digits)
            order, bond_pos = pending
            pending = None
            assert current is not None
            if number in open_rings:
                other, other_order, _ = open_rings.pop(number)
                if other_order != order:
                    raise fail(
                        bond_pos,
                        RING_BOND_MISMATCH,
                        f"ring {number} opened with order {other_order}, closed with {order}",
                    )
                if other == current:
                    raise fail(start, UNMATCHED_RING, f"ring {number} closes on its own atom")
                key = (min(other, current), max(other, current))
                if key in bonded:
                    raise fail(
                        start, UNMATCHED_RING, f"ring {number} duplicates an existing bond"
                    )
                consume(current, order, bond_pos)
                bonds.append(Bond(other, current, order))
                bonded.add(key)
            else:
                # Reserve the valence now so oversaturation is caught at the
                # marker even if the partner never appears.
                consume(current, order, bond_pos)
                open_rings[number] = (current, order, start)
        else:
            raise fail(i, UNEXPECTED_CHAR, f"unexpected character {ch!r}")

    if pending is not None:
        raise fail(n, UNEXPECTED_CHAR, "input ends after a bond symbol")
    if must_bond or branch_stack:
        raise fail(n, UNEXPECTED_CHAR, "unclosed branch")
    if open_rings:
        pos = min(p for _, _, p in open_rings.values())
        numbers = sorted(open_rings)
        raise fail(pos, UNMATCHED_RING, f"unmatched ring marker(s): {numbers}")
    assert atoms
    # Capacity bookkeeping already enforced the valence budget; constructing
    # the graph re-checks it as a backstop.
    return MoleculeGraph(atoms, bonds, root=0, table=table)


def _classify_edges(g: MoleculeGraph):
    """DFS from the root: tree children, closure edges, and discovery order.

    Neighbors are taken in ascending index order, which both fixes the tree
    shape and makes the result reproducible for equal graphs. The returned
    `order` list maps atom index to DFS discovery position; parsing assigns
    indices in exactly that order, so it is the one ordering key that survives
    a round-trip.
    """
    n = len(g.atoms)
    visited = [False] * n
    parent = [-1] * n
    order = [0] * n
    children: list[list[int]] = [[] for _ in range(n)]
    closures: set[tuple[int, int]] = set()
    stack: list[tuple[int, int]] = [(g.root, 0)]
    visited[g.root] = True
    stamp = 0
    while stack:
        u, k = stack[-1]
        neighbors = g.neighbors(u)
        if k == len(neighbors):
            stack.pop()
            continue
        stack[-1] = (u, k + 1)
        v, _ = neighbors[k]
        if not visited[v]:
            visited[v] = True
            parent[v] = u
            stamp += 1
            order[v] = stamp
            children[u].append(v)
            stack.append((v, 0))
        elif v != parent[u]:
            closures.add((min(u, v), max(u, v)))
    return children, closures, order


def _bond_order(g: MoleculeGraph, a: int, b: int) -> int:
    for v, order in g.neighbors(a):
        if v == b:
            return order
    raise KeyError((a, b))


def _emit(g: MoleculeGraph, atom_token, bond_token, ring_token, rings_as_items: bool) -> str:
    """Shared emission walk for both text formats.

    Tree children are emitted in ascending atom-index order with every
    non-last item parenthesized. Ring-closure stubs (ascending partner
    discovery order) come before the tree children: as bracketed items of
    their own in the expanded format, or fused directly onto the atom token in
    standard SMILES. Ring numbers are assigned 1, 2, ... in order of first
    emission.
    """
    if g.heavy_atom_count == 0:
        raise EmptyGraphError("cannot serialize an empty graph")
    children, closures, order = _classify_edges(g)
    stubs: list[list[int]] = [[] for _ in range(len(g.atoms))]
    for a, b in sorted(closures):
        stubs[a].append(b)
        stubs[b].append(a)
    for lst in stubs:
        lst.sort(key=order.__getitem__)

    ring_numbers: dict[tuple[int, int], int] = {}
    next_ring = 1

    def ring_str(u: int, v: int) -> str:
        nonlocal next_ring
        key = (min(u, v), max(u, v))
        number = ring_numbers.get(key)
        if number is None:
            number = next_ring
            ring_numbers[key] = number
            next_ring += 1
        return ring_token(_bond_order(g, u, v), number)

    out: list[str] = []

    def emit_atom(v: int) -> None:
        out.append(atom_token(v))
        if not rings_as_items:
            for p in stubs[v]:
                out.append(ring_str(v, p))

    def atom_items(v: int) -> list:
        items: list = []
        if rings_as_items:
            items.extend(("ring", p) for p in stubs[v])
        items.extend(("tree", c) for c in children[v])
        return items

    emit_atom(g.root)
    # frame: (atom, item list, next item index, emit ')' when done)
    frames: list[tuple[int, list, int, bool]] = [(g.root, atom_items(g.root), 0, False)]
    while frames:
        u, items, k, close = frames.pop()
        if k == len(items):
            if close:
                out.append(")")
            continue
        kind, v = items[k]
        last = k + 1 == len(items)
        frames.append((u, items, k + 1, close))
        if not last:
            out.append("(")
        if kind == "ring":
            out.append(ring_str(u, v))
            if not last:
                out.append(")")
        else:
            out.append(bond_token(_bond_order(g, u, v)))
            emit_atom(v)
            frames.append((v, atom_items(v), 0, not last))
    return "".join(out)


def serialize(g: MoleculeGraph) -> str:
    """Canonical expanded SMILES; equal graphs serialize identically."""

    def atom_token(i: int) -> str:
        element, h = g.atoms[i]
        if h == 0:
            return f"[{element}]"
        if h == 1:
            return f"[{element}H]"
        return f"[{element}H{h}]"

    def ring_token(order: int, number: int) -> str:
        return f"{ORDER_TO_BOND_CHAR[order]}{{{number}}}"

    return _emit(
        g, atom_token, lambda order: ORDER_TO_BOND_CHAR[order], ring_token, rings_as_items=True
    )


# Elements a standard SMILES reader assigns implicit hydrogens to, with the
# default valence it assumes; bare emission is only safe when the table agrees.
_SMILES_ORGANIC = {
    "B": 3, "C": 4, "N": 3, "O": 2, "F": 1, "P": 3, "S": 2, "Cl": 1, "Br": 1, "I": 1,
}


def to_standard_smiles(g: MoleculeGraph, table: ElementTable | None = None) -> str:
    """Kekule standard SMILES for a complete molecule.

    Organic-subset atoms are written bare (implicit hydrogens); anything whose
    table valence differs from the standard assumption keeps bracket form.
    """
    table = table or DEFAULT_TABLE
    if g.heavy_atom_count == 0:
        raise EmptyGraphError("cannot serialize an empty graph")
    incomplete = [i for i in range(len(g.atoms)) if g.free_valence(i, table) > 0]
    if incomplete:
        raise IncompleteMoleculeError(
            f"atoms with unsatisfied valence: {incomplete}"
        )

    def atom_token(i: int) -> str:
        element, h = g.atoms[i]
        if _SMILES_ORGANIC.get(element) == table.valence_of(element):
            return element
        if h == 0:
            return f"[{element}]"
        if h == 1:
            return f"[{element}H]"
        return f"[{element}H{h}]"

    def bond_token(order: int) -> str:
        return "" if order == 1 else ORDER_TO_BOND_CHAR[order]

    def ring_token(order: int, number: int) -> str:
        if number > 99:
            raise ValueError("more than 99 ring closures")
        digit = str(number) if number < 10 else f"%{number:02d}"
        return bond_token(order) + digit

    return _emit(g, atom_token, bond_token, ring_token, rings_as_items=False)


def roundtrip_check(text: str, table: ElementTable | None = None) -> bool:
    """True iff canonical serialization preserves the parsed structure."""
    table = table or DEFAULT_TABLE
    g = parse(table, text)
    again = parse(table, serialize(g))
    return is_isomorphic(g, again)
