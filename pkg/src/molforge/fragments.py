"""Fragment vocabulary: reusable sub-structures with open attachment sites."""

from __future__ import annotations

from dataclasses import dataclass

from .chem import ElementTable, MoleculeGraph
from .exsmiles import ParseError, parse


class FragmentError(Exception):
    """A fragment text could not be turned into a usable fragment."""

    def __init__(self, index: int, message: str):
        super().__init__(f"fragment[{index}]: {message}")
        self.index = index


class NoOpenSitesError(FragmentError):
    """Fragment has no free valence anywhere, so nothing can attach to it."""


@dataclass(frozen=True)
class Fragment:
    graph: MoleculeGraph
    open_sites: tuple[tuple[int, int], ...]  # (atom index, free valence)
    source_text: str

    @property
    def heavy_atoms(self) -> int:
        return self.graph.heavy_atom_count


def fragment_from_text(table: ElementTable, text: str, index: int = 0) -> Fragment:
    try:
        graph = parse(table, text)
    except ParseError as exc:
        raise FragmentError(index, str(exc)) from exc
    sites = graph.open_sites(table)
    if not sites:
        raise NoOpenSitesError(index, f"{text!r} has no open attachment sites")
    return Fragment(graph=graph, open_sites=sites, source_text=text)


def load_fragments(table: ElementTable, texts: list[str]) -> list[Fragment]:
    """Parse fragment texts, rejecting unusable ones with their list index."""
    return [fragment_from_text(table, text, i) for i, text in enumerate(texts)]
