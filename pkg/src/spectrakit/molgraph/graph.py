from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from spectrakit.errors import InvalidGraph, ValenceViolation

ELEMENTS = frozenset(
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca "
    "Fe Co Ni Cu Zn Ga Ge As Se Br Kr Rb Sr Ag Cd In Sn Sb Te I Xe Cs Ba Pt Au Hg Pb Bi".split()
)

# Maximum valence for neutral common-organic atoms; anything not listed is unchecked.
MAX_VALENCE = {"H": 1, "C": 4, "N": 3, "O": 2, "F": 1, "Cl": 1, "Br": 1, "I": 1}
MAX_VALENCE_CHARGED = {("N", 1): 4}

UNREACHABLE = -1


class BondOrder(enum.IntEnum):
    """Bond orders, valued as their SDF V2000 bond-type codes."""

    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)


@dataclass(frozen=True)
class Atom:
    index: int
    element: str
    formal_charge: int = 0
    aromatic: bool = False
    position: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.element not in ELEMENTS:
            raise InvalidGraph(f"unknown element symbol {self.element!r}")
        if not -4 <= self.formal_charge <= 4:
            raise InvalidGraph(f"formal charge {self.formal_charge} out of range [-4, 4]")
        if self.position is not None:
            pos = tuple(float(c) for c in self.position)
            if len(pos) != 3 or not all(math.isfinite(c) for c in pos):
                raise InvalidGraph(f"atom {self.index}: position must be 3 finite floats")
            object.__setattr__(self, "position", pos)


@dataclass(frozen=True, order=True)
class Bond:
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE

    def __post_init__(self):
        if self.a == self.b:
            raise InvalidGraph(f"bond from atom {self.a} to itself")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        object.__setattr__(self, "order", BondOrder(self.order))

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a


@dataclass(frozen=True)
class MoleculeGraph:
    """Immutable molecular graph: atoms with optional 3D positions plus typed bonds.

    Bonds are normalized (``a < b``) and stored sorted, so two graphs built from
    the same atoms and the same bond set compare equal regardless of input order.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = ()
    name: str | None = None
    _adjacency: tuple[tuple[tuple[int, BondOrder], ...], ...] = field(
        default=(), init=False, repr=False, compare=False
    )

    def __post_init__(self):
        atoms = tuple(self.atoms)
        bonds = tuple(sorted(self.bonds))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "bonds", bonds)
        if not atoms:
            raise InvalidGraph("molecule has no atoms")
        for i, atom in enumerate(atoms):
            if atom.index != i:
                raise InvalidGraph(f"atom at position {i} has index {atom.index}")
        has_pos = {atom.position is not None for atom in atoms}
        if len(has_pos) > 1:
            raise InvalidGraph("positions must be present on every atom or on none")
        n = len(atoms)
        adj: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        for bond in bonds:
            if bond.b >= n or bond.a < 0:
                raise InvalidGraph(f"bond {bond.a}-{bond.b} references a missing atom")
            if (bond.a, bond.b) in seen:
                raise InvalidGraph(f"duplicate bond {bond.a}-{bond.b}")
            seen.add((bond.a, bond.b))
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        object.__setattr__(self, "_adjacency", tuple(tuple(sorted(nb)) for nb in adj))
        for atom in atoms:
            check_valence(atom, adj[atom.index])

    @property
    def has_positions(self) -> bool:
        return self.atoms[0].position is not None

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> tuple[tuple[int, BondOrder], ...]:
        """``(neighbor index, bond order)`` pairs for atom ``i``, sorted by index."""
        return self._adjacency[i]

    def degree(self, i: int) -> int:
        return len(self._adjacency[i])

    def bond_between(self, i: int, j: int) -> Bond | None:
        for k, order in self._adjacency[i]:
            if k == j:
                return Bond(i, j, order)
        return None

    def hydrogen_count(self, i: int) -> int:
        """Number of explicit hydrogen atoms bonded to atom ``i``."""
        return sum(1 for k, _ in self._adjacency[i] if self.atoms[k].element == "H")

    def positions(self) -> np.ndarray:
        if not self.has_positions:
            raise InvalidGraph("molecule has no coordinates")
        return np.array([atom.position for atom in self.atoms], dtype=float)

    def permute(self, order: Sequence[int]) -> MoleculeGraph:
        """Return the same molecule with atoms reordered.

        ``order[k]`` is the old index of the atom placed at new index ``k``.
        """
        if sorted(order) != list(range(len(self.atoms))):
            raise InvalidGraph("order must be a permutation of the atom indices")
        new_index = {old: new for new, old in enumerate(order)}
        atoms = tuple(
            Atom(new, a.element, a.formal_charge, a.aromatic, a.position)
            for new, a in ((new_index[old], self.atoms[old]) for old in order)
        )
        bonds = tuple(Bond(new_index[b.a], new_index[b.b], b.order) for b in self.bonds)
        return MoleculeGraph(atoms, bonds, self.name)

    def subgraph(self, keep: Iterable[int]) -> MoleculeGraph:
        """Induced subgraph on ``keep``, reindexed in ascending old-index order."""
        kept = sorted(set(keep))
        new_index = {old: new for new, old in enumerate(kept)}
        atoms = tuple(
            Atom(new, self.atoms[old].element, self.atoms[old].formal_charge,
                 self.atoms[old].aromatic, self.atoms[old].position)
            for new, old in enumerate(kept)
        )
        bonds = tuple(
            Bond(new_index[b.a], new_index[b.b], b.order)
            for b in self.bonds
            if b.a in new_index and b.b in new_index
        )
        return MoleculeGraph(atoms, bonds, self.name)

    def heavy_atoms(self) -> MoleculeGraph:
        """Hydrogen-suppressed graph. A molecule made only of hydrogens is kept as is."""
        keep = [a.index for a in self.atoms if a.element != "H"]
        if not keep or len(keep) == len(self.atoms):
            return self
        return self.subgraph(keep)

    def without_positions(self) -> MoleculeGraph:
        atoms = tuple(
            Atom(a.index, a.element, a.formal_charge, a.aromatic, None) for a in self.atoms
        )
        return MoleculeGraph(atoms, self.bonds, self.name)

    def formula(self) -> str:
        """Hill-order molecular formula, e.g. ``C2H6O``."""
        counts: dict[str, int] = {}
        for atom in self.atoms:
            counts[atom.element] = counts.get(atom.element, 0) + 1
        if "C" in counts:
            order = ["C"] + (["H"] if "H" in counts else [])
            order += sorted(e for e in counts if e not in ("C", "H"))
        else:
            order = sorted(counts)
        return "".join(f"{e}{counts[e] if counts[e] > 1 else ''}" for e in order)

    def n_components(self) -> int:
        dist = topological_distances(self)
        seen: set[int] = set()
        count = 0
        for i in range(len(self.atoms)):
            if i not in seen:
                count += 1
                seen.update(int(j) for j in np.flatnonzero(dist[i] != UNREACHABLE))
        return count

    def ring_count(self) -> int:
        """Cyclomatic number: independent rings (bonds - atoms + components)."""
        return len(self.bonds) - len(self.atoms) + self.n_components()


def check_valence(atom: Atom, neighbors: Sequence[tuple[int, BondOrder]]) -> None:
    """Raise :class:`ValenceViolation` if the atom exceeds its element's maximum.

    Aromatic bonds are counted at their lower Kekulé bound (1 each); aromatic
    carbon additionally owes one unit to its ring double bond.
    """
    limit = MAX_VALENCE_CHARGED.get((atom.element, atom.formal_charge))
    if limit is None:
        if atom.formal_charge != 0:
            return
        limit = MAX_VALENCE.get(atom.element)
        if limit is None:
            return
    n_aromatic = sum(1 for _, order in neighbors if order is BondOrder.AROMATIC)
    total = sum(int(order) for _, order in neighbors if order is not BondOrder.AROMATIC)
    total += n_aromatic
    if n_aromatic and atom.element == "C":
        total += 1
    if total > limit:
        raise ValenceViolation(
            f"atom {atom.index} ({atom.element}) has valence {total} > {limit}"
        )


def topological_distances(mol: MoleculeGraph) -> np.ndarray:
    """All-pairs shortest-path lengths in bonds; ``UNREACHABLE`` (-1) across components."""
    n = len(mol.atoms)
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for source in range(n):
        dist[source, source] = 0
        queue = deque([source])
        while queue:
            i = queue.popleft()
            for j, _ in mol.neighbors(i):
                if dist[source, j] == UNREACHABLE:
                    dist[source, j] = dist[source, i] + 1
                    queue.append(j)
    return dist
