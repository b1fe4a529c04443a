"""Canonical SMILES writer.

Atoms are ranked by Morgan-style iterative refinement of local invariants
(element, charge, heavy degree, aromaticity, hydrogen count). Remaining ties
are broken by individualizing each member of the first tied class in turn and
keeping the lexicographically smallest output string, so the result does not
depend on the input atom order.
"""

from __future__ import annotations

from spectrakit.errors import UnsupportedFeature
from spectrakit.molgraph.graph import BondOrder, MoleculeGraph
from spectrakit.molgraph.smiles import AROMATIC_BRACKET, DEFAULT_VALENCES, implicit_hydrogens


class _WriterGraph:
    """Hydrogen-folded view of a molecule: suppressed H atoms become counts."""

    def __init__(self, mol: MoleculeGraph):
        suppressed = {
            a.index
            for a in mol.atoms
            if a.element == "H"
            and a.formal_charge == 0
            and mol.degree(a.index) == 1
            and mol.neighbors(a.index)[0][1] is BondOrder.SINGLE
            and mol.atoms[mol.neighbors(a.index)[0][0]].element != "H"
        }
        kept = [a.index for a in mol.atoms if a.index not in suppressed]
        local = {old: new for new, old in enumerate(kept)}
        self.atoms = [mol.atoms[i] for i in kept]
        self.hcount = [sum(1 for j, _ in mol.neighbors(i) if j in suppressed) for i in kept]
        self.adj: list[list[tuple[int, BondOrder]]] = [
            [(local[j], o) for j, o in mol.neighbors(i) if j not in suppressed] for i in kept
        ]
        self.symbols = [self._atom_symbol(k) for k in range(len(kept))]

    def _atom_symbol(self, k: int) -> str:
        atom = self.atoms[k]
        h = self.hcount[k]
        orders = [o for _, o in self.adj[k]]
        if (
            atom.element in DEFAULT_VALENCES
            and atom.formal_charge == 0
            and implicit_hydrogens(atom.element, atom.aromatic, orders) == h
        ):
            return atom.element.lower() if atom.aromatic else atom.element
        symbol = atom.element
        if atom.aromatic:
            symbol = atom.element.lower()
            if symbol not in AROMATIC_BRACKET:
                raise UnsupportedFeature(f"cannot write aromatic {atom.element} in SMILES")
        if h:
            symbol += "H" if h == 1 else f"H{h}"
        c = atom.formal_charge
        if c:
            symbol += ("+" if c > 0 else "-") + (str(abs(c)) if abs(c) > 1 else "")
        return f"[{symbol}]"

    def bond_symbol(self, i: int, j: int, order: BondOrder) -> str:
        both_aromatic = self.atoms[i].aromatic and self.atoms[j].aromatic
        if order is BondOrder.SINGLE:
            return "-" if both_aromatic else ""
        if order is BondOrder.AROMATIC:
            return "" if both_aromatic else ":"
        return "=" if order is BondOrder.DOUBLE else "#"


def _dense_rank(keys: list) -> list[int]:
    table = {key: r for r, key in enumerate(sorted(set(keys)))}
    return [table[key] for key in keys]


def _refine(g: _WriterGraph, ranks: list[int]) -> list[int]:
    n_classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((ranks[j], int(o)) for j, o in g.adj[i])))
            for i in range(len(ranks))
        ]
        ranks = _dense_rank(keys)
        n_new = len(set(ranks))
        if n_new == n_classes:
            return ranks
        n_classes = n_new


def _leaf_rankings(g: _WriterGraph, ranks: list[int]):
    stack = [ranks]
    while stack:
        ranks = _refine(g, stack.pop())
        if len(set(ranks)) == len(ranks):
            yield ranks
            continue
        seen: dict[int, int] = {}
        for r in ranks:
            seen[r] = seen.get(r, 0) + 1
        target = min(r for r, count in seen.items() if count > 1)
        for i in reversed([i for i, r in enumerate(ranks) if r == target]):
            stack.append(_dense_rank([(r, 0 if k == i else 1) for k, r in enumerate(ranks)]))


def _write(g: _WriterGraph, ranks: list[int]) -> str:
    n = len(g.atoms)
    by_rank = sorted(range(n), key=ranks.__getitem__)
    sorted_adj = [sorted(g.adj[i], key=lambda jo: ranks[jo[0]]) for i in range(n)]
    visited = [False] * n
    visit_pos = [0] * n
    children: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
    closures: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
    used: set[tuple[int, int]] = set()
    roots = []
    counter = 0
    for root in by_rank:
        if visited[root]:
            continue
        roots.append(root)
        visited[root] = True
        visit_pos[root] = counter
        counter += 1
        stack = [(root, iter(sorted_adj[root]))]
        while stack:
            v, it = stack[-1]
            for w, order in it:
                edge = (min(v, w), max(v, w))
                if edge in used:
                    continue
                used.add(edge)
                if visited[w]:
                    closures[v].append((w, order))
                    closures[w].append((v, order))
                else:
                    visited[w] = True
                    visit_pos[w] = counter
                    counter += 1
                    children[v].append((w, order))
                    stack.append((w, iter(sorted_adj[w])))
                break
            else:
                stack.pop()

    labels: dict[tuple[int, int], int] = {}
    free: list[int] = []
    next_label = 1
    parts: list[str] = []
    for root in roots:
        if parts:
            parts.append(".")
        todo: list[tuple[str, object]] = [("atom", root)]
        while todo:
            kind, item = todo.pop()
            if kind == "text":
                parts.append(item)
                continue
            v = item
            parts.append(g.symbols[v])
            ring = sorted(closures[v], key=lambda wo: visit_pos[wo[0]])
            closing = [(w, o) for w, o in ring if visit_pos[w] < visit_pos[v]]
            opening = [(w, o) for w, o in ring if visit_pos[w] > visit_pos[v]]
            released = []
            for w, _ in closing:
                label = labels.pop((w, v))
                parts.append(_label(label))
                released.append(label)
            for w, order in opening:
                if free:
                    label = min(free)
                    free.remove(label)
                else:
                    label = next_label
                    next_label += 1
                labels[(v, w)] = label
                parts.append(g.bond_symbol(v, w, order) + _label(label))
            free.extend(released)
            kids = children[v]
            if kids:
                last, last_order = kids[-1]
                todo.append(("atom", last))
                todo.append(("text", g.bond_symbol(v, last, last_order)))
                for w, order in reversed(kids[:-1]):
                    todo.append(("text", ")"))
                    todo.append(("atom", w))
                    todo.append(("text", "(" + g.bond_symbol(v, w, order)))
    return "".join(parts)


def _label(n: int) -> str:
    return str(n) if n < 10 else f"%{n:02d}"


def canonical_smiles(mol: MoleculeGraph) -> str:
    """Canonical SMILES string, invariant under any permutation of the input atoms.

    Hydrogens bonded to a single heavy atom are folded into that atom's
    hydrogen count; stereochemistry is never written.
    """
    g = _WriterGraph(mol)
    initial = _dense_rank(
        [
            (a.element, a.formal_charge, len(g.adj[k]), a.aromatic, g.hcount[k])
            for k, a in enumerate(g.atoms)
        ]
    )
    best: str | None = None
    for ranks in _leaf_rankings(g, initial):
        s = _write(g, ranks)
        if best is None or s < best:
            best = s
    assert best is not None
    return best
