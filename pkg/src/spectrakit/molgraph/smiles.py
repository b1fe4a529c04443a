"""Parser for a practical subset of SMILES.

Supported: organic-subset atoms (B C N O P S F Cl Br I and aromatic
b c n o p s), bracket atoms ``[isotope? symbol chirality? Hn? charge? class?]``,
branches, ring closures (digits and ``%nn``), bond symbols ``- = # :`` and
``.`` for disconnected parts. Stereo marks (``/ \\ @ @@``), isotopes and atom
classes are accepted and discarded. Implicit hydrogens are materialized as
explicit H atoms appended after the heavy atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

from spectrakit.errors import (
    EmptyInput,
    InvalidGraph,
    SmilesError,
    UnbalancedParenthesis,
    UnclosedRingBond,
    UnknownAtomSymbol,
)
from spectrakit.molgraph.graph import ELEMENTS, Atom, Bond, BondOrder, MoleculeGraph

ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")
AROMATIC_BRACKET = ("se", "as", "te", "b", "c", "n", "o", "p", "s")
DEFAULT_VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}
_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE, "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC,
}


@dataclass
class _PAtom:
    element: str
    aromatic: bool
    charge: int = 0
    hcount: int | None = None  # None: organic-subset atom, hydrogens implied


def implicit_hydrogens(element: str, aromatic: bool, orders: list[BondOrder]) -> int:
    """Hydrogen count implied for an organic-subset atom with the given bonds."""
    valences = DEFAULT_VALENCES[element]
    if aromatic:
        used = sum(1 if o is BondOrder.AROMATIC else int(o) for o in orders)
        return max(valences[0] - used - 1, 0)
    used = sum(1 if o is BondOrder.AROMATIC else int(o) for o in orders)
    for v in valences:
        if v >= used:
            return v - used
    return 0


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.atoms: list[_PAtom] = []
        self.bonds: dict[tuple[int, int], tuple[BondOrder | None, int]] = {}
        self.rings: dict[str, tuple[int, str | None, int]] = {}

    def error(self, cls, message: str, pos: int | None = None):
        return cls(message, self.pos if pos is None else pos)

    def parse(self) -> MoleculeGraph:
        text = self.text
        prev: int | None = None
        pending: str | None = None
        pending_pos = 0
        stack: list[int] = []
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == "(":
                if prev is None or pending is not None:
                    raise self.error(SmilesError, "branch must follow an atom")
                stack.append(prev)
                self.pos += 1
            elif ch == ")":
                if not stack:
                    raise self.error(UnbalancedParenthesis, "unmatched ')'")
                if pending is not None:
                    raise self.error(SmilesError, "bond symbol before ')'")
                prev = stack.pop()
                self.pos += 1
            elif ch in _BOND_SYMBOLS:
                if prev is None or pending is not None:
                    raise self.error(SmilesError, f"unexpected bond symbol {ch!r}")
                pending, pending_pos = ch, self.pos
                self.pos += 1
            elif ch == ".":
                if pending is not None or prev is None:
                    raise self.error(SmilesError, "unexpected '.'")
                if stack:
                    raise self.error(UnbalancedParenthesis, "'.' inside a branch")
                prev = None
                self.pos += 1
            elif ch.isdigit() or ch == "%":
                if prev is None:
                    raise self.error(SmilesError, "ring-closure label must follow an atom")
                start = self.pos
                if ch == "%":
                    label = text[self.pos + 1 : self.pos + 3]
                    if len(label) != 2 or not label.isdigit():
                        raise self.error(SmilesError, "'%' must be followed by two digits")
                    self.pos += 3
                else:
                    label = ch
                    self.pos += 1
                self._ring(prev, label, pending, start)
                pending = None
            elif ch == "[":
                idx = self._bracket_atom()
                prev = self._attach(prev, idx, pending)
                pending = None
            elif ch.isspace():
                raise self.error(SmilesError, "whitespace inside SMILES")
            else:
                idx = self._organic_atom()
                prev = self._attach(prev, idx, pending)
                pending = None
        if stack:
            raise UnbalancedParenthesis("unclosed '('", len(text))
        if pending is not None:
            raise SmilesError(f"dangling bond symbol {pending!r}", pending_pos)
        if self.rings:
            label, (_, _, pos) = min(self.rings.items(), key=lambda kv: kv[1][2])
            raise UnclosedRingBond(label, pos)
        if not self.atoms:
            raise EmptyInput("no atoms in SMILES", 0)
        return self._build()

    def _attach(self, prev: int | None, idx: int, pending: str | None) -> int:
        if prev is not None:
            self._add_bond(prev, idx, pending, self.pos)
        return idx

    def _add_bond(self, a: int, b: int, symbol: str | None, pos: int) -> None:
        key = (min(a, b), max(a, b))
        if a == b:
            raise SmilesError("ring closure bonds an atom to itself", pos)
        if key in self.bonds:
            raise SmilesError(f"duplicate bond between atoms {a} and {b}", pos)
        order = _BOND_SYMBOLS[symbol] if symbol is not None else None
        self.bonds[key] = (order, pos)

    def _ring(self, atom: int, label: str, symbol: str | None, pos: int) -> None:
        if label in self.rings:
            other, other_symbol, _ = self.rings.pop(label)
            if symbol and other_symbol and _BOND_SYMBOLS[symbol] != _BOND_SYMBOLS[other_symbol]:
                raise SmilesError(f"conflicting bond symbols on ring bond {label}", pos)
            self._add_bond(other, atom, symbol or other_symbol, pos)
        else:
            self.rings[label] = (atom, symbol, pos)

    def _organic_atom(self) -> int:
        text = self.text
        for sym in ORGANIC_SUBSET:
            if text.startswith(sym, self.pos):
                self.pos += len(sym)
                self.atoms.append(_PAtom(sym, False))
                return len(self.atoms) - 1
        ch = text[self.pos]
        if ch in AROMATIC_ORGANIC:
            self.pos += 1
            self.atoms.append(_PAtom(ch.upper(), True))
            return len(self.atoms) - 1
        raise self.error(UnknownAtomSymbol, f"unknown atom symbol {ch!r}")

    def _bracket_atom(self) -> int:
        text = self.text
        start = self.pos
        end = text.find("]", start)
        if end < 0:
            raise self.error(SmilesError, "unterminated bracket atom")
        body = text[start + 1 : end]
        i = 0
        while i < len(body) and body[i].isdigit():
            i += 1  # isotope, discarded
        if i >= len(body):
            raise SmilesError("bracket atom without element symbol", start)
        aromatic = False
        element = None
        if body[i].islower():
            for sym in AROMATIC_BRACKET:
                if body.startswith(sym, i):
                    element, aromatic = sym.capitalize(), True
                    i += len(sym)
                    break
        elif body[i].isupper():
            if i + 1 < len(body) and body[i + 1].islower():
                element = body[i : i + 2]
                i += 2
            else:
                element = body[i]
                i += 1
        if element is None or element not in ELEMENTS:
            raise UnknownAtomSymbol(f"unknown atom symbol in [{body}]", start)
        if i < len(body) and body[i] == "@":
            i += 1
            if i < len(body) and body[i] == "@":
                i += 1
            elif body[i : i + 2] in ("TH", "AL", "SP", "TB", "OH"):
                i += 2
                while i < len(body) and body[i].isdigit():
                    i += 1
        hcount = 0
        if i < len(body) and body[i] == "H":
            i += 1
            j = i
            while i < len(body) and body[i].isdigit():
                i += 1
            hcount = int(body[j:i]) if i > j else 1
        charge = 0
        if i < len(body) and body[i] in "+-":
            sign = 1 if body[i] == "+" else -1
            j = i + 1
            while j < len(body) and body[j].isdigit():
                j += 1
            if j > i + 1:
                charge = sign * int(body[i + 1 : j])
                i = j
            else:
                n = 0
                while i < len(body) and body[i] == body[j - 1]:
                    n += 1
                    i += 1
                charge = sign * n
        if i < len(body) and body[i] == ":":
            j = i + 1
            while j < len(body) and body[j].isdigit():
                j += 1
            if j == i + 1:
                raise SmilesError(f"empty atom class in [{body}]", start)
            i = j
        if i != len(body):
            raise SmilesError(f"unexpected {body[i:]!r} in bracket atom [{body}]", start)
        self.pos = end + 1
        self.atoms.append(_PAtom(element, aromatic, charge, hcount))
        return len(self.atoms) - 1

    def _build(self) -> MoleculeGraph:
        orders: dict[tuple[int, int], BondOrder] = {}
        for (a, b), (order, _) in self.bonds.items():
            if order is None:
                both = self.atoms[a].aromatic and self.atoms[b].aromatic
                order = BondOrder.AROMATIC if both else BondOrder.SINGLE
            orders[(a, b)] = order
        per_atom: list[list[BondOrder]] = [[] for _ in self.atoms]
        for (a, b), order in orders.items():
            per_atom[a].append(order)
            per_atom[b].append(order)
        try:
            atoms = [
                Atom(i, pa.element, pa.charge, pa.aromatic) for i, pa in enumerate(self.atoms)
            ]
        except InvalidGraph as exc:
            raise UnknownAtomSymbol(str(exc)) from None
        bonds = [Bond(a, b, order) for (a, b), order in orders.items()]
        for i, pa in enumerate(self.atoms):
            h = pa.hcount
            if h is None:
                h = implicit_hydrogens(pa.element, pa.aromatic, per_atom[i])
            for _ in range(h):
                atoms.append(Atom(len(atoms), "H"))
                bonds.append(Bond(i, len(atoms) - 1, BondOrder.SINGLE))
        return MoleculeGraph(tuple(atoms), tuple(bonds))


def parse_smiles(text: str) -> MoleculeGraph:
    """Parse a SMILES string into a position-free :class:`MoleculeGraph`.

    >>> mol = parse_smiles("C")
    >>> len(mol.atoms), len(mol.bonds)
    (5, 4)
    """
    if text is None or not text.strip():
        raise EmptyInput("empty SMILES string", 0)
    return _Parser(text.strip()).parse()
