"""Plain-text 3D structure blocks.

Format::

    <structure>
    name: ethane            (optional)
    atoms:
    0 C 0.0000 0.0000 0.0000
    1 C 1.5400 0.0000 0.0000 +1     (optional trailing formal charge)
    bonds:
    0 1 1
    </structure>

Atom indices are 0-based and must appear in order. Bond orders use the SDF
codes 1/2/3 and 4 for aromatic. The ``<structure>`` wrapper is optional on
input and always written on output.
"""

from __future__ import annotations

from spectrakit.errors import (
    AtomBlockError,
    BondIndexOutOfRange,
    InvalidGraph,
    MalformedCounts,
    MoleculeError,
    UnknownBondOrder,
    UnsupportedFeature,
    ValenceViolation,
)
from spectrakit.molgraph.graph import Atom, Bond, BondOrder, MoleculeGraph

OPEN_TAG = "<structure>"
CLOSE_TAG = "</structure>"


def write_structure_text(mol: MoleculeGraph) -> str:
    """Render ``mol`` as a structure block; missing positions are written as zeros."""
    if mol.name and ("\n" in mol.name or mol.name != mol.name.strip()):
        raise UnsupportedFeature("structure name must be a single trimmed line")
    lines = [OPEN_TAG]
    if mol.name:
        lines.append(f"name: {mol.name}")
    lines.append("atoms:")
    for atom in mol.atoms:
        x, y, z = atom.position if atom.position is not None else (0.0, 0.0, 0.0)
        line = f"{atom.index} {atom.element} {x + 0.0:.4f} {y + 0.0:.4f} {z + 0.0:.4f}"
        if atom.formal_charge:
            line += f" {atom.formal_charge:+d}"
        lines.append(line)
    lines.append("bonds:")
    lines.extend(f"{b.a} {b.b} {int(b.order)}" for b in mol.bonds)
    lines.append(CLOSE_TAG)
    return "\n".join(lines) + "\n"


def parse_structure_text(text: str) -> MoleculeGraph:
    """Parse a structure block into a 3D :class:`MoleculeGraph`.

    Errors mirror :func:`spectrakit.molgraph.parse_sdf` and carry 1-based line
    numbers relative to ``text``.
    """
    raw_lines = text.splitlines()
    numbered = [(k + 1, line.strip()) for k, line in enumerate(raw_lines) if line.strip()]
    if numbered and numbered[0][1] == OPEN_TAG:
        numbered = numbered[1:]
        if not numbered or numbered[-1][1] != CLOSE_TAG:
            raise MalformedCounts(f"missing {CLOSE_TAG}", len(raw_lines) or None)
        numbered = numbered[:-1]
    name = None
    if numbered and numbered[0][1].startswith("name:"):
        name = numbered[0][1][5:].strip() or None
        numbered = numbered[1:]
    if not numbered or numbered[0][1] != "atoms:":
        raise MalformedCounts("expected an 'atoms:' section", numbered[0][0] if numbered else None)
    try:
        split = next(k for k, (_, line) in enumerate(numbered) if line == "bonds:")
    except StopIteration:
        raise MalformedCounts("expected a 'bonds:' section") from None
    atom_lines = numbered[1:split]
    bond_lines = numbered[split + 1 :]
    if not atom_lines:
        raise MalformedCounts("structure has no atoms", numbered[0][0])

    atoms = []
    for expected, (lineno, line) in enumerate(atom_lines):
        fields = line.split()
        if len(fields) not in (5, 6):
            raise AtomBlockError(f"expected 'index element x y z [charge]', got {line!r}", lineno)
        try:
            index = int(fields[0])
            xyz = tuple(float(v) for v in fields[2:5])
            charge = int(fields[5]) if len(fields) == 6 else 0
        except ValueError:
            raise AtomBlockError(f"bad numeric field in {line!r}", lineno) from None
        if index != expected:
            raise AtomBlockError(f"atom index {index} out of sequence (expected {expected})", lineno)
        atoms.append((fields[1], charge, xyz, lineno))

    bonds = []
    aromatic: set[int] = set()
    for lineno, line in bond_lines:
        fields = line.split()
        if len(fields) != 3:
            raise AtomBlockError(f"expected 'a b order', got {line!r}", lineno)
        try:
            a, b, code = (int(f) for f in fields)
        except ValueError:
            raise AtomBlockError(f"bad numeric field in {line!r}", lineno) from None
        for idx in (a, b):
            if not 0 <= idx < len(atoms):
                raise BondIndexOutOfRange(
                    f"bond references atom {idx} but the structure has {len(atoms)} atoms", lineno
                )
        try:
            order = BondOrder(code)
        except ValueError:
            raise UnknownBondOrder(f"unknown bond order {code}", lineno) from None
        try:
            bonds.append(Bond(a, b, order))
        except InvalidGraph as exc:
            raise BondIndexOutOfRange(str(exc), lineno) from None
        if order is BondOrder.AROMATIC:
            aromatic.update((a, b))

    graph_atoms = []
    for i, (symbol, charge, xyz, lineno) in enumerate(atoms):
        try:
            graph_atoms.append(Atom(i, symbol, charge, i in aromatic, xyz))
        except InvalidGraph as exc:
            raise AtomBlockError(str(exc), lineno) from None
    try:
        return MoleculeGraph(tuple(graph_atoms), tuple(bonds), name)
    except ValenceViolation:
        raise
    except MoleculeError as exc:
        raise BondIndexOutOfRange(str(exc), bond_lines[0][0] if bond_lines else None) from None
