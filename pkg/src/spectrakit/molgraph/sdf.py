"""MDL molfile / SDF V2000 reading and writing."""

from __future__ import annotations

from typing import Iterable, Iterator

from spectrakit.errors import (
    AtomBlockError,
    BondIndexOutOfRange,
    InvalidGraph,
    MalformedCounts,
    MoleculeError,
    UnknownBondOrder,
    UnsupportedFeature,
    UnsupportedVersion,
    ValenceViolation,
)
from spectrakit.molgraph.graph import Atom, Bond, BondOrder, MoleculeGraph

# V2000 atom-block charge codes (column 37-39); 4 is "doublet radical", read as 0.
_CHARGE_CODES = {0: 0, 1: 3, 2: 2, 3: 1, 4: 0, 5: -1, 6: -2, 7: -3}
_CHARGE_TO_CODE = {v: k for k, v in _CHARGE_CODES.items() if k != 4}

MAX_V2000_ATOMS = 999


def split_sdf(text: str | Iterable[str]) -> Iterator[str]:
    """Yield the individual molfile blocks of a multi-record SDF document.

    ``text`` may also be an iterable of lines (e.g. an open file), which keeps
    memory bounded by the largest record.
    """
    lines = text.splitlines() if isinstance(text, str) else (line.rstrip("\r\n") for line in text)
    block: list[str] = []
    for line in lines:
        if line.startswith("$$$$"):
            yield "\n".join(block) + "\n"
            block = []
        else:
            block.append(line)
    if any(line.strip() for line in block):
        yield "\n".join(block) + "\n"


def _int_field(line: str, start: int, stop: int, lineno: int, what: str, exc=AtomBlockError) -> int:
    raw = line[start:stop].strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise exc(f"bad {what} field {raw!r}", lineno) from None


def parse_sdf(text: str) -> MoleculeGraph:
    """Parse one V2000 molfile into a :class:`MoleculeGraph`.

    Coordinates are taken verbatim from the atom block and atoms are flagged
    aromatic only when they carry a bond of type 4. Trailing SDF data items
    (after ``M  END``) are ignored. Every error carries the failing line number.
    """
    lines = text.splitlines()
    if len(lines) < 4:
        raise MalformedCounts("document too short for a molfile header and counts line", len(lines) or None)
    name = lines[0].strip() or None
    counts = lines[3]
    if "V3000" in counts:
        raise UnsupportedVersion("V3000 molfiles are not supported", 4)
    try:
        n_atoms = int(counts[0:3])
        n_bonds = int(counts[3:6])
    except ValueError:
        raise MalformedCounts(f"cannot read atom/bond counts from {counts!r}", 4) from None
    if n_atoms < 1 or n_bonds < 0:
        raise MalformedCounts(f"invalid counts {n_atoms} atoms / {n_bonds} bonds", 4)
    version = counts[33:39].strip()
    if version and version != "V2000":
        raise UnsupportedVersion(f"unsupported molfile version {version!r}", 4)

    atom_start = 4
    bond_start = atom_start + n_atoms
    props_start = bond_start + n_bonds
    if len(lines) < props_start:
        raise MalformedCounts(
            f"counts line declares {n_atoms} atoms and {n_bonds} bonds but the document ends early",
            4,
        )

    elements: list[str] = []
    charges: list[int] = []
    positions: list[tuple[float, float, float]] = []
    for k in range(n_atoms):
        lineno = atom_start + k + 1
        line = lines[atom_start + k]
        try:
            xyz = (float(line[0:10]), float(line[10:20]), float(line[20:30]))
        except ValueError:
            raise AtomBlockError(f"bad coordinates in {line!r}", lineno) from None
        symbol = line[31:34].strip()
        if not symbol:
            raise AtomBlockError("missing element symbol", lineno)
        code = _int_field(line, 36, 39, lineno, "charge")
        if code not in _CHARGE_CODES:
            raise AtomBlockError(f"bad charge code {code}", lineno)
        elements.append(symbol)
        charges.append(_CHARGE_CODES[code])
        positions.append(xyz)

    bonds: list[Bond] = []
    seen: set[tuple[int, int]] = set()
    aromatic_atoms: set[int] = set()
    for k in range(n_bonds):
        lineno = bond_start + k + 1
        line = lines[bond_start + k]
        a = _int_field(line, 0, 3, lineno, "first atom", BondIndexOutOfRange)
        b = _int_field(line, 3, 6, lineno, "second atom", BondIndexOutOfRange)
        btype = _int_field(line, 6, 9, lineno, "bond type", UnknownBondOrder)
        for idx in (a, b):
            if not 1 <= idx <= n_atoms:
                raise BondIndexOutOfRange(
                    f"bond references atom {idx} but the molecule has {n_atoms} atoms", lineno
                )
        if a == b:
            raise BondIndexOutOfRange(f"bond from atom {a} to itself", lineno)
        try:
            order = BondOrder(btype)
        except ValueError:
            raise UnknownBondOrder(f"unsupported bond type {btype}", lineno) from None
        key = (min(a, b), max(a, b))
        if key in seen:
            raise BondIndexOutOfRange(f"duplicate bond {a}-{b}", lineno)
        seen.add(key)
        if order is BondOrder.AROMATIC:
            aromatic_atoms.update((a - 1, b - 1))
        bonds.append(Bond(a - 1, b - 1, order))

    saw_chg = False
    ended = False
    for k in range(props_start, len(lines)):
        line = lines[k]
        lineno = k + 1
        if line.startswith("M  END"):
            ended = True
            break
        if line.startswith("M  CHG"):
            if not saw_chg:
                # Any CHG line supersedes all atom-block charges.
                charges = [0] * n_atoms
                saw_chg = True
            fields = line[6:].split()
            try:
                count = int(fields[0])
                pairs = [int(f) for f in fields[1 : 1 + 2 * count]]
            except (ValueError, IndexError):
                raise AtomBlockError(f"malformed charge property {line!r}", lineno) from None
            if len(pairs) != 2 * count:
                raise AtomBlockError(f"malformed charge property {line!r}", lineno)
            for idx, chg in zip(pairs[::2], pairs[1::2]):
                if not 1 <= idx <= n_atoms:
                    raise BondIndexOutOfRange(f"charge property references atom {idx}", lineno)
                charges[idx - 1] = chg
    if not ended:
        raise MalformedCounts("missing 'M  END' terminator", len(lines))

    atoms = []
    for i, (symbol, chg, pos) in enumerate(zip(elements, charges, positions)):
        try:
            atoms.append(Atom(i, symbol, chg, i in aromatic_atoms, pos))
        except InvalidGraph as exc:
            raise AtomBlockError(str(exc), atom_start + i + 1) from None
    try:
        return MoleculeGraph(tuple(atoms), tuple(bonds), name)
    except ValenceViolation as exc:
        line = _atom_line_from_message(str(exc), atom_start)
        raise ValenceViolation(str(exc), line) from None
    except MoleculeError as exc:
        raise AtomBlockError(str(exc)) from None


def _atom_line_from_message(message: str, atom_start: int) -> int | None:
    # ValenceViolation messages start with "atom <index> (...)".
    parts = message.split()
    if len(parts) > 1 and parts[0] == "atom" and parts[1].isdigit():
        return atom_start + int(parts[1]) + 1
    return None


def write_sdf(mol: MoleculeGraph) -> str:
    """Serialize to a V2000 molfile (no ``$$$$`` terminator).

    Graphs without positions are written with all-zero coordinates.
    """
    if len(mol.atoms) > MAX_V2000_ATOMS or len(mol.bonds) > MAX_V2000_ATOMS:
        raise UnsupportedFeature(
            f"V2000 holds at most {MAX_V2000_ATOMS} atoms and bonds "
            f"(got {len(mol.atoms)} atoms, {len(mol.bonds)} bonds)"
        )
    if mol.name and ("\n" in mol.name or "\r" in mol.name):
        raise UnsupportedFeature("molecule name must be a single line")
    dim = "3D" if mol.has_positions else "2D"
    out = [
        mol.name or "",
        f"  spectrakit    {dim}",
        "",
        f"{len(mol.atoms):3d}{len(mol.bonds):3d}  0  0  0  0  0  0  0  0999 V2000",
    ]
    for atom in mol.atoms:
        x, y, z = atom.position if atom.position is not None else (0.0, 0.0, 0.0)
        if max(abs(x), abs(y), abs(z)) >= 10000:
            raise UnsupportedFeature(f"atom {atom.index}: coordinate too large for a 10.4 field")
        code = _CHARGE_TO_CODE.get(atom.formal_charge, 0)
        out.append(
            f"{x:10.4f}{y:10.4f}{z:10.4f} {atom.element:<3s} 0{code:3d}  0  0  0  0  0  0  0  0  0  0"
        )
    for bond in mol.bonds:
        out.append(f"{bond.a + 1:3d}{bond.b + 1:3d}{int(bond.order):3d}  0  0  0  0")
    charged = [(a.index + 1, a.formal_charge) for a in mol.atoms if a.formal_charge]
    for start in range(0, len(charged), 8):
        chunk = charged[start : start + 8]
        out.append(f"M  CHG{len(chunk):3d}" + "".join(f" {i:3d} {c:3d}" for i, c in chunk))
    out.append("M  END")
    return "\n".join(out) + "\n"
