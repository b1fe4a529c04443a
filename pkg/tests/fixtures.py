"""Hand-built fixture molecules shared across test modules."""

from __future__ import annotations

import math

import numpy as np

from spectrakit.molgraph import Atom, Bond, BondOrder, MoleculeGraph

# Twenty molecules covering chains, rings, aromatics, charges and halogens.
CANON_FIXTURES = (
    "CCO",
    "CC(=O)O",
    "c1ccccc1",
    "Cc1ccccc1",
    "Oc1ccccc1C(=O)O",
    "c1ccncc1",
    "c1cc[nH]c1",
    "CC(C)(C)C",
    "C1CCCCC1",
    "C1CC2CCC1C2",
    "CC#N",
    "ClC(Cl)(Cl)Br",
    "C[N+](C)(C)C",
    "CC(=O)[O-]",
    "c1ccc(cc1)[N+](=O)[O-]",
    "OCC(O)CO",
    "C=CC=CC=C",
    "NCC(=O)O",
    "c1ccc2ccccc2c1",
    "FC(F)(F)c1ccc(Br)cc1",
)

# Prediction/reference pairs for fingerprint similarity (each side at most 12 heavy atoms).
FP_PAIRS = (
    ("CC", "CCC"),
    ("CCO", "CCN"),
    ("c1ccccc1", "Cc1ccccc1"),
    ("CC(=O)O", "CC(=O)OC"),
    ("c1ccoc1", "c1ccsc1"),
    ("c1ccncc1", "c1ccccc1"),
    ("CCCC", "CC(C)C"),
    ("OCC(O)CO", "OCCO"),
    ("CC=CC=O", "CC=CC(=O)O"),
    ("NCC(=O)O", "CC(N)C(=O)O"),
    ("C1CCCCC1", "C1CCCC1"),
    ("Oc1ccccc1", "Oc1ccccc1C(=O)O"),
    ("CCN(CC)CC", "CCNCC"),
    ("ClCCBr", "ClCCCl"),
    ("c1ccc(cc1)[N+](=O)[O-]", "Nc1ccccc1"),
    ("CC(C)(C)O", "CC(C)O"),
    ("C#CC", "C=CC"),
    ("c1cc[nH]c1", "c1ccoc1"),
    ("O=Cc1ccccc1", "OCc1ccccc1"),
    ("CC(=O)N", "CC(=O)NC"),
)

C_C = 1.54
C_H = 1.09
TETRAHEDRAL = math.acos(-1.0 / 3.0)


def ethane(cc: float = C_C) -> MoleculeGraph:
    """Staggered ethane with ideal tetrahedral angles and the given C-C distance."""
    atoms = [Atom(0, "C", position=(0.0, 0.0, 0.0)), Atom(1, "C", position=(0.0, 0.0, cc))]
    bonds = [Bond(0, 1)]
    polar = math.pi - TETRAHEDRAL
    k = 2
    for carbon, z0, sign, phase in ((0, 0.0, -1.0, 0.0), (1, cc, 1.0, math.pi / 3)):
        for m in range(3):
            phi = phase + 2 * math.pi * m / 3
            pos = (
                C_H * math.sin(polar) * math.cos(phi),
                C_H * math.sin(polar) * math.sin(phi),
                z0 + sign * C_H * math.cos(polar),
            )
            atoms.append(Atom(k, "H", position=pos))
            bonds.append(Bond(carbon, k))
            k += 1
    return MoleculeGraph(tuple(atoms), tuple(bonds), "ethane")


def carbon_pair(distance: float, bonded: bool = False, order: BondOrder = BondOrder.SINGLE) -> MoleculeGraph:
    """Two bare carbons on the x axis."""
    atoms = (Atom(0, "C", position=(0.0, 0.0, 0.0)), Atom(1, "C", position=(distance, 0.0, 0.0)))
    return MoleculeGraph(atoms, (Bond(0, 1, order),) if bonded else ())


def rigid_motion(mol: MoleculeGraph, rng: np.random.Generator) -> MoleculeGraph:
    """Apply a random proper rotation and translation to every position."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    shift = rng.uniform(-50, 50, size=3)
    x = mol.positions() @ q.T + shift
    atoms = tuple(
        Atom(a.index, a.element, a.formal_charge, a.aromatic, tuple(float(v) for v in x[a.index]))
        for a in mol.atoms
    )
    return MoleculeGraph(atoms, mol.bonds, mol.name)


def with_positions(mol: MoleculeGraph, x: np.ndarray) -> MoleculeGraph:
    atoms = tuple(
        Atom(a.index, a.element, a.formal_charge, a.aromatic, tuple(float(v) for v in x[a.index]))
        for a in mol.atoms
    )
    return MoleculeGraph(atoms, mol.bonds, mol.name)
