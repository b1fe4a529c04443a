"""Molecule graph model, SDF V2000 and SMILES I/O, canonical ranking, graph distances."""

from spectrakit.molgraph.canon import canonical_smiles
from spectrakit.molgraph.graph import (
    ELEMENTS,
    UNREACHABLE,
    Atom,
    Bond,
    BondOrder,
    MoleculeGraph,
    topological_distances,
)
from spectrakit.molgraph.sdf import parse_sdf, split_sdf, write_sdf
from spectrakit.molgraph.smiles import parse_smiles

__all__ = [
    "ELEMENTS",
    "UNREACHABLE",
    "Atom",
    "Bond",
    "BondOrder",
    "MoleculeGraph",
    "canonical_smiles",
    "parse_sdf",
    "parse_smiles",
    "split_sdf",
    "topological_distances",
    "write_sdf",
]
