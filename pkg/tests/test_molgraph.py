from __future__ import annotations

import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fixtures import CANON_FIXTURES, carbon_pair
from strategies import graphs, permuted, random_graph

from spectrakit.errors import (
    AtomBlockError,
    BondIndexOutOfRange,
    EmptyInput,
    InvalidGraph,
    MalformedCounts,
    UnbalancedParenthesis,
    UnclosedRingBond,
    UnknownAtomSymbol,
    UnknownBondOrder,
    UnsupportedVersion,
    ValenceViolation,
)
from spectrakit.molgraph import (
    UNREACHABLE,
    Atom,
    Bond,
    BondOrder,
    MoleculeGraph,
    canonical_smiles,
    parse_sdf,
    parse_smiles,
    split_sdf,
    topological_distances,
    write_sdf,
)

METHANE_SDF = """methane
  test

  1  0  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
M  END
"""

ETHANE_SDF = """ethane
  test

  2  1  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    1.5400    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0  0  0  0
M  END
"""


def heavy(mol: MoleculeGraph) -> list[str]:
    return [a.element for a in mol.atoms if a.element != "H"]


# --- graph model ------------------------------------------------------------------------


def test_bonds_are_normalized_and_sorted():
    atoms = tuple(Atom(i, "C") for i in range(3))
    a = MoleculeGraph(atoms, (Bond(2, 1), Bond(1, 0)))
    b = MoleculeGraph(atoms, (Bond(0, 1), Bond(1, 2)))
    assert a == b
    assert a.bonds[0] == Bond(0, 1)


def test_invalid_graphs_rejected():
    with pytest.raises(InvalidGraph):
        MoleculeGraph(())
    with pytest.raises(InvalidGraph):
        MoleculeGraph((Atom(0, "C"), Atom(1, "C")), (Bond(0, 1), Bond(1, 0)))
    with pytest.raises(InvalidGraph):
        MoleculeGraph((Atom(0, "C", position=(0, 0, 0)), Atom(1, "C")))
    with pytest.raises(InvalidGraph):
        Bond(1, 1)
    with pytest.raises(InvalidGraph):
        Atom(0, "Xx")
    with pytest.raises(InvalidGraph):
        Atom(0, "C", formal_charge=5)


def test_valence_limits():
    with pytest.raises(ValenceViolation):
        parse_smiles("C(C)(C)(C)(C)C")
    with pytest.raises(ValenceViolation):
        MoleculeGraph((Atom(0, "O"), Atom(1, "C"), Atom(2, "C"), Atom(3, "C")),
                      (Bond(0, 1), Bond(0, 2), Bond(0, 3)))
    # Quaternary ammonium is allowed at +1.
    assert len(parse_smiles("C[N+](C)(C)C").atoms) == 17


@given(graphs, st.randoms(use_true_random=False))
@settings(max_examples=50, deadline=None)
def test_valence_check_ignores_bond_order(mol, rnd):
    bonds = list(mol.bonds)
    rnd.shuffle(bonds)
    assert MoleculeGraph(mol.atoms, tuple(bonds), mol.name) == mol


# --- SDF --------------------------------------------------------------------------------


def test_parse_minimal_molfile():
    mol = parse_sdf(METHANE_SDF)
    assert len(mol.atoms) == 1 and mol.bonds == ()


def test_parse_ethane_positions():
    mol = parse_sdf(ETHANE_SDF)
    assert (len(mol.atoms), len(mol.bonds)) == (2, 1)
    assert mol.atoms[1].position == (1.54, 0.0, 0.0)
    assert parse_sdf(write_sdf(mol)) == mol


def test_bond_out_of_range_names_line():
    lines = [
        "x", "", "",
        "  3  1  0  0  0  0  0  0  0  0999 V2000",
        *["    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0"] * 3,
        "  1  5  1  0  0  0  0",
        "M  END",
    ]
    with pytest.raises(BondIndexOutOfRange) as err:
        parse_sdf("\n".join(lines))
    assert err.value.line == 8


@pytest.mark.parametrize(
    "mutate, error",
    [
        (lambda t: t.replace("  2  1  0", " xx  1  0"), MalformedCounts),
        (lambda t: t.replace("M  END\n", ""), MalformedCounts),
        (lambda t: t.replace("1.5400    0.0000", "1.54x0    0.0000"), AtomBlockError),
        (lambda t: t.replace("  1  2  1  0", "  1  2  7  0"), UnknownBondOrder),
        (lambda t: t.replace("V2000", "V3000"), UnsupportedVersion),
        (lambda t: "\n".join(t.splitlines()[:3]), MalformedCounts),
    ],
)
def test_sdf_errors(mutate, error):
    with pytest.raises(error):
        parse_sdf(mutate(ETHANE_SDF))


def test_valence_violation_reports_atom_line():
    lines = ["x", "", "", "  6  5  0  0  0  0  0  0  0  0999 V2000"]
    lines += ["    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0"] * 6
    lines += [f"  1{k:3d}  1  0  0  0  0" for k in range(2, 7)] + ["M  END"]
    with pytest.raises(ValenceViolation) as err:
        parse_sdf("\n".join(lines))
    assert err.value.line == 5


def test_aromatic_flag_from_bond_type_4():
    mol = parse_smiles("c1ccccc1")
    back = parse_sdf(write_sdf(mol))
    assert [a.aromatic for a in back.atoms] == [a.aromatic for a in mol.atoms]
    assert sum(a.aromatic for a in back.atoms) == 6


def test_charges_round_trip_through_chg_lines():
    mol = parse_smiles("c1ccc(cc1)[N+](=O)[O-]")
    text = write_sdf(mol)
    assert "M  CHG  2" in text
    assert parse_sdf(text).without_positions() == mol


def test_write_without_positions_emits_zeros():
    text = write_sdf(parse_smiles("CC"))
    atom_lines = text.splitlines()[4:12]
    assert all(line.startswith("    0.0000    0.0000    0.0000") for line in atom_lines)


def test_999_atom_counts_line():
    atoms = tuple(Atom(i, "C", position=(float(i), 0.0, 0.0)) for i in range(999))
    bonds = tuple(Bond(i, i + 1) for i in range(998))
    text = write_sdf(MoleculeGraph(atoms, bonds))
    counts = text.splitlines()[3]
    assert counts[:6] == "999998" and len(counts) == 39 and counts.endswith("V2000")
    assert len(parse_sdf(text).atoms) == 999


@given(graphs)
@settings(max_examples=100, deadline=None)
def test_sdf_round_trip(mol):
    assert parse_sdf(write_sdf(mol)) == mol


def test_split_sdf_accepts_lines_and_text():
    doc = METHANE_SDF + "$$$$\n" + ETHANE_SDF + "> <prop>\n1\n\n$$$$\n"
    blocks = list(split_sdf(doc))
    assert len(blocks) == 2
    assert list(split_sdf(doc.splitlines(keepends=True))) == blocks
    assert parse_sdf(blocks[1]).name == "ethane"


# --- SMILES -----------------------------------------------------------------------------


def test_methane_fill():
    mol = parse_smiles("C")
    assert (len(mol.atoms), len(mol.bonds)) == (5, 4)


def test_cyclopropane_ring():
    mol = parse_smiles("C1CC1")
    cc = [b for b in mol.bonds if mol.atoms[b.a].element == mol.atoms[b.b].element == "C"]
    assert len(cc) == 3
    assert mol.ring_count() == 1


@pytest.mark.parametrize(
    "text, error",
    [("C1CC", UnclosedRingBond), ("C(C", UnbalancedParenthesis), ("CC)", UnbalancedParenthesis),
     ("CXc", UnknownAtomSymbol), ("", EmptyInput), ("   ", EmptyInput), ("[Zz]", UnknownAtomSymbol)],
)
def test_smiles_errors(text, error):
    with pytest.raises(error):
        parse_smiles(text)


def test_unclosed_ring_reports_digit():
    with pytest.raises(UnclosedRingBond) as err:
        parse_smiles("C1CC")
    assert "1" in str(err.value)


def test_smiles_features():
    assert parse_smiles("C%10CC%10").ring_count() == 1
    assert parse_smiles("[NH4+]").atoms[0].formal_charge == 1
    assert len(parse_smiles("[NH4+]").atoms) == 5
    assert parse_smiles("F/C=C/F") == parse_smiles("FC=CF")
    assert parse_smiles("N[C@@H](C)C(=O)O") == parse_smiles("NC(C)C(=O)O")
    assert any(b.order is BondOrder.TRIPLE for b in parse_smiles("C#N").bonds)
    assert parse_smiles("CC.O").n_components() == 2
    assert heavy(parse_smiles("ClCBr")) == ["Cl", "C", "Br"]


# --- canonical SMILES -------------------------------------------------------------------


def test_cco_occ_same_canonical():
    a, b = parse_smiles("CCO"), parse_smiles("OCC")
    assert canonical_smiles(a) == canonical_smiles(b)
    assert oracles.same_molecule(a, b)


def test_single_atom_canonical():
    s = canonical_smiles(parse_smiles("C"))
    assert heavy(parse_smiles(s)) == ["C"]


@pytest.mark.parametrize("smiles", CANON_FIXTURES)
def test_canonical_reparses_isomorphic(smiles):
    mol = parse_smiles(smiles)
    assert oracles.same_molecule(parse_smiles(canonical_smiles(mol)), mol)


def test_permutation_sweep_ten_atom_fixture():
    mol = parse_smiles("OCC(O)CO")  # 14 atoms with hydrogens, 6 heavy
    rng = random.Random(0)
    assert len({canonical_smiles(permuted(mol, rng)) for _ in range(200)}) == 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_canonical_invariant_on_random_graphs(seed):
    rng = random.Random(seed)
    mol = random_graph(rng, n_max=10, positions=False, hydrogens=False)
    assert canonical_smiles(permuted(mol, rng)) == canonical_smiles(mol)


def test_distinct_molecules_distinct_canonical():
    outputs = {canonical_smiles(parse_smiles(s)) for s in CANON_FIXTURES}
    assert len(outputs) == len(CANON_FIXTURES)


# --- distances --------------------------------------------------------------------------


def test_distances_small_cases():
    assert topological_distances(carbon_pair(1.5, bonded=True))[0, 1] == 1
    chain = MoleculeGraph(tuple(Atom(i, "C") for i in range(4)), tuple(Bond(i, i + 1) for i in range(3)))
    assert topological_distances(chain)[0, 3] == 3
    split = MoleculeGraph((Atom(0, "C"), Atom(1, "O")))
    d = topological_distances(split)
    assert d[0, 1] == UNREACHABLE and d[0, 0] == 0


@given(graphs)
@settings(max_examples=60, deadline=None)
def test_distances_match_networkx_and_triangle(mol):
    d = topological_distances(mol)
    g = oracles.to_networkx(mol, heavy_only=False)
    ref = dict(nx.all_pairs_shortest_path_length(g))
    n = len(mol.atoms)
    assert np.array_equal(d, d.T)
    for i in range(n):
        for j in range(n):
            assert d[i, j] == ref[i].get(j, UNREACHABLE)
    reach = d >= 0
    for k in range(n):
        ok = reach[:, [k]] & reach[[k], :]
        assert np.all(d[ok] <= (d[:, [k]] + d[[k], :])[ok])
