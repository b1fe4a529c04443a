from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import carbon_pair, ethane, rigid_motion, with_positions
from strategies import permuted

from spectrakit.errors import EmptyCorpus, MissingCoordinates, UnknownBondReference, UnknownElementRadius
from spectrakit.geometry import (
    GeometryParams,
    analyze,
    analyze_text,
    atom_clashes,
    bond_violations,
    corpus_geometry,
    parse_bond_key_name,
    table_versions,
)
from spectrakit.molgraph import Atom, Bond, BondOrder, MoleculeGraph, parse_sdf, parse_smiles, write_sdf
from spectrakit.structure_text import write_structure_text


def counts(mol: MoleculeGraph, params: GeometryParams | None = None) -> tuple[int, int]:
    report = analyze(mol, params)
    return report.clash_count, report.violation_count


def demo_structures(demo_dir) -> list[MoleculeGraph]:
    out = []
    for path in sorted((demo_dir / "structures").glob("*.sdf")):
        try:
            out.append(parse_sdf(path.read_text()))
        except Exception:
            continue
    return out


# --- clashes ----------------------------------------------------------------------------


def test_clash_threshold_examples():
    assert len(atom_clashes(carbon_pair(2.00))) == 1
    assert len(atom_clashes(carbon_pair(2.30))) == 0
    clash = atom_clashes(carbon_pair(2.00))[0]
    assert clash.threshold == pytest.approx(0.65 * 3.40)


@pytest.mark.parametrize("distance", [0.5, 1.0, 2.0])
def test_bonded_pairs_never_clash(distance):
    assert atom_clashes(carbon_pair(distance, bonded=True)) == []


def test_one_three_pairs_counted_by_default():
    # C-C-C with a 60 degree angle puts the end carbons 1.54 apart, below 2.21.
    atoms = (
        Atom(0, "C", position=(0.0, 0.0, 0.0)),
        Atom(1, "C", position=(1.54, 0.0, 0.0)),
        Atom(2, "C", position=(0.77, 1.3337, 0.0)),
    )
    mol = MoleculeGraph(atoms, (Bond(0, 1), Bond(1, 2)))
    assert len(atom_clashes(mol)) == 1
    assert atom_clashes(mol, GeometryParams(exclude_13=True)) == []


def test_hydrogen_exclusion():
    atoms = (Atom(0, "C", position=(0.0, 0.0, 0.0)), Atom(1, "H", position=(1.0, 0.0, 0.0)))
    mol = MoleculeGraph(atoms)
    assert len(atom_clashes(mol)) == 1
    assert atom_clashes(mol, GeometryParams(exclude_hydrogens=True)) == []


def test_clash_errors():
    with pytest.raises(MissingCoordinates):
        atom_clashes(parse_smiles("CC"))
    params = GeometryParams(vdw_radii={"H": 1.2})
    with pytest.raises(UnknownElementRadius):
        atom_clashes(carbon_pair(3.0), params)


# --- bond lengths -----------------------------------------------------------------------


def test_bond_band_examples():
    assert bond_violations(carbon_pair(1.54, bonded=True)) == []
    bad = bond_violations(carbon_pair(1.90, bonded=True))
    assert len(bad) == 1
    assert (bad[0].low, bad[0].high) == pytest.approx((1.232, 1.848))
    assert bond_violations(carbon_pair(1.30, bonded=True)) == []


def test_bond_order_selects_reference():
    assert bond_violations(carbon_pair(1.34, bonded=True, order=BondOrder.DOUBLE)) == []
    assert len(bond_violations(carbon_pair(1.90, bonded=True, order=BondOrder.TRIPLE))) == 1


def test_unknown_bond_reference():
    atoms = (Atom(0, "I", position=(0.0, 0.0, 0.0)), Atom(1, "I", position=(2.7, 0.0, 0.0)))
    with pytest.raises(UnknownBondReference):
        bond_violations(MoleculeGraph(atoms, (Bond(0, 1),)))


def test_params_validation_and_tables():
    for bad in (dict(alpha=0), dict(alpha=1), dict(beta=1.5), dict(vdw_radii={"C": -1.0})):
        with pytest.raises(ValueError):
            GeometryParams(**bad)
    assert set(table_versions()) == {"vdw_radii", "bond_lengths"}
    d = GeometryParams().to_dict()
    assert d["vdw_radii"]["C"] == 1.70
    assert d["bond_lengths"]["C-C-single"] == 1.54
    assert parse_bond_key_name("O-C-double") == ("C", "O", BondOrder.DOUBLE)


# --- invariants -------------------------------------------------------------------------


def test_zero_property_on_ideal_ethane():
    assert counts(ethane()) == (0, 0)


def test_demo_structures_are_clean(demo_dir):
    mols = demo_structures(demo_dir)
    assert len(mols) >= 18
    clean = [m for m in mols if counts(m) == (0, 0)]
    assert len(clean) == len(mols) - 1  # butane carries one stretched bond


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_rigid_motion_invariance(seed):
    np_rng = np.random.default_rng(seed)
    for mol in (ethane(), ethane(1.95), carbon_pair(2.0), carbon_pair(1.0, bonded=True)):
        assert counts(rigid_motion(mol, np_rng)) == counts(mol)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_permutation_invariance(seed):
    rng = random.Random(seed)
    for mol in (ethane(1.95), ethane(1.2)):
        assert counts(permuted(mol, rng)) == counts(mol)


@given(st.integers(0, 2**32 - 1), st.floats(1.0, 3.0))
@settings(max_examples=60, deadline=None)
def test_scaling_up_never_adds_clashes(seed, factor):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    atoms = tuple(Atom(i, "C") for i in range(n))
    mol = with_positions(MoleculeGraph(atoms), rng.uniform(-2, 2, size=(n, 3)))
    scaled = with_positions(mol, mol.positions() * factor)
    assert len(atom_clashes(scaled)) <= len(atom_clashes(mol))


def test_report_row_shape():
    row = analyze(carbon_pair(2.0)).to_row()
    assert (row["clash_count"], row["violation_count"], row["check_error"]) == (1, 0, None)
    assert len(row["clashes"]) == 1


# --- corpus -----------------------------------------------------------------------------


def test_corpus_validity_fraction():
    good = write_sdf(ethane())
    result = corpus_geometry([good, good, "garbage", write_structure_text(ethane())])
    assert (result.n_total, result.n_valid, result.sdf_valid) == (4, 3, 0.75)
    assert (result.mean_clash, result.mean_violation) == (0.0, 0.0)


def test_corpus_mean_clash():
    result = corpus_geometry([write_sdf(with_pair_clashes(2)), write_sdf(ethane())])
    assert result.mean_clash == 1.0


def test_unparsable_records_enter_denominator():
    result = corpus_geometry([write_sdf(with_pair_clashes(2)), "garbage"])
    assert result.mean_clash == 1.0 and result.valid_mean_clash == 2.0


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        corpus_geometry([])


def test_uncheckable_structure_stays_valid():
    # Written without coordinates, every atom sits at the origin.
    report = analyze_text(write_sdf(parse_smiles("CC")))
    assert report.parsed_ok
    assert report.clash_count > 0 and report.violation_count == 7
    iodine = MoleculeGraph(
        (Atom(0, "I", position=(0.0, 0.0, 0.0)), Atom(1, "I", position=(2.7, 0.0, 0.0))), (Bond(0, 1),)
    )
    report = analyze_text(write_sdf(iodine))
    assert report.parsed_ok and report.error.startswith("UnknownBondReference")


def with_pair_clashes(k: int) -> MoleculeGraph:
    """k isolated carbon pairs 2.0 apart, far from each other: exactly k clashes."""
    atoms = []
    for p in range(k):
        atoms.append(Atom(2 * p, "C", position=(10.0 * p, 0.0, 0.0)))
        atoms.append(Atom(2 * p + 1, "C", position=(10.0 * p + 2.0, 0.0, 0.0)))
    mol = MoleculeGraph(tuple(atoms))
    assert len(atom_clashes(mol)) == k
    return mol
