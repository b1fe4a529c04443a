"""Build the 20-record demo corpus under ``demo/``.

Spectra are synthetic (rule-of-thumb shifts and band positions), predictions
are seeded perturbations of the references, and 3D structures come from a
small distance-geometry embedder below. Conformer generation is not part of
the package, so the embedder lives here.

Usage: python3 tools/build_demo.py [OUTDIR]
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from spectrakit.geometry import GeometryParams, analyze, bond_key
from spectrakit.molgraph import Atom, BondOrder, MoleculeGraph, canonical_smiles, parse_smiles, write_sdf
from spectrakit.spectra import (
    CarbonSpectrum,
    MassSpectrum,
    ProtonPeak,
    ProtonSpectrum,
    WaveformSpectrum,
    serialize,
    spectrum_to_dict,
)

MOLECULES = [
    ("ethanol", "CCO", "ethanol"),
    ("acetic_acid", "CC(=O)O", "acetic acid"),
    ("benzene", "c1ccccc1", "benzene"),
    ("toluene", "Cc1ccccc1", "toluene"),
    ("phenol", "Oc1ccccc1", "phenol"),
    ("pyridine", "c1ccncc1", "pyridine"),
    ("furan", "c1ccoc1", "furan"),
    ("acetone", "CC(C)=O", "propan-2-one"),
    ("ethylamine", "CCN", "ethanamine"),
    ("butane", "CCCC", "butane"),
    ("isobutane", "CC(C)C", "2-methylpropane"),
    ("cyclohexane", "C1CCCCC1", "cyclohexane"),
    ("acetonitrile", "CC#N", "acetonitrile"),
    ("methyl_acetate", "CC(=O)OC", "methyl acetate"),
    ("isopropanol", "CC(C)O", "propan-2-ol"),
    ("benzaldehyde", "O=Cc1ccccc1", "benzaldehyde"),
    ("chloroethane", "CCCl", "chloroethane"),
    ("glycine", "NCC(=O)O", "2-aminoacetic acid"),
    ("acetamide", "CC(N)=O", "acetamide"),
    ("propene", "C=CC", "prop-1-ene"),
]

# Sequence predictions: some are reorderings of the truth, some are wrong.
SEQ_PREDICTIONS = {
    "ethanol": "OCC",
    "acetic_acid": "CC(=O)O",
    "toluene": "c1ccccc1C",
    "phenol": "Oc1ccccc1",
    "pyridine": "c1ccccn1",
    "furan": "c1ccsc1",
    "acetone": "CC(=O)C",
    "ethylamine": "CCO",
    "butane": "CCCC",
    "isobutane": "CCCC",
    "cyclohexane": "C1CCCC1",
    "acetonitrile": "N#CC",
    "methyl_acetate": "COC(C)=O",
    "isopropanol": "CC(O)C",
    "benzaldehyde": "OCc1ccccc1",
    "chloroethane": "ClCC",
    "glycine": "NCC(=O)O",
    "acetamide": "CC(=O)N",
    "propene": "CC=C",
}

MASS = {"H": 1, "C": 12, "N": 14, "O": 16, "Cl": 35}


# --- 3D embedding ------------------------------------------------------------------


def _center_angle(mol: MoleculeGraph, j: int) -> float:
    orders = [o for _, o in mol.neighbors(j)]
    if BondOrder.TRIPLE in orders or orders.count(BondOrder.DOUBLE) >= 2:
        return math.pi
    if BondOrder.DOUBLE in orders or BondOrder.AROMATIC in orders:
        return math.radians(120.0)
    return math.radians(109.47)


def embed(mol: MoleculeGraph, seed: int, params: GeometryParams) -> MoleculeGraph:
    """Coordinates from a stress minimization over 1-2 and 1-3 targets plus soft repulsion."""
    n = len(mol.atoms)
    targets: dict[tuple[int, int], float] = {}
    length = {}
    for b in mol.bonds:
        ref = params.bond_lengths[bond_key(mol.atoms[b.a].element, mol.atoms[b.b].element, b.order)]
        targets[(b.a, b.b)] = length[(b.a, b.b)] = length[(b.b, b.a)] = ref
    for j in range(n):
        nbrs = [i for i, _ in mol.neighbors(j)]
        theta = _center_angle(mol, j)
        for x in range(len(nbrs)):
            for y in range(x + 1, len(nbrs)):
                i, k = sorted((nbrs[x], nbrs[y]))
                a, c = length[(i, j)], length[(j, k)]
                targets.setdefault((i, k), math.sqrt(a * a + c * c - 2 * a * c * math.cos(theta)))
    pairs = np.array(list(targets), dtype=int).reshape(-1, 2)
    goal = np.array([targets[tuple(p)] for p in pairs])
    radii = np.array([params.vdw_radii[a.element] for a in mol.atoms])
    iu = np.triu_indices(n, 1)
    constrained = np.zeros((n, n), dtype=bool)
    constrained[pairs[:, 0], pairs[:, 1]] = True
    free = ~constrained[iu]
    floor = 0.85 * (radii[:, None] + radii[None, :])[iu][free]

    def stress(flat):
        x = flat.reshape(n, 3)
        d = np.linalg.norm(x[pairs[:, 0]] - x[pairs[:, 1]], axis=1)
        e = np.sum((d - goal) ** 2)
        dn = np.linalg.norm(x[iu[0]] - x[iu[1]], axis=1)[free]
        e += np.sum(np.clip(floor - dn, 0, None) ** 2)
        return e

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(4):
        res = minimize(stress, rng.normal(scale=1.5, size=3 * n), method="L-BFGS-B")
        if best is None or res.fun < best.fun:
            best = res
    x = best.x.reshape(n, 3)
    x -= x.mean(axis=0)
    atoms = tuple(
        Atom(a.index, a.element, a.formal_charge, a.aromatic, tuple(float(v) for v in np.round(x[a.index], 4)))
        for a in mol.atoms
    )
    return MoleculeGraph(atoms, mol.bonds, mol.name)


# --- synthetic spectra ---------------------------------------------------------------


def _neighbors(mol, i):
    return [(k, o, mol.atoms[k].element) for k, o in mol.neighbors(i)]


def carbon_shift(mol: MoleculeGraph, i: int) -> float:
    nb = _neighbors(mol, i)
    atom = mol.atoms[i]
    if any(o is BondOrder.TRIPLE for _, o, _ in nb):
        return 117.0 if any(e == "N" for _, _, e in nb) else 80.0
    if any(o is BondOrder.DOUBLE and e == "O" for _, o, e in nb):
        hetero = [e for _, o, e in nb if o is BondOrder.SINGLE and e in ("O", "N")]
        if hetero:
            return 172.0
        return 200.0 if mol.hydrogen_count(i) == 0 else 192.0
    if atom.aromatic:
        return 150.0 if any(e in ("N", "O") for _, _, e in nb) else 128.5
    if any(o is BondOrder.DOUBLE for _, o, _ in nb):
        return 116.0 if mol.hydrogen_count(i) == 2 else 134.0
    shift = 14.0 + 9.0 * sum(1 for _, _, e in nb if e == "C")
    shift += sum({"O": 46.0, "N": 28.0, "Cl": 30.0}.get(e, 0.0) for _, _, e in nb)
    return shift


def proton_peaks(mol: MoleculeGraph) -> list[ProtonPeak]:
    peaks = []
    for a in mol.atoms:
        if a.element == "H":
            continue
        n_h = mol.hydrogen_count(a.index)
        if not n_h:
            continue
        if a.element == "O":
            acid = any(
                mol.atoms[k].element == "C" and any(e == "O" and o is BondOrder.DOUBLE for _, o, e in _neighbors(mol, k))
                for k, _ in mol.neighbors(a.index)
            )
            peaks.append(ProtonPeak(11.5 if acid else 4.8, "br s", (), n_h))
        elif a.element == "N":
            peaks.append(ProtonPeak(1.6, "br s", (), n_h))
        else:
            base = carbon_shift(mol, a.index)
            if a.aromatic:
                delta = 7.3
            elif base > 185:
                delta = 9.9
            elif base > 110:
                delta = 5.5
            else:
                delta = 0.9 + 0.055 * (base - 14.0)
            shape = "s" if n_h == 3 and base < 25 else ("m" if a.aromatic else "t")
            peaks.append(ProtonPeak(round(delta, 2), shape, (7.1,) if shape == "t" else (), n_h))
    merged: dict[float, ProtonPeak] = {}
    for p in peaks:
        if p.centroid in merged:
            q = merged[p.centroid]
            merged[p.centroid] = ProtonPeak(p.centroid, "m", (), q.n_h + p.n_h)
        else:
            merged[p.centroid] = p
    return list(merged.values())


def ir_points(mol: MoleculeGraph) -> list[tuple[float, float]]:
    bands: dict[float, float] = {}

    def add(pos, inten):
        bands[pos] = max(bands.get(pos, 0.0), inten)

    for b in mol.bonds:
        ea, eb = sorted((mol.atoms[b.a].element, mol.atoms[b.b].element))
        if "H" in (ea, eb):
            heavy = ea if eb == "H" else eb
            add({"O": 3320.0, "N": 3360.0}.get(heavy, 2960.0), 0.6 if heavy != "C" else 0.75)
        elif b.order is BondOrder.DOUBLE and "O" in (ea, eb):
            add(1715.0, 1.0)
        elif b.order is BondOrder.TRIPLE:
            add(2250.0, 0.55)
        elif b.order is BondOrder.AROMATIC:
            add(1600.0, 0.45)
            add(750.0, 0.7)
        elif b.order is BondOrder.DOUBLE:
            add(1645.0, 0.4)
        elif "O" in (ea, eb):
            add(1090.0, 0.8)
        elif "N" in (ea, eb):
            add(1180.0, 0.35)
        elif "Cl" in (ea, eb):
            add(680.0, 0.65)
        else:
            add(1460.0, 0.3)
    top = max(bands.values())
    return [(p, round(i / top, 3)) for p, i in sorted(bands.items())]


def ms_peaks(mol: MoleculeGraph) -> list[tuple[float, float]]:
    m = sum(MASS[a.element] for a in mol.atoms)
    peaks = {float(m): 60.0, float(m - 15): 100.0, 29.0: 35.0, float(m - 1): 12.0}
    if m - 17 > 0:
        peaks[float(m - 17)] = 20.0
    return sorted((mz, a) for mz, a in peaks.items() if mz > 0)


# --- corpus --------------------------------------------------------------------------


def _jsonl(path: Path, rows) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def build(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    params = GeometryParams()
    rng = np.random.default_rng(20240601)
    molecules, c13_t, c13_p, h1_t, h1_p, ir_t, ir_p, ms_t, ms_p = ([] for _ in range(9))
    seq_t, seq_p, fp_t, fp_p, dicts, texts = ([] for _ in range(6))
    struct_dir = out / "structures"
    struct_dir.mkdir(exist_ok=True)
    for old in struct_dir.iterdir():
        old.unlink()

    for k, (rid, smiles, iupac) in enumerate(MOLECULES):
        mol = parse_smiles(smiles)
        mol = MoleculeGraph(mol.atoms, mol.bonds, rid)
        mol3d = embed(mol, seed=k, params=params)
        report = analyze(mol3d, params)
        if report.clash_count or report.violation_count:
            raise SystemExit(f"embedding of {rid} is not clean: {report.to_row()}")

        carbon = CarbonSpectrum(
            tuple(round(carbon_shift(mol, a.index), 1) for a in mol.atoms if a.element == "C"), 100.0, "CDCl3"
        )
        proton = ProtonSpectrum(tuple(proton_peaks(mol)), 400.0, "CDCl3")
        ir = WaveformSpectrum("IR", (500.0, 4000.0), tuple(ir_points(mol)))
        ms = MassSpectrum("positive", tuple(ms_peaks(mol)), 20.0)
        spectra = [carbon, proton, ir, ms]
        molecules.append({
            "id": rid, "smiles": smiles, "iupac": iupac, "structure": write_sdf(mol3d),
            "spectra": [serialize(s) for s in spectra],
        })

        shifts = [round(s + rng.normal(0, 0.35), 1) for s in carbon.shifts]
        if k % 4 == 1 and len(shifts) > 1:
            shifts.pop()
        if k % 5 == 2:
            shifts.append(round(float(rng.uniform(20, 60)), 1))
        c13_t.append({"id": rid, "spectrum": serialize(carbon)})
        c13_p.append({"id": rid, "spectrum": serialize(CarbonSpectrum(tuple(shifts), 100.0, "CDCl3"))})

        hp = [ProtonPeak(round(min(19.9, max(-1.9, p.centroid + rng.normal(0, 0.05))), 2), p.shape, p.j_values, p.n_h)
              for p in proton.peaks]
        h1_t.append({"id": rid, "spectrum": serialize(proton)})
        h1_p.append({"id": rid, "spectrum": serialize(ProtonSpectrum(tuple(hp), 400.0, "CDCl3"))})

        pts = {}
        for p, i in ir.points:
            q = float(round(min(3999.0, max(500.0, p + rng.normal(0, 1.0)))))
            pts[q] = max(pts.get(q, 0.0), i)
        ir_t.append({"id": rid, "spectrum": serialize(ir)})
        ir_p.append({"id": rid, "spectrum": serialize(WaveformSpectrum("IR", (500.0, 4000.0), tuple(sorted(pts.items()))))})

        mp = [(mz, a) for mz, a in ms.peaks if a >= 20.0 or k % 3]
        ms_t.append({"id": rid, "spectrum": serialize(ms)})
        ms_p.append({"id": rid, "spectrum": serialize(MassSpectrum("positive", tuple(mp), 20.0))})

        seq_t.append({"id": rid, "smiles": canonical_smiles(mol)})
        seq_p.append({"id": rid, "smiles": SEQ_PREDICTIONS.get(rid, smiles)})
        fp_t.append({"id": rid, "smiles": smiles})
        fp_p.append({"id": rid, "smiles": SEQ_PREDICTIONS.get(rid, smiles)})

        dicts.append({"id": rid, "spectrum": spectrum_to_dict(carbon)})
        texts.append({"id": rid, "text": serialize(ms)})

        sdf = write_sdf(mol3d)
        if rid == "butane":
            # One bond stretched well past tolerance.
            sdf = write_sdf(_stretch_first_bond(mol3d, 0.6))
        if rid == "propene":
            sdf = "propene\n  broken\n\n  x  y  0  0  0  0  0  0  0  0999 V2000\nM  END\n"
        (struct_dir / f"{k + 1:02d}_{rid}.sdf").write_text(sdf, encoding="utf-8")

    _jsonl(out / "molecules.jsonl", molecules)
    for name, rows in [
        ("nmr13c_truth", c13_t), ("nmr13c_pred", c13_p), ("nmr1h_truth", h1_t), ("nmr1h_pred", h1_p),
        ("ir_truth", ir_t), ("ir_pred", ir_p), ("ms_truth", ms_t), ("ms_pred", ms_p),
        ("seq_truth", seq_t), ("seq_pred", seq_p), ("fp_truth", fp_t), ("fp_pred", fp_p),
        ("spectra_dicts", dicts), ("spectra_text", texts),
    ]:
        _jsonl(out / f"{name}.jsonl", rows)


def _stretch_first_bond(mol: MoleculeGraph, extra: float) -> MoleculeGraph:
    """Move atom ``b`` of the first C-C bond (and everything beyond it) outward by ``extra`` Å."""
    bond = next(b for b in mol.bonds if mol.atoms[b.a].element == mol.atoms[b.b].element == "C")
    x = mol.positions()
    direction = (x[bond.b] - x[bond.a]) / np.linalg.norm(x[bond.b] - x[bond.a])
    side = {bond.b}
    stack = [bond.b]
    while stack:
        i = stack.pop()
        for j, _ in mol.neighbors(i):
            if j != bond.a and j not in side:
                side.add(j)
                stack.append(j)
    x[list(side)] += extra * direction
    atoms = tuple(
        Atom(a.index, a.element, a.formal_charge, a.aromatic, tuple(float(v) for v in np.round(x[a.index], 4)))
        for a in mol.atoms
    )
    return MoleculeGraph(atoms, mol.bonds, mol.name)


if __name__ == "__main__":
    build(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "demo")
