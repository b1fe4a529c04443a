"""3D structure diagnostics: parse validity, atom clashes, bond-length violations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

from spectrakit.errors import (
    EmptyCorpus,
    MissingCoordinates,
    SpectraKitError,
    UnknownBondReference,
    UnknownElementRadius,
)
from spectrakit.molgraph import BondOrder, MoleculeGraph, parse_sdf, topological_distances
from spectrakit.structure_text import parse_structure_text

_ORDER_NAMES = {
    BondOrder.SINGLE: "single",
    BondOrder.DOUBLE: "double",
    BondOrder.TRIPLE: "triple",
    BondOrder.AROMATIC: "aromatic",
}
_NAME_ORDERS = {v: k for k, v in _ORDER_NAMES.items()}


def _load(name: str) -> dict:
    return json.loads(resources.files("spectrakit.data").joinpath(name).read_text("utf-8"))


@lru_cache(maxsize=None)
def default_vdw_radii() -> Mapping[str, float]:
    return dict(_load("vdw_radii.json")["radii"])


@lru_cache(maxsize=None)
def default_bond_lengths() -> Mapping[tuple[str, str, BondOrder], float]:
    table = {}
    for key, length in _load("bond_lengths.json")["lengths"].items():
        a, b, order = key.split("-")
        table[bond_key(a, b, _NAME_ORDERS[order])] = float(length)
    return table


def table_versions() -> dict[str, str]:
    return {
        "vdw_radii": _load("vdw_radii.json")["version"],
        "bond_lengths": _load("bond_lengths.json")["version"],
    }


def bond_key(z_i: str, z_j: str, order: BondOrder) -> tuple[str, str, BondOrder]:
    a, b = sorted((z_i, z_j))
    return a, b, BondOrder(order)


def bond_key_name(key: tuple[str, str, BondOrder]) -> str:
    return f"{key[0]}-{key[1]}-{_ORDER_NAMES[key[2]]}"


def parse_bond_key_name(name: str) -> tuple[str, str, BondOrder]:
    a, b, order = name.split("-")
    return bond_key(a, b, _NAME_ORDERS[order])


@dataclass(frozen=True)
class GeometryParams:
    """Clash factor ``alpha``, bond tolerance ``beta`` and the reference tables.

    ``exclude_13`` / ``exclude_14`` drop atom pairs two / three bonds apart from
    clash counting and ``exclude_hydrogens`` skips any pair involving H; all
    three are off by default, so every non-bonded pair is checked.
    """

    alpha: float = 0.65
    beta: float = 0.20
    vdw_radii: Mapping[str, float] = field(default_factory=default_vdw_radii)
    bond_lengths: Mapping[tuple[str, str, BondOrder], float] = field(default_factory=default_bond_lengths)
    exclude_13: bool = False
    exclude_14: bool = False
    exclude_hydrogens: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if any(not r > 0 for r in self.vdw_radii.values()):
            raise ValueError("van der Waals radii must be positive")
        if any(not v > 0 for v in self.bond_lengths.values()):
            raise ValueError("reference bond lengths must be positive")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "exclude_13": self.exclude_13,
            "exclude_14": self.exclude_14,
            "exclude_hydrogens": self.exclude_hydrogens,
            "vdw_radii": dict(sorted(self.vdw_radii.items())),
            "bond_lengths": {bond_key_name(k): v for k, v in sorted(self.bond_lengths.items())},
        }


@dataclass(frozen=True)
class Clash:
    i: int
    j: int
    distance: float
    threshold: float


@dataclass(frozen=True)
class BondViolation:
    i: int
    j: int
    order: BondOrder
    distance: float
    low: float
    high: float


def _require_positions(mol: MoleculeGraph) -> np.ndarray:
    if not mol.has_positions:
        raise MissingCoordinates("geometry checks need 3D coordinates")
    return mol.positions()


def atom_clashes(mol: MoleculeGraph, params: GeometryParams | None = None) -> list[Clash]:
    """Non-bonded pairs closer than ``alpha * (r_i + r_j)``."""
    params = params or GeometryParams()
    xyz = _require_positions(mol)
    radii = []
    for atom in mol.atoms:
        r = params.vdw_radii.get(atom.element)
        if r is None:
            raise UnknownElementRadius(atom.element)
        radii.append(r)
    radii = np.asarray(radii)
    n = len(mol.atoms)
    dist = np.linalg.norm(xyz[:, None, :] - xyz[None, :, :], axis=-1)
    threshold = params.alpha * (radii[:, None] + radii[None, :])
    skip = np.eye(n, dtype=bool)
    for bond in mol.bonds:
        skip[bond.a, bond.b] = skip[bond.b, bond.a] = True
    if params.exclude_13 or params.exclude_14:
        topo = topological_distances(mol)
        if params.exclude_13:
            skip |= topo == 2
        if params.exclude_14:
            skip |= topo == 3
    if params.exclude_hydrogens:
        is_h = np.array([a.element == "H" for a in mol.atoms])
        skip |= is_h[:, None] | is_h[None, :]
    hits = np.argwhere(np.triu(~skip & (dist < threshold), k=1))
    return [Clash(int(i), int(j), float(dist[i, j]), float(threshold[i, j])) for i, j in hits]


def bond_violations(mol: MoleculeGraph, params: GeometryParams | None = None) -> list[BondViolation]:
    """Bonds whose length falls outside ``[(1 - beta) l, (1 + beta) l]``."""
    params = params or GeometryParams()
    xyz = _require_positions(mol)
    out = []
    for bond in mol.bonds:
        z_i, z_j = mol.atoms[bond.a].element, mol.atoms[bond.b].element
        ref = params.bond_lengths.get(bond_key(z_i, z_j, bond.order))
        if ref is None:
            raise UnknownBondReference(z_i, z_j, _ORDER_NAMES[bond.order])
        d = float(np.linalg.norm(xyz[bond.a] - xyz[bond.b]))
        low, high = (1 - params.beta) * ref, (1 + params.beta) * ref
        if d < low or d > high:
            out.append(BondViolation(bond.a, bond.b, bond.order, d, low, high))
    return out


@dataclass(frozen=True)
class GeometryReport:
    parsed_ok: bool
    clashes: tuple[Clash, ...] = ()
    violations: tuple[BondViolation, ...] = ()
    error: str | None = None

    @property
    def clash_count(self) -> int:
        return len(self.clashes)

    @property
    def violation_count(self) -> int:
        return len(self.violations)

    def to_row(self) -> dict:
        return {
            "parsed_ok": self.parsed_ok,
            "clash_count": self.clash_count,
            "violation_count": self.violation_count,
            "clashes": [[c.i, c.j, round(c.distance, 6), round(c.threshold, 6)] for c in self.clashes],
            "violations": [
                [v.i, v.j, int(v.order), round(v.distance, 6), round(v.low, 6), round(v.high, 6)]
                for v in self.violations
            ],
            "check_error": self.error,
        }


def parse_structure(text: str) -> MoleculeGraph:
    """Parse either a V2000 molfile or a structure text block, by sniffing the content."""
    if "<structure>" in text or text.lstrip().startswith("atoms:") or text.lstrip().startswith("name:"):
        return parse_structure_text(text)
    return parse_sdf(text)


def analyze(mol: MoleculeGraph, params: GeometryParams | None = None) -> GeometryReport:
    params = params or GeometryParams()
    return GeometryReport(True, tuple(atom_clashes(mol, params)), tuple(bond_violations(mol, params)))


def analyze_text(text: str, params: GeometryParams | None = None) -> GeometryReport:
    """Parse and analyze one candidate; a parse failure yields ``parsed_ok=False`` and zero counts.

    A structure that parses but cannot be checked (no radius or reference
    length for some element/bond) stays valid, reports zero counts and
    carries the reason in ``error``.
    """
    try:
        mol = parse_structure(text)
    except SpectraKitError as exc:
        return GeometryReport(False, error=f"{type(exc).__name__}: {exc}")
    try:
        return analyze(mol, params)
    except SpectraKitError as exc:
        return GeometryReport(True, error=f"{type(exc).__name__}: {exc}")


@dataclass(frozen=True)
class CorpusGeometry:
    """Aggregate over a corpus.

    ``mean_clash`` / ``mean_violation`` divide by all records (unparsable ones
    count as zero); the ``valid_*`` variants divide by parsable records only.
    """

    n_total: int
    n_valid: int
    sdf_valid: float
    mean_clash: float
    mean_violation: float
    valid_mean_clash: float | None
    valid_mean_violation: float | None

    def to_row(self) -> dict:
        return dict(self.__dict__)


class GeometryAccumulator:
    def __init__(self):
        self.n_total = 0
        self.n_valid = 0
        self.clashes = 0
        self.violations = 0

    def add(self, report: GeometryReport) -> None:
        self.n_total += 1
        self.n_valid += report.parsed_ok
        self.clashes += report.clash_count
        self.violations += report.violation_count

    def result(self) -> CorpusGeometry:
        if self.n_total == 0:
            raise EmptyCorpus("no structures to evaluate")
        v = self.n_valid
        return CorpusGeometry(
            self.n_total,
            v,
            v / self.n_total,
            self.clashes / self.n_total,
            self.violations / self.n_total,
            self.clashes / v if v else None,
            self.violations / v if v else None,
        )


def corpus_geometry(records: Iterable[str], params: GeometryParams | None = None) -> CorpusGeometry:
    """SDF validity fraction and mean clash / violation counts over candidate texts."""
    params = params or GeometryParams()
    acc = GeometryAccumulator()
    for text in records:
        acc.add(analyze_text(text, params))
    return acc.result()
