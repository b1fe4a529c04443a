"""Hashed path, topological-torsion and atom-pair bit fingerprints with Tanimoto similarity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from spectrakit.errors import KindMismatch, LengthMismatch
from spectrakit.molgraph import UNREACHABLE, MoleculeGraph, topological_distances

KINDS = ("path", "torsion", "atom_pair")
# Report column for each fingerprint kind.
SIMILARITY_COLUMNS = {"path": "rdk_fp_sim", "torsion": "torsion_sim", "atom_pair": "atom_pair_sim"}

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class FingerprintConfig:
    k_bits: int = 2048
    l_max: int = 7
    hash_seed: int = 0
    include_hydrogens: bool = False
    include_charge: bool = False

    def __post_init__(self):
        if self.k_bits < 1 or self.k_bits & (self.k_bits - 1):
            raise ValueError(f"k_bits must be a power of two, got {self.k_bits}")
        if self.l_max < 1:
            raise ValueError(f"l_max must be >= 1, got {self.l_max}")
        if not 0 <= self.hash_seed <= _MASK64:
            raise ValueError("hash_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class AtomTypeClass:
    element: str
    aromatic: bool
    charge: int | None = None

    def label(self) -> str:
        text = self.element + (":ar" if self.aromatic else "")
        if self.charge is not None:
            text += f":{self.charge:+d}"
        return text


def atom_class(mol: MoleculeGraph, i: int, include_charge: bool = False) -> AtomTypeClass:
    atom = mol.atoms[i]
    return AtomTypeClass(atom.element, atom.aromatic, atom.formal_charge if include_charge else None)


def fnv1a64(data: bytes, seed: int = 0) -> int:
    """64-bit FNV-1a over the seed's 8 little-endian bytes followed by ``data``."""
    h = FNV_OFFSET
    for byte in seed.to_bytes(8, "little") + data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def encode_feature(kind: str, feature: tuple) -> bytes:
    """Canonical byte encoding: the kind followed by the fields, unit-separator joined."""
    return "\x1f".join((kind, *(str(x) for x in feature))).encode("utf-8")


def fold(h: int, k_bits: int) -> int:
    """Reduce a 64-bit hash to ``[0, k_bits)`` by xor-folding every ``log2(k_bits)``-bit chunk.

    A plain ``h % k_bits`` would only see the low bits of the FNV state, which
    never mix with the high bits, so inputs sharing a suffix collide in bulk.
    """
    width = k_bits.bit_length() - 1
    if width == 0:
        return 0
    out = 0
    while h:
        out ^= h & (k_bits - 1)
        h >>= width
    return out % k_bits


def feature_bit(kind: str, feature: tuple, cfg: FingerprintConfig) -> int:
    return fold(fnv1a64(encode_feature(kind, feature), cfg.hash_seed), cfg.k_bits)


@dataclass(frozen=True)
class BitFingerprint:
    """Fixed-length bit vector stored as a Python int (bit ``k`` set iff ``bits >> k & 1``)."""

    bits: int
    k_bits: int
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown fingerprint kind {self.kind!r}")
        if self.bits < 0 or self.bits >> self.k_bits:
            raise ValueError(f"bits do not fit in {self.k_bits} positions")

    @classmethod
    def from_indices(cls, indices, k_bits: int, kind: str) -> BitFingerprint:
        bits = 0
        for k in indices:
            bits |= 1 << k
        return cls(bits, k_bits, kind)

    @property
    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def on_bits(self) -> list[int]:
        return [k for k in range(self.k_bits) if self.bits >> k & 1]

    def to_hex(self) -> str:
        return f"{self.bits:0{self.k_bits // 4 or 1}x}"

    @classmethod
    def from_hex(cls, text: str, k_bits: int, kind: str) -> BitFingerprint:
        return cls(int(text, 16), k_bits, kind)


def _working_graph(mol: MoleculeGraph, cfg: FingerprintConfig) -> MoleculeGraph:
    return mol if cfg.include_hydrogens else mol.heavy_atoms()


def _classes(mol: MoleculeGraph, cfg: FingerprintConfig) -> list[str]:
    return [atom_class(mol, i, cfg.include_charge).label() for i in range(len(mol.atoms))]


def _simple_paths(mol: MoleculeGraph, max_bonds: int) -> Iterator[list[int]]:
    """Every simple path of 1..max_bonds bonds, once per direction."""
    for start in range(len(mol.atoms)):
        stack = [[start]]
        while stack:
            path = stack.pop()
            if len(path) > 1:
                yield path
            if len(path) - 1 == max_bonds:
                continue
            for nxt, _ in mol.neighbors(path[-1]):
                if nxt not in path:
                    stack.append(path + [nxt])


def _path_feature(mol: MoleculeGraph, classes: list[str], path: list[int]) -> tuple:
    def walk(p):
        out: list = [classes[p[0]]]
        for a, b in zip(p, p[1:]):
            out += [int(mol.bond_between(a, b).order), classes[b]]
        return tuple(out)

    return min(walk(path), walk(path[::-1]))


def _torsion_feature(mol: MoleculeGraph, classes: list[str], q: list[int]) -> tuple:
    def form(p):
        orders = tuple(int(mol.bond_between(a, b).order) for a, b in zip(p, p[1:]))
        return tuple(classes[k] for k in p) + orders

    return min(form(q), form(q[::-1]))


def path_features(mol: MoleculeGraph, cfg: FingerprintConfig | None = None) -> set[tuple]:
    cfg = cfg or FingerprintConfig()
    g = _working_graph(mol, cfg)
    classes = _classes(g, cfg)
    return {_path_feature(g, classes, p) for p in _simple_paths(g, cfg.l_max)}


def torsion_features(mol: MoleculeGraph, cfg: FingerprintConfig | None = None) -> set[tuple]:
    cfg = cfg or FingerprintConfig()
    g = _working_graph(mol, cfg)
    classes = _classes(g, cfg)
    return {_torsion_feature(g, classes, p) for p in _simple_paths(g, 3) if len(p) == 4}


def atom_pair_features(mol: MoleculeGraph, cfg: FingerprintConfig | None = None) -> set[tuple]:
    cfg = cfg or FingerprintConfig()
    g = _working_graph(mol, cfg)
    classes = _classes(g, cfg)
    dist = topological_distances(g)
    out = set()
    n = len(g.atoms)
    for i in range(n):
        for j in range(i + 1, n):
            d = int(dist[i, j])
            if d == UNREACHABLE:
                continue
            a, b = sorted((classes[i], classes[j]))
            out.add((a, b, d))
    return out


_FEATURES = {"path": path_features, "torsion": torsion_features, "atom_pair": atom_pair_features}


def features(mol: MoleculeGraph, kind: str, cfg: FingerprintConfig | None = None) -> set[tuple]:
    if kind not in _FEATURES:
        raise ValueError(f"unknown fingerprint kind {kind!r}; expected one of {KINDS}")
    return _FEATURES[kind](mol, cfg)


def fingerprint(mol: MoleculeGraph, kind: str, cfg: FingerprintConfig | None = None) -> BitFingerprint:
    cfg = cfg or FingerprintConfig()
    return BitFingerprint.from_indices(
        (feature_bit(kind, f, cfg) for f in features(mol, kind, cfg)), cfg.k_bits, kind
    )


def path_fp(mol: MoleculeGraph, cfg: FingerprintConfig | None = None) -> BitFingerprint:
    return fingerprint(mol, "path", cfg)


def torsion_fp(mol: MoleculeGraph, cfg: FingerprintConfig | None = None) -> BitFingerprint:
    return fingerprint(mol, "torsion", cfg)


def atom_pair_fp(mol: MoleculeGraph, cfg: FingerprintConfig | None = None) -> BitFingerprint:
    return fingerprint(mol, "atom_pair", cfg)


def tanimoto(a: BitFingerprint, b: BitFingerprint) -> float:
    """``c / (|a| + |b| - c)`` with ``c`` the shared bits; 0 when both are empty.

    >>> tanimoto(BitFingerprint(0b1110, 8, "path"), BitFingerprint(0b11100, 8, "path"))
    0.5
    """
    if a.kind != b.kind:
        raise KindMismatch(f"cannot compare {a.kind} with {b.kind} fingerprints")
    if a.k_bits != b.k_bits:
        raise LengthMismatch(f"fingerprint lengths differ: {a.k_bits} vs {b.k_bits}")
    c = bin(a.bits & b.bits).count("1")
    denom = a.popcount + b.popcount - c
    return c / denom if denom else 0.0


def similarity_row(pred: MoleculeGraph, truth: MoleculeGraph, cfg: FingerprintConfig | None = None) -> dict:
    """All three Tanimoto similarities under their report column names."""
    cfg = cfg or FingerprintConfig()
    return {
        SIMILARITY_COLUMNS[kind]: tanimoto(fingerprint(pred, kind, cfg), fingerprint(truth, kind, cfg))
        for kind in KINDS
    }
