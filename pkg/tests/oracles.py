"""Brute-force reference implementations used only by the test suite.

Nothing here imports spectrakit's metric modules; the only production
imports are the graph model itself, so the oracle shares no scoring code
with the code it checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Any, Callable, Sequence

import networkx as nx

from spectrakit.molgraph import MoleculeGraph

MAX_PEAKS = 10
MAX_ATOMS = 12
SLACK = 1e-9


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    value: Any
    method: str


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]
    weight: float
    total_deviation: float

    @property
    def n_match(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class MatchOracle:
    optimal: Matching
    greedy: Matching
    compatible: frozenset = field(default=frozenset(), repr=False)


def _pos(peak) -> float:
    return peak[0] if isinstance(peak, tuple) else float(peak)


def exhaustive_match(
    pred: Sequence,
    truth: Sequence,
    tolerance: float,
    weight_fn: Callable[[Any, Any], float] | None = None,
) -> OracleResult:
    """Optimal and greedy one-to-one matchings of ``pred`` against ``truth``.

    Peaks are floats or ``(position, n_h)`` tuples. Without ``weight_fn`` a
    pair weighs 1, the optimum maximizes pair count and then minimizes total
    deviation, and the greedy pass takes the nearest free truth peak. With
    ``weight_fn`` the optimum maximizes total weight and the greedy pass takes
    the heaviest free truth peak. Greedy scans ``pred`` in the order given and
    resolves ties towards the lower truth index.

    The optimum is found by dynamic programming over (prediction, used-truth
    bitmask) states, which covers every injective assignment.
    """
    if len(pred) > MAX_PEAKS or len(truth) > MAX_PEAKS:
        raise TooLarge(f"at most {MAX_PEAKS} peaks per side")
    dev = [[abs(_pos(p) - _pos(t)) for t in truth] for p in pred]
    ok = [[dev[j][i] <= tolerance + SLACK for i in range(len(truth))] for j in range(len(pred))]
    w = [[(weight_fn(p, t) if weight_fn else 1.0) for t in truth] for p in pred]

    def key(weight: float, deviation: float) -> tuple:
        return (weight, -deviation)

    @lru_cache(maxsize=None)
    def best(j: int, used: int) -> tuple[tuple, tuple]:
        if j == len(pred):
            return (0.0, 0.0), ()
        (sw, sd), pairs = best(j + 1, used)
        choice = (key(sw, sd), (sw, sd), pairs)
        for i in range(len(truth)):
            if ok[j][i] and not used >> i & 1:
                (rw, rd), rest = best(j + 1, used | 1 << i)
                cand = (rw + w[j][i], rd + dev[j][i])
                if key(*cand) > choice[0]:
                    choice = (key(*cand), cand, ((j, i),) + rest)
        return choice[1], choice[2]

    (ow, od), opairs = best(0, 0)
    optimal = Matching(opairs, ow, od)

    used: set[int] = set()
    gpairs = []
    for j in range(len(pred)):
        pick = None
        for i in range(len(truth)):
            if i in used or not ok[j][i]:
                continue
            score = w[j][i] if weight_fn else -dev[j][i]
            if pick is None or score > pick[0]:
                pick = (score, i)
        if pick is not None:
            used.add(pick[1])
            gpairs.append((j, pick[1]))
    greedy = Matching(
        tuple(gpairs),
        math.fsum(w[j][i] for j, i in gpairs),
        math.fsum(dev[j][i] for j, i in gpairs),
    )
    compatible = frozenset((j, i) for j in range(len(pred)) for i in range(len(truth)) if ok[j][i])
    return OracleResult(MatchOracle(optimal, greedy, compatible), "bitmask DP over all injective assignments")


# --- fingerprints ------------------------------------------------------------------------


def to_networkx(mol: MoleculeGraph, heavy_only: bool = True) -> nx.Graph:
    g = nx.Graph()
    for a in mol.atoms:
        if heavy_only and a.element == "H":
            continue
        g.add_node(a.index, element=a.element, aromatic=a.aromatic, charge=a.formal_charge)
    for b in mol.bonds:
        if b.a in g and b.b in g:
            g.add_edge(b.a, b.b, order=int(b.order))
    return g


def _label(g: nx.Graph, n: int) -> str:
    d = g.nodes[n]
    return d["element"] + (":ar" if d["aromatic"] else "")


def _walk(g: nx.Graph, path: Sequence[int]) -> tuple:
    out: list = [_label(g, path[0])]
    for a, b in zip(path, path[1:]):
        out += [g.edges[a, b]["order"], _label(g, b)]
    return tuple(out)


def raw_feature_sets(mol: MoleculeGraph, kind: str, l_max: int = 7) -> OracleResult:
    """Unhashed feature set of one fingerprint kind on the heavy-atom graph.

    path: every simple path of 1..l_max bonds written as class, order, class, ...
    in the lexicographically smaller direction. torsion: every 3-bond path as
    its four classes followed by its three orders, smaller direction.
    atom_pair: (class, class, shortest-path length) with classes sorted.
    """
    g = to_networkx(mol)
    if g.number_of_nodes() > MAX_ATOMS:
        raise TooLarge(f"at most {MAX_ATOMS} heavy atoms")
    out: set[tuple] = set()
    if kind in ("path", "torsion"):
        cutoff = l_max if kind == "path" else 3
        for s, t in combinations(sorted(g.nodes), 2):
            for p in nx.all_simple_paths(g, s, t, cutoff=cutoff):
                if kind == "path":
                    out.add(min(_walk(g, p), _walk(g, p[::-1])))
                elif len(p) == 4:
                    def form(q):
                        labels = tuple(_label(g, k) for k in q)
                        return labels + tuple(g.edges[a, b]["order"] for a, b in zip(q, q[1:]))
                    out.add(min(form(p), form(p[::-1])))
    elif kind == "atom_pair":
        lengths = dict(nx.all_pairs_shortest_path_length(g))
        for s, t in combinations(sorted(g.nodes), 2):
            if t in lengths[s]:
                a, b = sorted((_label(g, s), _label(g, t)))
                out.add((a, b, lengths[s][t]))
    else:
        raise ValueError(kind)
    return OracleResult(frozenset(out), f"networkx enumeration of {kind} features")


def set_tanimoto(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


# --- graphs and sequences ------------------------------------------------------------------


def same_molecule(a: MoleculeGraph, b: MoleculeGraph) -> bool:
    """Labelled graph isomorphism over all atoms (hydrogens included)."""
    ga, gb = to_networkx(a, heavy_only=False), to_networkx(b, heavy_only=False)
    return nx.is_isomorphic(
        ga, gb,
        node_match=lambda x, y: (x["element"], x["aromatic"], x["charge"]) == (y["element"], y["aromatic"], y["charge"]),
        edge_match=lambda x, y: x["order"] == y["order"],
    )


def naive_token_accuracy(truth: Sequence[str], pred: Sequence[str]) -> float:
    hits = 0
    for k in range(len(truth)):
        if k < len(pred) and pred[k] == truth[k]:
            hits += 1
    return hits / len(truth)


def naive_cosine(p: Sequence[float], q: Sequence[float]) -> float:
    dot = math.fsum(x * y for x, y in zip(p, q))
    np_, nq = math.sqrt(math.fsum(x * x for x in p)), math.sqrt(math.fsum(y * y for y in q))
    return dot / (np_ * nq) if np_ and nq else 0.0
