"""Instruction-record generation for the six molecule/spectrum task families, plus splits.

Answers are always produced by this package's own writers (canonical SMILES,
tagged spectrum text, structure text), so every answer can be parsed back and
scored against itself with the matching metric.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
import string
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from spectrakit.errors import (
    BadFractions,
    EmptyTemplatePool,
    MissingField,
    NotEnoughDistractors,
    SpectraKitError,
)
from spectrakit.geometry import parse_structure
from spectrakit.molgraph import MoleculeGraph, canonical_smiles, parse_smiles
from spectrakit.nmr_metrics import score_carbon, score_proton
from spectrakit.spectra import (
    CarbonSpectrum,
    MassSpectrum,
    ProtonSpectrum,
    WaveformSpectrum,
    parse_spectrum,
    serialize,
    spectrum_from_dict,
)
from spectrakit.spectra.waveform import DEFAULT_GRID_STEP
from spectrakit.structure_text import parse_structure_text, write_structure_text
from spectrakit.vec_metrics import MS_BINNING, BinningConfig, cosine_similarity, vectorize

TASKS = (
    "molecule_qa",
    "structure_gen",
    "iupac_to_smiles",
    "smiles_to_iupac",
    "spectrum_to_smiles",
    "smiles_to_spectrum",
)
FORMATS = ("free_form", "multiple_choice", "true_false")
PROPERTIES = ("formula", "heavy_atoms", "rings")
PLACEHOLDERS = frozenset({"smiles", "iupac", "spectrum", "modality", "options", "claim"})
N_OPTIONS = 4
OPTION_LABELS = "ABCD"
# Coordinates are written with 4 decimals, so a re-parsed structure can move by half an ulp of that.
COORD_TOLERANCE = 5e-5 + 1e-9

_FORMULA_RE = re.compile(r"^(?:[A-Z][a-z]?\d*)+$")


@dataclass(frozen=True)
class MoleculeRecord:
    id: str
    smiles: str
    iupac: str | None = None
    graph: MoleculeGraph | None = None
    spectra: tuple = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be nonempty")
        parse_smiles(self.smiles)
        object.__setattr__(self, "spectra", tuple(self.spectra))

    @classmethod
    def from_dict(cls, data: Mapping) -> MoleculeRecord:
        """Build from a JSON object with ``id``, ``smiles`` and optional ``iupac``,
        ``structure`` (structure text or a V2000 molfile) and ``spectra``
        (tagged texts or spectrum dicts)."""
        graph = None
        structure = data.get("structure")
        if structure:
            graph = parse_structure(structure)
        spectra = []
        for item in data.get("spectra") or ():
            spectra.append(parse_spectrum(item) if isinstance(item, str) else spectrum_from_dict(item))
        if "id" not in data or "smiles" not in data:
            raise SpectraKitError("molecule record needs 'id' and 'smiles'")
        return cls(str(data["id"]), data["smiles"], data.get("iupac"), graph, tuple(spectra))


@dataclass(frozen=True)
class InstructionRecord:
    task: str
    format: str
    prompt: str
    answer: str
    source_id: str
    template_id: str

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if not self.answer:
            raise ValueError("answer must be nonempty")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "format": self.format,
            "prompt": self.prompt,
            "answer": self.answer,
            "source_id": self.source_id,
            "template_id": self.template_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


@dataclass(frozen=True)
class Template:
    id: str
    text: str
    property: str | None = None


def _placeholders(text: str) -> set[str]:
    return {name for _, name, _, _ in string.Formatter().parse(text) if name}


def load_templates(path=None) -> dict[str, dict[str, list[Template]]]:
    """Template pools keyed by task then format; defaults to the bundled file."""
    if path is None:
        raw = resources.files("spectrakit.data").joinpath("templates.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    pools: dict[str, dict[str, list[Template]]] = {}
    for task, by_format in json.loads(raw)["pools"].items():
        if task not in TASKS:
            raise ValueError(f"template file names unknown task {task!r}")
        for fmt, entries in by_format.items():
            if fmt not in FORMATS:
                raise ValueError(f"template file names unknown format {fmt!r}")
            pool = []
            for entry in entries:
                t = Template(entry["id"], entry["text"], entry.get("property"))
                unknown = _placeholders(t.text) - PLACEHOLDERS
                if unknown:
                    raise ValueError(f"template {t.id} uses unknown placeholders {sorted(unknown)}")
                if task == "molecule_qa" and t.property not in PROPERTIES:
                    raise ValueError(f"template {t.id} needs a property in {PROPERTIES}")
                pool.append(t)
            pools.setdefault(task, {})[fmt] = pool
    return pools


def derived_seed(rng_seed: int, *parts: str) -> int:
    """Stable per-record seed so generation can be split across workers."""
    digest = hashlib.sha256("\x1f".join((str(rng_seed), *parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


# --- answers -------------------------------------------------------------------------


def molecule_property(smiles: str, prop: str) -> str:
    mol = parse_smiles(smiles)
    if prop == "formula":
        return mol.formula()
    if prop == "heavy_atoms":
        return str(sum(1 for a in mol.atoms if a.element != "H"))
    if prop == "rings":
        return str(mol.ring_count())
    raise ValueError(f"unknown property {prop!r}")


def _modality(spectrum) -> str:
    if isinstance(spectrum, MassSpectrum):
        return "MS"
    return spectrum.modality


def _pick_spectrum(record: MoleculeRecord, rng_seed: int):
    rng = random.Random(derived_seed(rng_seed, record.id, "spectrum"))
    return record.spectra[rng.randrange(len(record.spectra))]


def _require(record: MoleculeRecord, task: str, name: str) -> None:
    value = getattr(record, name)
    if value is None or value == () or value == "":
        raise MissingField(task, record.id, name)


def task_answer(record: MoleculeRecord, task: str, template: Template, rng_seed: int = 0) -> str:
    """Correct answer for ``record`` under ``task``, produced by the package writers."""
    if task == "molecule_qa":
        return molecule_property(record.smiles, template.property)
    if task == "structure_gen":
        _require(record, task, "graph")
        return write_structure_text(record.graph)
    if task == "iupac_to_smiles":
        _require(record, task, "iupac")
        return canonical_smiles(parse_smiles(record.smiles))
    if task == "smiles_to_iupac":
        _require(record, task, "iupac")
        return record.iupac.strip()
    if task == "spectrum_to_smiles":
        _require(record, task, "spectra")
        return canonical_smiles(parse_smiles(record.smiles))
    if task == "smiles_to_spectrum":
        _require(record, task, "spectra")
        return serialize(_pick_spectrum(record, rng_seed))
    raise ValueError(f"unknown task {task!r}")


def _fields(record: MoleculeRecord, task: str, rng_seed: int) -> dict[str, str]:
    values = {"smiles": record.smiles}
    if record.iupac:
        values["iupac"] = record.iupac.strip()
    if task == "spectrum_to_smiles":
        values["spectrum"] = "\n".join(serialize(s) for s in record.spectra)
    if task == "smiles_to_spectrum":
        values["modality"] = _modality(_pick_spectrum(record, rng_seed))
    return values


def _answer_key(task: str, answer: str) -> str:
    """Identity used to keep distractors distinct from the correct answer."""
    if task in ("iupac_to_smiles", "spectrum_to_smiles"):
        return canonical_smiles(parse_smiles(answer))
    return answer


def _distractors(
    task: str, answer: str, candidates: Sequence[str], rng: random.Random, k: int
) -> list[str]:
    key = _answer_key(task, answer)
    seen = {key}
    pool = []
    for cand in sorted(set(candidates)):
        ck = _answer_key(task, cand)
        if ck not in seen:
            seen.add(ck)
            pool.append(cand)
    picked = rng.sample(pool, min(k, len(pool)))
    if len(picked) < k and answer.isdigit():
        # Integer answers (atom or ring counts) fall back to nearby values.
        value = int(answer)
        for delta in (1, 2, 3, 4, 5, 6):
            for cand in (str(value + delta), str(value - delta)):
                if len(picked) < k and int(cand) >= 0 and cand not in seen:
                    seen.add(cand)
                    picked.append(cand)
    if len(picked) < k:
        raise NotEnoughDistractors(
            f"task {task}: only {len(picked)} distinct distractors available, need {k}"
        )
    return picked


def _render(text: str, values: Mapping[str, str], task: str, record_id: str) -> str:
    for name in _placeholders(text):
        if name not in values:
            raise MissingField(task, record_id, name)
    return text.format_map(values)


def generate(
    records: Sequence[MoleculeRecord],
    task: str,
    fmt: str,
    templates: Mapping[str, Mapping[str, Sequence[Template]]] | None = None,
    rng_seed: int = 0,
) -> list[InstructionRecord]:
    """One instruction per record, deterministic in ``rng_seed``.

    Multiple-choice distractors and false true/false claims are other records'
    answers for the same task (and property, for molecule QA).
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    templates = templates if templates is not None else load_templates()
    pool = list(templates.get(task, {}).get(fmt, ()))
    if not pool:
        raise EmptyTemplatePool(f"no templates for task {task} in format {fmt}")

    chosen = []
    for record in records:
        rng = random.Random(derived_seed(rng_seed, record.id, task, fmt, "template"))
        chosen.append(pool[rng.randrange(len(pool))])
    answers = [task_answer(r, task, t, rng_seed) for r, t in zip(records, chosen)]

    by_group: dict[tuple, list[str]] = {}

    def candidates(record: MoleculeRecord, template: Template) -> list[str]:
        key = _group(record, task, template, rng_seed)
        if key not in by_group:
            by_group[key] = _group_answers(records, answers, task, key)
        return by_group[key]

    out = []
    for record, template, answer in zip(records, chosen, answers):
        rng = random.Random(derived_seed(rng_seed, record.id, task, fmt, "content"))
        values = _fields(record, task, rng_seed)
        if fmt == "free_form":
            final = answer
        elif fmt == "multiple_choice":
            options = _distractors(task, answer, candidates(record, template), rng, N_OPTIONS - 1) + [answer]
            rng.shuffle(options)
            values["options"] = "\n".join(
                f"{label}. {opt}" for label, opt in zip(OPTION_LABELS, options)
            )
            final = answer
        else:
            truthful = rng.random() < 0.5
            values["claim"] = answer if truthful else _distractors(task, answer, candidates(record, template), rng, 1)[0]
            final = "True" if truthful else "False"
        prompt = _render(template.text, values, task, record.id)
        out.append(InstructionRecord(task, fmt, prompt, final, record.id, template.id))
    return out


def _spectrum_group(spectrum) -> str:
    return spectrum.tag if isinstance(spectrum, MassSpectrum) else spectrum.modality


def _group_answers(records: Sequence[MoleculeRecord], answers: Sequence[str], task: str, key: tuple) -> list[str]:
    """Corpus-wide answers comparable to one question, used as distractors."""
    if task == "molecule_qa":
        return [molecule_property(r.smiles, key[0]) for r in records]
    if task == "smiles_to_spectrum":
        return [serialize(s) for r in records for s in r.spectra if _spectrum_group(s) == key[0]]
    return list(answers)


def _group(record: MoleculeRecord, task: str, template: Template, rng_seed: int) -> tuple:
    if task == "molecule_qa":
        return (template.property,)
    if task == "smiles_to_spectrum":
        return (_spectrum_group(_pick_spectrum(record, rng_seed)),)
    return ()


# --- answer checking -----------------------------------------------------------------


def _waveform_binning(spectrum: WaveformSpectrum) -> BinningConfig:
    lo, hi = spectrum.axis_range
    step = DEFAULT_GRID_STEP.get(spectrum.modality, 1.0)
    return BinningConfig(lo, hi + step, step)


def spectrum_score(pred, truth) -> float:
    """Headline metric for a predicted spectrum: 13C F1, 1H Jaccard, cosine otherwise."""
    if isinstance(truth, CarbonSpectrum):
        return score_carbon(pred, truth).f1
    if isinstance(truth, ProtonSpectrum):
        return score_proton(pred, truth).jaccard
    if type(pred) is not type(truth):
        return 0.0
    if isinstance(truth, MassSpectrum):
        if pred.tag != truth.tag:
            return 0.0
        cfg = MS_BINNING
        empty = not pred.peaks and not truth.peaks
    else:
        if pred.modality != truth.modality:
            return 0.0
        cfg = _waveform_binning(truth)
        empty = not pred.points and not truth.points
    if empty:
        return 1.0
    return cosine_similarity(vectorize(pred, cfg), vectorize(truth, cfg))


def structures_match(a: MoleculeGraph, b: MoleculeGraph, tol: float = COORD_TOLERANCE) -> bool:
    """Same atoms in the same order, same bonds, coordinates within ``tol``."""
    if [(x.element, x.formal_charge) for x in a.atoms] != [(x.element, x.formal_charge) for x in b.atoms]:
        return False
    if a.bonds != b.bonds:
        return False
    if a.has_positions != b.has_positions:
        return False
    return not a.has_positions or bool(np.max(np.abs(a.positions() - b.positions())) <= tol)


def score_answer(instruction: InstructionRecord, candidate: str, reference: str | None = None) -> float:
    """Score ``candidate`` against the reference answer (default: the record's own answer).

    Returns a value in [0, 1]; 1 means a perfect answer. Unparseable candidates score 0.
    """
    reference = instruction.answer if reference is None else reference
    if instruction.format == "true_false":
        return float(candidate.strip().lower() == reference.strip().lower())
    try:
        task = instruction.task
        if task in ("iupac_to_smiles", "spectrum_to_smiles"):
            return float(
                canonical_smiles(parse_smiles(candidate)) == canonical_smiles(parse_smiles(reference))
            )
        if task == "smiles_to_spectrum":
            return spectrum_score(parse_spectrum(candidate), parse_spectrum(reference))
        if task == "structure_gen":
            return float(
                structures_match(parse_structure_text(candidate), parse_structure_text(reference))
            )
        if task == "molecule_qa":
            return float(candidate.strip() == reference.strip())
        return float(candidate.strip() == reference.strip())
    except SpectraKitError:
        return 0.0


def parse_answer(instruction: InstructionRecord):
    """Parse the answer with the module that owns its format; raises if it does not parse."""
    answer = instruction.answer
    if instruction.format == "true_false":
        if answer not in ("True", "False"):
            raise SpectraKitError(f"true/false answer must be 'True' or 'False', got {answer!r}")
        return answer == "True"
    task = instruction.task
    if task in ("iupac_to_smiles", "spectrum_to_smiles"):
        return parse_smiles(answer)
    if task == "smiles_to_spectrum":
        return parse_spectrum(answer)
    if task == "structure_gen":
        return parse_structure_text(answer)
    if task == "molecule_qa":
        if answer.isdigit():
            return int(answer)
        if _FORMULA_RE.match(answer):
            return answer
        raise SpectraKitError(f"unrecognized molecule QA answer {answer!r}")
    return answer.strip()


# --- splits --------------------------------------------------------------------------

SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class Split:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return {"train": self.train, "val": self.val, "test": self.test}

    def assignment(self) -> dict[str, str]:
        return {i: name for name, ids in self.as_dict().items() for i in ids}


def _check_fractions(fractions: Sequence[float]) -> tuple[float, ...]:
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != len(SPLIT_NAMES):
        raise BadFractions(f"need {len(SPLIT_NAMES)} fractions, got {len(fractions)}")
    if any(not math.isfinite(f) or f < 0 for f in fractions):
        raise BadFractions(f"fractions must be finite and non-negative: {fractions}")
    if abs(math.fsum(fractions) - 1.0) > 1e-9:
        raise BadFractions(f"fractions must sum to 1, got {math.fsum(fractions)}")
    return fractions


def split_sizes(n: int, fractions: Sequence[float]) -> tuple[int, ...]:
    """Largest-remainder apportionment of ``n`` items; ties go to the earlier split."""
    fractions = _check_fractions(fractions)
    quotas = [n * f for f in fractions]
    sizes = [int(math.floor(q + 1e-9)) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda k: (-(quotas[k] - sizes[k]), k))
    for k in order[: n - sum(sizes)]:
        sizes[k] += 1
    return tuple(sizes)


def split(ids: Iterable[str], fractions: Sequence[float] = (0.8, 0.1, 0.1), rng_seed: int = 0) -> Split:
    """Molecule-level train/val/test split; every id lands in exactly one part.

    >>> s = split([str(i) for i in range(10)], (0.8, 0.1, 0.1), rng_seed=3)
    >>> len(s.train), len(s.val), len(s.test)
    (8, 1, 1)
    """
    unique = sorted(set(ids))
    sizes = split_sizes(len(unique), fractions)
    random.Random(derived_seed(rng_seed, "split")).shuffle(unique)
    parts = []
    start = 0
    for size in sizes:
        parts.append(tuple(sorted(unique[start : start + size])))
        start += size
    return Split(*parts)


def partition_templates(
    templates: Mapping[str, Mapping[str, Sequence[Template]]],
    fractions: Sequence[float] = (0.8, 0.1, 0.1),
    rng_seed: int = 0,
) -> dict[str, dict[str, dict[str, list[Template]]]]:
    """Give each split a disjoint slice of every template pool.

    Each pool keeps at least one template per split, so a pool needs at least
    as many templates as there are splits. For molecule QA the partition is
    done per property so every split can still ask every question.
    """
    _check_fractions(fractions)
    out: dict[str, dict[str, dict[str, list[Template]]]] = {name: {} for name in SPLIT_NAMES}
    for task, by_format in templates.items():
        for fmt, pool in by_format.items():
            groups: dict[str | None, list[Template]] = {}
            for t in pool:
                groups.setdefault(t.property, []).append(t)
            for name in SPLIT_NAMES:
                out[name].setdefault(task, {})[fmt] = []
            for prop, group in sorted(groups.items(), key=lambda kv: kv[0] or ""):
                if len(group) < len(SPLIT_NAMES):
                    raise EmptyTemplatePool(
                        f"pool {task}/{fmt}{'/' + prop if prop else ''} has {len(group)} templates, "
                        f"need at least {len(SPLIT_NAMES)} to partition"
                    )
                shuffled = sorted(group, key=lambda t: t.id)
                random.Random(derived_seed(rng_seed, task, fmt, prop or "", "templates")).shuffle(shuffled)
                sizes = [max(1, s) for s in split_sizes(len(shuffled), fractions)]
                while sum(sizes) > len(shuffled):
                    sizes[sizes.index(max(sizes))] -= 1
                start = 0
                for name, size in zip(SPLIT_NAMES, sizes):
                    out[name][task][fmt].extend(shuffled[start : start + size])
                    start += size
    return out
