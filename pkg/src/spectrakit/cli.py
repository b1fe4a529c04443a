"""Batch evaluation command line.

Every subcommand streams its corpus record by record, writes one JSON row per
record to ``--rows`` and an aggregate report to ``--out`` (stdout by default).
Diagnostics go to stderr. Exit status: 0 on success, 1 when ``--strict`` and
some record failed, 2 for unusable input or configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import ExitStack
from functools import partial
from itertools import islice, zip_longest
from typing import Callable, Iterable, Iterator, TextIO

from spectrakit import __version__
from spectrakit.config import RunConfig, load_config
from spectrakit.corpus import KINDS as CORPUS_KINDS
from spectrakit.corpus import CorpusError, CorpusRecord, load_corpus
from spectrakit.errors import (
    ConfigMismatch,
    ConfigParseError,
    InputNotFound,
    NotEnoughDistractors,
    PermissionDenied,
    SpectraKitError,
)
from spectrakit.fingerprints import similarity_row
from spectrakit.geometry import analyze_text, parse_structure
from spectrakit.molgraph import parse_smiles
from spectrakit.nmr_metrics import score_carbon, score_proton
from spectrakit.seq_metrics import CANONICALIZERS, pair_token_accuracy, sequence_match
from spectrakit.spectra import (
    CarbonSpectrum,
    ProtonSpectrum,
    parse_spectrum,
    serialize,
    spectrum_from_dict,
    spectrum_to_dict,
)
from spectrakit.taskgen import (
    FORMATS,
    SPLIT_NAMES,
    TASKS,
    MoleculeRecord,
    generate,
    load_templates,
    parse_answer,
    partition_templates,
    score_answer,
    split,
)
from spectrakit.vec_metrics import cosine_similarity, vectorize

EXIT_OK, EXIT_RECORD_ERRORS, EXIT_INPUT = 0, 1, 2
REPORT_FORMAT = "spectrakit-report/v1"

# Mean-valued aggregate fields per command, with the row value each one averages.
# A ``None`` value leaves the record out of that mean.
_AGGREGATES: dict[str, dict[str, Callable[[dict], float | None]]] = {
    "score-nmr13c": {k: (lambda r, k=k: r[k]) for k in ("precision", "recall", "f1", "mae")},
    "score-nmr1h": {k: (lambda r, k=k: r[k]) for k in ("precision", "recall", "f1", "mae", "jaccard")},
    "score-ir": {"cosine": lambda r: r["cosine"]},
    "score-ms": {"cosine": lambda r: r["cosine"]},
    "score-seq": {
        "token_acc": lambda r: r["token_acc"],
        "seq_acc": lambda r: float(r["seq_match"]),
    },
    "geom": {
        "sdf_valid": lambda r: float(r["parsed_ok"]),
        "mean_clash": lambda r: r["clash_count"],
        "mean_violation": lambda r: r["violation_count"],
        "valid_mean_clash": lambda r: r["clash_count"] if r["parsed_ok"] else None,
        "valid_mean_violation": lambda r: r["violation_count"] if r["parsed_ok"] else None,
    },
    "fpsim": {k: (lambda r, k=k: r[k]) for k in ("rdk_fp_sim", "torsion_sim", "atom_pair_sim")},
    "taskgen": {"self_check": lambda r: float(r["self_check"])},
    "serialize": {},
    "parse": {},
}


class Aggregate:
    """Order-independent fold of per-record rows into sums and counts."""

    def __init__(self, command: str):
        self.command = command
        self.n_records = 0
        self.n_errors = 0
        self.sums = {k: 0.0 for k in _AGGREGATES[command]}
        self.counts = {k: 0 for k in _AGGREGATES[command]}
        self.warnings: dict[str, int] = {}
        self.tallies: dict[str, int] = {}

    def warn(self, name: str, n: int = 1) -> None:
        if n:
            self.warnings[name] = self.warnings.get(name, 0) + n

    def tally(self, name: str, n: int = 1) -> None:
        self.tallies[name] = self.tallies.get(name, 0) + n

    def add(self, row: dict) -> None:
        self.n_records += 1
        for name in row.get("warnings", ()):
            self.warn(name)
        if "error" in row:
            self.n_errors += 1
            self.warn("record_errors")
            return
        self.warn("dropped_peaks", row.get("dropped", 0))
        for key, getter in _AGGREGATES[self.command].items():
            value = getter(row)
            if value is not None:
                self.sums[key] += value
                self.counts[key] += 1

    def means(self) -> dict:
        out = {k: (self.sums[k] / self.counts[k] if self.counts[k] else None) for k in self.sums}
        if self.command in ("score-nmr13c", "score-nmr1h"):
            out["mae_excluded"] = self.n_records - self.n_errors - self.counts["mae"]
        return out

    def report(self, config: dict, rows_path: str | None) -> dict:
        if self.n_records - self.n_errors == 0 and self.command != "taskgen":
            self.warn("empty_corpus")
        return {
            "format": REPORT_FORMAT,
            "command": self.command,
            "n_records": self.n_records,
            "n_errors": self.n_errors,
            "aggregate": self.means(),
            "sums": dict(sorted(self.sums.items())),
            "counts": dict(sorted(self.counts.items())),
            "warnings": dict(sorted(self.warnings.items())),
            "tallies": dict(sorted(self.tallies.items())),
            "rows": rows_path,
            "config": config,
        }

    @classmethod
    def from_report(cls, report: dict) -> Aggregate:
        agg = cls(report["command"])
        agg.n_records = report["n_records"]
        agg.n_errors = report["n_errors"]
        agg.sums = dict(report["sums"])
        agg.counts = dict(report["counts"])
        agg.warnings = {k: v for k, v in report["warnings"].items() if k != "empty_corpus"}
        agg.tallies = dict(report["tallies"])
        return agg

    def merge(self, other: Aggregate) -> None:
        self.n_records += other.n_records
        self.n_errors += other.n_errors
        for k in self.sums:
            self.sums[k] += other.sums[k]
            self.counts[k] += other.counts[k]
        for k, v in other.warnings.items():
            self.warn(k, v)
        for k, v in other.tallies.items():
            self.tally(k, v)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False)


def _error_text(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


# --- per-record workers (top level so they pickle for --jobs) -------------------------


def _spectrum_of(payload):
    if isinstance(payload, dict):
        return spectrum_from_dict(payload)
    return parse_spectrum(payload)


def _pred_spectrum(payload, empty):
    """Parse a predicted spectrum; unparseable predictions score as an empty one."""
    try:
        return _spectrum_of(payload), []
    except (SpectraKitError, KeyError, TypeError):
        return empty, ["pred_parse_failures"]


def _work_nmr13c(cfg: RunConfig, pred, truth) -> dict:
    truth_s = _spectrum_of(truth)
    pred_s, warnings = _pred_spectrum(pred, CarbonSpectrum(()))
    row = score_carbon(pred_s, truth_s, cfg.nmr).to_row()
    row["jaccard"] = None
    return {**row, "warnings": warnings}


def _work_nmr1h(cfg: RunConfig, pred, truth) -> dict:
    truth_s = _spectrum_of(truth)
    if not isinstance(truth_s, ProtonSpectrum):
        raise SpectraKitError(f"truth is {type(truth_s).__name__}, expected a 1H spectrum")
    try:
        pred_s, warnings = _spectrum_of(pred), []
        row = score_proton(pred_s, truth_s, cfg.nmr).to_row()
    except (SpectraKitError, KeyError, TypeError):
        # A proton spectrum cannot be empty, so a failed prediction gets zero scores directly.
        warnings = ["pred_parse_failures"]
        n_true = len(truth_s.peaks)
        row = {"precision": 0.0, "recall": 0.0, "f1": 0.0, "mae": None, "jaccard": 0.0,
               "n_match": 0, "n_pred": 0, "n_true": n_true}
    return {**row, "warnings": warnings}


def _work_cosine(binning_attr: str, cfg: RunConfig, pred, truth) -> dict:
    binning = getattr(cfg, binning_attr)
    truth_v = vectorize(_spectrum_of(truth), binning)
    warnings = []
    try:
        pred_v = vectorize(_spectrum_of(pred), binning)
        dropped = pred_v.dropped
        cosine = cosine_similarity(pred_v, truth_v)
    except (SpectraKitError, KeyError, TypeError):
        warnings.append("pred_parse_failures")
        dropped = 0
        cosine = 0.0
    return {"cosine": cosine, "dropped": dropped + truth_v.dropped, "warnings": warnings}


def _work_seq(cfg: RunConfig, pred, truth) -> dict:
    pred, truth = str(pred), str(truth)
    return {
        "token_acc": pair_token_accuracy(truth, pred, cfg.tokenizer),
        "seq_match": sequence_match(truth, pred, CANONICALIZERS[cfg.canonicalizer]),
    }


def _work_geom(cfg: RunConfig, text) -> dict:
    row = analyze_text(text, cfg.geometry).to_row()
    warnings = ["structure_parse_failures"] if not row["parsed_ok"] else []
    if row["parsed_ok"] and row["check_error"]:
        warnings.append("geometry_unchecked")
    return {**row, "warnings": warnings}


def _molecule_of(payload):
    if isinstance(payload, dict):
        if payload.get("smiles"):
            return parse_smiles(payload["smiles"])
        if payload.get("structure"):
            return parse_structure(payload["structure"])
        raise SpectraKitError("record has neither 'smiles' nor 'structure'")
    text = str(payload)
    return parse_structure(text) if "\n" in text.strip() else parse_smiles(text)


def _work_fpsim(cfg: RunConfig, pred, truth) -> dict:
    truth_m = _molecule_of(truth)
    try:
        pred_m = _molecule_of(pred)
    except SpectraKitError:
        return {"rdk_fp_sim": 0.0, "torsion_sim": 0.0, "atom_pair_sim": 0.0,
                "warnings": ["pred_parse_failures"]}
    return {**similarity_row(pred_m, truth_m, cfg.fingerprint), "warnings": []}


def _work_serialize(cfg: RunConfig, payload) -> dict:
    spectrum = _spectrum_of(payload)
    return {"text": serialize(spectrum), "type": spectrum_to_dict(spectrum)["type"]}


def _work_parse(cfg: RunConfig, payload) -> dict:
    spectrum = _spectrum_of(payload)
    data = spectrum_to_dict(spectrum)
    return {"spectrum": data, "type": data["type"]}


def _run_job(worker, cfg: RunConfig, job: tuple) -> dict:
    record_id, args = job
    try:
        row = worker(cfg, *args)
    except (SpectraKitError, KeyError, TypeError) as exc:
        return {"id": record_id, "error": _error_text(exc)}
    row["id"] = record_id
    if not row.get("warnings"):
        row.pop("warnings", None)
    return row


def ordered_map(fn: Callable, items: Iterable, jobs: int) -> Iterator:
    """``map`` that may run in worker processes but always yields in input order.

    Work is submitted in bounded batches so memory does not grow with the corpus.
    """
    if jobs <= 1:
        yield from map(fn, items)
        return
    it = iter(items)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        while True:
            batch = list(islice(it, jobs * 32))
            if not batch:
                return
            yield from pool.map(fn, batch, chunksize=8)


# --- inputs ------------------------------------------------------------------------


_PAYLOAD_KEYS = ("spectrum", "text", "smiles", "structure", "sequence", "answer")


def _payload(record: CorpusRecord, keys: tuple[str, ...] = _PAYLOAD_KEYS):
    if isinstance(record.data, str):
        return record.data
    for key in keys:
        if key in record.data:
            return record.data[key]
    raise SpectraKitError(f"record {record.id} has none of the fields {', '.join(keys)}")


def _single_jobs(items: Iterable, keys=_PAYLOAD_KEYS, whole_record: bool = False) -> Iterator:
    for item in items:
        if isinstance(item, CorpusError):
            yield ("error", item.id, item.message)
            continue
        if whole_record and isinstance(item.data, dict):
            yield ("job", item.id, (item.data,))
            continue
        try:
            yield ("job", item.id, (_payload(item, keys),))
        except SpectraKitError as exc:
            yield ("error", item.id, _error_text(exc))


def _combined_jobs(items: Iterable) -> Iterator:
    """Jobs from records that carry both ``pred`` and ``truth`` fields."""
    for item in items:
        if isinstance(item, CorpusError):
            yield ("error", item.id, item.message)
        elif not isinstance(item.data, dict) or "truth" not in item.data:
            yield ("error", item.id, f"record {item.id} has no 'truth' field")
        else:
            yield ("job", item.id, (item.data.get("pred") or "", item.data["truth"]))


def _paired_jobs(preds: Iterable, truths: Iterable, whole_record: bool = False) -> Iterator:
    """Pair predictions with references by position; ids must agree."""
    for k, (pred, truth) in enumerate(zip_longest(preds, truths), start=1):
        if truth is None:
            yield ("error", pred.id, "prediction has no matching reference record")
            continue
        if pred is None:
            yield ("error", truth.id, "reference has no matching prediction record")
            continue
        if isinstance(truth, CorpusError):
            yield ("error", truth.id, truth.message)
            continue
        if isinstance(pred, CorpusError):
            # Unreadable prediction lines are scored as empty predictions by the workers.
            yield ("job", truth.id, ("", _payload_or_record(truth, whole_record)))
            continue
        if pred.id != truth.id:
            yield ("error", truth.id, f"record {k}: prediction id {pred.id!r} != reference id {truth.id!r}")
            continue
        try:
            yield ("job", truth.id, (_payload_or_record(pred, whole_record),
                                     _payload_or_record(truth, whole_record)))
        except SpectraKitError as exc:
            yield ("error", truth.id, _error_text(exc))


def _payload_or_record(record: CorpusRecord, whole_record: bool):
    if whole_record and isinstance(record.data, dict):
        return record.data
    return _payload(record)


def _execute(worker, cfg: RunConfig, stream: Iterator, jobs: int) -> Iterator[dict]:
    """Run ``worker`` over the job stream, passing error markers through in order."""
    pending: list = []

    def jobs_only():
        for kind, record_id, payload in stream:
            if kind == "error":
                pending.append({"id": record_id, "error": payload})
                yield None
            else:
                yield (record_id, payload)

    fn = partial(_guarded, worker, cfg)
    for result in ordered_map(fn, jobs_only(), jobs):
        yield pending.pop(0) if result is None else result


def _guarded(worker, cfg: RunConfig, job):
    if job is None:
        return None
    return _run_job(worker, cfg, job)


# --- commands ----------------------------------------------------------------------


_WORKERS = {
    "score-nmr13c": _work_nmr13c,
    "score-nmr1h": _work_nmr1h,
    "score-ir": partial(_work_cosine, "ir_binning"),
    "score-ms": partial(_work_cosine, "ms_binning"),
    "score-seq": _work_seq,
    "fpsim": _work_fpsim,
    "geom": _work_geom,
    "serialize": _work_serialize,
    "parse": _work_parse,
}


def _rows_for(args, cfg: RunConfig) -> Iterator[dict]:
    command = args.command
    worker = _WORKERS[command]
    if command == "score-seq" and args.input:
        stream = _combined_jobs(load_corpus(args.input, args.kind))
    elif command in ("geom", "serialize", "parse"):
        items = load_corpus(args.input, args.kind)
        keys = ("structure",) if command == "geom" else (("spectrum",) if command == "serialize" else ("text", "spectrum"))
        stream = _single_jobs(items, keys)
    else:
        preds = load_corpus(args.pred, args.kind)
        truths = load_corpus(args.truth, args.kind)
        stream = _paired_jobs(preds, truths, whole_record=command == "fpsim")
    return _execute(worker, cfg, stream, args.jobs)


def _taskgen_rows(args, cfg: RunConfig, agg: Aggregate) -> Iterator[dict]:
    records = []
    for item in load_corpus(args.input, "jsonl"):
        if isinstance(item, CorpusError):
            yield {"id": item.id, "error": item.message}
            continue
        try:
            records.append(MoleculeRecord.from_dict(item.data))
        except (SpectraKitError, KeyError, TypeError) as exc:
            yield {"id": item.id, "error": _error_text(exc)}
    templates = load_templates(args.templates)
    parts = split([r.id for r in records], args.fractions, cfg.seed)
    pools = partition_templates(templates, args.fractions, cfg.seed) if args.partition_templates else None
    assignment = parts.assignment()
    for name in SPLIT_NAMES:
        agg.tally(f"split.{name}", len(parts.as_dict()[name]))
    for name in SPLIT_NAMES:
        members = [r for r in records if assignment[r.id] == name]
        if not members:
            continue
        for task in args.tasks:
            for fmt in args.formats:
                usable = [r for r in members if _has_fields(r, task)]
                agg.warn("skipped_missing_field", len(members) - len(usable))
                if not usable:
                    continue
                try:
                    out = generate(usable, task, fmt, pools[name] if pools else templates, cfg.seed)
                except NotEnoughDistractors as exc:
                    yield {"id": f"{name}/{task}/{fmt}", "error": _error_text(exc)}
                    continue
                for inst in out:
                    agg.tally(f"{task}.{fmt}")
                    try:
                        parse_answer(inst)
                        ok = score_answer(inst, inst.answer) == 1.0
                    except SpectraKitError:
                        ok = False
                    yield {"id": f"{inst.source_id}/{task}/{fmt}", **inst.to_dict(),
                           "split": name, "self_check": ok}


def _has_fields(record: MoleculeRecord, task: str) -> bool:
    if task == "structure_gen":
        return record.graph is not None
    if task in ("iupac_to_smiles", "smiles_to_iupac"):
        return bool(record.iupac)
    if task in ("spectrum_to_smiles", "smiles_to_spectrum"):
        return bool(record.spectra)
    return True


def _write_report(report: dict, path: str | None, stdout: TextIO) -> None:
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_report(args, stdout: TextIO, stderr: TextIO) -> int:
    reports = []
    for path in args.merge:
        try:
            with open(path, encoding="utf-8") as fh:
                reports.append(json.load(fh))
        except FileNotFoundError:
            raise InputNotFound(f"input not found: {path}") from None
        except (OSError, ValueError) as exc:
            raise ConfigParseError(f"cannot read report {path}: {exc}") from None
    first = reports[0]
    for path, rep in zip(args.merge, reports):
        if rep.get("format") != REPORT_FORMAT:
            raise ConfigParseError(f"{path} is not a spectrakit report")
        if rep["command"] != first["command"]:
            raise ConfigMismatch(f"cannot merge {rep['command']} with {first['command']} reports")
        if rep["config"] != first["config"]:
            raise ConfigMismatch(f"{path} was produced with a different configuration")
    agg = Aggregate.from_report(first)
    for rep in reports[1:]:
        agg.merge(Aggregate.from_report(rep))
    report = agg.report(first["config"], None)
    report["merged_from"] = list(args.merge)
    _write_report(report, args.out, stdout)
    return EXIT_OK


def _overrides(args) -> dict:
    pairs = {
        ("nmr", "tau_c"): "tau_c",
        ("nmr", "tau_h"): "tau_h",
        ("nmr", "sigma"): "sigma",
        ("binning.ir", "bin_width"): "ir_bin_width",
        ("binning.ms", "bin_width"): "ms_bin_width",
        ("geometry", "alpha"): "alpha",
        ("geometry", "beta"): "beta",
        ("fingerprint", "k_bits"): "k_bits",
        ("fingerprint", "l_max"): "l_max",
        ("seq", "tokenizer"): "scheme",
        ("seq", "canonicalizer"): "canonicalizer",
        ("run", "seed"): "seed",
    }
    return {key: getattr(args, attr, None) for key, attr in pairs.items()}


def run(argv: list[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if "--manual" in argv:
        stdout.write(manual(parser))
        return EXIT_OK
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command is None:
        parser.print_usage(stderr)
        return EXIT_INPUT
    if args.command == "taskgen":
        args.tasks = args.tasks or list(TASKS)
        args.formats = args.formats or list(FORMATS)
    try:
        if args.command == "report":
            return _cmd_report(args, stdout, stderr)
        if args.command == "score-seq" and not args.input and not (args.pred and args.truth):
            raise ConfigParseError("score-seq needs --in, or both --pred and --truth")
        cfg = load_config(args.config, overrides=_overrides(args))
        if getattr(args, "jobs", 1) < 1:
            raise ConfigParseError("--jobs must be >= 1")
        agg = Aggregate(args.command)
        with ExitStack() as stack:
            rows_out = None
            if args.rows:
                rows_out = stack.enter_context(open(args.rows, "w", encoding="utf-8"))
            rows = _taskgen_rows(args, cfg, agg) if args.command == "taskgen" else _rows_for(args, cfg)
            for row in rows:
                agg.add(row)
                if "error" in row:
                    stderr.write(f"spectrakit: record {row['id']}: {row['error']}\n")
                if rows_out is not None:
                    rows_out.write(dumps(row) + "\n")
        report = agg.report(cfg.echo(), args.rows)
        _write_report(report, args.out, stdout)
        for name, count in sorted(agg.warnings.items()):
            stderr.write(f"spectrakit: warning: {name}: {count}\n")
        if args.strict and agg.n_errors:
            return EXIT_RECORD_ERRORS
        return EXIT_OK
    except (InputNotFound, PermissionDenied, ConfigParseError, ConfigMismatch) as exc:
        stderr.write(f"spectrakit: error: {exc}\n")
        return EXIT_INPUT
    except (SpectraKitError, OSError) as exc:
        stderr.write(f"spectrakit: error: {_error_text(exc)}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


# --- argument parsing --------------------------------------------------------------


def _fractions(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated fractions, e.g. 0.8,0.1,0.1")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fractions {text!r}") from None
    if any(v < 0 for v in values) or not math.isclose(sum(values), 1.0, abs_tol=1e-9):
        raise argparse.ArgumentTypeError("fractions must be non-negative and sum to 1")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectrakit",
        description="Evaluate generated spectra, SMILES and 3D structures against references.",
    )
    parser.add_argument("--version", action="version", version=f"spectrakit {__version__}")
    parser.add_argument("--manual", action="store_true", help="print the full manual for every subcommand")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p: argparse.ArgumentParser, parallel: bool = True) -> None:
        p.add_argument("--config", help="INI configuration file (env overrides: SPECTRAKIT_<SECTION>_<KEY>)")
        p.add_argument("--out", help="aggregate report path (default: stdout)")
        p.add_argument("--rows", help="per-record JSONL output path")
        p.add_argument("--strict", action="store_true", help="exit 1 if any record fails")
        p.add_argument("--seed", type=int, help="random seed (overrides [run] seed)")
        if parallel:
            p.add_argument("--jobs", type=int, default=1, help="worker processes; output order is unchanged")
        else:
            p.set_defaults(jobs=1)

    def paired(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--pred", required=required, help="predictions (JSONL or directory)")
        p.add_argument("--truth", required=required, help="references, same ids in the same order")
        p.add_argument("--kind", choices=CORPUS_KINDS, help="corpus layout (default: detect)")

    p = sub.add_parser("serialize", help="spectrum dicts (JSONL 'spectrum' field) to tagged text")
    p.add_argument("--in", dest="input", required=True, help="JSONL with a 'spectrum' dict per record")
    p.add_argument("--kind", choices=CORPUS_KINDS)
    common(p)

    p = sub.add_parser("parse", help="tagged spectrum text (JSONL 'text' field) to spectrum dicts")
    p.add_argument("--in", dest="input", required=True, help="JSONL with a 'text' string per record")
    p.add_argument("--kind", choices=CORPUS_KINDS)
    common(p)

    p = sub.add_parser("score-nmr13c", help="13C peak matching precision/recall/F1/MAE")
    paired(p)
    p.add_argument("--tau-c", type=float, help="13C match tolerance, ppm")
    common(p)

    p = sub.add_parser("score-nmr1h", help="1H weighted Jaccard plus precision/recall/F1/MAE")
    paired(p)
    p.add_argument("--tau-h", type=float, help="1H match tolerance, ppm")
    p.add_argument("--sigma", type=float, help="Gaussian weight width, ppm")
    common(p)

    p = sub.add_parser("score-ir", help="IR binned cosine similarity")
    paired(p)
    p.add_argument("--ir-bin-width", type=float, help="bin width, cm-1")
    common(p)

    p = sub.add_parser("score-ms", help="MS binned cosine similarity")
    paired(p)
    p.add_argument("--ms-bin-width", type=float, help="bin width, m/z")
    common(p)

    p = sub.add_parser("score-seq", help="token and sequence accuracy of generated strings")
    p.add_argument("--in", dest="input", help="single JSONL with 'truth' and 'pred' fields (instead of --pred/--truth)")
    paired(p, required=False)
    p.add_argument("--scheme", choices=("character", "smiles_atoms"), help="tokenizer")
    p.add_argument("--canonicalizer", choices=sorted(CANONICALIZERS), help="sequence equality rule")
    common(p)

    p = sub.add_parser("geom", help="SDF validity, atom clashes and bond-length violations")
    p.add_argument("--in", dest="input", required=True, help="SDF file, directory or JSONL with 'structure'")
    p.add_argument("--kind", choices=CORPUS_KINDS)
    p.add_argument("--alpha", type=float, help="clash factor")
    p.add_argument("--beta", type=float, help="bond-length tolerance fraction")
    common(p)

    p = sub.add_parser("fpsim", help="path, torsion and atom-pair Tanimoto similarities")
    paired(p)
    p.add_argument("--k-bits", type=int, help="fingerprint length (power of two)")
    p.add_argument("--l-max", type=int, help="maximum path length in bonds")
    common(p)

    p = sub.add_parser("taskgen", help="generate instruction records with molecule-level splits")
    p.add_argument("--in", dest="input", required=True, help="JSONL of molecule records")
    p.add_argument("--task", dest="tasks", action="append", choices=TASKS, help="repeatable; default all")
    p.add_argument("--format", dest="formats", action="append", choices=FORMATS, help="repeatable; default all")
    p.add_argument("--fractions", type=_fractions, default=(0.8, 0.1, 0.1), help="train,val,test")
    p.add_argument("--templates", help="template pool JSON (default: bundled)")
    p.add_argument("--partition-templates", action="store_true", help="disjoint template pools per split")
    common(p, parallel=False)

    p = sub.add_parser("report", help="merge aggregate reports produced with the same configuration")
    p.add_argument("--merge", nargs="+", required=True, metavar="REPORT")
    p.add_argument("--out", help="merged report path (default: stdout)")

    return parser


def manual(parser: argparse.ArgumentParser | None = None) -> str:
    """Markdown manual generated from the argument parser."""
    parser = parser or build_parser()
    sections = ["# spectrakit command line\n", "```", parser.format_help().rstrip(), "```\n"]
    for action in parser._subparsers._group_actions:
        for name, sub in action.choices.items():
            sections += [f"## {name}\n", "```", sub.format_help().rstrip(), "```\n"]
    return "\n".join(sections)


if __name__ == "__main__":
    main()
