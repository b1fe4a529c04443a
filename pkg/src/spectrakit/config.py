"""Run configuration: every metric default in one place, stored as an INI file.

Each ``[section] key`` can be overridden from the environment with
``SPECTRAKIT_<SECTION>_<KEY>`` (upper case, dots in section names become
underscores), e.g. ``SPECTRAKIT_NMR_TAU_C=0.4`` or ``SPECTRAKIT_BINNING_IR_BIN_WIDTH=4``.
Precedence: defaults < config file < environment < explicit command-line flags.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, field, replace
from typing import Mapping

from spectrakit.errors import ConfigParseError
from spectrakit.fingerprints import FingerprintConfig
from spectrakit.geometry import GeometryParams, parse_bond_key_name, table_versions
from spectrakit.nmr_metrics import NmrConfig
from spectrakit.seq_metrics import CANONICALIZERS, SCHEMES
from spectrakit.vec_metrics import IR_BINNING, MS_BINNING, BinningConfig

ENV_PREFIX = "SPECTRAKIT_"


@dataclass(frozen=True)
class RunConfig:
    nmr: NmrConfig = field(default_factory=NmrConfig)
    ir_binning: BinningConfig = IR_BINNING
    ms_binning: BinningConfig = MS_BINNING
    geometry: GeometryParams = field(default_factory=GeometryParams)
    fingerprint: FingerprintConfig = field(default_factory=FingerprintConfig)
    tokenizer: str = "character"
    canonicalizer: str = "smiles"
    seed: int = 0
    # Paths of substituted reference tables; None means the bundled tables.
    vdw_radii_file: str | None = None
    bond_lengths_file: str | None = None

    def __post_init__(self):
        if self.tokenizer not in SCHEMES:
            raise ConfigParseError(f"unknown tokenizer {self.tokenizer!r}; expected one of {SCHEMES}")
        if self.canonicalizer not in CANONICALIZERS:
            raise ConfigParseError(
                f"unknown canonicalizer {self.canonicalizer!r}; expected one of {sorted(CANONICALIZERS)}"
            )

    def echo(self) -> dict:
        """Full resolved configuration, including the geometry reference tables."""
        return {
            "nmr": {"tau_c": self.nmr.tau_c, "tau_h": self.nmr.tau_h, "sigma": self.nmr.sigma},
            "binning": {"ir": _binning_dict(self.ir_binning), "ms": _binning_dict(self.ms_binning)},
            "geometry": {
                **self.geometry.to_dict(),
                "vdw_radii_file": self.vdw_radii_file,
                "bond_lengths_file": self.bond_lengths_file,
                "bundled_table_versions": table_versions(),
            },
            "fingerprint": {
                "k_bits": self.fingerprint.k_bits,
                "l_max": self.fingerprint.l_max,
                "hash_seed": self.fingerprint.hash_seed,
                "include_hydrogens": self.fingerprint.include_hydrogens,
                "include_charge": self.fingerprint.include_charge,
            },
            "seq": {"tokenizer": self.tokenizer, "canonicalizer": self.canonicalizer},
            "run": {"seed": self.seed},
        }

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        for section, values in _flat(self).items():
            parser[section] = {k: _render(v) for k, v in values.items()}
        lines = []
        for section in parser.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in parser[section].items())
            lines.append("")
        return "\n".join(lines)


def _binning_dict(cfg: BinningConfig) -> dict:
    return {"low": cfg.low, "high": cfg.high, "bin_width": cfg.bin_width, "spread_sigma": cfg.spread_sigma}


def _render(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _flat(cfg: RunConfig) -> dict[str, dict]:
    return {
        "nmr": {"tau_c": cfg.nmr.tau_c, "tau_h": cfg.nmr.tau_h, "sigma": cfg.nmr.sigma},
        "binning.ir": _binning_dict(cfg.ir_binning),
        "binning.ms": _binning_dict(cfg.ms_binning),
        "geometry": {
            "alpha": cfg.geometry.alpha,
            "beta": cfg.geometry.beta,
            "exclude_13": cfg.geometry.exclude_13,
            "exclude_14": cfg.geometry.exclude_14,
            "exclude_hydrogens": cfg.geometry.exclude_hydrogens,
            "vdw_radii_file": cfg.vdw_radii_file,
            "bond_lengths_file": cfg.bond_lengths_file,
        },
        "fingerprint": {
            "k_bits": cfg.fingerprint.k_bits,
            "l_max": cfg.fingerprint.l_max,
            "hash_seed": cfg.fingerprint.hash_seed,
            "include_hydrogens": cfg.fingerprint.include_hydrogens,
            "include_charge": cfg.fingerprint.include_charge,
        },
        "seq": {"tokenizer": cfg.tokenizer, "canonicalizer": cfg.canonicalizer},
        "run": {"seed": cfg.seed},
    }


_DEFAULT_FLAT = _flat(RunConfig())


def env_name(section: str, key: str) -> str:
    return f"{ENV_PREFIX}{section.replace('.', '_').upper()}_{key.upper()}"


def _convert(raw: str, default, where: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigParseError(f"{where}: cannot read {raw!r} as {type(default).__name__}") from None
    return raw or None


def _load_table(path: str, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)[what]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigParseError(f"cannot load {what} table from {path}: {exc}") from None


def _build(values: Mapping[str, Mapping[str, object]]) -> RunConfig:
    g = values["geometry"]
    extra = {}
    if g["vdw_radii_file"]:
        extra["vdw_radii"] = {k: float(v) for k, v in _load_table(g["vdw_radii_file"], "radii").items()}
    if g["bond_lengths_file"]:
        raw = _load_table(g["bond_lengths_file"], "lengths")
        try:
            extra["bond_lengths"] = {parse_bond_key_name(k): float(v) for k, v in raw.items()}
        except (KeyError, ValueError) as exc:
            raise ConfigParseError(f"bad bond length key in {g['bond_lengths_file']}: {exc}") from None
    try:
        return RunConfig(
            nmr=NmrConfig(**values["nmr"]),
            ir_binning=BinningConfig(**values["binning.ir"]),
            ms_binning=BinningConfig(**values["binning.ms"]),
            geometry=GeometryParams(
                alpha=g["alpha"],
                beta=g["beta"],
                exclude_13=g["exclude_13"],
                exclude_14=g["exclude_14"],
                exclude_hydrogens=g["exclude_hydrogens"],
                **extra,
            ),
            fingerprint=FingerprintConfig(**values["fingerprint"]),
            tokenizer=values["seq"]["tokenizer"],
            canonicalizer=values["seq"]["canonicalizer"],
            seed=values["run"]["seed"],
            vdw_radii_file=g["vdw_radii_file"],
            bond_lengths_file=g["bond_lengths_file"],
        )
    except ConfigParseError:
        raise
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from None


def load_config(
    path: str | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[tuple[str, str], object] | None = None,
) -> RunConfig:
    """Resolve a :class:`RunConfig` from defaults, an INI file, the environment and overrides."""
    env = os.environ if env is None else env
    values = {section: dict(keys) for section, keys in _DEFAULT_FLAT.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigParseError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigParseError(f"{path}: {exc}") from None
        for section in parser.sections():
            if section not in values:
                raise ConfigParseError(f"{path}: unknown section [{section}]")
            for key, raw in parser[section].items():
                if key not in values[section]:
                    raise ConfigParseError(f"{path}: unknown key {key!r} in [{section}]")
                values[section][key] = _convert(raw, _DEFAULT_FLAT[section][key], f"{path} [{section}] {key}")
    for section, keys in _DEFAULT_FLAT.items():
        for key, default in keys.items():
            name = env_name(section, key)
            if name in env:
                values[section][key] = _convert(env[name], default, name)
    for (section, key), value in (overrides or {}).items():
        if value is not None:
            values[section][key] = value
    return _build(values)


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, seed=seed)
