"""Run configuration: TOML file, command-line overrides, report headers.

Every report the pipeline writes embeds the fully resolved configuration as
``# cfg <key> = <value>`` lines, and ``from_header_lines`` reads them back,
so any output file documents exactly how to reproduce itself.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import FormatError

HEADER_PREFIX = "# cfg "


@dataclass(frozen=True)
class SliceDef:
    label: str
    start: int
    end: int


@dataclass(frozen=True)
class RunConfig:
    corpus_path: str = ""
    min_corpus_freq: int = 5
    punctuation_tags: tuple[str, ...] = ()
    slices: tuple[SliceDef, ...] = ()
    window: int = 2
    boundary: str = "sentence"
    measures: tuple[str, ...] = ("H", "H2", "FREQ_N", "H_MON", "H_OLS")
    mon_n: int | str = "auto"
    mon_k: int = 1000
    ols_window_n: int = 1000
    h2_top_n: int = 100
    h2_aggregate: str = "median"
    h2_metric: str = "PLMI"
    h2_symmetric_cap: bool = True
    testset_path: str = ""
    gold_path: str = ""
    judgments_path: str = ""
    annotation_key_path: str = ""
    annotators: tuple[str, ...] = ()
    per_period: int = 20
    min_context_words: int = 10
    resamples: int = 100000
    seed: int = 1
    late_period: tuple[int, int] = (1850, 1926)
    last_century_start: int = 1800
    output_dir: str = "out"
    #: directory relative paths are resolved against; not part of the settings
    base_dir: str = "."

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def out_dir(self) -> Path:
        return self.resolve(self.output_dir)


#: dotted TOML key -> RunConfig attribute
_KEYS = {
    "corpus.path": "corpus_path",
    "corpus.min_freq": "min_corpus_freq",
    "corpus.punctuation_tags": "punctuation_tags",
    "matrix.window": "window",
    "matrix.boundary": "boundary",
    "measures.list": "measures",
    "mon.n": "mon_n",
    "mon.k": "mon_k",
    "ols.window_n": "ols_window_n",
    "h2.top_n": "h2_top_n",
    "h2.aggregate": "h2_aggregate",
    "h2.metric": "h2_metric",
    "h2.symmetric_cap": "h2_symmetric_cap",
    "eval.testset": "testset_path",
    "eval.gold": "gold_path",
    "eval.resamples": "resamples",
    "annotation.per_period": "per_period",
    "annotation.min_context_words": "min_context_words",
    "annotation.annotators": "annotators",
    "annotation.judgments": "judgments_path",
    "annotation.key": "annotation_key_path",
    "run.seed": "seed",
    "run.late_period": "late_period",
    "run.last_century_start": "last_century_start",
    "output.dir": "output_dir",
}

_TUPLE_KEYS = {"punctuation_tags", "measures", "annotators", "late_period"}


def _flatten(mapping: dict, prefix: str = "") -> Iterable[tuple[str, Any]]:
    for key, value in mapping.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, f"{dotted}.")
        else:
            yield dotted, value


def _apply(cfg: RunConfig, dotted: str, value: Any) -> RunConfig:
    if dotted == "slices":
        try:
            slices = tuple(SliceDef(label=str(s[0]), start=int(s[1]), end=int(s[2])) for s in value)
        except (TypeError, IndexError, ValueError):
            raise FormatError(f"slices must be [label, start, end] triples, got {value!r}") from None
        return replace(cfg, slices=slices)
    attr = _KEYS.get(dotted)
    if attr is None:
        raise FormatError(f"unknown configuration key {dotted!r}")
    if attr in _TUPLE_KEYS:
        if not isinstance(value, (list, tuple)):
            raise FormatError(f"{dotted} must be a list, got {value!r}")
        value = tuple(value)
    return replace(cfg, **{attr: value})


def _from_mapping(data: dict, base_dir: str) -> RunConfig:
    cfg = RunConfig(base_dir=base_dir)
    raw_slices = data.pop("slice", None)
    for dotted, value in _flatten(data):
        cfg = _apply(cfg, dotted, value)
    if raw_slices is not None:
        triples = [[s.get("label", f"{s['start']}-{s['end']}"), s["start"], s["end"]] for s in raw_slices]
        cfg = _apply(cfg, "slices", triples)
    return cfg


def parse_override(text: str) -> tuple[str, Any]:
    """Parse one --set KEY=VALUE argument; VALUE is a TOML literal."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise FormatError(f"override must look like key=value, got {text!r}")
    raw = raw.strip()
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        # bare strings are allowed unquoted for convenience
        value = raw
    return key, value


def load_config(path: Path | str, overrides: Iterable[str] = ()) -> RunConfig:
    """Load a TOML config file and apply --set overrides in order."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None
    cfg = _from_mapping(data, base_dir=str(path.parent))
    for text in overrides:
        key, value = parse_override(text)
        cfg = _apply(cfg, key, value)
    return cfg


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, SliceDef):
        return _format_value([value.label, value.start, value.end])
    raise TypeError(f"cannot serialize config value {value!r}")


def header_lines(cfg: RunConfig) -> list[str]:
    """The resolved settings as ``# cfg key = value`` lines."""
    lines = []
    for dotted in sorted(_KEYS):
        attr = _KEYS[dotted]
        lines.append(f"{HEADER_PREFIX}{dotted} = {_format_value(getattr(cfg, attr))}")
    lines.append(f"{HEADER_PREFIX}slices = {_format_value(list(cfg.slices))}")
    return lines


def from_header_lines(lines: Iterable[str], base_dir: str = ".") -> RunConfig:
    """Rebuild the configuration from report header lines."""
    toml_lines = []
    for line in lines:
        if line.startswith(HEADER_PREFIX):
            toml_lines.append(line[len(HEADER_PREFIX):])
    try:
        data = tomllib.loads("\n".join(toml_lines))
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(f"malformed config header: {exc}") from None
    raw_slices = data.pop("slices", None)
    cfg = RunConfig(base_dir=base_dir)
    for dotted, value in _flatten(data):
        cfg = _apply(cfg, dotted, value)
    if raw_slices is not None:
        cfg = _apply(cfg, "slices", raw_slices)
    return cfg
