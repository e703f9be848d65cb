from dataclasses import replace
from pathlib import Path

import pytest

from metachange.config import (
    RunConfig,
    SliceDef,
    from_header_lines,
    header_lines,
    load_config,
    parse_override,
)
from metachange.errors import FormatError


EXAMPLE = Path(__file__).resolve().parent.parent / "configs" / "example.toml"


def test_example_config_loads():
    cfg = load_config(EXAMPLE)
    assert cfg.corpus_path
    assert len(cfg.slices) == 5
    assert cfg.slices[0] == SliceDef(label="1500-1600", start=1500, end=1600)
    assert cfg.slices[-1] == SliceDef(label="1850-1926", start=1850, end=1926)
    assert cfg.window == 2
    assert cfg.mon_n == "auto"
    assert cfg.mon_k == 1000
    assert cfg.seed == 11
    assert cfg.late_period == (1850, 1926)
    assert cfg.base_dir == str(EXAMPLE.parent)


def test_resolve_paths_relative_to_config_file(tmp_path):
    cfg_file = tmp_path / "conf" / "run.toml"
    cfg_file.parent.mkdir()
    cfg_file.write_text('[corpus]\npath = "korpus.txt"\n')
    cfg = load_config(cfg_file)
    assert cfg.resolve(cfg.corpus_path) == cfg_file.parent / "korpus.txt"
    assert cfg.resolve("/abs/pfad") == Path("/abs/pfad")
    assert cfg.out_dir == cfg_file.parent / "out"


def test_overrides_apply_in_order(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('[run]\nseed = 3\n')
    cfg = load_config(cfg_file, overrides=["run.seed=4", "run.seed=5"])
    assert cfg.seed == 5


def test_override_parsing_literals():
    assert parse_override("run.seed=7") == ("run.seed", 7)
    assert parse_override("h2.symmetric_cap=false") == ("h2.symmetric_cap", False)
    assert parse_override('corpus.path="mit blank.txt"') == ("corpus.path", "mit blank.txt")
    assert parse_override('measures.list=["H", "H2"]') == ("measures.list", ["H", "H2"])
    # unquoted strings fall back to the raw text
    assert parse_override("h2.aggregate=mean") == ("h2.aggregate", "mean")
    assert parse_override("mon.n=auto") == ("mon.n", "auto")
    with pytest.raises(FormatError, match="key=value"):
        parse_override("nur-ein-wort")


def test_unknown_key_rejected(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text("[run]\nseed = 3\n")
    with pytest.raises(FormatError, match="unknown configuration key 'run.saat'"):
        load_config(cfg_file, overrides=["run.saat=1"])
    cfg_file.write_text("[tippfehler]\nx = 1\n")
    with pytest.raises(FormatError, match="tippfehler.x"):
        load_config(cfg_file)


def test_tuple_keys_coerced_and_validated(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('[measures]\nlist = ["H", "FREQ_N"]\n')
    cfg = load_config(cfg_file)
    assert cfg.measures == ("H", "FREQ_N")
    with pytest.raises(FormatError, match="must be a list"):
        load_config(cfg_file, overrides=["measures.list=H"])


def test_malformed_toml_reports_file(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text("[run\nseed = 3\n")
    with pytest.raises(FormatError, match="run.toml"):
        load_config(cfg_file)


def test_slices_validation():
    with pytest.raises(FormatError, match="triples"):
        from_header_lines(['# cfg slices = [["nur-label"]]'])


def test_header_round_trip_is_lossless():
    cfg = RunConfig(
        corpus_path="daten/korpus.txt",
        punctuation_tags=("$,", "$("),
        slices=(SliceDef("alt", 1500, 1600), SliceDef("neu", 1850, 1926)),
        measures=("H", "H_OLS"),
        mon_n=120,
        mon_k=77,
        h2_symmetric_cap=False,
        testset_path="t.tsv",
        gold_path="g.tsv",
        annotators=("A1", "A2"),
        seed=42,
        late_period=(1850, 1926),
        output_dir="ausgabe",
    )
    lines = header_lines(cfg)
    assert all(line.startswith("# cfg ") for line in lines)
    rebuilt = from_header_lines(lines, base_dir="anders")
    # base_dir is environment, not configuration, so compare everything else
    assert replace(rebuilt, base_dir=".") == replace(cfg, base_dir=".")


def test_header_round_trip_preserves_auto_mon():
    cfg = RunConfig(mon_n="auto")
    rebuilt = from_header_lines(header_lines(cfg))
    assert rebuilt.mon_n == "auto"


def test_header_ignores_foreign_lines():
    cfg = RunConfig(seed=9)
    lines = ["# columns: a\tb", *header_lines(cfg), "1\t2"]
    assert from_header_lines(lines).seed == 9
