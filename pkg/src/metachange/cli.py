"""Command-line pipeline: build, score, eval, annotate, agreement.

Every subcommand takes ``--config FILE`` plus any number of ``--set
key=value`` overrides.  All outputs are plain TSV under the configured
output directory, carry the resolved configuration in their header, and are
byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Iterable, Sequence

from .change import (
    ChangeScore,
    MeasureParams,
    PeriodData,
    TargetSpec,
    load_testset,
    rank_targets,
    score_target,
)
from .config import RunConfig, header_lines, load_config
from .corpus import TimeSlice, parse_corpus, preprocess, slice_corpus
from .errors import (
    DegenerateFitError,
    FormatError,
    InsufficientDataError,
    KeyMismatchError,
    MetachangeError,
    UndefinedMeasureError,
)
from .evaluation import (
    UNDEFINED_MARK,
    agreement_table,
    evaluate,
    format_gold_entry,
    gold_header,
    load_gold,
    load_judgments,
    load_pair_records,
    render_eval_text,
    render_eval_tsv,
    sample_annotation_pairs,
    shuffle_pairs,
)
from .matrix import CoocMatrix, build_matrix, load_matrix, matrix_paths, save_matrix
from .measures import AssocMetric, Measure, all_entropies
from .normalize import MonConfig, mon_choose_n, ols_delta
from .seeding import derive_seed


def _write_report(path: Path, cfg: RunConfig, lines: Iterable[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines(cfg):
            fh.write(line + "\n")
        for line in lines:
            fh.write(line + "\n")


def _load_slices(cfg: RunConfig) -> list:
    corpus_path = cfg.resolve(cfg.corpus_path)
    with open(corpus_path, encoding="utf-8") as fh:
        documents = parse_corpus(fh)
    return preprocess(documents, cfg.min_corpus_freq, cfg.punctuation_tags)


def _slice_dir(cfg: RunConfig) -> Path:
    return cfg.out_dir / "slices"


# --------------------------------------------------------------------------
# build


def cmd_build(cfg: RunConfig) -> int:
    if not cfg.slices:
        raise FormatError("no slices configured; add [[slice]] tables to the config")
    documents = _load_slices(cfg)
    out = _slice_dir(cfg)
    for sdef in cfg.slices:
        ts = slice_corpus(documents, sdef.start, sdef.end, sdef.label)
        matrix = build_matrix(ts, window=cfg.window, boundary=cfg.boundary)
        save_matrix(matrix, out)
        if matrix.n_tokens == 0:
            print(f"warning: slice {sdef.label!r} contains no tokens", file=sys.stderr)
        print(
            f"{sdef.label}: tokens={matrix.n_tokens} "
            f"vocabulary={len(matrix.token_freq)} pairs={matrix.total_pairs}"
        )
    return 0


# --------------------------------------------------------------------------
# score


def _required_periods(targets: Sequence[TargetSpec]) -> dict[str, tuple[int, int]]:
    periods: dict[str, tuple[int, int]] = {}
    for t in targets:
        periods[t.period1_label] = t.period1
        periods[t.period2_label] = t.period2
    return periods


def _load_matrices(cfg: RunConfig, labels: Iterable[str]) -> dict[str, CoocMatrix]:
    directory = _slice_dir(cfg)
    matrices = {}
    for label in sorted(labels):
        try:
            matrices[label] = load_matrix(directory, label)
        except FileNotFoundError:
            raise MetachangeError(
                f"matrix for slice {label!r} not found under {directory}; "
                "run the build subcommand for a config covering that slice first"
            ) from None
    return matrices


def cmd_score(cfg: RunConfig) -> int:
    if not cfg.measures:
        print("warning: no measures configured; nothing to score", file=sys.stderr)
        return 0
    measures = [Measure(m) for m in cfg.measures]
    targets = load_testset(
        cfg.resolve(cfg.testset_path), cfg.late_period, cfg.last_century_start
    )
    periods = _required_periods(targets)
    matrices = _load_matrices(cfg, periods)

    slices: dict[str, TimeSlice] = {}
    mon_cfg: MonConfig | None = None
    mon_absent: set[str] = set()
    if Measure.H_MON in measures:
        documents = _load_slices(cfg)
        for label, (start, end) in sorted(periods.items()):
            slices[label] = slice_corpus(documents, start, end, label)
        counts = {
            t.lexeme: (
                matrices[t.period1_label].token_freq.get(t.lexeme, 0),
                matrices[t.period2_label].token_freq.get(t.lexeme, 0),
            )
            for t in targets
        }
        mon_absent = {lex for lex, pair in counts.items() if min(pair) < 1}
        present = {lex: pair for lex, pair in counts.items() if lex not in mon_absent}
        if cfg.mon_n == "auto":
            if not present:
                mon_absent = set(counts)
            else:
                mon_cfg = MonConfig(
                    n_contexts=mon_choose_n(present),
                    k_samples=cfg.mon_k,
                    seed=derive_seed(cfg.seed, "mon"),
                )
        else:
            mon_cfg = MonConfig(
                n_contexts=int(cfg.mon_n),
                k_samples=cfg.mon_k,
                seed=derive_seed(cfg.seed, "mon"),
            )

    entropies: dict[str, dict[str, float]] = {}
    if Measure.H_OLS in measures:
        entropies = {label: all_entropies(m) for label, m in matrices.items()}

    params = MeasureParams(
        window=cfg.window,
        boundary=cfg.boundary,
        h2_top_n=cfg.h2_top_n,
        h2_aggregate=cfg.h2_aggregate,
        h2_metric=AssocMetric(cfg.h2_metric),
        h2_symmetric_cap=cfg.h2_symmetric_cap,
        mon=mon_cfg,
        ols_window_n=cfg.ols_window_n,
    )

    scores: list[ChangeScore] = []
    exclusions: list[tuple[TargetSpec, Measure, str]] = []
    for measure in measures:
        for target in targets:
            if measure is Measure.H_MON and target.lexeme in mon_absent:
                exclusions.append(
                    (target, measure, "absent from one of its periods, no occurrences to sample")
                )
                continue
            p1 = PeriodData(
                matrix=matrices[target.period1_label],
                slice=slices.get(target.period1_label),
                entropies=entropies.get(target.period1_label),
            )
            p2 = PeriodData(
                matrix=matrices[target.period2_label],
                slice=slices.get(target.period2_label),
                entropies=entropies.get(target.period2_label),
            )
            try:
                scores.append(score_target(target, p1, p2, measure, params))
            except (UndefinedMeasureError, InsufficientDataError, DegenerateFitError) as exc:
                exclusions.append((target, measure, str(exc)))

    out = cfg.out_dir
    change_lines = ["# columns: lexeme\ttype\tmeasure\tvalue_p1\tvalue_p2\td\trank"]
    for measure in measures:
        ranked = rank_targets([s for s in scores if s.measure is measure], "all")
        for s in ranked:
            change_lines.append(
                f"{s.target.lexeme}\t{s.target.type}\t{measure.value}"
                f"\t{s.value_p1:.6f}\t{s.value_p2:.6f}\t{s.d:.6f}\t{s.rank}"
            )
    _write_report(out / "changes.tsv", cfg, change_lines)

    value_rows = []
    for s in scores:
        value_rows.append((s.target.lexeme, s.target.period1_label, s.measure.value, s.value_p1))
        value_rows.append((s.target.lexeme, s.target.period2_label, s.measure.value, s.value_p2))
    value_rows.sort()
    measure_lines = ["# columns: target\tslice\tmeasure\tvalue"]
    measure_lines += [f"{t}\t{sl}\t{m}\t{v:.6f}" for t, sl, m, v in value_rows]
    _write_report(out / "measures.tsv", cfg, measure_lines)

    exclusion_lines = ["# columns: lexeme\tmeasure\treason"]
    exclusion_lines += [
        f"{t.lexeme}\t{m.value}\t{reason}" for t, m, reason in exclusions
    ]
    _write_report(out / "exclusions.tsv", cfg, exclusion_lines)

    if Measure.H_OLS in measures:
        fit_lines = ["# columns: target\tslice\talpha\tbeta\twindow_n\tn_points\tanchor_freq\tdelta"]
        for target in targets:
            for label in (target.period1_label, target.period2_label):
                try:
                    fit, delta = ols_delta(
                        matrices[label], target.lexeme, cfg.ols_window_n,
                        entropies=entropies.get(label),
                    )
                except (UndefinedMeasureError, DegenerateFitError):
                    continue
                fit_lines.append(
                    f"{target.lexeme}\t{label}\t{fit.alpha:.6f}\t{fit.beta:.6f}"
                    f"\t{fit.window_n}\t{fit.n_points}\t{fit.anchor_freq}\t{delta:.6f}"
                )
        _write_report(out / "ols_fits.tsv", cfg, fit_lines)

    print(
        f"scored {len(targets)} targets under {len(measures)} measure(s): "
        f"{len(scores)} change scores, {len(exclusions)} exclusion(s)"
    )
    return 0


# --------------------------------------------------------------------------
# eval


def _load_changes(path: Path, targets: Sequence[TargetSpec]) -> list[ChangeScore]:
    by_key = {t.lexeme: t for t in targets}
    scores = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 7:
                raise FormatError(f"{path}: expected 7 change-report columns", line_no)
            key, _type, measure, v1, v2, d, rank = fields[:7]
            target = by_key.get(key)
            if target is None:
                raise KeyMismatchError(
                    f"{path}: change row for {key!r}, which is not in the test set",
                    unexpected=(key,),
                )
            scores.append(
                ChangeScore(
                    target=target,
                    measure=Measure(measure),
                    value_p1=float(v1),
                    value_p2=float(v2),
                    d=float(d),
                    rank=int(rank),
                )
            )
    return scores


def cmd_eval(cfg: RunConfig) -> int:
    targets = load_testset(
        cfg.resolve(cfg.testset_path), cfg.late_period, cfg.last_century_start
    )
    gold = load_gold(cfg.resolve(cfg.gold_path))
    scores = _load_changes(cfg.out_dir / "changes.tsv", targets)
    report = evaluate(scores, gold, resamples=cfg.resamples, seed=cfg.seed)
    _write_report(cfg.out_dir / "table2.tsv", cfg, render_eval_tsv(report))
    text = render_eval_text(report)
    _write_report(cfg.out_dir / "table2.txt", cfg, text)
    for line in text:
        print(line)
    return 0


# --------------------------------------------------------------------------
# annotate


def cmd_annotate(cfg: RunConfig) -> int:
    targets = load_testset(
        cfg.resolve(cfg.testset_path), cfg.late_period, cfg.last_century_start
    )
    documents = _load_slices(cfg)
    slices: dict[str, TimeSlice] = {}
    for label, (start, end) in sorted(_required_periods(targets).items()):
        slices[label] = slice_corpus(documents, start, end, label)

    all_pairs = []
    failures = []
    for target in targets:
        try:
            all_pairs.extend(
                sample_annotation_pairs(
                    slices[target.period1_label],
                    slices[target.period2_label],
                    target.lexeme,
                    per_period=cfg.per_period,
                    min_len=cfg.min_context_words,
                    seed=cfg.seed,
                )
            )
        except InsufficientDataError as exc:
            failures.append(str(exc))
    if failures:
        raise InsufficientDataError(
            "cannot export annotation pairs:\n  " + "\n  ".join(failures)
        )
    shuffled = shuffle_pairs(all_pairs, cfg.seed)
    type_by_key = {t.lexeme: t.type for t in targets}
    period_by_key = {t.lexeme: (t.period1_label, t.period2_label) for t in targets}

    item_lines = ["item_id\ttarget\tcontext1\tcontext2\tM1_of_M2\tM2_of_M1\tcomments"]
    key_lines = [
        "# columns: item_id\ttarget\ttype\tearlier_doc\tearlier_date\tearlier_period"
        "\tlater_doc\tlater_date\tlater_period\tdisplay_order"
    ]
    for item_id, pair in enumerate(shuffled, start=1):
        first, second = (
            (pair.earlier, pair.later) if pair.display_order == "EL" else (pair.later, pair.earlier)
        )
        lemma = pair.target.rsplit(":", 1)[0]
        item_lines.append(f"{item_id}\t{lemma}\t{first.text}\t{second.text}\t\t\t")
        early_label, late_label = period_by_key[pair.target]
        key_lines.append(
            f"{item_id}\t{pair.target}\t{type_by_key[pair.target]}"
            f"\t{pair.earlier.doc_id}\t{pair.earlier.date}\t{early_label}"
            f"\t{pair.later.doc_id}\t{pair.later.date}\t{late_label}"
            f"\t{pair.display_order}"
        )

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "annotation_items.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(item_lines) + "\n")
    _write_report(out / "annotation_key.tsv", cfg, key_lines)
    print(f"wrote {len(shuffled)} annotation pairs covering {len(targets)} targets")
    return 0


# --------------------------------------------------------------------------
# agreement


def cmd_agreement(cfg: RunConfig) -> int:
    judgments = load_judgments(cfg.resolve(cfg.judgments_path))
    records = load_pair_records(cfg.resolve(cfg.annotation_key_path))
    entries, overall = agreement_table(
        judgments, records, list(cfg.annotators) or None
    )
    lines = [gold_header()]
    lines += [format_gold_entry(e) for e in entries]
    lines.append("# overall\t" + format_gold_entry(overall))
    _write_report(cfg.out_dir / "table1.tsv", cfg, lines)

    def show(v):
        return UNDEFINED_MARK if v is None else f"{v:.2f}"

    print(
        f"{len(entries)} targets; overall pct_plus "
        f"{show(overall.pct_plus_early)} -> {show(overall.pct_plus_late)} "
        f"(delta {show(overall.delta_pct_plus)})"
    )
    return 0


# --------------------------------------------------------------------------
# entry point

_COMMANDS = {
    "build": (cmd_build, "parse, preprocess and slice the corpus, then persist matrices"),
    "score": (cmd_score, "score test-set targets under the configured measures"),
    "eval": (cmd_eval, "correlate change rankings with the gold standard"),
    "annotate": (cmd_annotate, "export context pairs for human annotation"),
    "agreement": (cmd_agreement, "compute agreement statistics from judgments"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metachange",
        description="Detect metaphoric change via entropy over time-sliced co-occurrence matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (func, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            dest="overrides",
            help="override one configuration key (repeatable)",
        )
        p.set_defaults(func=func)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return args.func(cfg)
    except MetachangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
