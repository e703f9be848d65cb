"""Sparse target x context co-occurrence counting with a symmetric window.

Rows are raw conditional count vectors: every ordered position pair (i, j)
with 0 < |i - j| <= window inside one unit adds 1 to counts[key_i][key_j],
so the matrix is symmetric and square over the shared vocabulary.  Units are
sentences by default; ``boundary="document"`` lets windows cross sentence
breaks within a document.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .corpus import TimeSlice
from .errors import FormatError


@dataclass
class CoocMatrix:
    slice_label: str
    window: int
    rows: dict[str, Counter]
    row_sums: dict[str, int]
    token_freq: dict[str, int]
    #: sum of all cells; the pair-probability denominator
    total_pairs: int
    #: retained tokens in the slice, the frequency denominator
    n_tokens: int

    def count(self, target: str, context: str) -> int:
        row = self.rows.get(target)
        return row.get(context, 0) if row else 0

    @property
    def vocabulary(self) -> set[str]:
        return set(self.token_freq)


def _units(slice_: TimeSlice, boundary: str) -> Iterator[list[str]]:
    if boundary == "sentence":
        for sent in slice_.sentences:
            if sent.tokens:
                yield [t.key for t in sent.tokens]
    elif boundary == "document":
        for doc in slice_.documents:
            unit = [t.key for sent in doc.sentences for t in sent.tokens]
            if unit:
                yield unit
    else:
        raise ValueError(f"unknown window boundary {boundary!r}")


def build_matrix(slice_: TimeSlice, window: int = 2, boundary: str = "sentence") -> CoocMatrix:
    """Count co-occurrences within ``window`` positions on each side."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    rows: dict[str, Counter] = {}
    token_freq: Counter = Counter()
    for unit in _units(slice_, boundary):
        token_freq.update(unit)
        length = len(unit)
        for i, key in enumerate(unit):
            row = rows.get(key)
            if row is None:
                row = rows[key] = Counter()
            for j in range(max(0, i - window), min(length, i + window + 1)):
                if j != i:
                    row[unit[j]] += 1
    row_sums = {key: sum(row.values()) for key, row in rows.items()}
    return CoocMatrix(
        slice_label=slice_.label,
        window=window,
        rows=rows,
        row_sums=row_sums,
        token_freq=dict(token_freq),
        total_pairs=sum(row_sums.values()),
        n_tokens=slice_.token_count,
    )


def contexts_of(matrix: CoocMatrix, target: str) -> Counter:
    """The target's context row as a fresh Counter (empty if absent)."""
    return Counter(matrix.rows.get(target, {}))


def occurrence_contexts(
    slice_: TimeSlice, target: str, window: int = 2, boundary: str = "sentence"
) -> list[Counter]:
    """Per-occurrence context multisets of ``target``, in corpus order.

    Summing the returned Counters reproduces the target's matrix row.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    result = []
    for unit in _units(slice_, boundary):
        for i, key in enumerate(unit):
            if key == target:
                result.append(Counter(unit[max(0, i - window):i] + unit[i + 1:i + 1 + window]))
    return result


def matrix_paths(directory: Path | str, label: str) -> dict[str, Path]:
    directory = Path(directory)
    return {
        "counts": directory / f"{label}.counts.tsv",
        "meta": directory / f"{label}.meta.tsv",
        "freq": directory / f"{label}.freq.tsv",
    }


def save_matrix(matrix: CoocMatrix, directory: Path | str) -> dict[str, Path]:
    """Write counts, metadata and token-frequency files for the slice.

    The counts file holds ``target<TAB>context<TAB>count`` rows sorted by
    (target, context), so saving a loaded matrix is byte-identical.
    """
    paths = matrix_paths(directory, matrix.slice_label)
    paths["counts"].parent.mkdir(parents=True, exist_ok=True)
    with open(paths["counts"], "w", encoding="utf-8", newline="\n") as fh:
        for target in sorted(matrix.rows):
            row = matrix.rows[target]
            for context in sorted(row):
                fh.write(f"{target}\t{context}\t{row[context]}\n")
    with open(paths["meta"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"slice_label\t{matrix.slice_label}\n")
        fh.write(f"window\t{matrix.window}\n")
        fh.write(f"n_tokens\t{matrix.n_tokens}\n")
        fh.write(f"total_pairs\t{matrix.total_pairs}\n")
    with open(paths["freq"], "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(matrix.token_freq):
            fh.write(f"{key}\t{matrix.token_freq[key]}\n")
    return paths


def load_matrix(directory: Path | str, label: str) -> CoocMatrix:
    """Load a matrix previously written by save_matrix."""
    paths = matrix_paths(directory, label)
    meta: dict[str, str] = {}
    with open(paths["meta"], encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2:
                raise FormatError(f"{paths['meta']}: malformed metadata row", line_no)
            meta[fields[0]] = fields[1]
    for field in ("slice_label", "window", "n_tokens", "total_pairs"):
        if field not in meta:
            raise FormatError(f"{paths['meta']}: missing metadata field {field!r}")

    rows: dict[str, Counter] = {}
    with open(paths["counts"], encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise FormatError(f"{paths['counts']}: expected target<TAB>context<TAB>count", line_no)
            try:
                count = int(fields[2])
            except ValueError:
                raise FormatError(f"{paths['counts']}: unparseable count {fields[2]!r}", line_no) from None
            rows.setdefault(fields[0], Counter())[fields[1]] = count

    token_freq: dict[str, int] = {}
    with open(paths["freq"], encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2:
                raise FormatError(f"{paths['freq']}: expected key<TAB>count", line_no)
            token_freq[fields[0]] = int(fields[1])

    row_sums = {key: sum(row.values()) for key, row in rows.items()}
    total_pairs = sum(row_sums.values())
    if total_pairs != int(meta["total_pairs"]):
        raise FormatError(
            f"{paths['counts']}: cell sum {total_pairs} contradicts recorded total_pairs {meta['total_pairs']}"
        )
    return CoocMatrix(
        slice_label=meta["slice_label"],
        window=int(meta["window"]),
        rows=rows,
        row_sums=row_sums,
        token_freq=token_freq,
        total_pairs=total_pairs,
        n_tokens=int(meta["n_tokens"]),
    )
