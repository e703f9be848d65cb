"""Deterministic derivation of child seeds from one root seed.

All randomness in the pipeline flows from the configured root seed through
this function, so independent stages stay reproducible no matter in which
order they run.  Current consumers and their label paths:

    ("mon",)                      occurrence subsampling streams
    ("spearman", measure, subset) permutation test, one stream per cell
    ("annotation", target)        early/late pairing permutation
    ("annotation", "shuffle")     cross-target shuffle of exported pairs
"""

import hashlib


def derive_seed(root: int, *parts: object) -> int:
    """Hash the root seed and a label path into a 63-bit child seed."""
    text = ":".join([str(root), *(str(p) for p in parts)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
