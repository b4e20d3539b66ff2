"""Answer metrics: exact match, ROUGE-1/2/L, and Cohen's d.

The exact-match normalization approximates the benchmarks' official
scorers (which each benchmark inherits without restating): lowercase,
trim, strip surrounding quotes, drop thousands separators, compare
numeric strings as numbers, and canonicalize a handful of common date
layouts to ISO. Exact parity with the official scorers is not claimed.
"""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from datetime import datetime
from typing import Sequence, Union

from ..errors import DegenerateSample

NUMERIC_REL_TOL = 1e-6

_THOUSANDS_RE = re.compile(r"^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$")
_PUNCT_RE = re.compile(r"[^\w\s]")

_DATE_FORMATS = (
    "%Y-%m-%d",
    "%B %d, %Y",
    "%b %d, %Y",
    "%d %B %Y",
    "%d %b %Y",
    "%m/%d/%Y",
)

Normalized = Union[str, float]


def normalize_answer(text: str) -> Normalized:
    """Canonical comparison form: a float, an ISO date string, or text."""
    value = text.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in ("'", '"'):
        value = value[1:-1].strip()
    if _THOUSANDS_RE.match(value):
        value = value.replace(",", "")
    try:
        return float(value)
    except ValueError:
        pass
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(value, fmt).date().isoformat()
        except ValueError:
            continue
    return " ".join(value.lower().split())


def _normalized_equal(a: Normalized, b: Normalized) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return math.isclose(a, b, rel_tol=NUMERIC_REL_TOL, abs_tol=0.0) or a == b
    return a == b


def exact_match(pred: str, gold: Sequence[str]) -> bool:
    """Normalized multiset equality between prediction and gold answers.

    A prediction holding several answers separates them with ``|``, the
    same convention the multi-answer gold lists use.
    """
    parts = [p.strip() for p in pred.split("|") if p.strip()] or [pred.strip()]
    left = [normalize_answer(p) for p in parts]
    right = [normalize_answer(g) for g in gold]
    if len(left) != len(right):
        return False
    unused = list(range(len(right)))
    for item in left:
        for pos, j in enumerate(unused):
            if _normalized_equal(item, right[j]):
                unused.pop(pos)
                break
        else:
            return False
    return True


def _tokens(text: str) -> list[str]:
    return _PUNCT_RE.sub(" ", text.lower()).split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _f_score(matches: float, pred_total: int, ref_total: int) -> float:
    if pred_total == 0 and ref_total == 0:
        return 1.0
    if pred_total == 0 or ref_total == 0 or matches == 0:
        return 0.0
    precision = matches / pred_total
    recall = matches / ref_total
    return 2 * precision * recall / (precision + recall)


def rouge_score(pred: str, ref: str, variant: Union[int, str]) -> float:
    """F-score for ROUGE-1, ROUGE-2, or ROUGE-L (LCS based)."""
    key = str(variant).upper()
    if key not in ("1", "2", "L"):
        raise ValueError(f"unknown ROUGE variant {variant!r}")
    pred_tokens = _tokens(pred)
    ref_tokens = _tokens(ref)
    if key == "L":
        return _f_score(_lcs_length(pred_tokens, ref_tokens), len(pred_tokens), len(ref_tokens))
    n = int(key)
    pred_grams = _ngrams(pred_tokens, n)
    ref_grams = _ngrams(ref_tokens, n)
    matches = sum((pred_grams & ref_grams).values())
    return _f_score(matches, sum(pred_grams.values()), sum(ref_grams.values()))


def cohens_d(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Standardized mean difference with the pooled (n-1) deviation."""
    a = [float(x) for x in sample_a]
    b = [float(x) for x in sample_b]
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSample("each sample needs at least 2 points")
    var_a = statistics.variance(a)
    var_b = statistics.variance(b)
    pooled = math.sqrt(
        ((len(a) - 1) * var_a + (len(b) - 1) * var_b) / (len(a) + len(b) - 2)
    )
    if pooled == 0.0:
        raise DegenerateSample("pooled standard deviation is zero")
    return (statistics.fmean(a) - statistics.fmean(b)) / pooled
