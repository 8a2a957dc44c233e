"""
Error rates and step accounting.

edit_distance works on any sequence of hashable symbols: raw token ids in the
core, whitespace-split words in the text layer. Both go through the same DP.
"""

import math
import re
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np

from src.lib.core import HybridTrace, StepCostModel
from src.lib.errors import ContractViolation, UndefinedRatioError


@dataclass(frozen=True)
class EditStats:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def empty_reference(self) -> bool:
        """With nothing to compare against, wer is insertions / 1"""
        return self.ref_len == 0

    @property
    def wer(self) -> float:
        return self.errors / max(self.ref_len, 1)


def _encode(reference: Sequence[Hashable], hypothesis: Sequence[Hashable]) -> Tuple[np.ndarray, np.ndarray]:
    codes: Dict[Hashable, int] = {}
    ref = np.array([codes.setdefault(s, len(codes)) for s in reference], dtype=np.int64)
    hyp = np.array([codes.setdefault(s, len(codes)) for s in hypothesis], dtype=np.int64)
    return ref, hyp


def edit_distance(reference: Sequence[Hashable], hypothesis: Sequence[Hashable]) -> EditStats:
    """
    Unit-cost Levenshtein alignment of hypothesis against reference.
    The backtrace prefers substitution, then insertion, then deletion, so the
    S/D/I split is reproducible even where several minimal alignments exist.
    """
    ref, hyp = _encode(reference, hypothesis)
    n, m = len(ref), len(hyp)
    columns = np.arange(m + 1)
    dist = np.zeros((n + 1, m + 1), dtype=np.int64)
    dist[0] = columns
    for i in range(1, n + 1):
        diagonal = dist[i - 1, :-1] + (hyp != ref[i - 1])
        row = np.empty(m + 1, dtype=np.int64)
        row[0] = i
        row[1:] = np.minimum(diagonal, dist[i - 1, 1:] + 1)
        # horizontal moves chain within the row: d[j] = min_k(row[k] + j - k)
        dist[i] = np.minimum.accumulate(row - columns) + columns

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]):
            subs += int(ref[i - 1] != hyp[j - 1])
            i, j = i - 1, j - 1
        elif j > 0 and dist[i, j] == dist[i, j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return EditStats(subs, dels, ins, n)


_PUNCTUATION = re.compile(r"[^\w\s']")


def normalize_words(text: str) -> List[str]:
    """Lower-case, drop punctuation (apostrophes stay inside words) and split"""
    return _PUNCTUATION.sub(' ', text.lower()).split()


def word_error_rate(reference_text: str, hypothesis_text: str) -> EditStats:
    return edit_distance(normalize_words(reference_text), normalize_words(hypothesis_text))


def step_ratio(trace: HybridTrace, cost: StepCostModel = StepCostModel()) -> float:
    """Hybrid verifier cost over the cost of decoding the same output token by token"""
    baseline = trace.baseline_steps * cost.ar_step_cost
    if baseline == 0:
        raise UndefinedRatioError("baseline cost is zero; step ratio is undefined")
    return trace.transformer_cost(cost) / baseline


def share_at_most(values: Sequence[float], limit: float) -> float:
    if not values:
        return 0.0
    return float(np.mean(np.asarray(values) <= limit + 1e-12))


@dataclass(frozen=True)
class RatioHistogram:
    """Bin k counts ratios in [k*w, (k+1)*w) percent"""
    bin_width: float
    bins: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.bins.values())

    def rows(self) -> List[Tuple[float, float, int]]:
        return [(k * self.bin_width, (k + 1) * self.bin_width, self.bins[k])
                for k in sorted(self.bins)]


def _bin_index(value: float, width: float) -> int:
    # round away float noise such as 0.15 * 100 == 15.000000000000002
    return math.floor(round(value / width, 9))


def bin_ratios(ratios: Iterable[float], bin_width: float = 5.0) -> RatioHistogram:
    if bin_width <= 0:
        raise ContractViolation(f"bin width must be positive, got {bin_width}")
    bins: Dict[int, int] = {}
    for ratio in ratios:
        if ratio < 0:
            raise ContractViolation(f"negative step ratio {ratio}")
        k = _bin_index(ratio * 100.0, bin_width)
        bins[k] = bins.get(k, 0) + 1
    return RatioHistogram(bin_width, dict(sorted(bins.items())))


class CostRow(NamedTuple):
    length: int
    baseline: float
    draft: float
    hybrid: float


@dataclass(frozen=True)
class LengthBin:
    n: int
    baseline_mean: float
    draft_mean: float
    hybrid_mean: float


@dataclass(frozen=True)
class LengthBinnedCost:
    bin_size: int
    bins: Dict[int, LengthBin] = field(default_factory=dict)

    def rows(self) -> List[Tuple[int, int, LengthBin]]:
        return [(k * self.bin_size, (k + 1) * self.bin_size, self.bins[k]) for k in sorted(self.bins)]


def bin_costs_by_length(rows: Iterable[CostRow], bin_size: int = 10) -> LengthBinnedCost:
    """Mean baseline, draft and hybrid cost per output-length bin of `bin_size` tokens"""
    if bin_size <= 0:
        raise ContractViolation(f"bin size must be positive, got {bin_size}")
    grouped: Dict[int, List[CostRow]] = {}
    for row in rows:
        grouped.setdefault(row.length // bin_size, []).append(row)

    bins = {}
    for k in sorted(grouped):
        costs = np.array([(r.baseline, r.draft, r.hybrid) for r in grouped[k]], dtype=np.float64)
        baseline, draft, hybrid = costs.mean(axis=0)
        bins[k] = LengthBin(len(grouped[k]), float(baseline), float(draft), float(hybrid))
    return LengthBinnedCost(bin_size, bins)


@dataclass(frozen=True)
class LengthHistogram:
    bin_size: int
    bins: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.bins.values())

    def rows(self) -> List[Tuple[int, int, int]]:
        return [(k * self.bin_size, (k + 1) * self.bin_size, self.bins[k]) for k in sorted(self.bins)]

    def share_below(self, length: int) -> float:
        if not self.total:
            return 0.0
        return sum(c for k, c in self.bins.items() if (k + 1) * self.bin_size <= length) / self.total


def bin_lengths(lengths: Iterable[int], bin_size: int = 10) -> LengthHistogram:
    bins: Dict[int, int] = {}
    for length in lengths:
        bins[length // bin_size] = bins.get(length // bin_size, 0) + 1
    return LengthHistogram(bin_size, dict(sorted(bins.items())))
