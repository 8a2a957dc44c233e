"""
Report bundle built from a results directory: the per-K WER/steps table, the
step-ratio histogram, cost by output length, the length profile of
utterances that gained little, and a markdown summary.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

from src.lib.core import ExitPath
from src.lib.experiment import RunInfo, UtteranceRecord, fmt, load_results, summarize, write_csv
from src.lib.metrics import (CostRow, LengthBinnedCost, LengthHistogram, RatioHistogram,
                             bin_costs_by_length, bin_lengths, bin_ratios, share_at_most)

TABLE_FILE = 'table.csv'
HISTOGRAM_FILE = 'ratio_histogram.csv'
LENGTH_COST_FILE = 'length_cost.csv'
HIGH_RATIO_FILE = 'high_ratio_lengths.csv'
MARKDOWN_FILE = 'report.md'

TABLE_HEADER = ['method', 'K', 'mean_wer_vs_greedy', 'mean_transformer_cost', 'mean_draft_steps',
                'mean_step_ratio', 'median_step_ratio', 'eos_confirmed', 'appended_eos', 'appended_truncated']

# share of utterances expected at or below this ratio when drafts are good
LOW_RATIO = 0.30
SHORT_UTTERANCE = 10


@dataclass(frozen=True)
class ReportBundle:
    table: List[List[str]]
    histograms: Dict[int, RatioHistogram]
    length_costs: Dict[int, LengthBinnedCost]
    high_ratio_lengths: Dict[int, LengthHistogram]
    low_ratio_share: Dict[int, float]
    markdown: str


def _table_rows(records: Sequence[UtteranceRecord], info: RunInfo) -> List[List[str]]:
    if not records:
        return []
    summaries = summarize(records, info.k_values)
    mean_baseline = summaries[0].mean_baseline_steps * info.cost.ar_step_cost
    mean_draft_steps = sum(r.draft_steps for r in records) / len(records)
    rows = [
        ['baseline', '', fmt(0.0), fmt(mean_baseline), fmt(0.0), fmt(1.0), fmt(1.0), '', '', ''],
        ['draft', '', fmt(summaries[0].mean_wer_draft), fmt(0.0), fmt(mean_draft_steps), '', '', '', '', ''],
    ]
    for s in summaries:
        rows.append(['hybrid', str(s.K), fmt(s.mean_wer_hybrid), fmt(s.mean_transformer_cost),
                     fmt(mean_draft_steps), fmt(s.mean_step_ratio), fmt(s.median_step_ratio)]
                    + [str(s.exit_counts[p]) for p in ExitPath])
    return rows


def build_report(records: Sequence[UtteranceRecord], info: RunInfo) -> ReportBundle:
    histograms = {}
    length_costs = {}
    high_ratio = {}
    low_share = {}
    for K in info.k_values:
        results = [(r, r.result_for(K)) for r in records]
        ratios = [x.step_ratio for _, x in results]
        histograms[K] = bin_ratios(ratios, info.ratio_bin_width)
        low_share[K] = share_at_most(ratios, LOW_RATIO)
        length_costs[K] = bin_costs_by_length(
            CostRow(length=len(r.greedy),
                    baseline=r.baseline_steps * info.cost.ar_step_cost,
                    draft=r.draft_steps * info.cost.draft_step_cost,
                    hybrid=x.total_cost)
            for r, x in results)
        high_ratio[K] = bin_lengths(
            (len(r.greedy) for r, x in results if x.step_ratio >= info.high_ratio_threshold),
            SHORT_UTTERANCE)

    table = _table_rows(records, info)
    return ReportBundle(table, histograms, length_costs, high_ratio, low_share,
                        _markdown(records, info, table, histograms, high_ratio, low_share))


def _markdown(records: Sequence[UtteranceRecord], info: RunInfo, table: List[List[str]],
              histograms: Dict[int, RatioHistogram], high_ratio: Dict[int, LengthHistogram],
              low_share: Dict[int, float]) -> str:
    K = info.figure_k
    lines = [
        "# Hybrid decoding report",
        "",
        f"Utterances: {len(records)}. Steps are abstract forward-step units.",
        "",
        "## WER and steps per decoding method",
        "",
        "| " + " | ".join(TABLE_HEADER) + " |",
        "|" + "---|" * len(TABLE_HEADER),
    ]
    lines += ["| " + " | ".join(row) + " |" for row in table]
    lines += [
        "",
        f"## Step ratio at K={K}",
        "",
        f"Share of utterances with ratio <= {LOW_RATIO:.2f}: {fmt(low_share.get(K, 0.0))}",
        "",
        "| ratio bin (%) | utterances |",
        "|---|---|",
    ]
    lines += [f"| {lo:g}-{hi:g} | {count} |" for lo, hi, count in histograms[K].rows()] if K in histograms else []
    hist = high_ratio.get(K)
    lines += [
        "",
        f"## Utterances with ratio >= {info.high_ratio_threshold:.2f} at K={K}",
        "",
        f"Count: {hist.total if hist else 0}; "
        f"share shorter than {SHORT_UTTERANCE} tokens: {fmt(hist.share_below(SHORT_UTTERANCE) if hist else 0.0)}",
        "",
    ]
    return "\n".join(lines) + "\n"


def write_report(bundle: ReportBundle, out_dir: Path):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / TABLE_FILE, TABLE_HEADER, bundle.table)
    write_csv(out_dir / HISTOGRAM_FILE, ['K', 'bin_lo_pct', 'bin_hi_pct', 'count'],
              [[str(K), fmt(lo), fmt(hi), str(count)]
               for K, hist in bundle.histograms.items() for lo, hi, count in hist.rows()])
    write_csv(out_dir / LENGTH_COST_FILE, ['K', 'bin_lo', 'bin_hi', 'n', 'baseline_mean', 'draft_mean', 'hybrid_mean'],
              [[str(K), str(lo), str(hi), str(b.n), fmt(b.baseline_mean), fmt(b.draft_mean), fmt(b.hybrid_mean)]
               for K, costs in bundle.length_costs.items() for lo, hi, b in costs.rows()])
    write_csv(out_dir / HIGH_RATIO_FILE, ['K', 'bin_lo', 'bin_hi', 'count'],
              [[str(K), str(lo), str(hi), str(count)]
               for K, hist in bundle.high_ratio_lengths.items() for lo, hi, count in hist.rows()])
    (out_dir / MARKDOWN_FILE).write_text(bundle.markdown, encoding='utf-8', newline='\n')


def report(results_dir: Path, out_dir: Path) -> ReportBundle:
    info, records = load_results(results_dir)
    bundle = build_report(records, info)
    write_report(bundle, out_dir)
    return bundle
