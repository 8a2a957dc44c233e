"""
Runs every utterance of a corpus through the greedy baseline, the draft
generator and the hybrid decoder for each K, and writes the results.
"""

import asyncio
import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeRemainingColumn

from src.lib.config import ExperimentConfig
from src.lib.core import ExitPath, StepCostModel, TokenSeq
from src.lib.corpus import SCHEMA_VERSION, CorpusEntry, load_corpus
from src.lib.errors import ResultsFormatError, UtteranceError
from src.lib.hybrid import HybridConfig, HybridOutcome, hybrid_decode
from src.lib.metrics import edit_distance, step_ratio
from src.lib.models import CorruptedGreedyDraft, greedy_decode

RECORDS_FILE = 'records.jsonl'
SUMMARY_FILE = 'summary.csv'
RUN_FILE = 'run.json'


@dataclass(frozen=True)
class KResult:
    K: int
    outcome: HybridOutcome
    step_ratio: float
    transformer_cost: float
    total_cost: float
    wer_hybrid: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'K': self.K,
            **self.outcome.to_dict(),
            'step_ratio': self.step_ratio,
            'transformer_cost': self.transformer_cost,
            'total_cost': self.total_cost,
            'wer_hybrid': self.wer_hybrid,
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'KResult':
        return KResult(data['K'], HybridOutcome.from_dict(data), data['step_ratio'],
                       data['transformer_cost'], data['total_cost'], data['wer_hybrid'])


@dataclass(frozen=True)
class UtteranceRecord:
    utterance_id: int
    group: str
    model: Dict[str, Any]
    greedy: TokenSeq
    terminated: bool
    baseline_steps: int
    draft: TokenSeq
    draft_steps: int
    wer_draft: float
    results: Tuple[KResult, ...]

    def result_for(self, K: int) -> KResult:
        for result in self.results:
            if result.K == K:
                return result
        raise KeyError(K)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': SCHEMA_VERSION,
            'utterance_id': self.utterance_id,
            'group': self.group,
            'model': self.model,
            'greedy': self.greedy.to_list(),
            'terminated': self.terminated,
            'baseline_steps': self.baseline_steps,
            'draft': self.draft.to_list(),
            'draft_steps': self.draft_steps,
            'wer_draft': self.wer_draft,
            'results': [r.to_dict() for r in self.results],
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'UtteranceRecord':
        if data.get('schema_version') != SCHEMA_VERSION:
            raise ResultsFormatError(f"unsupported results schema_version {data.get('schema_version')!r}")
        return UtteranceRecord(
            utterance_id=data['utterance_id'],
            group=data['group'],
            model=data['model'],
            greedy=TokenSeq(data['greedy']),
            terminated=data['terminated'],
            baseline_steps=data['baseline_steps'],
            draft=TokenSeq(data['draft']),
            draft_steps=data['draft_steps'],
            wer_draft=data['wer_draft'],
            results=tuple(KResult.from_dict(r) for r in data['results']))


def process_utterance(entry: CorpusEntry, config: ExperimentConfig) -> UtteranceRecord:
    model = entry.build_model()
    greedy = greedy_decode(model, config.l_cap)
    draft = CorruptedGreedyDraft(model, entry.corruption, config.l_cap, greedy.output).draft()

    results = []
    for K in config.k_values:
        outcome = hybrid_decode(model, draft.tokens, HybridConfig(K, config.l_cap),
                                baseline_steps=greedy.steps, draft_steps=draft.draft_steps)
        results.append(KResult(
            K=K,
            outcome=outcome,
            step_ratio=step_ratio(outcome.trace, config.cost),
            transformer_cost=outcome.trace.transformer_cost(config.cost),
            total_cost=outcome.trace.total_cost(config.cost),
            wer_hybrid=edit_distance(greedy.output, outcome.output).wer))

    return UtteranceRecord(
        utterance_id=entry.utterance_id,
        group=entry.group,
        model=entry.model,
        greedy=greedy.output,
        terminated=greedy.terminated,
        baseline_steps=greedy.steps,
        draft=draft.tokens,
        draft_steps=draft.draft_steps,
        wer_draft=edit_distance(greedy.output, draft.tokens).wer,
        results=tuple(results))


async def _process_all(entries: Sequence[CorpusEntry], config: ExperimentConfig, parallel: int,
                       progress: Optional[Progress]) -> List[UtteranceRecord]:
    semaphore = asyncio.Semaphore(parallel)
    task_id = progress.add_task("decode", total=len(entries)) if progress else None

    async def one(entry: CorpusEntry) -> UtteranceRecord:
        async with semaphore:
            try:
                record = await asyncio.to_thread(process_utterance, entry, config)
            except Exception as e:
                raise UtteranceError(entry.utterance_id, e) from e
        if progress and task_id is not None:
            progress.advance(task_id)
        return record

    results = await asyncio.gather(*(one(e) for e in entries), return_exceptions=True)
    errors = [r for r in results if isinstance(r, Exception)]
    if errors:
        raise ExceptionGroup("Experiment Error", errors)
    return [r for r in results if isinstance(r, UtteranceRecord)]


def process_corpus(entries: Sequence[CorpusEntry], config: ExperimentConfig,
                   parallel: Optional[int] = None, show_progress: bool = False) -> List[UtteranceRecord]:
    """Decode all utterances; output order follows utterance_id whatever the scheduling"""
    parallel = parallel or config.parallel
    if show_progress:
        progress = Progress(
            TextColumn("[bold blue]{task.description}", justify="right"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeRemainingColumn(),
            transient=False,
        )
        with progress:
            records = asyncio.run(_process_all(entries, config, parallel, progress))
    else:
        records = asyncio.run(_process_all(entries, config, parallel, None))
    return sorted(records, key=lambda r: r.utterance_id)


@dataclass(frozen=True)
class KSummary:
    K: int
    n: int
    mean_wer_draft: float
    mean_wer_hybrid: float
    mean_verify_passes: float
    mean_ar_steps: float
    mean_transformer_cost: float
    mean_baseline_steps: float
    mean_step_ratio: float
    median_step_ratio: float
    exit_counts: Dict[ExitPath, int]

    HEADER = ['K', 'n', 'mean_wer_draft', 'mean_wer_hybrid', 'mean_verify_passes', 'mean_ar_steps',
              'mean_transformer_cost', 'mean_baseline_steps', 'mean_step_ratio', 'median_step_ratio',
              'eos_confirmed', 'appended_eos', 'appended_truncated']

    def row(self) -> List[str]:
        return [str(self.K), str(self.n)] + [fmt(v) for v in (
            self.mean_wer_draft, self.mean_wer_hybrid, self.mean_verify_passes, self.mean_ar_steps,
            self.mean_transformer_cost, self.mean_baseline_steps, self.mean_step_ratio,
            self.median_step_ratio)] + [str(self.exit_counts[p]) for p in ExitPath]


def fmt(value: float) -> str:
    return f"{value:.6f}"


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def summarize(records: Sequence[UtteranceRecord], k_values: Sequence[int]) -> List[KSummary]:
    summaries = []
    for K in k_values:
        results = [r.result_for(K) for r in records]
        ratios = [x.step_ratio for x in results]
        exit_counts = {p: 0 for p in ExitPath}
        for x in results:
            exit_counts[x.outcome.trace.exit_path] += 1
        summaries.append(KSummary(
            K=K,
            n=len(results),
            mean_wer_draft=_mean([r.wer_draft for r in records]),
            mean_wer_hybrid=_mean([x.wer_hybrid for x in results]),
            mean_verify_passes=_mean([x.outcome.trace.verify_passes for x in results]),
            mean_ar_steps=_mean([x.outcome.trace.ar_steps for x in results]),
            mean_transformer_cost=_mean([x.transformer_cost for x in results]),
            mean_baseline_steps=_mean([r.baseline_steps for r in records]),
            mean_step_ratio=_mean(ratios),
            median_step_ratio=float(np.median(ratios)) if ratios else 0.0,
            exit_counts=exit_counts))
    return summaries


def write_csv(path: Path, header: List[str], rows: List[List[str]]):
    """Every CSV artifact leads with a schema_version column"""
    version = str(SCHEMA_VERSION)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['schema_version'] + header)
        writer.writerows([version] + row for row in rows)


def write_results(records: Sequence[UtteranceRecord], config: ExperimentConfig, out_dir: Path):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_info = {
        'schema_version': SCHEMA_VERSION,
        'master_seed': config.master_seed,
        'k_values': list(config.k_values),
        'l_cap': config.l_cap,
        'cost': config.cost.to_dict(),
        'ratio_bin_width': config.ratio_bin_width,
        'high_ratio_threshold': config.high_ratio_threshold,
        'figure_k': config.figure_k,
    }
    with open(out_dir / RUN_FILE, 'w', encoding='utf-8', newline='\n') as f:
        f.write(json.dumps(run_info, sort_keys=True, indent=2) + '\n')
    with open(out_dir / RECORDS_FILE, 'w', encoding='utf-8', newline='\n') as f:
        for record in records:
            f.write(json.dumps(record.to_dict(), sort_keys=True) + '\n')
    write_csv(out_dir / SUMMARY_FILE, KSummary.HEADER,
              [s.row() for s in summarize(records, config.k_values)])


def run_experiment(corpus_path: Path, config: ExperimentConfig, out_dir: Path,
                   parallel: Optional[int] = None, show_progress: bool = False) -> List[UtteranceRecord]:
    entries = load_corpus(corpus_path)
    records = process_corpus(entries, config, parallel, show_progress)
    write_results(records, config, out_dir)
    return records


@dataclass(frozen=True)
class RunInfo:
    k_values: Tuple[int, ...]
    cost: StepCostModel
    ratio_bin_width: float
    high_ratio_threshold: float
    figure_k: int


def load_results(results_dir: Path) -> Tuple[RunInfo, List[UtteranceRecord]]:
    results_dir = Path(results_dir)
    try:
        with open(results_dir / RUN_FILE, 'r', encoding='utf-8') as f:
            data = json.load(f)
        info = RunInfo(
            k_values=tuple(data['k_values']),
            cost=StepCostModel(**data['cost']),
            ratio_bin_width=data['ratio_bin_width'],
            high_ratio_threshold=data['high_ratio_threshold'],
            figure_k=data['figure_k'])
    except FileNotFoundError as e:
        raise ResultsFormatError(f"{results_dir} holds no {RUN_FILE}; is it a results directory?") from e
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ResultsFormatError(f"{results_dir / RUN_FILE}: {e}") from e

    records = []
    records_path = results_dir / RECORDS_FILE
    if records_path.exists():
        with open(records_path, 'r', encoding='utf-8') as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    record = UtteranceRecord.from_dict(json.loads(line))
                    for K in info.k_values:
                        record.result_for(K)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                    raise ResultsFormatError(f"{records_path}:{lineno}: {e!r}") from e
                records.append(record)
    return info, records
