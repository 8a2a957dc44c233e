"""
Experiment configuration, read from TOML.

    [experiment]
    master_seed = 7
    k_values = [1, 3, 5, 7, 9]
    l_cap = 1024
    parallel = 4
    ratio_bin_width = 5.0          # percent
    high_ratio_threshold = 0.95
    report_k = 3

    [corruption]                   # defaults for every group
    sub_rate = 0.02                # a number, or a [lo, hi] range drawn per utterance
    ins_rate = [0.0, 0.01]
    del_rate = 0.0

    [cost]
    verify_pass_cost = 1.0
    ar_step_cost = 1.0
    draft_step_cost = 0.0

    [output]                       # used when the command line gives no path
    corpus = "out/corpus.jsonl"
    results = "out/results"
    report = "out/report"

    [[corpus]]                     # one table per utterance group
    name = "long"
    n_utterances = 1000
    vocab_size = 64
    ngram_order = 3
    eos_bias = 0.004
    min_length = 100
    max_length = 300
    sub_rate = 0.05                # optional per-group override
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import toml

from src.lib.core import L_CAP, StepCostModel
from src.lib.errors import ConfigError
from src.lib.models import CorruptionSpec

DEFAULT_K_VALUES = (1, 3, 5, 7, 9)

RateRange = Tuple[float, float]


def _parse_rate(name: str, value: Any) -> RateRange:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        lo = hi = float(value)
    elif isinstance(value, list) and len(value) == 2:
        lo, hi = float(value[0]), float(value[1])
    else:
        raise ConfigError(f"{name} must be a number or a [lo, hi] pair, got {value!r}")
    if not 0.0 <= lo <= hi <= 1.0:
        raise ConfigError(f"{name} range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1")
    return lo, hi


def _check_keys(section: str, table: Dict[str, Any], allowed: set[str]):
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


@dataclass(frozen=True)
class CorruptionRange:
    sub_rate: RateRange = (0.0, 0.0)
    ins_rate: RateRange = (0.0, 0.0)
    del_rate: RateRange = (0.0, 0.0)

    RATE_KEYS = ('sub_rate', 'ins_rate', 'del_rate')

    def override(self, table: Dict[str, Any]) -> 'CorruptionRange':
        return replace(self, **{k: _parse_rate(k, table[k]) for k in self.RATE_KEYS if k in table})

    def resolve(self, rng: np.random.Generator, seed: int) -> CorruptionSpec:
        # always three draws, so fixed rates do not shift the generator
        sub, ins, dele = (float(rng.uniform(lo, hi)) for lo, hi in (self.sub_rate, self.ins_rate, self.del_rate))
        return CorruptionSpec(sub, ins, dele, seed)


@dataclass(frozen=True)
class CorpusGroup:
    name: str
    n_utterances: int
    vocab_size: int = 32
    ngram_order: int = 2
    eos_bias: float = 0.02
    min_length: int = 0
    max_length: int = L_CAP
    max_attempts: int = 1000
    corruption: CorruptionRange = field(default_factory=CorruptionRange)

    FIELDS = {'name', 'n_utterances', 'vocab_size', 'ngram_order', 'eos_bias',
              'min_length', 'max_length', 'max_attempts'}


@dataclass(frozen=True)
class OutputPaths:
    corpus: Optional[Path] = None
    results: Optional[Path] = None
    report: Optional[Path] = None


@dataclass(frozen=True)
class ExperimentConfig:
    groups: Tuple[CorpusGroup, ...]
    master_seed: int = 0
    k_values: Tuple[int, ...] = DEFAULT_K_VALUES
    l_cap: int = L_CAP
    parallel: int = 4
    cost: StepCostModel = field(default_factory=StepCostModel)
    ratio_bin_width: float = 5.0
    high_ratio_threshold: float = 0.95
    report_k: Optional[int] = None
    output: OutputPaths = field(default_factory=OutputPaths)

    def __post_init__(self):
        if not self.groups:
            raise ConfigError("at least one [[corpus]] group is required")
        if not self.k_values or any(k < 1 for k in self.k_values):
            raise ConfigError(f"k_values must be a non-empty list of integers >= 1, got {list(self.k_values)}")
        if self.parallel < 1:
            raise ConfigError(f"parallel must be at least 1, got {self.parallel}")
        if self.ratio_bin_width <= 0:
            raise ConfigError("ratio_bin_width must be positive")
        if self.report_k is not None and self.report_k not in self.k_values:
            raise ConfigError(f"report_k={self.report_k} is not one of k_values")
        for group in self.groups:
            if group.n_utterances < 1:
                raise ConfigError(f"group '{group.name}': n_utterances must be at least 1")
            if not 0 <= group.min_length <= group.max_length <= self.l_cap:
                raise ConfigError(
                    f"group '{group.name}': need 0 <= min_length <= max_length <= l_cap ({self.l_cap})")
            if group.max_attempts < 1:
                raise ConfigError(f"group '{group.name}': max_attempts must be at least 1")

    @property
    def n_utterances(self) -> int:
        return sum(g.n_utterances for g in self.groups)

    @property
    def figure_k(self) -> int:
        """K used for the histogram and length analyses"""
        if self.report_k is not None:
            return self.report_k
        return 3 if 3 in self.k_values else self.k_values[0]

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'ExperimentConfig':
        _check_keys('top level', data, {'experiment', 'corruption', 'cost', 'output', 'corpus'})
        experiment = data.get('experiment', {})
        _check_keys('experiment', experiment, {
            'master_seed', 'k_values', 'l_cap', 'parallel', 'ratio_bin_width',
            'high_ratio_threshold', 'report_k'})

        corruption_table = data.get('corruption', {})
        _check_keys('corruption', corruption_table, set(CorruptionRange.RATE_KEYS))
        default_corruption = CorruptionRange().override(corruption_table)

        cost_table = data.get('cost', {})
        _check_keys('cost', cost_table, {'verify_pass_cost', 'ar_step_cost', 'draft_step_cost'})

        output_table = data.get('output', {})
        _check_keys('output', output_table, {'corpus', 'results', 'report'})

        groups = []
        for index, table in enumerate(data.get('corpus', [])):
            _check_keys('corpus', table, CorpusGroup.FIELDS | set(CorruptionRange.RATE_KEYS))
            if 'n_utterances' not in table:
                raise ConfigError(f"[[corpus]] group {index} needs n_utterances")
            fields = {k: v for k, v in table.items() if k in CorpusGroup.FIELDS}
            fields.setdefault('name', f"group{index}")
            groups.append(CorpusGroup(**fields, corruption=default_corruption.override(table)))

        try:
            return ExperimentConfig(
                groups=tuple(groups),
                master_seed=int(experiment.get('master_seed', 0)),
                k_values=tuple(int(k) for k in experiment.get('k_values', DEFAULT_K_VALUES)),
                l_cap=int(experiment.get('l_cap', L_CAP)),
                parallel=int(experiment.get('parallel', 4)),
                cost=StepCostModel(**{k: float(v) for k, v in cost_table.items()}),
                ratio_bin_width=float(experiment.get('ratio_bin_width', 5.0)),
                high_ratio_threshold=float(experiment.get('high_ratio_threshold', 0.95)),
                report_k=experiment.get('report_k'),
                output=OutputPaths(**{k: Path(v) for k, v in output_table.items()}))
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from e

    @staticmethod
    def loads(text: str) -> 'ExperimentConfig':
        try:
            data = toml.loads(text)
        except toml.TomlDecodeError as e:
            raise ConfigError(f"invalid TOML: {e}") from e
        return ExperimentConfig.from_dict(data)

    @staticmethod
    def load(path: Path) -> 'ExperimentConfig':
        return ExperimentConfig.loads(Path(path).read_text(encoding='utf-8'))
