"""
Synthetic utterance corpus: one seeded n-gram verifier per utterance plus the
corruption applied to its greedy output to form the draft.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from src.lib.config import CorpusGroup, ExperimentConfig
from src.lib.core import Vocab
from src.lib.errors import ConfigError, CorpusFormatError
from src.lib.models import CorruptionSpec, VerifierModel, build_ngram_model, greedy_decode, model_from_dict

SCHEMA_VERSION = 1


def derive_seed(master_seed: int, utterance_id: int, attempt: int = 0) -> int:
    """Stable per-utterance seed, independent of scheduling order"""
    digest = hashlib.sha256(f"{master_seed}:{utterance_id}:{attempt}".encode()).digest()
    return int.from_bytes(digest[:8], 'big') >> 1


@dataclass(frozen=True)
class CorpusEntry:
    utterance_id: int
    group: str
    seed: int
    model: Dict[str, Any]
    corruption: CorruptionSpec
    greedy_length: int

    def build_model(self) -> VerifierModel:
        return model_from_dict(self.model)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': SCHEMA_VERSION,
            'utterance_id': self.utterance_id,
            'group': self.group,
            'seed': self.seed,
            'model': self.model,
            'corruption': self.corruption.to_dict(),
            'greedy_length': self.greedy_length,
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'CorpusEntry':
        if data.get('schema_version') != SCHEMA_VERSION:
            raise CorpusFormatError(f"unsupported corpus schema_version {data.get('schema_version')!r}")
        return CorpusEntry(
            utterance_id=data['utterance_id'],
            group=data['group'],
            seed=data['seed'],
            model=data['model'],
            corruption=CorruptionSpec.from_dict(data['corruption']),
            greedy_length=data['greedy_length'])


def sample_utterance(config: ExperimentConfig, group: CorpusGroup, utterance_id: int) -> CorpusEntry:
    """
    Draw model seeds until the verifier's greedy decode terminates with a length
    inside the group's targets; the corruption rates come from the accepted seed.
    """
    vocab = Vocab(group.vocab_size)
    for attempt in range(group.max_attempts):
        seed = derive_seed(config.master_seed, utterance_id, attempt)
        model = build_ngram_model(vocab, group.ngram_order, group.eos_bias, seed)
        greedy = greedy_decode(model, group.max_length)
        if greedy.terminated and len(greedy.output) >= group.min_length:
            rng = np.random.default_rng(seed)
            corruption_seed = int(rng.integers(0, 2**63 - 1))
            corruption = group.corruption.resolve(rng, corruption_seed)
            return CorpusEntry(utterance_id, group.name, seed, model.to_dict(), corruption, len(greedy.output))
    raise ConfigError(
        f"group '{group.name}': no model with greedy length in [{group.min_length}, {group.max_length}] "
        f"after {group.max_attempts} attempts; adjust eos_bias or the length targets")


def generate_corpus(config: ExperimentConfig, out_path: Path) -> List[CorpusEntry]:
    """Write one JSONL line per utterance; byte-identical for a given master_seed"""
    entries: List[CorpusEntry] = []
    utterance_id = 0
    for group in config.groups:
        for _ in range(group.n_utterances):
            entries.append(sample_utterance(config, group, utterance_id))
            utterance_id += 1

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, 'w', encoding='utf-8', newline='\n') as f:
        for entry in entries:
            f.write(json.dumps(entry.to_dict(), sort_keys=True) + '\n')
    return entries


def load_corpus(path: Path) -> List[CorpusEntry]:
    entries = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                entries.append(CorpusEntry.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise CorpusFormatError(f"{path}:{lineno}: {e}") from e
    ids = [e.utterance_id for e in entries]
    if len(set(ids)) != len(ids):
        raise CorpusFormatError(f"{path}: duplicate utterance ids")
    return entries


def corpus_stats(entries: List[CorpusEntry]) -> Dict[str, float]:
    lengths = np.array([e.greedy_length for e in entries], dtype=np.float64)
    if not len(lengths):
        return {'n_utterances': 0, 'mean_greedy_length': 0.0, 'min_greedy_length': 0, 'max_greedy_length': 0}
    return {
        'n_utterances': len(entries),
        'mean_greedy_length': float(lengths.mean()),
        'min_greedy_length': int(lengths.min()),
        'max_greedy_length': int(lengths.max()),
    }
