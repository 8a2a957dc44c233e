"""
Verifier models and draft generators.

A verifier is a deterministic next-token function over content-token contexts.
It stands in for the expensive autoregressive decoder; a draft generator stands
in for the cheap first-pass decoder that proposes the reference sequence.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.lib.core import L_CAP, MISMATCH, TokenSeq, Vocab
from src.lib.errors import ConfigError, ContractViolation


class TeacherForced(NamedTuple):
    predictions: Tuple[int, ...]
    eos: bool


class GreedyResult(NamedTuple):
    output: TokenSeq
    terminated: bool
    steps: int


class DraftResult(NamedTuple):
    tokens: TokenSeq
    draft_steps: int


class VerifierModel(ABC):
    vocab: Vocab

    @abstractmethod
    def next(self, context: Sequence[int]) -> int:
        """Greedy prediction after `context`: a content token or vocab.eos_id"""

    def teacher_forced(self, ref: Sequence[int]) -> TeacherForced:
        """Predict every position of `ref` from its true prefix, plus the final eos check"""
        eos_id = self.vocab.eos_id
        predictions = []
        for i in range(len(ref)):
            token = self.next(ref[:i])
            predictions.append(MISMATCH if token == eos_id else token)
        return TeacherForced(tuple(predictions), self.next(ref) == eos_id)

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        ...


class NGramModel(VerifierModel):
    """
    A random but fixed n-gram table: the last `order` tokens of the context,
    left-padded with a bos sentinel, index a table holding the greedy next
    token. The table is total, so every reachable context has an answer.
    """

    def __init__(self, vocab: Vocab, order: int, eos_bias: float, seed: int):
        if order not in (1, 2, 3):
            raise ConfigError(f"n-gram order must be 1, 2 or 3, got {order}")
        if not 0.0 <= eos_bias <= 1.0:
            raise ConfigError(f"eos_bias must lie in [0, 1], got {eos_bias}")
        self.vocab = vocab
        self.order = order
        self.eos_bias = eos_bias
        self.seed = seed

        rng = np.random.default_rng(seed)
        shape = (vocab.size + 1,) * order
        tokens = rng.integers(0, vocab.size, size=shape, dtype=np.int32)
        stop = rng.random(shape) < eos_bias
        self.table = np.where(stop, vocab.eos_id, tokens).astype(np.int32)
        self.table.flags.writeable = False

    @property
    def bos(self) -> int:
        return self.vocab.size

    def next(self, context: Sequence[int]) -> int:
        n = self.order
        window = tuple(context[-n:]) if len(context) >= n else \
            (self.bos,) * (n - len(context)) + tuple(context)
        return int(self.table[window])

    def teacher_forced(self, ref: Sequence[int]) -> TeacherForced:
        # one gather over every sliding window scores the whole reference at once
        n = self.order
        padded = np.concatenate([np.full(n, self.bos, dtype=np.int64),
                                 np.asarray(tuple(ref), dtype=np.int64)])
        windows = np.lib.stride_tricks.sliding_window_view(padded, n)
        predicted = self.table[tuple(windows.T)]
        eos_id = self.vocab.eos_id
        body = np.where(predicted[:-1] == eos_id, MISMATCH, predicted[:-1])
        return TeacherForced(tuple(int(t) for t in body), bool(predicted[-1] == eos_id))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'ngram',
            'vocab_size': self.vocab.size,
            'order': self.order,
            'eos_bias': self.eos_bias,
            'seed': self.seed,
        }


class ScriptedModel(VerifierModel):
    """
    Follows a fixed trunk G. Contexts that left the trunk are answered by
    repair rules keyed on (confirmed prefix length, off-trunk suffix); without
    a rule the model resyncs, predicting the trunk token at the same position.
    """

    def __init__(self, vocab: Vocab, trunk: Sequence[int],
                 repair_rules: Optional[Dict[Tuple[int, Tuple[int, ...]], int]] = None):
        self.vocab = vocab
        self.trunk = vocab.seq(trunk)
        self.repair_rules = dict(repair_rules or {})
        for (prefix_len, suffix), token in self.repair_rules.items():
            if not (vocab.is_content(token) or token == vocab.eos_id):
                raise ConfigError(f"repair rule ({prefix_len}, {suffix}) yields invalid token {token}")

    def _trunk_token(self, position: int) -> int:
        return self.trunk[position] if position < len(self.trunk) else self.vocab.eos_id

    def next(self, context: Sequence[int]) -> int:
        confirmed = 0
        limit = min(len(context), len(self.trunk))
        while confirmed < limit and context[confirmed] == self.trunk[confirmed]:
            confirmed += 1
        if confirmed == len(context):
            return self._trunk_token(confirmed)
        rule = self.repair_rules.get((confirmed, tuple(context[confirmed:])))
        if rule is not None:
            return rule
        return self._trunk_token(len(context))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'scripted',
            'vocab_size': self.vocab.size,
            'trunk': self.trunk.to_list(),
            'repair_rules': [
                {'prefix_len': prefix_len, 'suffix': list(suffix), 'next': token}
                for (prefix_len, suffix), token in sorted(self.repair_rules.items())
            ],
        }


class RepeaterModel(VerifierModel):
    """Emits the same token forever and never stops"""

    def __init__(self, vocab: Vocab, repeated_token: int):
        if not vocab.is_content(repeated_token):
            raise ConfigError(f"repeated token {repeated_token} is not a content token")
        self.vocab = vocab
        self.repeated_token = repeated_token

    def next(self, context: Sequence[int]) -> int:
        return self.repeated_token

    def teacher_forced(self, ref: Sequence[int]) -> TeacherForced:
        return TeacherForced((self.repeated_token,) * len(ref), False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'repeater',
            'vocab_size': self.vocab.size,
            'repeated_token': self.repeated_token,
        }


def model_from_dict(data: Dict[str, Any]) -> VerifierModel:
    try:
        vocab = Vocab(data['vocab_size'])
        match data['kind']:
            case 'ngram':
                return NGramModel(vocab, data['order'], data['eos_bias'], data['seed'])
            case 'scripted':
                rules = {(r['prefix_len'], tuple(r['suffix'])): r['next']
                         for r in data.get('repair_rules', [])}
                return ScriptedModel(vocab, data['trunk'], rules)
            case 'repeater':
                return RepeaterModel(vocab, data['repeated_token'])
            case kind:
                raise ConfigError(f"unknown model kind '{kind}'")
    except KeyError as e:
        raise ConfigError(f"model spec is missing field {e}") from e


def build_ngram_model(vocab: Vocab, order: int, eos_bias: float, seed: int) -> NGramModel:
    return NGramModel(vocab, order, eos_bias, seed)


def next_token(model: VerifierModel, context: Sequence[int]) -> int:
    return model.next(context)


def teacher_forced_predict(model: VerifierModel, ref: Sequence[int]) -> TeacherForced:
    """
    y_tf[i] is the prediction conditioned on ref[:i]; a mid-sequence eos shows
    up as MISMATCH so len(y_tf) == len(ref) always holds. `eos` is the
    prediction after the full reference. Counts as a single verify pass.
    """
    return model.teacher_forced(ref)


def greedy_decode(model: VerifierModel, l_cap: int = L_CAP) -> GreedyResult:
    """Plain autoregressive decoding; the oracle every hybrid decode is held to"""
    eos_id = model.vocab.eos_id
    tokens: List[int] = []
    while len(tokens) < l_cap:
        token = model.next(tokens)
        if token == eos_id:
            return GreedyResult(TokenSeq(tokens), True, len(tokens) + 1)
        tokens.append(token)
    # an eos right at the cap is still a decode step
    if model.next(tokens) == eos_id:
        return GreedyResult(TokenSeq(tokens), True, l_cap + 1)
    return GreedyResult(TokenSeq(tokens), False, l_cap)


@dataclass(frozen=True)
class CorruptionSpec:
    sub_rate: float = 0.0
    ins_rate: float = 0.0
    del_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ('sub_rate', 'ins_rate', 'del_rate'):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {rate}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'sub_rate': self.sub_rate,
            'ins_rate': self.ins_rate,
            'del_rate': self.del_rate,
            'seed': self.seed,
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'CorruptionSpec':
        return CorruptionSpec(data['sub_rate'], data['ins_rate'], data['del_rate'], data['seed'])


def corrupt_draft(greedy_output: Sequence[int], spec: CorruptionSpec, vocab: Vocab,
                  l_cap: int = L_CAP) -> TokenSeq:
    """
    Inject seeded first-pass errors in one left-to-right pass. Every position
    draws deletion, substitution and insertion independently; a deleted
    position gets no insertion after it.
    """
    for token in greedy_output:
        if not vocab.is_content(token):
            raise ContractViolation(f"token {token} is outside vocabulary of size {vocab.size}")

    rng = np.random.default_rng(spec.seed)
    out: List[int] = []
    for token in greedy_output:
        drop, swap, insert = rng.random(3)
        if drop < spec.del_rate:
            continue
        if swap < spec.sub_rate:
            other = int(rng.integers(0, vocab.size - 1))
            token = other + (other >= token)
        out.append(token)
        if insert < spec.ins_rate:
            out.append(int(rng.integers(0, vocab.size)))
    return vocab.seq(out[:l_cap], l_cap)


class DraftGenerator(ABC):
    @abstractmethod
    def draft(self) -> DraftResult:
        ...


class FixedDraft(DraftGenerator):
    def __init__(self, tokens: Sequence[int]):
        self.tokens = TokenSeq(tokens)

    def draft(self) -> DraftResult:
        return DraftResult(self.tokens, len(self.tokens))


class CorruptedGreedyDraft(DraftGenerator):
    """The verifier's own greedy output with seeded errors; one step per emitted token"""

    def __init__(self, model: VerifierModel, spec: CorruptionSpec, l_cap: int = L_CAP,
                 greedy_output: Optional[TokenSeq] = None):
        self.model = model
        self.spec = spec
        self.l_cap = l_cap
        self.greedy_output = greedy_output

    def draft(self) -> DraftResult:
        greedy_output = self.greedy_output
        if greedy_output is None:
            greedy_output = greedy_decode(self.model, self.l_cap).output
        tokens = corrupt_draft(greedy_output, self.spec, self.model.vocab, self.l_cap)
        return DraftResult(tokens, len(tokens))
