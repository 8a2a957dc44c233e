"""
Vocabulary, token sequence and decode trace types.

Sequences only ever hold content tokens. The end-of-sentence signal is never
stored; operations that produce it report a flag or an exit path instead.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple, overload

from src.lib.errors import ConfigError, InvalidSequenceError

L_CAP = 1024

# Written into teacher-forced predictions where the verifier wanted to stop
# early. Never a valid content token, so it never matches a reference token.
MISMATCH = -1

# End marker of a patch range meaning "replace through the end of the reference"
TAIL = None


@dataclass(frozen=True)
class Vocab:
    """Ordinary tokens are 0..size-1; eos is the single reserved id after them"""
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ConfigError(f"vocabulary size must be at least 2, got {self.size}")

    @property
    def eos_id(self) -> int:
        return self.size

    def is_content(self, token: int) -> bool:
        return 0 <= token < self.size

    def seq(self, tokens: Iterable[int], l_cap: int = L_CAP) -> 'TokenSeq':
        """Build a TokenSeq, rejecting eos, foreign ids and over-long input"""
        result = TokenSeq(tokens)
        for token in result:
            if token == self.eos_id:
                raise InvalidSequenceError("eos may not be stored inside a token sequence")
            if not self.is_content(token):
                raise InvalidSequenceError(f"token {token} is outside vocabulary of size {self.size}")
        if len(result) > l_cap:
            raise InvalidSequenceError(f"sequence of length {len(result)} exceeds l_cap={l_cap}")
        return result


@dataclass(frozen=True)
class TokenSeq:
    tokens: Tuple[int, ...] = ()

    def __post_init__(self):
        tokens = tuple(int(t) for t in self.tokens)
        if any(t < 0 for t in tokens):
            raise InvalidSequenceError(f"negative token id in {tokens}")
        object.__setattr__(self, 'tokens', tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[int]:
        return iter(self.tokens)

    @overload
    def __getitem__(self, index: int) -> int: ...
    @overload
    def __getitem__(self, index: slice) -> 'TokenSeq': ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return TokenSeq(self.tokens[index])
        return self.tokens[index]

    def __add__(self, other: 'TokenSeq | Tuple[int, ...] | List[int]') -> 'TokenSeq':
        return TokenSeq(self.tokens + tuple(other))

    def is_prefix_of(self, other: 'TokenSeq') -> bool:
        return len(self) <= len(other) and other.tokens[:len(self)] == self.tokens

    def to_list(self) -> List[int]:
        return list(self.tokens)

    def __repr__(self):
        return f"TokenSeq({list(self.tokens)})"


class ExitPath(Enum):
    EOS_CONFIRMED = "eos_confirmed"
    APPENDED_EOS = "appended_eos"
    APPENDED_TRUNCATED = "appended_truncated"


@dataclass(frozen=True)
class StepCostModel:
    """
    Cost units charged per decoder invocation.
    The defaults count forward steps: one unit per autoregressive step and one
    per teacher-forced pass, whatever its length; the draft decoder is free.
    """
    verify_pass_cost: float = 1.0
    ar_step_cost: float = 1.0
    draft_step_cost: float = 0.0

    def __post_init__(self):
        for name in ('verify_pass_cost', 'ar_step_cost', 'draft_step_cost'):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")

    def to_dict(self) -> Dict[str, float]:
        return {
            'verify_pass_cost': self.verify_pass_cost,
            'ar_step_cost': self.ar_step_cost,
            'draft_step_cost': self.draft_step_cost,
        }


@dataclass(frozen=True)
class PatchEvent:
    """One correction: the patch generated at i_star and the range it replaced"""
    i_star: int
    patch: TokenSeq
    patch_eos: bool
    j_end: Optional[int]
    replaced: TokenSeq

    def to_dict(self) -> Dict[str, Any]:
        return {
            'i_star': self.i_star,
            'patch': self.patch.to_list(),
            'patch_eos': self.patch_eos,
            'j_end': self.j_end,
            'replaced': self.replaced.to_list(),
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'PatchEvent':
        return PatchEvent(
            i_star=data['i_star'],
            patch=TokenSeq(data['patch']),
            patch_eos=data['patch_eos'],
            j_end=data['j_end'],
            replaced=TokenSeq(data['replaced']))


@dataclass(frozen=True)
class HybridTrace:
    verify_passes: int
    ar_steps: int
    draft_steps: int
    iterations: int
    divergence_indices: Tuple[int, ...]
    exit_path: ExitPath
    baseline_steps: int
    patches: Tuple[PatchEvent, ...] = field(default_factory=tuple)
    appended: TokenSeq = field(default_factory=TokenSeq)

    def transformer_cost(self, cost: StepCostModel = StepCostModel()) -> float:
        return self.verify_passes * cost.verify_pass_cost + self.ar_steps * cost.ar_step_cost

    def total_cost(self, cost: StepCostModel = StepCostModel()) -> float:
        return self.transformer_cost(cost) + self.draft_steps * cost.draft_step_cost

    def to_dict(self) -> Dict[str, Any]:
        return {
            'verify_passes': self.verify_passes,
            'ar_steps': self.ar_steps,
            'draft_steps': self.draft_steps,
            'iterations': self.iterations,
            'divergence_indices': list(self.divergence_indices),
            'exit_path': self.exit_path.value,
            'baseline_steps': self.baseline_steps,
            'patches': [p.to_dict() for p in self.patches],
            'appended': self.appended.to_list(),
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'HybridTrace':
        return HybridTrace(
            verify_passes=data['verify_passes'],
            ar_steps=data['ar_steps'],
            draft_steps=data['draft_steps'],
            iterations=data['iterations'],
            divergence_indices=tuple(data['divergence_indices']),
            exit_path=ExitPath(data['exit_path']),
            baseline_steps=data['baseline_steps'],
            patches=tuple(PatchEvent.from_dict(p) for p in data.get('patches', [])),
            appended=TokenSeq(data.get('appended', [])))
