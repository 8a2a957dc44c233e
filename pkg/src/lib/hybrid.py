"""
Hybrid decoding: a cheap draft is verified by one teacher-forced pass of the
verifier, and only the segment after the first divergence is regenerated
autoregressively and spliced back in. The loop repeats until the verifier
confirms the whole reference followed by eos, or until a bounded append at
the end of a fully verified reference.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

from src.lib.core import L_CAP, TAIL, ExitPath, HybridTrace, PatchEvent, TokenSeq
from src.lib.errors import ConfigError, ContractViolation, DecodeOverflowError, NonTerminationError
from src.lib.models import VerifierModel, greedy_decode, teacher_forced_predict


@dataclass(frozen=True)
class PatchResult:
    patch: TokenSeq
    patch_eos: bool
    ar_steps_used: int


class AppendResult(NamedTuple):
    output: TokenSeq
    got_eos: bool
    ar_steps: int


@dataclass(frozen=True)
class HybridConfig:
    """K bounds both the patch length and the final append"""
    K: int
    l_cap: int = L_CAP
    iteration_cap: Optional[int] = field(default=None)

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError(f"K must be at least 1, got {self.K}")
        if self.l_cap < 0:
            raise ConfigError(f"l_cap must be non-negative, got {self.l_cap}")
        if self.iteration_cap is None:
            object.__setattr__(self, 'iteration_cap', self.l_cap + 2)
        elif self.iteration_cap < 1:
            raise ConfigError(f"iteration_cap must be at least 1, got {self.iteration_cap}")


@dataclass(frozen=True)
class HybridOutcome:
    output: TokenSeq
    trace: HybridTrace

    def to_dict(self) -> Dict[str, Any]:
        return {'output': self.output.to_list(), **self.trace.to_dict()}

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'HybridOutcome':
        return HybridOutcome(TokenSeq(data['output']), HybridTrace.from_dict(data))


def first_divergence(ref: Sequence[int], y_tf: Sequence[int]) -> int:
    """Smallest i with ref[i] != y_tf[i], or len(ref) when they agree everywhere"""
    if len(ref) != len(y_tf):
        raise ContractViolation(
            f"teacher-forced prediction has length {len(y_tf)}, reference has {len(ref)}")
    for i, (expected, predicted) in enumerate(zip(ref, y_tf)):
        if expected != predicted:
            return i
    return len(ref)


def generate_patch(model: VerifierModel, confirmed_prefix: Sequence[int], K: int) -> PatchResult:
    """Decode at most K tokens after the confirmed prefix, stopping early on eos"""
    eos_id = model.vocab.eos_id
    context = list(confirmed_prefix)
    patch: List[int] = []
    steps = 0
    while len(patch) < K:
        token = model.next(context)
        steps += 1
        if token == eos_id:
            return PatchResult(TokenSeq(patch), True, steps)
        patch.append(token)
        context.append(token)
    return PatchResult(TokenSeq(patch), False, steps)


def find_patch_range(ref: Sequence[int], i_star: int, patch: PatchResult) -> Optional[int]:
    """
    Inclusive end of the reference segment the patch replaces.

    An eos patch replaces everything from i_star on (TAIL). Otherwise the
    first occurrence of the patch's last token within the 2*|patch| tokens
    starting at i_star ends the segment; failing that, a segment as long as
    the patch is replaced.
    """
    if not 0 <= i_star < len(ref):
        raise ContractViolation(f"i_star={i_star} out of bounds for reference of length {len(ref)}")
    if patch.patch_eos:
        return TAIL
    if not patch.patch:
        raise ContractViolation("an empty patch must carry eos")

    last = patch.patch[-1]
    window_end = min(len(ref), i_star + 2 * len(patch.patch))
    for j in range(i_star, window_end):
        if ref[j] == last:
            return j
    return min(len(ref), i_star + len(patch.patch)) - 1


def apply_patch(ref: TokenSeq, i_star: int, j_end: Optional[int], patch: TokenSeq,
                l_cap: int = L_CAP) -> TokenSeq:
    """ref[:i_star] + patch + ref[j_end+1:]; TAIL drops the rest of ref"""
    if j_end is TAIL:
        if not 0 <= i_star <= len(ref):
            raise ContractViolation(f"i_star={i_star} out of bounds for reference of length {len(ref)}")
        result = ref[:i_star] + patch
    else:
        if not 0 <= i_star <= j_end + 1 <= len(ref):
            raise ContractViolation(
                f"invalid patch range [{i_star}, {j_end}] for reference of length {len(ref)}")
        result = ref[:i_star] + patch + ref[j_end + 1:]
    if len(result) > l_cap:
        raise DecodeOverflowError(len(result), l_cap)
    return result


def append_continuation(model: VerifierModel, ref: TokenSeq, K: int,
                        l_cap: int = L_CAP) -> AppendResult:
    """
    Extend a fully verified reference by at most K greedy tokens. Nothing is
    re-verified afterwards, which is what caps a verifier stuck repeating itself.
    """
    extension = generate_patch(model, ref, K)
    result = ref + extension.patch
    if len(result) > l_cap:
        raise DecodeOverflowError(len(result), l_cap)
    return AppendResult(result, extension.patch_eos, extension.ar_steps_used)


def hybrid_decode(model: VerifierModel, draft: Sequence[int], config: HybridConfig,
                  baseline_steps: Optional[int] = None,
                  draft_steps: Optional[int] = None) -> HybridOutcome:
    """
    Verify and patch `draft` until the verifier confirms it.

    When the trace exits with EOS_CONFIRMED the output is exactly the greedy
    decode of `model`; the append exits return a prefix of the greedy
    continuation. `baseline_steps` defaults to the step count of a greedy decode
    and `draft_steps` to the draft length.
    """
    ref = model.vocab.seq(draft, config.l_cap)
    if baseline_steps is None:
        baseline_steps = greedy_decode(model, config.l_cap).steps
    if draft_steps is None:
        draft_steps = len(ref)

    verify_passes = 0
    ar_steps = 0
    iterations = 0
    divergences: List[int] = []
    patches: List[PatchEvent] = []

    def finish(output: TokenSeq, exit_path: ExitPath, appended: TokenSeq = TokenSeq()) -> HybridOutcome:
        trace = HybridTrace(
            verify_passes=verify_passes,
            ar_steps=ar_steps,
            draft_steps=draft_steps,
            iterations=iterations,
            divergence_indices=tuple(divergences),
            exit_path=exit_path,
            baseline_steps=baseline_steps,
            patches=tuple(patches),
            appended=appended)
        return HybridOutcome(output, trace)

    while True:
        if iterations >= config.iteration_cap:
            raise NonTerminationError(iterations)
        iterations += 1

        y_tf, eos = teacher_forced_predict(model, ref)
        verify_passes += 1
        i_star = first_divergence(ref, y_tf)
        divergences.append(i_star)

        if i_star == len(ref):
            if eos:
                return finish(ref, ExitPath.EOS_CONFIRMED)
            appended = append_continuation(model, ref, config.K, config.l_cap)
            ar_steps += appended.ar_steps
            exit_path = ExitPath.APPENDED_EOS if appended.got_eos else ExitPath.APPENDED_TRUNCATED
            return finish(appended.output, exit_path, appended.output[len(ref):])

        patch = generate_patch(model, ref[:i_star], config.K)
        ar_steps += patch.ar_steps_used
        j_end = find_patch_range(ref, i_star, patch)
        replaced = ref[i_star:] if j_end is TAIL else ref[i_star:j_end + 1]
        patches.append(PatchEvent(i_star, patch.patch, patch.patch_eos, j_end, replaced))
        ref = apply_patch(ref, i_star, j_end, patch.patch, config.l_cap)
