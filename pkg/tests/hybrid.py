import unittest
from typing import Sequence

from src.lib.core import TAIL, ExitPath, TokenSeq, Vocab
from src.lib.errors import ConfigError, ContractViolation, DecodeOverflowError, NonTerminationError
from src.lib.hybrid import (AppendResult, HybridConfig, PatchResult, append_continuation, apply_patch,
                            find_patch_range, first_divergence, generate_patch, hybrid_decode)
from src.lib.models import RepeaterModel, ScriptedModel, TeacherForced, VerifierModel, greedy_decode

VOCAB = Vocab(10)
K_VALUES = (1, 3, 5, 7, 9)


class DisagreeingModel(VerifierModel):
    """Teacher forcing always disagrees while stepwise decoding always says 0"""

    def __init__(self):
        self.vocab = VOCAB

    def next(self, context: Sequence[int]) -> int:
        return 0

    def teacher_forced(self, ref: Sequence[int]) -> TeacherForced:
        return TeacherForced(tuple((t + 1) % self.vocab.size for t in ref), False)

    def to_dict(self):
        return {'kind': 'disagreeing', 'vocab_size': self.vocab.size}


class TestFirstDivergence(unittest.TestCase):
    """Test cases for first_divergence"""

    def test_examples(self):
        """Test divergence on matching and differing pairs"""
        self.assertEqual(first_divergence([4, 5, 6], [4, 5, 6]), 3)
        self.assertEqual(first_divergence([4, 9, 6], [4, 5, 6]), 1)
        self.assertEqual(first_divergence([], []), 0)
        self.assertEqual(first_divergence([4, 5], [4, -1]), 1)

    def test_length_mismatch(self):
        """Test rejection of unequal lengths"""
        with self.assertRaises(ContractViolation):
            first_divergence([1, 2], [1])


class TestGeneratePatch(unittest.TestCase):
    """Test cases for generate_patch"""

    def test_stops_on_eos(self):
        """Test that eos ends the patch and counts as a step"""
        model = ScriptedModel(VOCAB, [4, 5, 6])
        self.assertEqual(generate_patch(model, [4], 3), PatchResult(TokenSeq([5, 6]), True, 3))

    def test_bounded_by_k(self):
        """Test that a patch holds at most K tokens"""
        self.assertEqual(generate_patch(RepeaterModel(VOCAB, 7), [], 2), PatchResult(TokenSeq([7, 7]), False, 2))

    def test_empty_patch(self):
        """Test a patch that is only eos"""
        model = ScriptedModel(VOCAB, [4])
        self.assertEqual(generate_patch(model, [4], 5), PatchResult(TokenSeq(), True, 1))


class TestFindPatchRange(unittest.TestCase):
    """Test cases for find_patch_range"""

    def test_last_token_found(self):
        """Test the range ending at the patch's last token"""
        ref = [1, 2, 6, 7, 8, 9, 0]
        patch = PatchResult(TokenSeq([3, 7, 8, 9]), False, 4)
        self.assertEqual(find_patch_range(ref, 2, patch), 5)

    def test_fallback_replaces_same_length(self):
        """Test the same-length fallback"""
        patch = PatchResult(TokenSeq([8]), False, 1)
        self.assertEqual(find_patch_range([1, 2, 3, 4], 1, patch), 1)

    def test_fallback_clipped_to_reference(self):
        """Test that the fallback stays inside the reference"""
        patch = PatchResult(TokenSeq([8, 9]), False, 2)
        self.assertEqual(find_patch_range([1, 2, 3], 2, patch), 2)

    def test_window_is_two_patch_lengths(self):
        """Test the search window size"""
        patch = PatchResult(TokenSeq([7, 9]), False, 2)
        self.assertEqual(find_patch_range([1, 2, 3, 4, 9], 0, patch), 1)
        self.assertEqual(find_patch_range([1, 2, 3, 9, 4], 0, patch), 3)

    def test_eos_patch_takes_tail(self):
        """Test that an eos patch replaces the tail"""
        self.assertIs(find_patch_range([1, 2, 3], 1, PatchResult(TokenSeq([5]), True, 2)), TAIL)
        self.assertIs(find_patch_range([1, 2, 3], 1, PatchResult(TokenSeq(), True, 1)), TAIL)

    def test_preconditions(self):
        """Test rejection of invalid arguments"""
        with self.assertRaises(ContractViolation):
            find_patch_range([1, 2], 2, PatchResult(TokenSeq([1]), False, 1))
        with self.assertRaises(ContractViolation):
            find_patch_range([1, 2], 0, PatchResult(TokenSeq(), False, 0))


class TestApplyPatch(unittest.TestCase):
    """Test cases for apply_patch"""

    def test_splice(self):
        """Test a splice in the middle"""
        self.assertEqual(apply_patch(TokenSeq([1, 2, 3, 4]), 1, 2, TokenSeq([9])), TokenSeq([1, 9, 4]))

    def test_tail(self):
        """Test a tail replacement"""
        self.assertEqual(apply_patch(TokenSeq([1, 2, 3]), 1, TAIL, TokenSeq([5])), TokenSeq([1, 5]))
        self.assertEqual(apply_patch(TokenSeq([1, 2]), 0, TAIL, TokenSeq()), TokenSeq())

    def test_length(self):
        """Test the spliced length"""
        ref = TokenSeq(range(8))
        patch = TokenSeq([9, 9, 9])
        for i_star in range(8):
            for j_end in range(i_star, 8):
                result = apply_patch(ref, i_star, j_end, patch)
                self.assertEqual(len(result), len(ref) - (j_end - i_star + 1) + len(patch))

    def test_overflow(self):
        """Test the error when a splice passes l_cap"""
        with self.assertRaises(DecodeOverflowError):
            apply_patch(TokenSeq([1, 2]), 0, 0, TokenSeq([3, 4, 5]), l_cap=3)

    def test_invalid_range(self):
        """Test rejection of invalid ranges"""
        with self.assertRaises(ContractViolation):
            apply_patch(TokenSeq([1, 2]), 2, 0, TokenSeq([3]))
        with self.assertRaises(ContractViolation):
            apply_patch(TokenSeq([1, 2]), 0, 2, TokenSeq([3]))


class TestAppendContinuation(unittest.TestCase):
    """Test cases for append_continuation"""

    def test_truncated(self):
        """Test a continuation that runs out of K"""
        result = append_continuation(RepeaterModel(VOCAB, 7), TokenSeq([7, 7]), 3)
        self.assertEqual(result, AppendResult(TokenSeq([7] * 5), False, 3))

    def test_reaches_eos(self):
        """Test a continuation that ends on eos"""
        result = append_continuation(ScriptedModel(VOCAB, [4, 5, 6]), TokenSeq([4, 5]), 3)
        self.assertEqual(result, AppendResult(TokenSeq([4, 5, 6]), True, 2))

    def test_overflow(self):
        """Test the error when appending passes l_cap"""
        with self.assertRaises(DecodeOverflowError):
            append_continuation(RepeaterModel(VOCAB, 7), TokenSeq([7, 7]), 3, l_cap=4)


class TestHybridConfig(unittest.TestCase):
    """Test cases for HybridConfig"""

    def test_defaults(self):
        """Test the default l_cap and iteration cap"""
        config = HybridConfig(3)
        self.assertEqual(config.l_cap, 1024)
        self.assertEqual(config.iteration_cap, 1026)
        self.assertEqual(HybridConfig(3, l_cap=10).iteration_cap, 12)

    def test_invalid(self):
        """Test rejection of non-positive K and iteration cap"""
        with self.assertRaises(ConfigError):
            HybridConfig(0)
        with self.assertRaises(ConfigError):
            HybridConfig(3, iteration_cap=0)


class TestHybridDecode(unittest.TestCase):
    """Test cases for hybrid_decode"""

    def setUp(self):
        self.model = ScriptedModel(VOCAB, [4, 5, 6])

    def test_perfect_draft(self):
        """Test a draft accepted in one pass"""
        outcome = hybrid_decode(self.model, [4, 5, 6], HybridConfig(3))
        self.assertEqual(outcome.output, TokenSeq([4, 5, 6]))
        trace = outcome.trace
        self.assertEqual((trace.verify_passes, trace.ar_steps), (1, 0))
        self.assertEqual(trace.exit_path, ExitPath.EOS_CONFIRMED)
        self.assertEqual(trace.baseline_steps, 4)
        self.assertEqual(trace.divergence_indices, (3,))
        self.assertEqual(trace.patches, ())

    def test_substitution(self):
        """Test repair of a substituted token"""
        outcome = hybrid_decode(self.model, [4, 9, 6], HybridConfig(3))
        self.assertEqual(outcome.output, TokenSeq([4, 5, 6]))
        trace = outcome.trace
        self.assertEqual((trace.verify_passes, trace.ar_steps), (2, 3))
        self.assertEqual(trace.divergence_indices, (1, 3))
        self.assertEqual(trace.exit_path, ExitPath.EOS_CONFIRMED)
        self.assertEqual(trace.patches[0].j_end, TAIL)
        self.assertEqual(trace.patches[0].replaced, TokenSeq([9, 6]))

    def test_output_exactly_at_cap(self):
        """Test a draft of exactly l_cap tokens confirmed by eos"""
        model = ScriptedModel(VOCAB, range(8))
        outcome = hybrid_decode(model, range(8), HybridConfig(3, l_cap=8))
        self.assertEqual(outcome.output, TokenSeq(range(8)))
        self.assertEqual(outcome.trace.exit_path, ExitPath.EOS_CONFIRMED)
        self.assertEqual(outcome.trace.baseline_steps, 9)
        self.assertEqual(outcome.trace.baseline_steps, greedy_decode(model, 8).steps)

    def test_empty_draft(self):
        """Test decoding from an empty draft"""
        outcome = hybrid_decode(self.model, [], HybridConfig(5))
        self.assertEqual(outcome.output, TokenSeq([4, 5, 6]))
        self.assertEqual(outcome.trace.exit_path, ExitPath.APPENDED_EOS)
        self.assertEqual((outcome.trace.verify_passes, outcome.trace.ar_steps), (1, 4))
        self.assertEqual(outcome.trace.appended, TokenSeq([4, 5, 6]))

    def test_draft_runs_past_eos(self):
        """Test a draft longer than the greedy output"""
        outcome = hybrid_decode(ScriptedModel(VOCAB, [4, 5]), [4, 5, 6, 7], HybridConfig(3))
        self.assertEqual(outcome.output, TokenSeq([4, 5]))
        self.assertEqual(outcome.trace.exit_path, ExitPath.EOS_CONFIRMED)
        self.assertEqual((outcome.trace.verify_passes, outcome.trace.ar_steps), (2, 1))
        self.assertEqual(outcome.trace.divergence_indices, (2, 2))

    def test_repetition_is_capped(self):
        """Test that a repeating model stops after K appended tokens"""
        model = RepeaterModel(VOCAB, 7)
        baseline = greedy_decode(model).steps
        for m in range(51):
            for K in K_VALUES:
                with self.subTest(m=m, K=K):
                    outcome = hybrid_decode(model, [7] * m, HybridConfig(K), baseline_steps=baseline)
                    self.assertEqual(len(outcome.output), m + K)
                    self.assertEqual(outcome.trace.exit_path, ExitPath.APPENDED_TRUNCATED)
                    self.assertEqual((outcome.trace.verify_passes, outcome.trace.ar_steps), (1, K))

    def test_tail_deletion_longer_than_k(self):
        """Test repair of a long missing tail"""
        trunk = list(range(30))
        model = ScriptedModel(Vocab(32), trunk)
        for K in K_VALUES:
            with self.subTest(K=K):
                outcome = hybrid_decode(model, trunk[:-(K + 2)], HybridConfig(K))
                self.assertEqual(outcome.output, TokenSeq(trunk[:-2]))
                self.assertEqual(outcome.trace.exit_path, ExitPath.APPENDED_TRUNCATED)
                self.assertEqual(outcome.trace.verify_passes, 1)

    def test_tail_deletion_within_k(self):
        """Test repair of a short missing tail"""
        trunk = list(range(30))
        outcome = hybrid_decode(ScriptedModel(Vocab(32), trunk), trunk[:-2], HybridConfig(5))
        self.assertEqual(outcome.output, TokenSeq(trunk))
        self.assertEqual(outcome.trace.exit_path, ExitPath.APPENDED_EOS)
        self.assertEqual(outcome.trace.ar_steps, 3)

    def test_iteration_cap(self):
        """Test the error once the iteration cap is hit"""
        with self.assertRaises(NonTerminationError) as caught:
            hybrid_decode(DisagreeingModel(), [0, 0], HybridConfig(1, iteration_cap=5), baseline_steps=10)
        self.assertEqual(caught.exception.iterations, 5)

    def test_draft_over_l_cap(self):
        """Test rejection of drafts longer than l_cap"""
        with self.assertRaises(ContractViolation):
            hybrid_decode(self.model, [4] * 11, HybridConfig(3, l_cap=10))

    def test_explicit_step_counts(self):
        """Test caller-supplied baseline and draft steps"""
        outcome = hybrid_decode(self.model, [4, 5, 6], HybridConfig(3), baseline_steps=40, draft_steps=9)
        self.assertEqual(outcome.trace.baseline_steps, 40)
        self.assertEqual(outcome.trace.draft_steps, 9)


if __name__ == "__main__":
    unittest.main()
