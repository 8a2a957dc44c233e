"""
Text layer and scripted correction pipelines.

Pieces follow the sentencepiece convention: a leading '▁' starts a new word.
Each scenario pairs the verifier's greedy transcript (the trunk) with a draft
carrying one kind of first-pass error.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

from src.lib.core import MISMATCH, TokenSeq, Vocab
from src.lib.hybrid import HybridConfig, HybridOutcome, hybrid_decode
from src.lib.models import ScriptedModel, TeacherForced, greedy_decode, teacher_forced_predict

WORD_START = '▁'


class Lexicon:
    """Maps subword pieces to token ids in order of first appearance"""

    def __init__(self, pieces: Iterable[str]):
        self.pieces: List[str] = []
        self.ids: Dict[str, int] = {}
        for piece in pieces:
            if piece not in self.ids:
                self.ids[piece] = len(self.pieces)
                self.pieces.append(piece)

    @property
    def vocab(self) -> Vocab:
        return Vocab(max(len(self.pieces), 2))

    def encode(self, pieces: Sequence[str]) -> TokenSeq:
        return TokenSeq(self.ids[p] for p in pieces)

    def decode(self, tokens: Iterable[int]) -> List[str]:
        return ['<eos>' if t == MISMATCH else self.pieces[t] for t in tokens]

    def text(self, tokens: Iterable[int]) -> str:
        return ''.join(self.decode(tokens)).replace(WORD_START, ' ').strip()


@dataclass(frozen=True)
class ScenarioRun:
    scenario: 'Scenario'
    lexicon: Lexicon
    first_pass: TeacherForced
    outcome: HybridOutcome
    baseline_steps: int

    @property
    def hybrid_steps(self) -> int:
        return int(self.outcome.trace.transformer_cost())

    def lines(self) -> List[tuple[str, str]]:
        """Ref / Verif / Diff / Patch / Range / Result / Steps, one tuple per line"""
        lex = self.lexicon
        rows = [('Ref', lex.text(lex.encode(self.scenario.draft))),
                ('Verif', lex.text(self.first_pass.predictions))]
        for event in self.outcome.trace.patches:
            found = lex.text(event.replaced[:1])
            wanted = lex.text(event.patch[:1]) if event.patch else '<eos>'
            rows.append(('Diff', f"idx {event.i_star} ({found} -> {wanted})"))
            rows.append(('Patch', lex.text(event.patch) + (' <eos>' if event.patch_eos else '')))
            rows.append(('Range', lex.text(event.replaced)))
        rows.append(('Result', lex.text(self.outcome.output)))
        rows.append(('Steps', f"{self.baseline_steps} -> {self.hybrid_steps}"))
        return rows


@dataclass(frozen=True)
class Scenario:
    name: str
    trunk: Sequence[str]
    draft: Sequence[str]
    K: int
    baseline_steps: int
    hybrid_steps: int

    def lexicon(self) -> Lexicon:
        return Lexicon(list(self.trunk) + list(self.draft))

    def model(self, lexicon: Lexicon) -> ScriptedModel:
        return ScriptedModel(lexicon.vocab, lexicon.encode(self.trunk))

    def run(self) -> ScenarioRun:
        lexicon = self.lexicon()
        model = self.model(lexicon)
        draft = lexicon.encode(self.draft)
        baseline = greedy_decode(model)
        outcome = hybrid_decode(model, draft, HybridConfig(self.K), baseline_steps=baseline.steps)
        return ScenarioRun(self, lexicon, teacher_forced_predict(model, draft), outcome, baseline.steps)


SCENARIOS: Dict[str, Scenario] = {
    'insertion': Scenario(
        name='insertion',
        trunk=['▁wh', 'ere', '▁the', '▁t', 'ok', 'en', '▁by', '▁wh', 'ich', '▁i',
               '▁sh', 'all', '▁dis', 'co', 'ver', '▁it'],
        draft=['▁we', '▁t', 'ok', 'en', '▁by', '▁wh', 'ich', '▁i',
               '▁sh', 'all', '▁dis', 'co', 'ver', '▁it'],
        K=6, baseline_steps=17, hybrid_steps=8),
    'deletion': Scenario(
        name='deletion',
        trunk=['▁the', '▁g', 'ir', 'l', '▁w', 'ho', '▁br', 'ea', 'ks', '▁the', '▁r', 'u', 'les',
               '▁has', '▁to', '▁be', '▁p', 'un', 'is', 'h', 'ed'],
        draft=['▁the', '▁g', 'ir', 'l', '▁w', 'ho', '▁br', 'ea', 'ks', '▁the', '▁r', 'u', 'les',
               '▁ha', 'ves', '▁to', '▁be', '▁p', 'un', 'is', 'h', 'ed'],
        K=6, baseline_steps=22, hybrid_steps=8),
    'substitution': Scenario(
        name='substitution',
        trunk=['▁i', '▁d', 'un', 'no', '▁mut', 't', 'er', 'ed', '▁d', 'ick', '▁and',
               '▁the', '▁men', '▁can', "'", 't', '▁be', '▁su', 're'],
        draft=['▁i', '▁d', 'un', 'no', '▁mut', 't', 'er', 'ed', '▁d', 'ick', '▁and',
               '▁our', '▁men', '▁can', "'", 't', '▁be', '▁su', 're'],
        K=6, baseline_steps=20, hybrid_steps=8),
}
