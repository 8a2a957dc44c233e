"""
Generate a synthetic utterance corpus from an experiment config
"""

import argparse
from pathlib import Path

import click

from src.lib.config import ExperimentConfig
from src.lib.console import console, error, info
from src.lib.corpus import corpus_stats, generate_corpus


def execute(args: argparse.Namespace) -> int:
    config = ExperimentConfig.load(Path(args.config))
    out = Path(args.out) if args.out else config.output.corpus
    if out is None:
        error('no output path: pass --out or set [output] corpus in the config')
        return 1

    if out.exists() and not args.yes:
        if not click.confirm(f'Warning: {out} already exists, overwrite?', default=False):
            info('Nothing to do.')
            return 0

    if args.verbose:
        for group in config.groups:
            info(f"group '{group.name}': {group.n_utterances} utterance(s), vocab {group.vocab_size}, "
                 f"order {group.ngram_order}, length {group.min_length}..{group.max_length}")

    stats = corpus_stats(generate_corpus(config, out))
    console.print(f"Wrote {stats['n_utterances']} utterance(s) to {out} "
                  f"(greedy length mean {stats['mean_greedy_length']:.1f}, "
                  f"min {stats['min_greedy_length']}, max {stats['max_greedy_length']})")
    return 0


def addparser(subparsers):
    parser: argparse.ArgumentParser
    parser = subparsers.add_parser('generate', help='Generate a synthetic corpus (JSONL)')
    parser.add_argument('-c', '--config', required=True, help='Experiment config (TOML)')
    parser.add_argument('-o', '--out', help='Corpus file to write, default [output] corpus from the config')
    parser.add_argument('-y', '--yes', action='store_true', help='Overwrite existing files without asking')
    parser.add_argument('-v', '--verbose', action='store_true', help='Show per-group details')
    parser.set_defaults(func=execute)
