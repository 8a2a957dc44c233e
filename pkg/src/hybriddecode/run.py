"""
Decode every utterance of a corpus with the greedy baseline and the hybrid
decoder for each configured K
"""

import argparse
import os
from pathlib import Path
from typing import Optional

import click
from rich.table import Table

from src.lib.config import ExperimentConfig
from src.lib.console import console, error, info, warning
from src.lib.errors import ConfigError
from src.lib.experiment import RECORDS_FILE, KSummary, run_experiment, summarize


def resolve_parallel(option: Optional[str], config: ExperimentConfig) -> int:
    value = option or os.getenv('HYBRIDDECODE_PARALLEL') or config.parallel
    try:
        parallel = int(value)
    except ValueError:
        parallel = 0
    if parallel < 1:
        raise ConfigError(f"parallel must be a positive integer, got {value!r}")
    return parallel


def execute(args: argparse.Namespace) -> int:
    config = ExperimentConfig.load(Path(args.config))
    corpus = Path(args.corpus) if args.corpus else config.output.corpus
    out = Path(args.out) if args.out else config.output.results
    if corpus is None or out is None:
        error('pass --corpus and --out, or set [output] corpus/results in the config')
        return 1
    parallel = resolve_parallel(args.parallel, config)

    if (out / RECORDS_FILE).exists() and not args.yes:
        if not click.confirm(f'Warning: {out} already holds results, overwrite?', default=False):
            info('Nothing to do.')
            return 0

    if args.verbose:
        info(f"decoding {corpus} with K in {list(config.k_values)} using {parallel} worker(s)")
    records = run_experiment(corpus, config, out, parallel, show_progress=not args.no_progress)
    if not records:
        warning(f"{corpus} holds no utterances; the results are empty")

    table = Table(title=f"{len(records)} utterance(s)")
    for column in KSummary.HEADER:
        table.add_column(column, justify='right')
    for summary in summarize(records, config.k_values):
        table.add_row(*summary.row())
    console.print(table)
    console.print(f"Results written to {out}")
    return 0


def addparser(subparsers):
    parser: argparse.ArgumentParser
    parser = subparsers.add_parser('run', help='Run the hybrid decoding experiment over a corpus')
    parser.add_argument('--corpus', help='Corpus file written by generate')
    parser.add_argument('-c', '--config', required=True, help='Experiment config (TOML)')
    parser.add_argument('-o', '--out', help='Results directory')
    parser.add_argument('-p', '--parallel', help='number of parallel workers, default $HYBRIDDECODE_PARALLEL or the config')
    parser.add_argument('-y', '--yes', action='store_true', help='Overwrite existing results without asking')
    parser.add_argument('--no-progress', action='store_true', help='Hide the progress bar')
    parser.add_argument('-v', '--verbose', action='store_true', help='Show run details')
    parser.set_defaults(func=execute)
