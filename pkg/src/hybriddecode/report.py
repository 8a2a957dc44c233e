"""
Build the report bundle (tables, histograms, markdown) from a results directory
"""

import argparse
from pathlib import Path

import click
from rich.table import Table

from src.lib.console import console, info, warning
from src.lib.reporting import MARKDOWN_FILE, TABLE_HEADER, report


def execute(args: argparse.Namespace) -> int:
    out = Path(args.out)
    if (out / MARKDOWN_FILE).exists() and not args.yes:
        if not click.confirm(f'Warning: {out} already holds a report, overwrite?', default=False):
            info('Nothing to do.')
            return 0

    bundle = report(Path(args.results), out)
    if not bundle.table:
        warning(f"{args.results} holds no utterance records; the report is empty")

    table = Table(title='WER and steps per decoding method')
    for column in TABLE_HEADER:
        table.add_column(column, justify='right')
    for row in bundle.table:
        table.add_row(*row)
    console.print(table)
    if args.verbose:
        console.print(bundle.markdown, markup=False)
    console.print(f"Report written to {out}")
    return 0


def addparser(subparsers):
    parser: argparse.ArgumentParser
    parser = subparsers.add_parser('report', help='Summarize experiment results')
    parser.add_argument('-r', '--results', required=True, help='Results directory written by run')
    parser.add_argument('-o', '--out', required=True, help='Report directory')
    parser.add_argument('-y', '--yes', action='store_true', help='Overwrite an existing report without asking')
    parser.add_argument('-v', '--verbose', action='store_true', help='Also print the markdown summary')
    parser.set_defaults(func=execute)
