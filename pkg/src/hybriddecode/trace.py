"""
Show how hybrid decoding corrects the scripted insertion, deletion and
substitution examples
"""

import argparse

from src.lib.console import console
from src.lib.scenarios import SCENARIOS


def execute(args: argparse.Namespace) -> int:
    names = list(SCENARIOS) if args.all or not args.scenario else [args.scenario]
    for name in names:
        run = SCENARIOS[name].run()
        console.rule(name.capitalize())
        for label, text in run.lines():
            console.print(f"[bold]{label:<7}[/bold]: {text}", soft_wrap=True)
        if args.verbose:
            trace = run.outcome.trace
            console.print(f"  verify passes {trace.verify_passes}, autoregressive steps {trace.ar_steps}, "
                          f"exit {trace.exit_path.value}")
    return 0


def addparser(subparsers):
    parser: argparse.ArgumentParser
    parser = subparsers.add_parser('trace', help='Print scripted correction pipelines')
    parser.add_argument('-s', '--scenario', choices=sorted(SCENARIOS), help='Scenario to show')
    parser.add_argument('-a', '--all', action='store_true', help='Show every scenario (default)')
    parser.add_argument('-v', '--verbose', action='store_true', help='Show trace counters')
    parser.set_defaults(func=execute)
