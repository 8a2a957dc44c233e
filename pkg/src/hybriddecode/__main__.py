import argparse
import sys

import click

import src.hybriddecode.generate as generate
import src.hybriddecode.report as report
import src.hybriddecode.run as run
import src.hybriddecode.trace as trace
from src.lib.console import error
from src.lib.errors import HybridDecodeError

parser = argparse.ArgumentParser(description='Hybrid draft-and-verify decoding experiments')
subparsers = parser.add_subparsers(dest='command', help='subcommand')
generate.addparser(subparsers)
run.addparser(subparsers)
report.addparser(subparsers)
trace.addparser(subparsers)


def main(argv=None) -> int:
    args = parser.parse_args(argv)
    if not hasattr(args, 'func'):
        parser.print_help()
        return 0
    try:
        return args.func(args) or 0
    except ExceptionGroup as group:
        for e in group.exceptions:
            error(str(e))
        return 1
    except (HybridDecodeError, OSError) as e:
        error(str(e))
        return 1
    except click.Abort:
        error('aborted')
        return 1


if __name__ == '__main__':
    sys.exit(main())
