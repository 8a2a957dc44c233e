"""
Console output: results go to stdout, diagnostics to stderr
"""

from rich.console import Console

console = Console(highlight=False)
err_console = Console(stderr=True, highlight=False)


def info(message: str):
    err_console.print(f"Info: {message}", markup=False)


def warning(message: str):
    err_console.print(f"Warning: {message}", style="yellow", markup=False)


def error(message: str):
    err_console.print(f"Error: {message}", style="bold red", markup=False)
