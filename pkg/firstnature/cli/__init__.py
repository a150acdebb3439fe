"""
The 'firstnature.cli' module holds the command line: run configuration, subcommands and output writers.
"""

from .commands import COMMANDS, RunContext
from .config import RunConfig, load_config
from .main import main

__all__ = ["COMMANDS",
           "RunConfig",
           "RunContext",
           "load_config",
           "main",
           ]
