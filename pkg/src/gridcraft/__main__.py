import sys

from .cli import cli_entry

sys.exit(cli_entry())
