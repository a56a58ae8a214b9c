"""Mine pronunciation tables from Wikipedia language pages into TSV files."""

__version__ = "0.1.0"
