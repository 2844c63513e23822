"""Circuit cutting guided by folded meta-graphs."""

__version__ = "0.1.0"
