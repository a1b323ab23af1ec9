"""Streaming string register transducers over data words, with origin semantics."""

__version__ = "0.1.0"
