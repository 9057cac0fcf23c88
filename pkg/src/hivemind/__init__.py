"""Hivemind: a mediator for concept graphs, packed neural networks, and
machine swarms."""

__version__ = "0.1.0"
