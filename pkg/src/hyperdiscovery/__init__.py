"""Hypergraph random-walk discovery prediction over dated scientific corpora."""

from . import (
    corpus,
    embedding,
    evaluation,
    gnn,
    hypergraph,
    scoring,
    social_density,
    transition,
    walks,
)

__all__ = [
    "corpus",
    "embedding",
    "evaluation",
    "gnn",
    "hypergraph",
    "scoring",
    "social_density",
    "transition",
    "walks",
]

__version__ = "0.1.0"
