"""Prerequisite chain learning toolkit.

Builds concept graphs from annotated lecture corpora, trains paragraph
vector and graph autoencoder models to predict prerequisite edges, and
turns the result into ordered learning paths.
"""

__version__ = "0.1.0"

from .corpus import Document, DocumentSet, TokenizeConfig, Vocabulary
from .graph import Concept, ConceptGraph, GraphStats

__all__ = [
    "Concept",
    "ConceptGraph",
    "Document",
    "DocumentSet",
    "GraphStats",
    "TokenizeConfig",
    "Vocabulary",
    "__version__",
]
