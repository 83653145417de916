"""Annotation pipeline for standard and non-standard South Slavic text.

The package covers the CoNLL-U data model, rule-based tokenization,
lexicon-aware morphosyntactic tagging, lemmatization, dependency parsing,
training-data preparation and evaluation, glued together by a processing-type
aware pipeline and a command line tool.
"""

from .conllu import (
    Document,
    Sentence,
    Token,
    parse_document,
    serialize_document,
    strip_annotations,
    validate_document,
)

__version__ = "0.1.0"

__all__ = [
    "Document",
    "Sentence",
    "Token",
    "parse_document",
    "serialize_document",
    "strip_annotations",
    "validate_document",
    "__version__",
]
