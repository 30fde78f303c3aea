"""Forest algebras, forest categories, and locally testable forest languages."""

from .terms import (
    Forest,
    Context,
    Tree,
    EMPTY,
    HOLE,
    ParseError,
    UnknownLabelError,
    make_alphabet,
    parse_forest,
    parse_context,
    apply_context,
    compose,
    enumerate_forests,
    enumerate_contexts,
)

__version__ = "0.1.0"
