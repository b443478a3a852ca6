"""Robust partial order scheduling under duration uncertainty.

Thin wrapper around the compiled core. All heavy operations take and return
JSON strings; see the package docs for the document formats.
"""

from ._core import (
    __version__,
    convert_jsp,
    convert_progen,
    evaluate,
    fitness,
    normalize,
    solve,
)

__all__ = [
    "__version__",
    "convert_jsp",
    "convert_progen",
    "evaluate",
    "fitness",
    "normalize",
    "solve",
]
