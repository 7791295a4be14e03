"""Matching vector families over Z_m: verification, rank tools, spectral
refinements, bound calculators and the associated locally decodable code."""

__version__ = "0.1.0"

from .family import MvFamily, verify  # noqa: E402
from .linalg import ZmMatrix, colrank, colspan_size, rank, smith_form  # noqa: E402
from .zm import ZmVector, modulus  # noqa: E402

__all__ = [
    "MvFamily",
    "ZmMatrix",
    "ZmVector",
    "__version__",
    "colrank",
    "colspan_size",
    "modulus",
    "rank",
    "smith_form",
    "verify",
]
