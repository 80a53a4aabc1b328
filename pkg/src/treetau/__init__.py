"""Expected number of spanning trees in random graphs with a given degree sequence.

Vertices are labelled ``1..n`` throughout. Per-vertex data (degrees, tree
degrees, vertex weights) is passed as a plain sequence whose position
``j - 1`` belongs to vertex ``j``.
"""

__version__ = "0.1.0"

from treetau.errors import (
    CapExceeded,
    ConditionError,
    DisconnectedGraph,
    DomainError,
    RetryLimitExceeded,
)
from treetau.degseq import DegreeSequence, DegreeStats

__all__ = [
    "__version__",
    "CapExceeded",
    "ConditionError",
    "DisconnectedGraph",
    "DomainError",
    "RetryLimitExceeded",
    "DegreeSequence",
    "DegreeStats",
]
