"""Quality-driven virtual integration over tabular sources.

The package registers data sources against a global schema, scores
every mapped column on fact completeness, validity, accuracy and
timeliness, answers quality-goal queries by ranking source
combinations (with a threshold algorithm for multi-feature goals), and
can fuse the top answers field by field, keeping provenance.
"""

from .assess import assess_catalog
from .catalog import Catalog
from .config import RunConfig, TermTable
from .engine import QueryOutcome, run_query
from .errors import QuintError
from .query import parse
from .scores import FEATURES, QualityVector

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "FEATURES",
    "QualityVector",
    "QueryOutcome",
    "QuintError",
    "RunConfig",
    "TermTable",
    "assess_catalog",
    "parse",
    "run_query",
    "__version__",
]
