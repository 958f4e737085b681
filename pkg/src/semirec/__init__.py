"""Recurrence analysis for finitely generated semigroups of self-maps."""

__version__ = "0.1.0"

from .space import ESCAPE, Grid, PhaseSpace  # noqa: E402
from .semigroup import GeneratorSystem, WordClass, enumerate_words, orbit, word_eval  # noqa: E402
from .verdict import BudgetExceeded, DomainError, Status, Verdict  # noqa: E402

__all__ = [
    "ESCAPE",
    "BudgetExceeded",
    "DomainError",
    "GeneratorSystem",
    "Grid",
    "PhaseSpace",
    "Status",
    "Verdict",
    "WordClass",
    "enumerate_words",
    "orbit",
    "word_eval",
]
