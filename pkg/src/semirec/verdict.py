"""Tri-state answers for membership questions quantified over an infinite semigroup."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


UP_TO_BUDGET = "yes up to"


class Status(str, enum.Enum):
    YES = "CertifiedYes"
    NO = "CertifiedNo"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a semi-decidable query.

    ``witness`` is populated for YES, ``certificate`` for NO.  ``budgets``
    always names the finite truncation that produced the answer, and
    ``note`` says why an INCONCLUSIVE answer stopped where it did.
    """

    status: Status
    witness: Any = None
    certificate: Any = None
    budgets: dict[str, Any] = field(default_factory=dict)
    note: str = ""

    @property
    def yes(self) -> bool:
        return self.status is Status.YES

    @property
    def no(self) -> bool:
        return self.status is Status.NO

    @property
    def inconclusive(self) -> bool:
        return self.status is Status.INCONCLUSIVE

    @property
    def up_to_budget(self) -> bool:
        """An INCONCLUSIVE answer whose every tested instance came out positive."""
        return self.inconclusive and self.note.startswith(UP_TO_BUDGET)


def yes(witness: Any, budgets: dict | None = None, note: str = "") -> Verdict:
    return Verdict(Status.YES, witness=witness, budgets=dict(budgets or {}), note=note)


def no(certificate: Any, budgets: dict | None = None, note: str = "") -> Verdict:
    return Verdict(Status.NO, certificate=certificate, budgets=dict(budgets or {}), note=note)


def inconclusive(note: str, budgets: dict | None = None, witness: Any = None) -> Verdict:
    return Verdict(Status.INCONCLUSIVE, witness=witness, budgets=dict(budgets or {}), note=note)


class BudgetExceeded(RuntimeError):
    """A word or cell enumeration would exceed its configured cap."""


class DomainError(ArithmeticError):
    """Evaluation hit a pole, a non-finite value, or an unsupported box."""
