# app/models/audit.py
from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class AuditReport(BaseModel):
    """Result of a no-signalling audit run; serialised as the `nosig` JSON report."""

    model_config = ConfigDict(frozen=True)

    trials: int = Field(ge=1)
    dims: tuple[int, int]
    seed: int
    tolerance: float = Field(gt=0)
    max_deviation: float = Field(ge=0, description="Largest deviation over all trials and checks.")
    max_unitary_deviation: float = Field(ge=0, description="Reduced state change under a local unitary.")
    max_marginal_deviation: float = Field(ge=0, description="Remixed conditional vs. unconditional marginal.")
    max_remix_deviation: float = Field(ge=0, description="Reduced state of the remixed collapse branches.")
    failures: list[int] = Field(default_factory=list, description="Trial indices above tolerance.")

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_deviation < self.tolerance
