"""The five published parameter cases.

Low beta means high temperature; c sets the eigenvalue difference and
(c, delta) together set the gap at the avoided crossing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ModelContext, PotentialParams


@dataclass(frozen=True)
class CasePreset:
    label: str
    beta: float
    c: float
    delta: float

    def context(self, mass_ratio: float = 100.0) -> ModelContext:
        return ModelContext(PotentialParams(self.c, self.delta), self.beta, mass_ratio)


CASE_PRESETS = {
    "A": CasePreset("A", beta=3.3, c=1.0, delta=1.0),
    "B": CasePreset("B", beta=1.0, c=0.1, delta=1.0),
    "C": CasePreset("C", beta=1.0, c=0.1, delta=0.01),
    "D": CasePreset("D", beta=0.28, c=1.0, delta=1.0),
    "E": CasePreset("E", beta=1.0, c=1.0, delta=0.1),
}
