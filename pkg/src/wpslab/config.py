"""Size budgets shared by the enumeration routines."""
from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_MAX_TERMS = 10**9
DEFAULT_MAX_BITS = 10**6
DEFAULT_MAX_MEM_MB = 2048
BUDGET_ENV = "WPSLAB_BUDGET_MB"


def default_mem_mb() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_MAX_MEM_MB
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"{BUDGET_ENV} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class Budgets:
    max_terms: int = DEFAULT_MAX_TERMS
    max_bits: int = DEFAULT_MAX_BITS
    max_mem_mb: int = DEFAULT_MAX_MEM_MB

    def __post_init__(self):
        for name in ("max_terms", "max_bits", "max_mem_mb"):
            if getattr(self, name) <= 0:
                raise ValueError(f"budget {name} must be positive")

    @property
    def max_bytes(self) -> int:
        return self.max_mem_mb * 1024 * 1024

    @classmethod
    def from_env(cls, **overrides) -> "Budgets":
        overrides.setdefault("max_mem_mb", default_mem_mb())
        return cls(**overrides)


_override: Budgets | None = None


def set_budgets(budgets: Budgets | None) -> None:
    """Install process-wide budgets (None restores the defaults)."""
    global _override
    _override = budgets


def current() -> Budgets:
    """Budgets in effect when a caller does not pass one explicitly."""
    return _override if _override is not None else Budgets.from_env()
