"""Shared work-bound configuration and error types."""

from __future__ import annotations

import os

DEFAULT_WORK_BOUND = 2 * 10**8


class WorkBoundExceeded(RuntimeError):
    """A computation would exceed the configured work bound."""


class NonConvergence(RuntimeError):
    """A numerical ladder or density failed to stabilise."""


def work_bound(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("QUADRIX_WORK_BOUND")
    return int(float(env)) if env else DEFAULT_WORK_BOUND


def check_work(cost: float, bound: int | None, what: str) -> None:
    limit = work_bound(bound)
    if cost > limit:
        raise WorkBoundExceeded(f"{what}: estimated work {cost:.3g} exceeds bound {limit:.3g}")
