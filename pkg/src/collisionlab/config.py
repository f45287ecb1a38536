"""Process-wide numerical settings.

Settings live in a context variable so that a CLI run (or a test) can override
them for a block of code without threading keyword arguments through every
call::

    with settings(tol_rank=1e-12):
        ...
"""

from __future__ import annotations

import contextvars
from contextlib import contextmanager
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Settings:
    tol_rank: float = 1e-10
    eig_method: str = "lapack"  # "lapack" or "jacobi"
    grid_points: int = 4001
    refine_tol: float = 1e-4


_current: contextvars.ContextVar[Settings] = contextvars.ContextVar(
    "collisionlab_settings", default=Settings()
)


def get_settings() -> Settings:
    return _current.get()


@contextmanager
def settings(**overrides):
    token = _current.set(replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
