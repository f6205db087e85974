"""Backend selection: numba kernels unless ``STARWALK_DISABLE_NUMBA`` is set."""

from __future__ import annotations

import os

ENV_DISABLE = "STARWALK_DISABLE_NUMBA"
ENV_THREADS = "STARWALK_THREADS"


def numba_disabled() -> bool:
    return os.environ.get(ENV_DISABLE, "").strip().lower() not in ("", "0", "false", "no")


def default_backend() -> str:
    if numba_disabled():
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


def kernels(name: str | None = None):
    """Module exposing ``run_batch`` and ``record_path`` for ``name``."""
    name = name or default_backend()
    if name == "numba":
        from . import _nb
        return _nb
    if name == "numpy":
        from . import _np
        return _np
    raise ValueError(f"unknown backend {name!r} (expected 'numba' or 'numpy')")


def max_workers() -> int:
    raw = os.environ.get(ENV_THREADS, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1
