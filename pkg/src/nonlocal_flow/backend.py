"""Kernel backend selection.

The hot inner kernels exist twice: a numba-compiled loop version and a
pure-numpy fallback. The active backend is chosen once, from the
NONLOCAL_FLOW_BACKEND environment variable:

    auto    use numba when importable, else numpy (default)
    numba   require the numba backend, fail if unavailable
    numpy   force the fallback

Both backends are bitwise-equivalent (enforced by tests), so the flag
only affects speed.
"""

import logging
import os
from contextlib import contextmanager

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

ENV_VAR = "NONLOCAL_FLOW_BACKEND"

_active = None


def _load(name: str):
    if name == "numba":
        from . import _kernels_numba as mod
    elif name == "numpy":
        from . import _kernels_numpy as mod
    else:
        raise ValueError(f"unknown backend {name!r}; expected 'numba', "
                         f"'numpy', or 'auto'")
    return mod


def _resolve():
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice in ("", "auto"):
        try:
            return _load("numba")
        except ImportError:
            logger.info("numba unavailable, using the numpy fallback backend")
            return _load("numpy")
    return _load(choice)


def kernels():
    """Return the active kernel module (resolved lazily, then cached)."""
    global _active
    if _active is None:
        _active = _resolve()
    return _active


def backend_name() -> str:
    return kernels().BACKEND_NAME


@contextmanager
def use(name: str):
    """Temporarily force a backend; intended for tests and benchmarks."""
    global _active
    previous = _active
    _active = _load(name)
    try:
        yield _active
    finally:
        _active = previous
