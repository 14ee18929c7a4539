"""Persistence kernel selection.

The compiled extension is preferred when importable; the pure-Python twin
is the fallback.  ``ECC_MARK_BACKEND=pure|compiled`` forces a choice (used
by the benchmark and the backend-parity tests).
"""
import os

from . import pure

_forced = os.environ.get("ECC_MARK_BACKEND", "").strip().lower()

if _forced == "pure":
    _impl = pure
elif _forced == "compiled":
    from . import _speedups as _impl
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = pure

BACKEND = _impl.BACKEND_NAME
persistence_from_matrix = _impl.persistence_from_matrix


def get_backend(name: str):
    """Fetch a specific kernel module by name ('pure' or 'compiled')."""
    if name == "pure":
        return pure
    if name == "compiled":
        from . import _speedups
        return _speedups
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["pure"]
    try:
        from . import _speedups  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
