"""Coarse-grained quantum state tomography toolkit."""

try:
    from ._tomocg import *  # noqa: F401,F403  (pip-installed layout)
    from . import _tomocg as _core
except ImportError:  # pragma: no cover - CMake build tree layout
    from _tomocg import *  # noqa: F401,F403
    import _tomocg as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
