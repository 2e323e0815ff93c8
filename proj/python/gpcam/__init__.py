"""GP-camera calibration toolkit: Python bindings over the C++ core."""

try:
    from gpcam._core import *  # noqa: F401,F403
    from gpcam import _core as core
except ImportError:  # in-tree builds keep _core next to the sources
    from _core import *  # noqa: F401,F403
    import _core as core

__all__ = [name for name in dir(core) if not name.startswith("_")]
