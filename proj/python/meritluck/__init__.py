"""Winner-takes-all tournament simulator and merit-probability toolkit."""

try:
    from ._meritluck import *  # noqa: F401,F403  installed package layout
except ImportError:
    from _meritluck import *  # noqa: F401,F403  build-tree layout
