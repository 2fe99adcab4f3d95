"""Background-recalibration detection toolkit."""

try:
    from ._brlkit import *  # noqa: F401,F403
except ImportError:
    # in-tree test runs load the extension straight from the build directory
    from _brlkit import *  # noqa: F401,F403
