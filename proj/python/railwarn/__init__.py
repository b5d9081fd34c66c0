"""Railway crossing warning simulation and analysis."""

try:
    from ._railwarn import *  # noqa: F401,F403
    from ._railwarn import __doc__  # noqa: F401
except ImportError:  # in-tree build: extension sits next to the package on PYTHONPATH
    from _railwarn import *  # noqa: F401,F403
