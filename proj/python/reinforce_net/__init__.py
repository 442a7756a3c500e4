"""Node-replication reinforcement of synchronous routing networks.

Thin wrapper around the C++ core: network/partition builders, the four
reinforcement modes, the round-based fault simulator and its checkers, and
the Monte Carlo / exact analysis helpers.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
__version__ = "0.1.0"
