"""Nilpotent-polynomial toolkit for entangled-state preparation in a driven cavity.

Everything is implemented in the C++ core; this package re-exports the
bindings so `import nilcav` gives direct access to the main operations.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
__version__ = "1.0.0"
