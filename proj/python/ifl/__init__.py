"""Attributed QA critic, citation metrics and iterative feedback refinement."""

from ._ifl import *  # noqa: F401,F403
from ._ifl import __doc__  # noqa: F401
