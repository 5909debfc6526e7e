"""Outage probability and multiplexing gain of slow, fast and opportunistic
FAMA over block-correlated Nakagami-m fading."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
