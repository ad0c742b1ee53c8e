"""Householder-parameterized rotations for learning to hash."""

from ._core import *  # noqa: F401,F403
from ._core import Error, FormatError, HouseholderStack, LossKind, TrainConfig

__version__ = "0.1.0"
