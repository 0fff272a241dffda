"""Numerical workbench for contraction models and their characteristic functions."""

from .errors import *  # noqa: F401,F403
from .numlin import (  # noqa: F401
    Subspace,
    Tolerance,
    default_tolerance,
    hermitian_sqrt,
    kernel_space,
    polar_unitary,
    rank_sequence,
    subspace_intersect,
)
from .windowed import *  # noqa: F401,F403
from .models import *  # noqa: F401,F403
from .charfn import *  # noqa: F401,F403
from .coincide import *  # noqa: F401,F403
from .canonical import *  # noqa: F401,F403

__version__ = "0.1.0"
