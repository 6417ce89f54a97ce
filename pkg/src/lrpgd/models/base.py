"""Common shape of a bound model: loss/gradient plus a projection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def identity_projection(f):
    return np.asarray(f, dtype=float)


@dataclass(frozen=True)
class ModelInstance:
    """A statistical problem bound to its observed data.

    ``loss_grad(f, stats=None)`` returns ``(loss, gradient)``; models that
    clamp link evaluations report the count through the optional ``stats``
    dict (key ``"clamped"``).  ``project`` maps a factor to the nearest point
    of the model's constraint set.
    """

    name: str
    d: int
    r: int
    loss_grad: Callable
    project: Callable = identity_projection
