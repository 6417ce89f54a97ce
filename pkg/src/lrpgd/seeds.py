"""Counter-based seed derivation so parallel sweeps stay reproducible."""

from __future__ import annotations

import numpy as np


def child_seed(master, *path):
    """Derive a stable child seed from a master seed and an index path.

    Uses numpy's SeedSequence splitting, so the result depends only on the
    (master, path) pair and never on execution order.
    """
    parts = [int(master)] + [int(p) for p in path]
    return int(np.random.SeedSequence(parts).generate_state(1)[0])
