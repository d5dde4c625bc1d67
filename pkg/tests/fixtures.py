"""Frozen inputs shared by several test modules."""

from __future__ import annotations

import numpy as np

# PCG64 seed 90: the first start in the default sweep stream (seed 0)
# that reaches a moving configuration at R_Ad = 0.5 for ell = 10, theta = 60.
MOVING_START = np.array(
    [
        [-25.533444031350584, 36.37942150684253],
        [3.705343614805372, -16.329956831442473],
        [39.26239453842305, -74.92189656327146],
    ]
)
MOVING_START_INDEX = 90
