"""Per-step constants shared by both simulation lanes.

Both lanes must transform the raw random draws with bitwise-identical
coefficients, so anything involving a transcendental (exp / expm1, whose
rounding may differ between libm and NumPy) is computed here, once, with
NumPy, and handed to the step loops as plain float64 arrays.
"""

from __future__ import annotations

import numpy as np


def cir_step_constants(b: float, rho11: float, dts: np.ndarray):
    """Arrays (decay, scale) for the exact CIR transition over each step.

    decay[l] = exp(-b*dt_l); scale[l] is the noncentral chi-square scale
    rho11^2 (1 - exp(-b*dt_l)) / (4b), continuously extended to b = 0 as
    rho11^2 dt_l / 4.  Uses expm1 for accuracy at small b*dt.
    """
    dts = np.asarray(dts, dtype=np.float64)
    decay = np.exp(-b * dts)
    if b == 0.0:
        scale = (rho11 * rho11 / 4.0) * dts
    else:
        scale = (-(rho11 * rho11) / (4.0 * b)) * np.expm1(-b * dts)
    return decay, np.ascontiguousarray(scale)
