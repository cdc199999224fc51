"""Extended-precision evaluation of covariant error probabilities.

Error probabilities 1 - <a, W a> of good probes decay exponentially in the
probe size and fall below double precision long before the asymptotic rate is
resolvable.  The quadratic-form deficit

    1 - <a, W a> = (1 - delta/pi) - 2 sum_{w>=1} what(w) c_w,
    c_w = sum_i a_i a_{i+w},

is therefore evaluated in mpmath.  Float64 amplitude vectors are fine as
inputs: I - W is PSD, so the deficit error from an amplitude perturbation e
is at most 2 ||e|| sqrt(deficit) + ||e||^2, far below the values of interest.
"""
from __future__ import annotations

import math

import numpy as np
from mpmath import mp


def _needed_dps(delta: float, n: int) -> int:
    # the parallel rate upper-bounds every probe's decay rate
    rate = math.log((1.0 + math.sin(delta / 2.0)) / (1.0 - math.sin(delta / 2.0)))
    return max(35, int(rate * (n + 1) / math.log(10.0)) + 25)


def log_error_probability(amplitudes: np.ndarray, delta: float,
                          dps: int | None = None,
                          saturation: float = 1e-24) -> float:
    """-log(1 - <a, W a>) for the rectangular-window prolate form.

    Deficits below ``saturation`` are reported as +inf: rounding of the
    float64 amplitude vector floors genuine deficits around ||e||^2 ~ 1e-26,
    so smaller values would be artifacts, not estimates.
    """
    a = np.asarray(amplitudes, dtype=float)
    n = len(a) - 1
    if dps is None:
        dps = _needed_dps(delta, n)
    with mp.workdps(dps):
        av = [mp.mpf(float(x)) for x in a]
        norm2 = mp.fsum(x * x for x in av)
        d = mp.mpf(float(delta))
        pi = mp.pi
        deficit = (1 - d / pi) * norm2
        for w in range(1, n + 1):
            c = mp.fsum(av[i] * av[i + w] for i in range(0, n + 1 - w))
            deficit -= 2 * mp.sin(d * w) / (pi * w) * c
        deficit /= norm2
        if deficit <= saturation:
            return math.inf
        return float(-mp.log(deficit))
