"""Additive uniform white noise."""
from __future__ import annotations

import numpy as np

from ..pam import RfCapture


def add_noise(rf: RfCapture, level: float, seed: int = 0) -> RfCapture:
    """Add noise drawn uniformly from ``[-level * peak, level * peak]``,
    where ``peak = max |rf|``. The draw depends only on ``seed`` and the shape."""
    if not level >= 0:
        raise ValueError("noise level must be non-negative")
    samples = rf.samples.copy()
    if level > 0:
        peak = float(np.max(np.abs(samples))) if samples.size else 0.0
        rng = np.random.default_rng(seed)
        samples += rng.uniform(-level * peak, level * peak, size=samples.shape)
    meta = dict(rf.meta)
    meta["noise_level"] = level
    return RfCapture(samples, rf.dx, rf.fs, rf.aperture_origin, meta=meta)
