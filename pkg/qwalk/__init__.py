"""
qwalk - Discrete-time quantum walks of particles, plane waves and wave packets

Measured and coherent walks in closed form, brute-force reference engines,
and a CLI that writes the figure data as CSV, gnuplot and SVG.
"""

__version__ = "0.1.0"

from . import coin_walk
from . import plane_wave
from . import unmeasured_evolution
from . import wave_packet
from . import oracle
from . import presets
from . import export
from . import config
from . import utils

__all__ = [
    "coin_walk",
    "plane_wave",
    "unmeasured_evolution",
    "wave_packet",
    "oracle",
    "presets",
    "export",
    "config",
    "utils",
]
