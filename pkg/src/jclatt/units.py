"""Unit conventions used throughout the package.

hbar = 1.  Angular frequencies are stored in rad/us, so a plain frequency
of 1 MHz corresponds to 2*pi rad/us, and times are in microseconds.  All
numbers quoted in config files are plain frequencies in MHz and get
converted on load.
"""

import math

TWO_PI = 2.0 * math.pi


def mhz(value):
    """Plain frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * value


def to_mhz(angular):
    """Angular frequency in rad/us -> plain frequency in MHz."""
    return angular / TWO_PI
