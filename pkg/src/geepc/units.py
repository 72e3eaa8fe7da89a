"""dB / dBm conversions.

External configuration is expressed in dBm and dB; every internal
computation runs in linear watts.
"""

import numpy as np


def dbm_to_watts(dbm):
    """Convert dBm to watts: 10^((dBm - 30) / 10)."""
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    """Convert watts to dBm."""
    return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0


def db_to_linear(db):
    """Convert a dB ratio to linear scale."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(linear):
    """Convert a linear ratio to dB."""
    return 10.0 * np.log10(np.asarray(linear, dtype=float))
