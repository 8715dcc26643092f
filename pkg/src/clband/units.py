"""dB / linear conversions and a few physical constants.

All powers in watt reference 1 mW exactly for dBm; all dB conversions use
10*log10.
"""

import numpy as np

PLANCK_H = 6.62607015e-34  # J s, exact (SI 2019)

# 1 dB/km of fiber attenuation expressed in Np/m.
DB_PER_KM_TO_NP_PER_M = np.log(10.0) / 10.0 / 1e3


def db_to_lin(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_w(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0) * 1e-3


def w_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)
