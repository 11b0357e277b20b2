"""
Log-linear regression kernels behind the geometric rate estimators.

Values may underflow double precision by far (errors of 2**-400 are
common), so logarithms are taken in mpmath and only the logs go to numpy.
"""
from .utils import InputError

import numpy as np
import mpmath
from scipy.stats import linregress


def _log_abs(value):
    return float(mpmath.log(abs(mpmath.mpmathify(value))))


def log_values(values):
    """float array of log|v|; the values must be nonzero."""
    return np.array([_log_abs(v) for v in values], dtype=float)


def fit_loglinear(ns, logs):
    """
    Least squares line through (n, log|v|).

    Returns
    -------
    rate, stderr, residual
        exp(slope), its standard error by the delta method and the rms of
        the log residuals.
    """
    ns = np.asarray(ns, dtype=float)
    logs = np.asarray(logs, dtype=float)
    if len(ns) < 2:
        raise InputError(len(ns), 'a regression needs at least 2 points')
    if np.ptp(ns) == 0:
        raise InputError('ns', 'a regression needs at least 2 distinct n')
    fit = linregress(ns, logs)
    rate = float(np.exp(fit.slope))
    residual = float(np.sqrt(np.mean((logs - (fit.intercept + fit.slope*ns))**2)))
    stderr = rate*float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    return rate, stderr, residual


def nth_root_max(ns, logs):
    """max over the points of |v|**(1/n), n >= 1."""
    ns = np.asarray(ns, dtype=float)
    logs = np.asarray(logs, dtype=float)
    keep = ns >= 1
    if not np.any(keep):
        return 0.0
    return float(np.max(np.exp(logs[keep]/ns[keep])))
