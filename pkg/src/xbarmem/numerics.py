"""Scalar kernels shared by every channel computation.

All functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import numpy as np
from scipy.special import erfc, xlogy

_SQRT2 = np.sqrt(2.0)


def qfunc(x):
    """Gaussian tail probability ``Q(x) = P(N(0, 1) > x)``.

    Evaluated through ``erfc`` so that the relative accuracy is kept in the
    far tail, where channel parameters of order 1e-8 and below live.
    """
    return 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)


def normal_cdf(x):
    return qfunc(-np.asarray(x, dtype=float))


def lognormal_cdf(x, mu, sigma):
    """CDF of a log-normal variable, ``Phi((ln x - mu) / sigma)``; 0 for x <= 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (np.log(np.where(x > 0, x, 1.0)) - mu) / sigma
    out = np.where(x > 0, normal_cdf(z), 0.0)
    return out if out.ndim else float(out)


def binary_entropy(p):
    """Binary entropy in bits with ``h(0) = h(1) = 0``."""
    p = np.asarray(p, dtype=float)
    out = -(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p)) / np.log(2.0)
    return out if out.ndim else float(out)


def probabilists_hermite(n_nodes: int):
    """Nodes and weights for ``E[f(U)]`` with ``U ~ N(0, 1)``."""
    x, w = np.polynomial.hermite_e.hermegauss(n_nodes)
    return x, w / np.sqrt(2.0 * np.pi)
