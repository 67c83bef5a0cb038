"""
Gaussian tail helpers.
"""

import numpy as np
from scipy.stats import norm


def q_function(x):
    """Right-tail probability of a standard normal, Q(x) = Pr(Z > x)."""
    return norm.sf(x)


def q_inverse(p):
    """Inverse of the Q-function."""
    return norm.isf(p)


def below_threshold_probability(mean, std, threshold):
    """Pr(X <= threshold) for X ~ N(mean, std^2), written as Q((mean - threshold)/std)."""
    return q_function((np.asarray(mean) - threshold) / np.asarray(std))
