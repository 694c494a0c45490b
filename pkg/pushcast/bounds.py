"""
Closed-form tail bounds used to annotate empirical tails. Bounds above 1 are
returned as computed.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from pushcast.util import InvalidParameterException


def _check_nonnegative(**values):
    for name, v in values.items():
        if v is None or math.isnan(v) or v < 0.0:
            raise InvalidParameterException("{} must be nonnegative, got {}".format(name, v))

def chernoff_bound(mean, x):
    """
    P(|X - E X| >= x) <= 2·exp(-x² / (2(E X + x/3))) for binomial X.
    """
    _check_nonnegative(mean=mean, x=x)
    if x == 0.0:
        return 2.0
    return 2.0 * math.exp(-x * x / (2.0 * (mean + x / 3.0)))

def azuma_bound(sum_c_sq, x):
    """
    P(|X - E X| >= x) <= 2·exp(-x² / (2·Σc_i²)) for martingale differences bounded by c_i.
    """
    _check_nonnegative(x=x)
    if sum_c_sq is None or not sum_c_sq > 0.0:
        raise InvalidParameterException("sum of squared differences must be positive, got {}".format(sum_c_sq))
    return 2.0 * math.exp(-x * x / (2.0 * sum_c_sq))

def talagrand_bound(median, x):
    """
    P(|X - m| >= x) <= 4·exp(-x² / (4·ψ(m + x))) with the certificate size ψ(r) = ⌈r⌉.
    """
    _check_nonnegative(median=median, x=x)
    if x == 0.0:
        return 4.0
    return 4.0 * math.exp(-x * x / (4.0 * math.ceil(median + x)))

def median_mean_diagnostic(samples):
    """
    Returns (mean, lower median, |mean - median| / sqrt(mean)).
    """
    a = np.sort(np.asarray(samples, dtype=float))
    if a.size == 0:
        raise InvalidParameterException("median/mean diagnostic needs at least one sample")
    mean = float(a.mean())
    median = float(a[(a.size - 1) // 2])
    if mean > 0.0:
        gap = abs(mean - median) / math.sqrt(mean)
    elif mean == median:
        gap = 0.0
    else:
        gap = float('nan')
    return mean, median, gap

def binomial_tail(n, p, x):
    """
    Exact P(|X - np| >= x) for X ~ Bin(n, p).
    """
    _check_nonnegative(x=x)
    if n < 0 or not 0.0 <= p <= 1.0:
        raise InvalidParameterException("invalid binomial parameters n={}, p={}".format(n, p))
    k = np.arange(n + 1)
    pmf = stats.binom.pmf(k, n, p)
    return float(math.fsum(pmf[np.abs(k - n * p) >= x]))


@dataclass(frozen=True)
class TailBoundQuery:
    kind: str
    x: float
    mean: float = None
    sum_c_sq: float = None
    median: float = None

    kinds = ('chernoff', 'azuma', 'talagrand')

    def evaluate(self):
        if self.kind == 'chernoff':
            return chernoff_bound(self.mean, self.x)
        elif self.kind == 'azuma':
            return azuma_bound(self.sum_c_sq, self.x)
        elif self.kind == 'talagrand':
            return talagrand_bound(self.median, self.x)
        raise InvalidParameterException("unknown bound kind '{}', must be one of {}".format(self.kind, ', '.join(self.kinds)))
