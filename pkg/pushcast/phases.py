"""
Phase boundaries of a broadcast and the predictions they are compared with.

  T1  first round with I_t >= εn          (end of the doubling phase)
  T2  first round t >= T1 with I_t >= (1-ε)n
  T'  first round t >= T2 with U_t <= sqrt(ln n)
  T   total rounds

Thresholds are real numbers and are compared against exact integer counts.
"""

import math
from dataclasses import dataclass, asdict

from pushcast import log
from pushcast.util import InvalidParameterException, NotBroadcastableException


@dataclass(frozen=True)
class PhaseParams:
    epsilon: float
    alpha: float = None

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise InvalidParameterException("epsilon must lie in (0, 1], got {}".format(self.epsilon))
        if self.alpha is not None and self.alpha <= 0.0:
            raise InvalidParameterException("alpha must be positive, got {}".format(self.alpha))

    @classmethod
    def from_alpha(cls, alpha):
        if alpha <= 0.0:
            raise InvalidParameterException("alpha must be positive, got {}".format(alpha))
        if alpha < 1.0:
            raise InvalidParameterException("alpha = {} < 1 gives epsilon = alpha^(-1/2) > 1; pass epsilon explicitly".format(alpha))
        return cls(epsilon=alpha ** -0.5, alpha=alpha)

    @classmethod
    def from_epsilon(cls, epsilon, alpha=None):
        return cls(epsilon=epsilon, alpha=alpha)


@dataclass(frozen=True)
class PhaseReport:
    n: int
    epsilon: float
    alpha: float
    T1: int
    T2: int
    Tprime: int
    T: int
    uninformed_at_T2: int
    predicted_T: float
    predicted_T1: float
    predicted_tail: float
    # Annotations, never asserted
    T1_floor: float
    T_floor: float
    doubling_bound: float
    middle_bound: float
    tail_bound: float
    deviation_band: float
    final_tail_bound: float

    @property
    def middle(self):
        return self.T2 - self.T1

    @property
    def tail(self):
        return self.T - self.T2

    @property
    def final_tail(self):
        return self.T - self.Tprime

    def to_json_dict(self):
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d):
        return cls(**d)


def predicted_broadcast_time(n):
    """
    log2 n + ln n, the broadcast time of the complete graph.
    """
    if n < 2:
        raise InvalidParameterException("predicted broadcast time needs n >= 2, got {}".format(n))
    return math.log2(n) + math.log(n)

def phase_bounds(n, params):
    """
    Returns the (doubling, middle, tail) bounds
    (9·sqrt(ε)·log2 n, 9·ε⁻¹·ln ε⁻¹, ε^(1/3)·ln n).
    """
    if n < 2:
        raise InvalidParameterException("phase bounds need n >= 2, got {}".format(n))
    eps = params.epsilon
    return (9.0 * math.sqrt(eps) * math.log2(n),
            9.0 / eps * math.log(1.0 / eps),
            eps ** (1.0 / 3.0) * math.log(n))

def deviation_band(n, alpha):
    """
    α^(-1/7)·ln n, the allowed deviation of T from log2 n + ln n.
    """
    return alpha ** (-1.0 / 7.0) * math.log(n)

def _first_round(counts, predicate, from_round):
    for t in range(from_round, len(counts)):
        if predicate(counts[t]):
            return t
    return len(counts) - 1

def detect_phases_from_counts(counts, n, params):
    """
    Computes the phase report from the informed counts [I_0, ..., I_T] of a
    complete broadcast.
    """
    if not counts or counts[-1] != n:
        raise NotBroadcastableException("informed counts do not reach n = {}".format(n))
    eps = params.epsilon
    T = len(counts) - 1 # pylint: disable=invalid-name
    # Boundaries are points in time after the first round; only n = 1 has T = 0
    first = min(1, T)
    sqrt_ln_n = math.sqrt(math.log(n))

    t1 = _first_round(counts, lambda i: i >= eps * n, first)
    # For ε > 1/2 the second threshold lies below the first; T2 never precedes T1
    t2 = _first_round(counts, lambda i: i >= (1.0 - eps) * n, t1)
    tprime = _first_round(counts, lambda i: n - i <= sqrt_ln_n, t2)

    if n >= 2:
        doubling, middle, tail = phase_bounds(n, params)
        predicted = predicted_broadcast_time(n)
        predicted_t1 = math.log2(n)
        predicted_tail = math.log(n)
    else:
        doubling = middle = tail = predicted = predicted_t1 = predicted_tail = 0.0

    return PhaseReport(
        n=n,
        epsilon=eps,
        alpha=params.alpha,
        T1=t1,
        T2=t2,
        Tprime=tprime,
        T=T,
        uninformed_at_T2=n - counts[t2],
        predicted_T=predicted,
        predicted_T1=predicted_t1,
        predicted_tail=predicted_tail,
        T1_floor=math.log2(eps * n),
        T_floor=math.log2(n),
        doubling_bound=doubling,
        middle_bound=middle,
        tail_bound=tail,
        deviation_band=deviation_band(n, params.alpha) if params.alpha is not None else None,
        final_tail_bound=sqrt_ln_n)

def detect_phases(trace, params):
    if not trace.complete:
        raise NotBroadcastableException("cannot detect phases of a stalled broadcast ({})".format(trace.outcome))
    if params.epsilon > 0.5:
        log.verbose("epsilon = {:.3f} makes the phase thresholds nearly vacuous".format(params.epsilon))
    return detect_phases_from_counts(trace.informed_counts(), trace.n, params)
