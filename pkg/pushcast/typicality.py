"""
Falsification audit of the three p-typicality properties of a graph:

  (I)   |S| >= n/α: all but 8n/ln n vertices v outside S have
        |Γ(v) ∩ S| within (1 ± ε)p|S|
  (II)  |S| <= n/α: all but |S|/(εα) vertices v outside S have |Γ(v) ∩ S| <= εpn
  (III) e(S, V∖S) within |S|(n - |S|)p(1 ± sqrt(8)·ε)

Checking every subset is impossible, so the audit samples subsets of the
sizes where the broadcast argument uses the properties, and sweeps all
singletons for (III).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from pushcast import log
from pushcast.graph import as_vertex_set, cut_edges, neighbors_in, VertexSet
from pushcast.util import InvalidParameterException

PROPERTY_I = 'I'
PROPERTY_II = 'II'
PROPERTY_III = 'III'
# (I) with the threshold 2εpn used for n/α <= |S| <= εn during the doubling phase
PROPERTY_I_DERIVED = 'I-derived'


@dataclass
class PropertyResult:
    property: str
    S_size: int
    violating: np.ndarray
    budget: float
    passed: bool
    observed: int = None
    interval: tuple = None
    size_class: str = None

    def to_json_dict(self):
        return {
            'property': self.property,
            'size': self.S_size,
            'violating_count': int(self.violating.size),
            'budget': self.budget,
            'passed': self.passed,
        }


@dataclass
class TypicalityReport:
    results: list = field(default_factory=list)
    sampled_sets: dict = field(default_factory=dict)

    @property
    def all_passed(self):
        return all(r.passed for r in self.results)

    def failed(self):
        return [r for r in self.results if not r.passed]

    def to_json_dict(self):
        return {
            'all_passed': self.all_passed,
            'sampled_sets': dict(self.sampled_sets),
            'records': [r.to_json_dict() for r in self.results],
        }


def _check_epsilon(epsilon):
    if not epsilon > 0.0:
        raise InvalidParameterException("epsilon must be positive, got {}".format(epsilon))

def big_set_budget(n):
    """
    8n / ln n, the exceptional-set budget of property (I).
    """
    return math.inf if n < 2 else 8.0 * n / math.log(n)

def _outside_where(g, S, bad):
    return np.flatnonzero(~S.mask & bad)

def check_property_I(g, S, p, epsilon):
    _check_epsilon(epsilon)
    S = as_vertex_set(g, S)
    counts = g.counts_into(S)
    lo = (1.0 - epsilon) * p * len(S)
    hi = (1.0 + epsilon) * p * len(S)
    violating = _outside_where(g, S, (counts <= lo) | (counts >= hi))
    budget = big_set_budget(g.n)
    return PropertyResult(PROPERTY_I, len(S), violating, budget, violating.size <= budget)

def check_property_I_derived(g, S, p, epsilon):
    _check_epsilon(epsilon)
    S = as_vertex_set(g, S)
    counts = g.counts_into(S)
    violating = _outside_where(g, S, counts > 2.0 * epsilon * p * g.n)
    budget = big_set_budget(g.n)
    return PropertyResult(PROPERTY_I_DERIVED, len(S), violating, budget, violating.size <= budget)

def check_property_II(g, S, p, epsilon, alpha):
    _check_epsilon(epsilon)
    if not alpha > 0.0:
        raise InvalidParameterException("alpha must be positive, got {}".format(alpha))
    S = as_vertex_set(g, S)
    counts = g.counts_into(S)
    violating = _outside_where(g, S, counts > epsilon * p * g.n)
    budget = len(S) / (epsilon * alpha)
    return PropertyResult(PROPERTY_II, len(S), violating, budget, violating.size <= budget)

def cut_interval(n, size, p, epsilon):
    center = size * (n - size) * p
    width = math.sqrt(8.0) * epsilon
    return center * (1.0 - width), center * (1.0 + width)

def check_property_III(g, S, p, epsilon):
    _check_epsilon(epsilon)
    S = as_vertex_set(g, S)
    if len(S) == 0 or len(S) == g.n:
        raise InvalidParameterException("property III needs a proper non-empty subset, got |S| = {} of {}".format(len(S), g.n))
    observed = cut_edges(g, S)
    lo, hi = cut_interval(g.n, len(S), p, epsilon)
    return PropertyResult(PROPERTY_III, len(S), np.empty(0, dtype=np.int64), None,
            lo < observed < hi, observed=observed, interval=(lo, hi))

def check_singletons_III(g, p, epsilon):
    """
    Property (III) for all n singletons at once: e({v}, V∖{v}) is deg(v).
    """
    _check_epsilon(epsilon)
    if g.n < 2:
        return []
    lo, hi = cut_interval(g.n, 1, p, epsilon)
    degrees = g.degrees()
    passed = (degrees > lo) & (degrees < hi)
    empty = np.empty(0, dtype=np.int64)
    return [PropertyResult(PROPERTY_III, 1, empty, None, bool(ok), observed=int(d), interval=(lo, hi), size_class='singleton')
            for d, ok in zip(degrees, passed)]

def exceptional_set_brute_force(g, S, bad_count):
    """
    Reference exceptional set computed vertex by vertex: all v outside S
    for which bad_count(|Γ(v) ∩ S|) holds.
    """
    S = as_vertex_set(g, S)
    return np.array([v for v in range(g.n) if v not in S and bad_count(neighbors_in(g, v, S))], dtype=np.int64)

def finishing_stay_probability(n, p, epsilon):
    """
    Upper estimate (1 - 1/(np(1+3ε)))^(np(1-4ε)) of the probability that an
    uninformed vertex stays uninformed for one round late in the broadcast;
    at most 2/e for small ε.
    """
    d = n * p
    return (1.0 - 1.0 / (d * (1.0 + 3.0 * epsilon))) ** (d * (1.0 - 4.0 * epsilon))


def size_classes(n, p, alpha, epsilon):
    """
    The sampled subset sizes keyed by class name, clamped to [1, n].
    """
    classes = {
        'one': 1,
        'eps_pn': math.ceil(epsilon * p * n),
        'n_over_alpha': math.ceil(n / alpha),
        'half': math.ceil(n / 2),
        'all_but_sqrt_ln_n': n - math.ceil(math.sqrt(math.log(n))),
    }
    return {k: min(max(v, 1), n) for k, v in classes.items()}

def _checks_for(g, S, p, alpha, epsilon, size_class=None):
    n = g.n
    size = len(S)
    results = []
    if size <= n / alpha:
        results.append(check_property_II(g, S, p, epsilon, alpha))
    else:
        results.append(check_property_I(g, S, p, epsilon))
    if n / alpha <= size <= epsilon * n:
        results.append(check_property_I_derived(g, S, p, epsilon))
    if 0 < size < n:
        results.append(check_property_III(g, S, p, epsilon))
    for r in results:
        r.size_class = size_class
    return results

def audit(g, p, alpha, samples_per_class, rng, epsilon=None):
    """
    Samples uniform random subsets of every size class, applies the matching
    property checks and sweeps all singletons for (III).
    """
    if samples_per_class < 1:
        raise InvalidParameterException("samples per class must be at least 1, got {}".format(samples_per_class))
    if not alpha > 0.0:
        raise InvalidParameterException("alpha must be positive, got {}".format(alpha))
    if epsilon is None:
        epsilon = alpha ** -0.5
    _check_epsilon(epsilon)

    report = TypicalityReport()
    for name, size in size_classes(g.n, p, alpha, epsilon).items():
        log.verbose("auditing {} random sets of size {} ({})".format(samples_per_class, size, name))
        for _ in range(samples_per_class):
            S = VertexSet(g.n, ids=rng.choice(g.n, size=size, replace=False))
            report.results.extend(_checks_for(g, S, p, alpha, epsilon, size_class=name))
        report.sampled_sets[name] = samples_per_class

    singles = check_singletons_III(g, p, epsilon)
    report.results.extend(singles)
    report.sampled_sets['singleton'] = len(singles)

    failed = len(report.failed())
    if failed:
        log.warn("{} of {} typicality checks failed".format(failed, len(report.results)))
    return report

def audit_trace(g, trace, p, alpha, epsilon=None):
    """
    Applies the property checks to the informed sets 𝓘_t of a trace recorded
    with snapshots, i.e. exactly where the broadcast dynamics use them.
    """
    if trace.informed_sets is None:
        raise InvalidParameterException("trace was recorded without informed-set snapshots")
    if epsilon is None:
        epsilon = alpha ** -0.5
    _check_epsilon(epsilon)

    report = TypicalityReport()
    for t, ids in enumerate(trace.informed_sets):
        S = VertexSet(g.n, ids=ids)
        if len(S) == g.n:
            continue
        report.results.extend(_checks_for(g, S, p, alpha, epsilon, size_class='round_{}'.format(t)))
    report.sampled_sets['informed_sets'] = len(trace.informed_sets)
    return report
