"""
Exact law of the broadcast time on small graphs.

The informed set performs a Markov chain on the subsets of V that contain the
start vertex. From an informed set A, let F(C) be the probability that every
push lands inside A ∪ C:

    F(C) = Π_{v∈A, deg v ≥ 1} |Γ(v) ∩ (A ∪ C)| / |Γ(v)|

The probability that exactly the frontier subset B becomes informed is the
Möbius inversion Σ_{C⊆B} (-1)^{|B∖C|} F(C), evaluated for all B at once by the
fast subset transform. The broadcast time is the absorption time in A = V.
"""

import math
from dataclasses import dataclass

import numpy as np
import sympy
from scipy import sparse

from pushcast import log
from pushcast.util import InvalidParameterException, NotBroadcastableException

DEFAULT_CAP = 14
DEFAULT_TAIL_CUTOFF = 1e-12
DEFAULT_MAX_ROUNDS = 100000


class CapacityException(Exception):
    pass


@dataclass
class ExactDistribution:
    n: int
    start: int
    probabilities: dict
    mean: float
    truncated_at: int
    tail_mass: float

    def to_json_dict(self):
        return {
            'n': self.n,
            'start': self.start,
            'mean': self.mean,
            'truncated_at': self.truncated_at,
            'tail_mass': self.tail_mass,
            'pmf': [{'t': t, 'p': p} for t, p in sorted(self.probabilities.items())],
        }


def _adjacency_masks(g):
    full = (1 << g.n) - 1
    if g.is_complete:
        return [full & ~(1 << v) for v in range(g.n)]
    masks = []
    for v in range(g.n):
        m = 0
        for u in g.neighbors(v):
            m |= 1 << int(u)
        masks.append(m)
    return masks

def _bits(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out

def _popcount_table(k):
    table = np.zeros(1 << k, dtype=np.int64)
    for j in range(k):
        table[1 << j:1 << (j + 1)] = table[:1 << j] + 1
    return table

def _local_mask(adj_mask, frontier):
    lm = 0
    for j, f in enumerate(frontier):
        if adj_mask >> f & 1:
            lm |= 1 << j
    return lm

def _global_masks(frontier):
    c = np.arange(1 << len(frontier), dtype=np.int64)
    g = np.zeros_like(c)
    for j, f in enumerate(frontier):
        g |= ((c >> j) & 1) << f
    return g

def _transition_row(adj, A):
    """
    Returns (newly informed bitmasks, probabilities) for one step from A.
    """
    frontier_mask = 0
    pushers = []
    for v in _bits(A):
        if adj[v]:
            pushers.append(v)
            frontier_mask |= adj[v]
    frontier = _bits(frontier_mask & ~A)
    k = len(frontier)
    c = np.arange(1 << k, dtype=np.int64)
    popcount = _popcount_table(k)

    f = np.ones(1 << k)
    for v in pushers:
        deg = bin(adj[v]).count('1')
        inside = bin(adj[v] & A).count('1')
        f *= (inside + popcount[c & _local_mask(adj[v], frontier)]) / deg

    # Möbius inversion over the subset lattice of the frontier
    for j in range(k):
        view = f.reshape(-1, 2, 1 << j)
        view[:, 1, :] -= view[:, 0, :]

    # Cancellation leaves rounding noise around zero
    f[np.abs(f) < 1e-15] = 0.0
    keep = f > 0.0
    return _global_masks(frontier)[keep], f[keep]

def _transition_row_exact(adj, A):
    frontier_mask = 0
    pushers = []
    for v in _bits(A):
        if adj[v]:
            pushers.append(v)
            frontier_mask |= adj[v]
    frontier = _bits(frontier_mask & ~A)
    k = len(frontier)

    f = []
    for c in range(1 << k):
        covered = A
        for j, u in enumerate(frontier):
            if c >> j & 1:
                covered |= 1 << u
        prod = sympy.Integer(1)
        for v in pushers:
            prod *= sympy.Rational(bin(adj[v] & covered).count('1'), bin(adj[v]).count('1'))
        f.append(prod)

    for j in range(k):
        for c in range(1 << k):
            if c >> j & 1:
                f[c] -= f[c ^ (1 << j)]

    row = {}
    for c, prob in enumerate(f):
        if prob != 0:
            newly = 0
            for j, u in enumerate(frontier):
                if c >> j & 1:
                    newly |= 1 << u
            row[newly] = prob
    return row


class _Chain:
    """
    The reachable part of the informed-set chain, started from {start}.
    """
    def __init__(self, g, start, exact=False):
        self.n = g.n
        self.full = (1 << g.n) - 1
        adj = _adjacency_masks(g)

        self.states = [1 << start]
        self.index = {1 << start: 0}
        self.rows = []
        i = 0
        while i < len(self.states):
            A = self.states[i]
            if A == self.full:
                row = ({A: sympy.Integer(1)} if exact else (np.array([0]), np.array([1.0])))
            else:
                row = _transition_row_exact(adj, A) if exact else _transition_row(adj, A)
            newly = row.keys() if exact else row[0]
            for b in newly:
                B = A | int(b)
                if B not in self.index:
                    self.index[B] = len(self.states)
                    self.states.append(B)
            self.rows.append(row)
            i += 1
        log.verbose("informed-set chain has {} reachable states".format(len(self.states)))

    def matrix(self):
        rows = []
        cols = []
        vals = []
        for i, (newly, probs) in enumerate(self.rows):
            A = self.states[i]
            rows.extend([i] * len(probs))
            cols.extend(self.index[A | int(b)] for b in newly)
            vals.extend(probs)
        size = len(self.states)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))


def _check_oracle_input(g, start, cap):
    if g.n > cap:
        raise CapacityException("exact computation is limited to n <= {}, got n = {}".format(cap, g.n))
    if not 0 <= start < g.n:
        raise InvalidParameterException("start vertex {} out of range [0, {})".format(start, g.n))
    reachable = len(g.connected_component(start))
    if reachable < g.n:
        raise NotBroadcastableException("only {} of {} vertices are reachable from {}".format(reachable, g.n, start))

def exact_time_distribution(g, start, tail_cutoff=DEFAULT_TAIL_CUTOFF, cap=DEFAULT_CAP, max_rounds=DEFAULT_MAX_ROUNDS):
    """
    Pushes the state distribution through the chain round by round until the
    mass not yet absorbed in V drops below tail_cutoff.
    """
    _check_oracle_input(g, start, cap)
    if not tail_cutoff > 0.0:
        raise InvalidParameterException("tail cutoff must be positive, got {}".format(tail_cutoff))

    chain = _Chain(g, start)
    P = chain.matrix().T.tocsr() # pylint: disable=invalid-name
    full = chain.index[chain.full]
    transient = np.ones(len(chain.states), dtype=bool)
    transient[full] = False

    mass = np.zeros(len(chain.states))
    mass[0] = 1.0
    absorbed = mass[full]
    # Only n = 1 starts absorbed
    probabilities = {0: float(absorbed)} if absorbed > 0.0 else {}
    t = 0
    residual = math.fsum(mass[transient])
    while residual >= tail_cutoff and t < max_rounds:
        t += 1
        mass = P @ mass
        now = mass[full]
        if now > absorbed:
            probabilities[t] = now - absorbed
        absorbed = now
        residual = math.fsum(mass[transient])

    if residual >= tail_cutoff:
        log.warn("tail mass {:.3g} still above the cutoff after {} rounds".format(residual, t))

    mean = math.fsum(t * p for t, p in probabilities.items())
    return ExactDistribution(g.n, start, probabilities, mean, t, residual)

def exact_mean_time(g, start, exact=False, cap=DEFAULT_CAP):
    """
    Mean absorption time by back-substitution from V downwards:
    E[A] = (1 + Σ_{B≠A} P(A→B)·E[B]) / (1 - P(A→A)).
    With exact=True the computation runs on sympy rationals.
    """
    _check_oracle_input(g, start, cap)
    chain = _Chain(g, start, exact=exact)
    order = sorted(range(len(chain.states)), key=lambda i: -bin(chain.states[i]).count('1'))

    expect = {}
    zero = sympy.Integer(0) if exact else 0.0
    one = sympy.Integer(1) if exact else 1.0
    for i in order:
        A = chain.states[i]
        if A == chain.full:
            expect[A] = zero
            continue
        row = chain.rows[i].items() if exact else zip(chain.rows[i][0], chain.rows[i][1])
        stay = zero
        terms = []
        for b, prob in row:
            if int(b) == 0:
                stay = prob
            else:
                terms.append(prob * expect[A | int(b)])
        total = sum(terms, zero) if exact else math.fsum(terms)
        expect[A] = (one + total) / (one - stay)
    return expect[chain.states[0]]

def transition_distribution(g, informed):
    """
    The one-round law of the newly informed set from the given informed set,
    as {frozenset(newly informed): probability}.
    """
    if g.n > DEFAULT_CAP:
        raise CapacityException("exact computation is limited to n <= {}, got n = {}".format(DEFAULT_CAP, g.n))
    A = 0
    for v in informed:
        A |= 1 << int(v)
    if A == 0:
        raise InvalidParameterException("informed set must not be empty")
    newly, probs = _transition_row(_adjacency_masks(g), A)
    return {frozenset(_bits(int(b))): float(p) for b, p in zip(newly, probs)}

def stay_uninformed_probability(g, v, informed):
    """
    Π_{u ∈ Γ(v) ∩ A} (1 - 1/|Γ(u)|), the probability that v receives no push
    from the informed set A in one round.
    """
    informed = set(int(u) for u in informed)
    prob = 1.0
    for u in g.neighbors(v):
        if int(u) in informed:
            prob *= 1.0 - 1.0 / g.degree(int(u))
    return prob
