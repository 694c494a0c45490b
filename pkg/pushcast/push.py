"""
The synchronous push protocol. In every round each informed vertex picks one
neighbor uniformly at random and informs it; all choices of a round are made
against the informed set at the start of the round.
"""

from dataclasses import dataclass, field

import numpy as np

from pushcast import log
from pushcast.graph import VertexSet, as_vertex_set
from pushcast.util import InvalidParameterException, make_rng


@dataclass(frozen=True)
class RoundRecord:
    t: int
    informed_before: int
    newly_informed: int
    pushes_to_uninformed: int

    @property
    def collisions(self):
        return self.pushes_to_uninformed - self.newly_informed

    @property
    def informed_after(self):
        return self.informed_before + self.newly_informed

    def to_json_dict(self):
        return {
            't': self.t,
            'informed_before': self.informed_before,
            'newly_informed': self.newly_informed,
            'pushes_to_uninformed': self.pushes_to_uninformed,
            'collisions': self.collisions,
        }


@dataclass(frozen=True)
class Outcome:
    complete: bool
    # T for complete runs, size of the start's component for stalled runs
    value: int

    @classmethod
    def completed(cls, rounds):
        return cls(True, rounds)

    @classmethod
    def stalled(cls, reachable):
        return cls(False, reachable)

    @property
    def T(self): # pylint: disable=invalid-name
        return self.value if self.complete else None

    @property
    def reachable(self):
        return None if self.complete else self.value

    def to_json_dict(self):
        if self.complete:
            return {'kind': 'complete', 'T': self.value}
        return {'kind': 'stalled', 'reachable': self.value}

    def __str__(self):
        return "Complete(T={})".format(self.value) if self.complete else "Stalled(reachable={})".format(self.value)


@dataclass
class Trace:
    n: int
    start: int
    rounds: list = field(default_factory=list)
    outcome: Outcome = None
    # 𝓘_0, 𝓘_1, ... as sorted id arrays, only when snapshots were requested
    informed_sets: list = None

    @property
    def complete(self):
        return self.outcome is not None and self.outcome.complete

    def informed_counts(self):
        """
        Returns [I_0, I_1, ..., I_T].
        """
        counts = [1]
        for r in self.rounds:
            counts.append(r.informed_after)
        return counts

    def uninformed_counts(self):
        return [self.n - i for i in self.informed_counts()]

    def to_json_dict(self):
        d = {
            'n': self.n,
            'start': self.start,
            'outcome': self.outcome.to_json_dict(),
            'rounds': [r.to_json_dict() for r in self.rounds],
        }
        if self.informed_sets is not None:
            d['informed_sets'] = [[int(v) for v in s] for s in self.informed_sets]
        return d

    @classmethod
    def from_json_dict(cls, d):
        o = d['outcome']
        outcome = Outcome.completed(o['T']) if o['kind'] == 'complete' else Outcome.stalled(o['reachable'])
        rounds = [RoundRecord(r['t'], r['informed_before'], r['newly_informed'], r['pushes_to_uninformed']) for r in d['rounds']]
        informed_sets = None
        if 'informed_sets' in d:
            informed_sets = [np.asarray(s, dtype=np.int64) for s in d['informed_sets']]
        return cls(d['n'], d['start'], rounds, outcome, informed_sets)


def choose_targets(g, ids, rng):
    """
    One uniform neighbor per vertex in ids (ascending), skipping degree-0
    vertices. The random draws are consumed in the order of ids.
    """
    if g.is_complete:
        if g.n == 1:
            return np.empty(0, dtype=np.int64)
        # Uniform over the n-1 other vertices without rejection
        offsets = rng.integers(0, g.n - 1, size=ids.size)
        return (ids + 1 + offsets) % g.n

    deg = g.degrees()[ids]
    has_nbrs = deg > 0
    active = ids[has_nbrs]
    if active.size == 0:
        return np.empty(0, dtype=np.int64)
    offsets = rng.integers(0, deg[has_nbrs])
    return g.indices[g.indptr[active] + offsets]

def _ensure_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)

def push_round(g, informed, rng):
    """
    Executes one round against the given informed set and returns
    (newly informed vertices, number of pushes that hit an uninformed vertex).
    """
    informed = as_vertex_set(g, informed)
    if len(informed) == 0:
        raise InvalidParameterException("push_round needs a non-empty informed set")
    targets = choose_targets(g, informed.ids, _ensure_rng(rng))
    fresh = targets[~informed.mask[targets]]
    return VertexSet(g.n, ids=fresh), int(fresh.size)

def run_push(g, start, rng, snapshot=False):
    """
    Runs the protocol from start until every vertex is informed (Complete) or
    no edge leaves the informed set (Stalled).
    """
    if not 0 <= start < g.n:
        raise InvalidParameterException("start vertex {} out of range [0, {})".format(start, g.n))
    rng = _ensure_rng(rng)
    n = g.n
    mask = np.zeros(n, dtype=bool)
    mask[start] = True
    informed = 1
    # Edges leaving the informed set, maintained incrementally
    cut = g.degree(start)

    trace = Trace(n, start, informed_sets=[] if snapshot else None)
    if snapshot:
        trace.informed_sets.append(np.array([start], dtype=np.int64))

    t = 0
    while informed < n and cut > 0:
        t += 1
        ids = np.flatnonzero(mask)
        targets = choose_targets(g, ids, rng)
        fresh = targets[~mask[targets]]
        new = np.unique(fresh)

        if g.is_complete:
            mask[new] = True
            informed += int(new.size)
            cut = informed * (n - informed)
        else:
            nbrs = g.gather_neighbors(new)
            into_old = int(np.count_nonzero(mask[nbrs]))
            mask[new] = True
            # Internal edges of the new set appear twice in nbrs
            into_new = int(np.count_nonzero(mask[nbrs])) - into_old
            cut += int(g.degrees()[new].sum()) - 2 * into_old - into_new
            informed += int(new.size)

        trace.rounds.append(RoundRecord(t, informed - int(new.size), int(new.size), int(fresh.size)))
        if snapshot:
            trace.informed_sets.append(np.flatnonzero(mask))

    if informed == n:
        trace.outcome = Outcome.completed(t)
    else:
        trace.outcome = Outcome.stalled(informed)
        log.verbose("push from {} stalled after {} rounds with {} of {} vertices informed".format(start, t, informed, n))
    return trace
