"""
Undirected simple graphs: sampled G(n,p) graphs, fixed topologies and an
implicit complete graph which answers every query without storing edges.

Vertices are the ids 0..n-1. Explicit graphs store sorted neighbor lists in
CSR form (indptr, indices); both arrays are read-only after construction, so
one Graph can be shared by any number of concurrent protocol runs.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from pushcast import log
from pushcast.util import InvalidParameterException, check_seed, make_rng


class GraphFormatException(Exception):
    def __init__(self, path, line_nr, message):
        super().__init__("{}:{}: {}".format(path, line_nr, message))
        self.path = path
        self.line_nr = line_nr


@dataclass(frozen=True)
class GenMeta:
    p: float
    seed: int


def _frozen(a):
    a.flags.writeable = False
    return a


class VertexSet:
    """
    A vertex subset stored twice: as a membership bitmap and as a sorted id list.
    """
    def __init__(self, n, ids=None, mask=None):
        self.n = n
        if mask is None:
            mask = np.zeros(n, dtype=bool)
            if ids is not None:
                ids = np.asarray(ids, dtype=np.int64)
                if ids.size and (ids.min() < 0 or ids.max() >= n):
                    raise InvalidParameterException("vertex set contains ids outside [0, {})".format(n))
                mask[ids] = True
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (n,):
                raise InvalidParameterException("membership bitmap must have length {}".format(n))
        self.mask = _frozen(mask)
        self.ids = _frozen(np.flatnonzero(mask))

    @classmethod
    def empty(cls, n):
        return cls(n)

    @classmethod
    def full(cls, n):
        return cls(n, mask=np.ones(n, dtype=bool))

    def complement(self):
        return VertexSet(self.n, mask=~self.mask)

    def __len__(self):
        return int(self.ids.size)

    def __contains__(self, v):
        return 0 <= v < self.n and bool(self.mask[v])

    def __iter__(self):
        return iter(int(v) for v in self.ids)

    def __eq__(self, other):
        return isinstance(other, VertexSet) and self.n == other.n and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.n, self.ids.tobytes()))

    def __repr__(self):
        return "VertexSet(n={}, size={})".format(self.n, len(self))


class Graph:
    """
    An immutable undirected simple graph, either explicit (CSR adjacency) or
    implicit-complete (no storage).
    """
    def __init__(self, n, indptr=None, indices=None, complete=False, gen_meta=None):
        if n < 1:
            raise InvalidParameterException("a graph needs at least one vertex, got n={}".format(n))
        self.n = int(n)
        self.gen_meta = gen_meta
        self.is_complete = complete
        if complete:
            self.indptr = None
            self.indices = None
            self._degrees = _frozen(np.full(self.n, self.n - 1, dtype=np.int64))
        else:
            self.indptr = _frozen(np.asarray(indptr, dtype=np.int64))
            self.indices = _frozen(np.asarray(indices, dtype=np.int64))
            self._degrees = _frozen(np.diff(self.indptr))

    @property
    def edge_count(self):
        if self.is_complete:
            return self.n * (self.n - 1) // 2
        return int(self.indices.size) // 2

    def degrees(self):
        return self._degrees

    def degree(self, v):
        self._check_vertex(v)
        return int(self._degrees[v])

    def neighbors(self, v):
        """
        Returns the sorted neighbor ids of v.
        """
        self._check_vertex(v)
        if self.is_complete:
            return np.delete(np.arange(self.n, dtype=np.int64), v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u, v):
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            return False
        if self.is_complete:
            return True
        row = self.indices[self.indptr[u]:self.indptr[u + 1]]
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    def edges(self):
        """
        Yields every edge once as (u, v) with u < v, in ascending order.
        """
        for u in range(self.n):
            for v in self.neighbors(u):
                if v > u:
                    yield u, int(v)

    def gather_neighbors(self, ids):
        """
        Concatenation of the neighbor lists of the given vertices (explicit graphs only).
        An edge between two given vertices appears twice.
        """
        ids = np.asarray(ids, dtype=np.int64)
        starts = self.indptr[ids]
        lengths = self.indptr[ids + 1] - starts
        total = int(lengths.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        base = np.repeat(starts - (np.cumsum(lengths) - lengths), lengths)
        return self.indices[base + np.arange(total, dtype=np.int64)]

    def counts_into(self, S):
        """
        Returns an array c with c[v] = |Γ(v) ∩ S| for every vertex v.
        """
        S = as_vertex_set(self, S)
        if self.is_complete:
            c = np.full(self.n, len(S), dtype=np.int64)
            c[S.ids] -= 1
            return c
        return np.bincount(self.gather_neighbors(S.ids), minlength=self.n).astype(np.int64)

    def connected_component(self, v):
        self._check_vertex(v)
        if self.is_complete:
            return VertexSet.full(self.n)
        mask = np.zeros(self.n, dtype=bool)
        mask[v] = True
        frontier = np.array([v], dtype=np.int64)
        while frontier.size:
            nbrs = self.gather_neighbors(frontier)
            frontier = np.unique(nbrs[~mask[nbrs]])
            mask[frontier] = True
        return VertexSet(self.n, mask=mask)

    def is_connected(self):
        return len(self.connected_component(0)) == self.n

    def _check_vertex(self, v):
        if not 0 <= v < self.n:
            raise InvalidParameterException("vertex {} out of range [0, {})".format(v, self.n))

    def __repr__(self):
        if self.is_complete:
            return "Graph(K_{})".format(self.n)
        return "Graph(n={}, m={})".format(self.n, self.edge_count)


def as_vertex_set(g, S):
    if isinstance(S, VertexSet):
        if S.n != g.n:
            raise InvalidParameterException("vertex set is over {} vertices, graph has {}".format(S.n, g.n))
        return S
    return VertexSet(g.n, ids=np.fromiter(S, dtype=np.int64) if not isinstance(S, np.ndarray) else S)

def neighbors_in(g, v, S):
    """
    Returns |Γ(v) ∩ S|.
    """
    g._check_vertex(v) # pylint: disable=protected-access
    S = as_vertex_set(g, S)
    if g.is_complete:
        return len(S) - (1 if v in S else 0)
    return int(np.count_nonzero(S.mask[g.neighbors(v)]))

def cut_edges(g, S):
    """
    Returns e_G(S, V∖S), the number of edges with exactly one endpoint in S.
    """
    S = as_vertex_set(g, S)
    if g.is_complete:
        return len(S) * (g.n - len(S))
    nbrs = g.gather_neighbors(S.ids)
    return int(np.count_nonzero(~S.mask[nbrs]))


def _from_pairs(n, us, vs, gen_meta=None):
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    # Keys src·n + dst order by source, then by target
    order = np.argsort(src * n + dst, kind='stable')
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(n, indptr=indptr, indices=dst[order], gen_meta=gen_meta)

def from_edges(n, edges):
    """
    Builds an explicit graph from (u, v) pairs, rejecting self-loops,
    duplicates and out-of-range ids.
    """
    if n < 1:
        raise InvalidParameterException("a graph needs at least one vertex, got n={}".format(n))
    seen = set()
    us = []
    vs = []
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidParameterException("edge ({}, {}) has an id outside [0, {})".format(u, v, n))
        if u == v:
            raise InvalidParameterException("self-loop at vertex {}".format(u))
        key = (min(u, v), max(u, v))
        if key in seen:
            raise InvalidParameterException("duplicate edge ({}, {})".format(*key))
        seen.add(key)
        us.append(key[0])
        vs.append(key[1])
    return _from_pairs(n, us, vs)

def complete_graph(n):
    return Graph(n, complete=True)

def explicit_complete_graph(n):
    """
    K_n with materialized adjacency (only sensible for small n).
    """
    u, v = np.triu_indices(n, k=1)
    return _from_pairs(n, u, v)

def star_graph(leaves):
    """
    Center 0 joined to the leaves 1..leaves.
    """
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])

def path_graph(n):
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def _check_gnp_params(n, p, seed):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameterException("n must be a positive integer, got {!r}".format(n))
    if not (isinstance(p, (int, float, np.floating)) and 0.0 <= p <= 1.0):
        raise InvalidParameterException("edge probability must lie in [0, 1], got {!r}".format(p))
    return check_seed(seed)

def _pair_offset(u, n):
    # Linear index of the first pair (u, u+1) in the lexicographic order of pairs u < v
    return u * (2 * n - u - 1) // 2

def unrank_pairs(k, n):
    """
    Maps linear pair indices k (lexicographic order over u < v) to (u, v).
    """
    k = np.asarray(k, dtype=np.int64)
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2.0).astype(np.int64)
    u = np.clip(u, 0, max(n - 2, 0))
    # Repair floating point rounding at row boundaries
    over = _pair_offset(u, n) > k
    while np.any(over):
        u[over] -= 1
        over = _pair_offset(u, n) > k
    under = (u < n - 2) & (_pair_offset(u + 1, n) <= k)
    while np.any(under):
        u[under] += 1
        under = (u < n - 2) & (_pair_offset(u + 1, n) <= k)
    v = k - _pair_offset(u, n) + u + 1
    return u, v

def _skip_chunk_size(pairs, q):
    return int(min(max(1024, 1.1 * q * pairs + 64), 1 << 22))

def _skip_chunks(rng, q, pairs):
    """
    The decision stream: geometric skip lengths (support 1, 2, ...) between
    successive hits over the linearized pair index, drawn in fixed-size chunks.
    """
    chunk = _skip_chunk_size(pairs, q)
    while True:
        yield rng.geometric(q, size=chunk)

def _hit_positions(rng, q, pairs):
    positions = []
    last = -1
    for skips in _skip_chunks(rng, q, pairs):
        pos = last + np.cumsum(skips)
        positions.append(pos[pos < pairs])
        last = int(pos[-1])
        if last >= pairs:
            break
    return np.concatenate(positions)

def generate_gnp(n, p, seed):
    """
    Samples G(n, p). For p < 1/2 the edges are found by geometric skipping over
    the n(n-1)/2 pair indices, so the work is proportional to n + m; for
    p >= 1/2 the complement is sampled the same way.
    """
    seed = _check_gnp_params(n, p, seed)
    n = int(n)
    p = float(p)
    pairs = n * (n - 1) // 2
    meta = GenMeta(p=p, seed=seed)

    if pairs == 0 or p == 0.0:
        k = np.empty(0, dtype=np.int64)
    elif p == 1.0:
        k = np.arange(pairs, dtype=np.int64)
    else:
        rng = make_rng(seed)
        if p < 0.5:
            k = _hit_positions(rng, p, pairs)
        else:
            keep = np.ones(pairs, dtype=bool)
            keep[_hit_positions(rng, 1.0 - p, pairs)] = False
            k = np.flatnonzero(keep)

    us, vs = unrank_pairs(k, n)
    g = _from_pairs(n, us, vs, gen_meta=meta)
    log.verbose("sampled G({}, {:.6g}) with {} edges (seed {})".format(n, p, g.edge_count, seed))
    return g

def generate_gnp_pairwise(n, p, seed):
    """
    Reference G(n, p) generator visiting every pair (u, v), u < v, in order and
    deciding it from the same decision stream as generate_gnp. Quadratic work.
    """
    seed = _check_gnp_params(n, p, seed)
    n = int(n)
    p = float(p)
    pairs = n * (n - 1) // 2
    edges = []

    if pairs > 0 and p > 0.0:
        if p == 1.0:
            edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
        else:
            q = p if p < 0.5 else 1.0 - p
            stream = (int(s) for chunk in _skip_chunks(make_rng(seed), q, pairs) for s in chunk)
            next_hit = next(stream) - 1
            k = 0
            for u in range(n):
                for v in range(u + 1, n):
                    hit = k == next_hit
                    if hit:
                        next_hit += next(stream)
                    if hit == (p < 0.5):
                        edges.append((u, v))
                    k += 1

    us = [e[0] for e in edges]
    vs = [e[1] for e in edges]
    return _from_pairs(n, us, vs, gen_meta=GenMeta(p=p, seed=seed))


_header_regex = re.compile(r'^\s*(?P<n>\d+)\s+(?P<m>\d+)\s*$')
_edge_regex = re.compile(r'^\s*(?P<u>\d+)\s+(?P<v>\d+)\s*$')

def load_edge_list(path):
    """
    Loads a graph from the edge-list format: a header line 'n m', then m lines
    'u v' with 0-based ids and u < v.
    """
    with open(path, 'r', newline='') as f:
        lines = f.read().split('\n')

    # A single trailing newline is allowed
    if lines and lines[-1] == '':
        lines.pop()
    if not lines:
        raise GraphFormatException(path, 1, "missing header line 'n m'")

    m = _header_regex.match(lines[0])
    if not m:
        raise GraphFormatException(path, 1, "invalid header '{}', expected 'n m'".format(lines[0]))
    n = int(m.group('n'))
    edge_count = int(m.group('m'))
    if n < 1:
        raise GraphFormatException(path, 1, "vertex count must be positive")
    if len(lines) - 1 != edge_count:
        raise GraphFormatException(path, len(lines), "header announces {} edges but {} edge lines follow".format(edge_count, len(lines) - 1))

    seen = set()
    us = []
    vs = []
    for line_nr, line in enumerate(lines[1:], start=2):
        m = _edge_regex.match(line)
        if not m:
            raise GraphFormatException(path, line_nr, "invalid edge line '{}'".format(line))
        u = int(m.group('u'))
        v = int(m.group('v'))
        if u >= n or v >= n:
            raise GraphFormatException(path, line_nr, "vertex id out of range [0, {})".format(n))
        if u == v:
            raise GraphFormatException(path, line_nr, "self-loop at vertex {}".format(u))
        if u > v:
            raise GraphFormatException(path, line_nr, "edge must be written as 'u v' with u < v")
        if (u, v) in seen:
            raise GraphFormatException(path, line_nr, "duplicate edge ({}, {})".format(u, v))
        seen.add((u, v))
        us.append(u)
        vs.append(v)

    log.verbose("loaded graph with {} vertices and {} edges from '{}'".format(n, edge_count, path))
    return _from_pairs(n, us, vs)

def write_edge_list(g, path):
    with open(path, 'w', newline='\n') as f:
        f.write("{} {}\n".format(g.n, g.edge_count))
        for u, v in g.edges():
            f.write("{} {}\n".format(u, v))

def gnp_probability(n, alpha):
    """
    p = α·ln n / n, clamped to 1.
    """
    if n < 2:
        return 1.0
    return min(alpha * math.log(n) / n, 1.0)
