"""Sampling random intersection graphs and measuring them.

Two vertices are adjacent when their attribute sets intersect. Edges are
never stored: a sample keeps the vertex -> attributes lists and the
transposed attribute -> vertices index, both in CSR form, and every census
works from those.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.stats import poisson

from .dist import SizeDistribution, sample_size


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphParams:
    n: int
    m: int
    beta: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise GraphError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")

    @classmethod
    def from_beta(cls, n: int, beta: float) -> "GraphParams":
        """``m = floor(beta * n)``, clamped to at least one attribute."""
        if beta <= 0:
            raise GraphError("beta must be positive")
        return cls(n=n, m=max(1, math.floor(beta * n)), beta=beta)


@dataclass(frozen=True, eq=False)
class GraphSample:
    params: GraphParams
    offsets: np.ndarray  # (n+1,) into attrs
    attrs: np.ndarray  # concatenated sorted attribute lists
    index_offsets: np.ndarray  # (m+1,) into index_vertices
    index_vertices: np.ndarray  # concatenated sorted holder lists
    seed: int | None = None
    max_size: int = 0

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def m(self) -> int:
        return self.params.m

    def set_of(self, v: int) -> np.ndarray:
        return self.attrs[self.offsets[v] : self.offsets[v + 1]]

    def holders(self, w: int) -> np.ndarray:
        return self.index_vertices[self.index_offsets[w] : self.index_offsets[w + 1]]

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def multiplicity(self) -> np.ndarray:
        """``f(w)``: number of vertices holding each attribute."""
        return np.diff(self.index_offsets)

    @property
    def sets(self) -> list[list[int]]:
        a = self.attrs.tolist()
        o = self.offsets.tolist()
        return [a[o[i] : o[i + 1]] for i in range(self.n)]

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted distinct neighbours of ``v``."""
        own = self.set_of(v)
        if own.size == 0:
            return own
        parts = [self.holders(w) for w in own]
        nb = np.unique(np.concatenate(parts))
        return nb[nb != v]

    def same_as(self, other: "GraphSample") -> bool:
        return (
            self.params == other.params
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.attrs, other.attrs)
            and np.array_equal(self.index_offsets, other.index_offsets)
            and np.array_equal(self.index_vertices, other.index_vertices)
        )


def _uniform_subsets(count: int, t: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform ``t``-subsets of ``range(m)``, rows sorted.

    Floyd's selection: at step ``j`` draw ``r`` from ``0..J`` with
    ``J = m - t + j`` and keep ``J`` instead when ``r`` was already taken.
    Exact and rejection free; O(t^2) work per row.
    """
    out = np.empty((count, t), dtype=np.int64)
    for j in range(t):
        top = m - t + j
        r = rng.integers(0, top + 1, size=count, dtype=np.int64)
        if j:
            taken = (out[:, :j] == r[:, None]).any(axis=1)
            r = np.where(taken, top, r)
        out[:, j] = r
    out.sort(axis=1)
    return out


def _build(params: GraphParams, sizes: np.ndarray, rng, seed, max_size) -> GraphSample:
    n, m = params.n, params.m
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.size and sizes.max() > m:
        raise GraphError(f"set size {int(sizes.max())} exceeds m={m}")
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    attrs = np.empty(int(offsets[-1]), dtype=np.int64)
    for t in np.unique(sizes):
        t = int(t)
        if t == 0:
            continue
        verts = np.flatnonzero(sizes == t)
        rows = _uniform_subsets(verts.size, t, m, rng)
        pos = offsets[verts][:, None] + np.arange(t)
        attrs[pos] = rows
    return _with_index(params, offsets, attrs, seed, max_size)


def _with_index(params, offsets, attrs, seed, max_size) -> GraphSample:
    n, m = params.n, params.m
    owner = np.repeat(np.arange(n, dtype=np.int64), np.diff(offsets))
    order = np.argsort(attrs, kind="stable")
    index_vertices = owner[order]
    index_offsets = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(attrs, minlength=m), out=index_offsets[1:])
    for arr in (offsets, attrs, index_offsets, index_vertices):
        arr.flags.writeable = False
    return GraphSample(params, offsets, attrs, index_offsets, index_vertices, seed, int(max_size))


def sample_graph(params: GraphParams, Q: SizeDistribution, seed: int) -> GraphSample:
    """Each vertex draws ``t ~ Q`` and then a uniform ``t``-subset of the attributes."""
    if Q.max_size > params.m:
        raise GraphError(f"Q has support up to {Q.max_size} but m={params.m}")
    rng = np.random.default_rng(seed)
    sizes = sample_size(Q, rng, params.n)
    return _build(params, sizes, rng, seed, Q.max_size)


def sample_graph_fixed(params: GraphParams, counts: Mapping[int, int], seed: int) -> GraphSample:
    """Exactly ``counts[t]`` vertices of size ``t``, placed in random order."""
    total = sum(counts.values())
    if total != params.n:
        raise GraphError(f"counts sum to {total}, expected n={params.n}")
    if any(c < 0 for c in counts.values()):
        raise GraphError("negative count")
    if any(t < 0 or t > params.m for t in counts):
        raise GraphError(f"set sizes must lie in 0..{params.m}")
    rng = np.random.default_rng(seed)
    types = sorted(counts)
    sizes = np.repeat(np.array(types, dtype=np.int64), [counts[t] for t in types])
    sizes = rng.permutation(sizes)
    max_size = max((t for t in types if counts[t] > 0), default=0)
    return _build(params, sizes, rng, seed, max_size)


def from_sets(params: GraphParams, sets, seed: int | None = None) -> GraphSample:
    """Wrap explicit attribute lists (deduplicated and sorted)."""
    if len(sets) != params.n:
        raise GraphError(f"got {len(sets)} sets for n={params.n}")
    clean = [sorted(set(int(w) for w in s)) for s in sets]
    for s in clean:
        if s and (s[0] < 0 or s[-1] >= params.m):
            raise GraphError("attribute out of range")
    sizes = np.array([len(s) for s in clean], dtype=np.int64)
    offsets = np.zeros(params.n + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    attrs = np.array([w for s in clean for w in s], dtype=np.int64)
    return _with_index(params, offsets, attrs, seed, int(sizes.max(initial=0)))


class DisjointSets:
    """Union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        size = self.size
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        size[ra] += size[rb]
        self.count -= 1
        return True


@dataclass(frozen=True)
class ComponentCensus:
    component_of: np.ndarray
    sizes: np.ndarray  # indexed by component id
    n1: int
    count: int

    def size_of(self, v: int) -> int:
        return int(self.sizes[self.component_of[v]])


def component_census(g: GraphSample) -> ComponentCensus:
    """Connected components by uniting the holders of each attribute.

    Every attribute's holders form a clique, so it is enough to join the first
    holder with each of the others.
    """
    ds = DisjointSets(g.n)
    parent = ds.parent
    size = ds.size
    verts = g.index_vertices.tolist()
    f = g.multiplicity
    starts = g.index_offsets[:-1][f >= 2].tolist()
    ends = g.index_offsets[1:][f >= 2].tolist()
    for lo, hi in zip(starts, ends):
        # inlined find/union; this loop dominates sampling cost
        a = verts[lo]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        for i in range(lo + 1, hi):
            b = verts[i]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
    roots = np.fromiter((ds.find(v) for v in range(g.n)), dtype=np.int64, count=g.n)
    uniq, component_of = np.unique(roots, return_inverse=True)
    sizes = np.bincount(component_of, minlength=uniq.size)
    return ComponentCensus(component_of, sizes, int(sizes.max()), int(uniq.size))


def _clique_pairs(g: GraphSample) -> np.ndarray:
    """Encoded ordered pairs ``u * n + v`` (``u != v``) sharing an attribute, deduplicated."""
    n = g.n
    f = g.multiplicity
    chunks = []
    for size in np.unique(f[f >= 2]):
        size = int(size)
        ws = np.flatnonzero(f == size)
        block = g.index_vertices[g.index_offsets[ws][:, None] + np.arange(size)]
        i, j = np.nonzero(~np.eye(size, dtype=bool))
        chunks.append((block[:, i] * n + block[:, j]).ravel())
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(chunks))


@dataclass(frozen=True)
class DegreeCensus:
    degrees: np.ndarray
    pmf: np.ndarray
    mean: float


def degree_census(g: GraphSample) -> DegreeCensus:
    keys = _clique_pairs(g)
    degrees = np.bincount(keys // g.n, minlength=g.n)
    pmf = np.bincount(degrees) / g.n
    return DegreeCensus(degrees, pmf, float(degrees.mean()))


def limit_degree_pmf(Q: SizeDistribution, beta: float, kmax: int) -> tuple[np.ndarray, float]:
    """Mixed-Poisson degree law ``sum_t q_t Poisson(a t)`` on ``0..kmax``.

    Returns the pmf and the mass beyond ``kmax``.
    """
    if beta <= 0:
        raise GraphError("beta must be positive")
    q = Q.as_array()
    t = np.arange(q.size)
    a = float(np.dot(t, q)) / beta
    k = np.arange(kmax + 1)
    pmf = (q[None, :] * poisson.pmf(k[:, None], a * t[None, :])).sum(axis=1)
    return pmf, max(0.0, 1.0 - math.fsum(pmf))


@dataclass(frozen=True)
class Multiplicity:
    max_f: int
    histogram: np.ndarray
    bound: float
    bound_ok: bool


def attribute_multiplicity(g: GraphSample, max_size: int | None = None) -> Multiplicity:
    """Largest attribute occupancy against ``2 M ln n``."""
    f = g.multiplicity
    M = g.max_size if max_size is None else max_size
    max_f = int(f.max(initial=0))
    bound = 2.0 * M * math.log(g.n) if g.n > 1 else 0.0
    return Multiplicity(max_f, np.bincount(f), bound, max_f <= bound)


def tv_distance(p, q, tol: float = 1e-6) -> float:
    """Half the L1 distance between two pmfs on ``0, 1, ...``; shorter one is zero padded."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for name, x in (("p", p), ("q", q)):
        if (x < 0).any() or abs(x.sum() - 1.0) > tol:
            raise GraphError(f"{name} is not a normalized pmf")
    size = max(p.size, q.size)
    p = np.pad(p, (0, size - p.size))
    q = np.pad(q, (0, size - q.size))
    return float(0.5 * np.abs(p - q).sum())


def write_graph(g: GraphSample, path) -> None:
    """Text dump: a JSON header line, then ``v: w1 w2 ...`` per vertex."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(json.dumps({"n": g.n, "m": g.m, "seed": g.seed}) + "\n")
        for v, s in enumerate(g.sets):
            fh.write(f"{v}:" + "".join(f" {w}" for w in s) + "\n")


def read_graph(path) -> GraphSample:
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0])
    params = GraphParams(n=int(header["n"]), m=int(header["m"]))
    sets = [None] * params.n
    for line in lines[1:]:
        if not line.strip():
            continue
        head, _, rest = line.partition(":")
        sets[int(head)] = [int(w) for w in rest.split()]
    if any(s is None for s in sets):
        raise GraphError("graph dump is missing vertices")
    return from_sets(params, sets, header.get("seed"))
