"""Per-root component exploration in three flavours.

``full``     every uncoloured neighbour joins the list.
``regular``  only neighbours sharing exactly one attribute with the explorer
             join; the others are coloured and dropped.
``simple``   a regular neighbour joins only if its attributes avoid those of
             the younger white list members (outside the explored prefix);
             the rest are coloured as complex and dropped.

The oldest white vertex scans the uncoloured vertices in increasing index
order, and each accepted child joins the list before the next candidate is
examined.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graphgen import GraphSample

MODES = ("full", "regular", "simple")


@dataclass(frozen=True)
class ExplorationConfig:
    mode: str = "full"
    omega: int = 2
    stop_at_omega: bool = True
    budget_factor: int = 3

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.omega < 2:
            raise ValueError("omega must be >= 2")

    @property
    def budget(self) -> int | None:
        return self.budget_factor * self.omega if self.stop_at_omega and self.budget_factor else None

    @property
    def rule(self) -> str:
        if not self.stop_at_omega:
            return "exhaust"
        if self.budget is None:
            return "list>=omega"
        return f"list>=omega or coloured>={self.budget_factor}*omega"


def omega_log(n: int) -> int:
    return max(2, math.ceil(math.log(n))) if n > 1 else 2


def omega_two_thirds(n: int) -> int:
    return max(2, math.ceil(n ** (2.0 / 3.0)))


@dataclass
class ExplorationRecord:
    root: int
    mode: str
    list: list[int]
    used_attributes: set[int]
    irregular_count: Counter = field(default_factory=Counter)
    complex_count: Counter = field(default_factory=Counter)
    coloured: int = 0
    stopped: bool = False
    is_big: bool = False
    rule: str = ""


class Explorer:
    """Exploration over one sample, with the adjacency lists converted once."""

    def __init__(self, g: GraphSample):
        self.n = g.n
        self.sets = [tuple(s) for s in g.sets]
        iv = g.index_vertices.tolist()
        io = g.index_offsets.tolist()
        self.holders = [iv[io[w] : io[w + 1]] for w in range(g.m)]

    def run(self, root: int, cfg: ExplorationConfig) -> ExplorationRecord:
        sets = self.sets
        holders = self.holders
        mode = cfg.mode
        omega = cfg.omega
        stop = cfg.stop_at_omega
        budget = cfg.budget

        listed = [root]
        coloured = {root}
        used = set(sets[root])  # attributes of every listed vertex
        prefix: set[int] = set()  # attributes of listed vertices up to the explorer
        rec = ExplorationRecord(root, mode, listed, used, rule=cfg.rule)

        if stop and len(listed) >= omega:
            rec.stopped = True
        head = 0
        while head < len(listed) and not rec.stopped:
            u = listed[head]
            own = set(sets[u])
            prefix |= own
            found = set()
            for w in own:
                found.update(holders[w])
            found -= coloured
            halt = False
            for c in sorted(found):
                coloured.add(c)
                attrs = sets[c]
                shared = sum(1 for w in attrs if w in own)
                t = len(attrs)
                if shared > 1:
                    rec.irregular_count[t] += 1
                    keep = mode == "full"
                elif mode == "simple":
                    # younger white members' attributes, i.e. used - prefix
                    keep = all(w in prefix or w not in used for w in attrs)
                    if not keep:
                        rec.complex_count[t] += 1
                else:
                    keep = True
                if keep:
                    listed.append(c)
                    used.update(attrs)
                if stop:
                    if len(listed) >= omega:
                        rec.stopped = True
                        halt = True
                    elif budget is not None and len(coloured) >= budget:
                        halt = True
                if halt:
                    break
            if halt:
                break
            head += 1

        rec.coloured = len(coloured)
        rec.is_big = len(listed) >= omega
        return rec


def explore_component(g: GraphSample, v: int, cfg: ExplorationConfig) -> ExplorationRecord:
    return Explorer(g).run(v, cfg)


@dataclass(frozen=True)
class BigVertexCensus:
    omega: int
    rule: str
    big_full: np.ndarray
    big_regular: np.ndarray
    big_simple: np.ndarray
    irregular_full: np.ndarray  # full exploration met an irregular edge

    @property
    def b_full(self) -> int:
        return int(self.big_full.sum())

    @property
    def b_regular(self) -> int:
        return int(self.big_regular.sum())

    @property
    def b_simple(self) -> int:
        return int(self.big_simple.sum())

    def as_dict(self) -> dict:
        return {
            "n": int(self.big_full.size),
            "omega": self.omega,
            "rule": self.rule,
            "b_full": self.b_full,
            "b_regular": self.b_regular,
            "b_simple": self.b_simple,
            "irregular_full": int(self.irregular_full.sum()),
        }


def big_vertex_census(g: GraphSample, omega: int, stop_at_omega: bool = True, budget_factor: int = 3) -> BigVertexCensus:
    """Explore from every vertex in each mode with fresh colouring per root."""
    if omega > g.n:
        raise ValueError(f"omega={omega} exceeds n={g.n}")
    ex = Explorer(g)
    flags = {m: np.zeros(g.n, dtype=bool) for m in MODES}
    irregular = np.zeros(g.n, dtype=bool)
    rule = ""
    for mode in MODES:
        cfg = ExplorationConfig(mode, omega, stop_at_omega, budget_factor)
        rule = cfg.rule
        out = flags[mode]
        for v in range(g.n):
            rec = ex.run(v, cfg)
            out[v] = rec.is_big
            if mode == "full" and rec.irregular_count:
                irregular[v] = True
    return BigVertexCensus(omega, rule, flags["full"], flags["regular"], flags["simple"], irregular)
