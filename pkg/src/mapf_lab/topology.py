"""Betweenness-centrality fields and roadmap topology labeling.

Betweenness here counts, for each vertex, the fraction of shortest paths
between unordered vertex pairs that pass through it. On grid roadmaps the
field exposes structure: corridors show up as connected runs of
high-centrality vertices, doorway bottlenecks as isolated high-centrality
vertices, and plazas as wide low-centrality patches. The classifier turns
those signatures into one of four labels used to pick solver settings.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from statistics import median
from typing import Sequence

from .roadmap import GridRoadmap


@dataclass
class CentralityField:
    raw: list[float]
    normalized: list[float]
    raw_variance: float

    @classmethod
    def from_raw(cls, raw: list[float]) -> "CentralityField":
        if raw:
            mean = sum(raw) / len(raw)
            variance = sum((v - mean) ** 2 for v in raw) / len(raw)
            lo, hi = min(raw), max(raw)
            if hi > lo:
                normalized = [(v - lo) / (hi - lo) for v in raw]
            else:
                normalized = [0.0] * len(raw)
        else:
            variance = 0.0
            normalized = []
        return cls(raw=list(raw), normalized=normalized, raw_variance=variance)

    def coefficient_of_variation(self) -> float:
        if not self.raw:
            return 0.0
        mean = sum(self.raw) / len(self.raw)
        if mean == 0.0:
            return 0.0
        return (self.raw_variance ** 0.5) / mean


def _accumulate_from_source(adjacency: Sequence[Sequence[int]], s: int,
                            score: list[float]) -> None:
    # One full dependency accumulation: BFS shortest-path DAG from s, then
    # back-propagate pair dependencies in reverse finish order.
    n = len(adjacency)
    sigma = [0.0] * n
    dist = [-1] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma[s] = 1.0
    dist[s] = 0
    order: list[int] = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adjacency[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * n
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
        if w != s:
            score[w] += delta[w]


def betweenness(adjacency: Sequence[Sequence[int]],
                sample: int | None = None, seed: int = 0) -> CentralityField:
    """Betweenness over unordered pairs, exact or source-sampled.

    With ``sample`` set, only that many uniformly drawn sources accumulate
    and the result is scaled by V/sample, an unbiased estimate of the exact
    field. Disconnected inputs are fine: pairs in different components
    contribute nothing.
    """
    n = len(adjacency)
    if sample is not None:
        if not 0 < sample <= n:
            raise ValueError(f"sample must be in 1..{n}, got {sample}")
        sources = sorted(random.Random(seed).sample(range(n), sample))
        scale = n / sample / 2.0
    else:
        sources = range(n)
        scale = 0.5  # each unordered pair was seen from both endpoints
    score = [0.0] * n
    for s in sources:
        _accumulate_from_source(adjacency, s, score)
    return CentralityField.from_raw([v * scale for v in score])


class Label(Enum):
    LARGE_OPEN = "large_open"
    NARROW_DOMINATED = "narrow_dominated"
    MIXED = "mixed"
    FEATURELESS = "featureless"


@dataclass(frozen=True)
class ClassifierConfig:
    # Upper bound on the squared coefficient of variation of the raw field
    # (variance over squared mean) for the large-open label; an almost
    # uniform raw field means no structure worth reacting to.
    empty_cv_threshold: float = 0.5
    # Normalized score at or above which a vertex counts as high-centrality.
    high_threshold: float = 0.6
    # Minimum vertices for a connected high run to count as a corridor chain.
    chain_min: int = 5
    # Chain share of high-centrality mass needed to call the map corridor-bound.
    narrow_fraction: float = 0.5
    # Normalized score at or below which a vertex counts as open ground.
    low_threshold: float = 0.2
    # Minimum vertices for a low-centrality patch to count as a plaza.
    open_cluster_min: int = 16
    # Plaza share of all vertices needed for the mixed label.
    mixed_low_fraction: float = 0.2
    # High-centrality share of all vertices above which peaks are too broad
    # to be doorway bottlenecks.
    bottleneck_fraction: float = 0.08
    # Widest free cross-section (in cells) a high-centrality feature may sit
    # in and still count as a passage or doorway rather than open ground.
    passage_width_max: float = 4.0
    # Share of high-centrality mass that must sit in narrow cross-sections
    # before isolated peaks count as doorway bottlenecks.
    narrow_mass_min: float = 0.25


@dataclass
class TopologyLabel:
    label: Label
    evidence: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"label": self.label.value, "evidence": dict(self.evidence)}


def _components(members: list[int], member_set: set[int],
                adjacency: Sequence[Sequence[int]]) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for v in members:
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        stack = [v]
        while stack:
            u = stack.pop()
            for w in adjacency[u]:
                if w in member_set and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def _passage_widths(roadmap: GridRoadmap) -> list[int]:
    """Free cross-section per vertex: the smaller of the horizontal and
    vertical passable runs through the vertex's cell, in cell units."""
    grid = roadmap.grid
    w, h = grid.width, grid.height
    hor = [0] * (w * h)
    ver = [0] * (w * h)
    for row in range(h):
        col = 0
        while col < w:
            if grid.is_blocked(col, row):
                col += 1
                continue
            end = col
            while end < w and not grid.is_blocked(end, row):
                end += 1
            for c in range(col, end):
                hor[row * w + c] = end - col
            col = end
    for col in range(w):
        row = 0
        while row < h:
            if grid.is_blocked(col, row):
                row += 1
                continue
            end = row
            while end < h and not grid.is_blocked(col, end):
                end += 1
            for r in range(row, end):
                ver[r * w + col] = end - row
            row = end
    r = roadmap.resolution
    widths = []
    for (i, j) in roadmap.lattice:
        cell = ((2 * j + r) // (2 * r)) * w + (2 * i + r) // (2 * r)
        widths.append(min(hor[cell], ver[cell]))
    return widths


def _in_passage(vertices: list[int], widths: list[int],
                config: ClassifierConfig) -> bool:
    if not vertices:
        return False
    return median(widths[v] for v in vertices) <= config.passage_width_max


def classify(roadmap: GridRoadmap, field_: CentralityField,
             config: ClassifierConfig = ClassifierConfig()) -> TopologyLabel:
    """Label the roadmap's dominant structure from its centrality field.

    Statistics are taken over the largest connected component; the component
    count is reported as evidence. The checks run in a fixed order: nearly
    uniform raw field, then corridor chains, then bottlenecks-plus-plazas,
    else featureless.
    """
    n = roadmap.vertex_count
    if n == 0:
        raise ValueError("cannot classify an empty roadmap")
    all_comps = _components(list(range(n)), set(range(n)), roadmap.adjacency)
    main = max(all_comps, key=lambda c: (len(c), -c[0]))
    main_set = set(main)

    raw = [field_.raw[v] for v in main]
    cf = CentralityField.from_raw(raw)
    mean = sum(raw) / len(raw)
    rel_var = cf.raw_variance / (mean * mean) if mean > 0 else 0.0
    norm = {v: cf.normalized[k] for k, v in enumerate(main)}

    evidence = {
        "component_count": float(len(all_comps)),
        "raw_cv_sq": rel_var,
        "vertices": float(len(main)),
    }
    if rel_var < config.empty_cv_threshold:
        return TopologyLabel(Label.LARGE_OPEN, evidence)

    widths = _passage_widths(roadmap)
    high = [v for v in main if norm[v] >= config.high_threshold]
    high_mass = sum(norm[v] for v in high)
    comps = _components(high, set(high), roadmap.adjacency)
    chain_mass = sum(sum(norm[v] for v in comp) for comp in comps
                     if len(comp) >= config.chain_min
                     and _in_passage(comp, widths, config))
    chain_fraction = chain_mass / high_mass if high_mass > 0 else 0.0
    evidence["high_fraction"] = len(high) / len(main)
    evidence["chain_fraction"] = chain_fraction
    evidence["isolated_fraction"] = 1.0 - chain_fraction if high_mass > 0 else 0.0
    if high and chain_fraction >= config.narrow_fraction and chain_mass > 0.0:
        return TopologyLabel(Label.NARROW_DOMINATED, evidence)

    narrow_mass = sum(norm[v] for v in high
                      if widths[v] <= config.passage_width_max)
    evidence["narrow_high_mass"] = narrow_mass / high_mass if high_mass > 0 else 0.0
    low = [v for v in main if norm[v] <= config.low_threshold]
    low_comps = _components(low, set(low), roadmap.adjacency)
    plaza = sum(len(c) for c in low_comps if len(c) >= config.open_cluster_min)
    evidence["low_cluster_cover"] = plaza / len(main)
    if high and evidence["high_fraction"] <= config.bottleneck_fraction \
            and evidence["narrow_high_mass"] >= config.narrow_mass_min \
            and evidence["low_cluster_cover"] >= config.mixed_low_fraction:
        return TopologyLabel(Label.MIXED, evidence)
    return TopologyLabel(Label.FEATURELESS, evidence)


def emit_heatmap(roadmap: GridRoadmap, field_: CentralityField, path) -> int:
    """Write one CSV row per vertex: continuous x, y and normalized score."""
    if len(field_.normalized) != roadmap.vertex_count:
        raise ValueError("field size does not match roadmap")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,bc\n")
        for v, (x, y) in enumerate(roadmap.coords):
            fh.write(f"{x:.6f},{y:.6f},{field_.normalized[v]:.6f}\n")
    return roadmap.vertex_count
