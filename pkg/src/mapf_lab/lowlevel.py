"""Space-time shortest paths for one agent.

States are (vertex, timestep) pairs; every move or wait costs one timestep
and path cost is the arrival timestep at the goal. The search honors motion
constraints (keep-out vertices or edges at specific timesteps) and dynamic
obstacles (already-planned paths treated as moving bodies that rest on their
goals forever). Arrival is only accepted once the goal stays clear for the
rest of time, since a finished agent parks there.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass

from .conflicts import AgentPath, bodies_overlap, position_at
from .roadmap import AgentTask, GridRoadmap

INF = float("inf")

# Padding added to the soft search horizon so an agent can sidestep after the
# last scheduled threat instead of meeting it head-on.
HORIZON_SLACK = 16


@dataclass(frozen=True)
class MotionConstraint:
    """Keep-out rule: the agent may not occupy ``vertex`` at ``timestep``, or
    may not traverse ``edge`` (in either direction) departing at ``timestep``."""

    agent: int
    timestep: int
    vertex: int | None = None
    edge: tuple[int, int] | None = None

    def __post_init__(self):
        if (self.vertex is None) == (self.edge is None):
            raise ValueError("constraint needs exactly one of vertex or edge")
        if self.timestep < 0:
            raise ValueError("constraint timestep must be non-negative")


@dataclass(frozen=True)
class DynamicObstacle:
    """A committed path the searching agent must not touch, at its own width."""

    path: AgentPath
    robot_width: float


class SearchBudgetExceeded(RuntimeError):
    """The search ran out of budget before settling the instance.

    ``reason`` is "nodes" (expansion budget) or "time" (deadline). Distinct
    from returning None, which proves no path exists within the horizon.
    """

    def __init__(self, reason: str):
        super().__init__(f"low-level search budget exceeded ({reason})")
        self.reason = reason


@dataclass(frozen=True)
class SearchLimits:
    horizon: int | None = None
    node_budget: int = 1_000_000
    deadline: float | None = None  # absolute time.perf_counter() stamp


def distances_to_goal(roadmap: GridRoadmap, goal: int) -> list[float]:
    """Exact unit-cost distances from every vertex to the goal (inf if cut off)."""
    dist = [INF] * roadmap.vertex_count
    dist[goal] = 0.0
    queue = deque([goal])
    while queue:
        v = queue.popleft()
        d = dist[v] + 1.0
        for u in roadmap.adjacency[v]:
            if dist[u] == INF:
                dist[u] = d
                queue.append(u)
    return dist


def _pair_width(a: float, b: float) -> float:
    # Two squares of sides a and b share interior iff center offset < (a+b)/2
    # on both axes; bodies_overlap covers the equal-width case.
    return (a + b) / 2.0


class _ObstacleTrack:
    """Precomputed per-timestep coordinates of one obstacle path."""

    def __init__(self, obstacle: DynamicObstacle, roadmap: GridRoadmap):
        coords = roadmap.coords
        states = obstacle.path.states
        self.points = [coords[v] for v in states]
        self.makespan = len(states) - 1
        self.rest = self.points[-1]
        self.width = obstacle.robot_width

    def at(self, t: int) -> tuple[float, float]:
        return self.points[t] if t <= self.makespan else self.rest

    def mid(self, t: int) -> tuple[float, float]:
        # Body center halfway through the transition t -> t+1.
        a = self.at(t)
        b = self.at(t + 1)
        if a == b:
            return a
        return ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)


def shortest_path(roadmap: GridRoadmap, task: AgentTask,
                  constraints: "list[MotionConstraint] | tuple" = (),
                  obstacles: "list[DynamicObstacle] | tuple" = (),
                  limits: SearchLimits | None = None,
                  dist: list[float] | None = None) -> AgentPath | None:
    """Minimal-arrival-time path for one agent, or None if none exists.

    Constraints are filtered to ``task.agent_id``; edge constraints block both
    directions of the stored edge. Ties are broken toward lower remaining
    distance, then lower vertex id, then moves over waits, which makes the
    result deterministic. Raises SearchBudgetExceeded when the node budget or
    deadline runs out before the search settles.
    """
    limits = limits or SearchLimits()
    if dist is None:
        dist = distances_to_goal(roadmap, task.goal)
    start, goal = task.start, task.goal
    if dist[start] == INF:
        return None

    banned_vertex: set[tuple[int, int]] = set()
    banned_edge: set[tuple[int, int, int]] = set()
    latest_constraint = 0
    latest_goal_ban = -1
    for c in constraints:
        if c.agent != task.agent_id:
            continue
        latest_constraint = max(latest_constraint, c.timestep)
        if c.vertex is not None:
            banned_vertex.add((c.vertex, c.timestep))
            if c.vertex == goal:
                latest_goal_ban = max(latest_goal_ban, c.timestep)
        else:
            u, v = c.edge
            banned_edge.add((u, v, c.timestep))
            banned_edge.add((v, u, c.timestep))

    coords = roadmap.coords
    own_width = roadmap.robot_width
    tracks = [_ObstacleTrack(o, roadmap) for o in obstacles]
    goal_point = coords[goal]

    # The goal must stay clear forever once the agent parks on it.
    goal_clear = latest_goal_ban + 1
    latest_obstacle = 0
    for trk in tracks:
        w = _pair_width(own_width, trk.width)
        if bodies_overlap(goal_point, trk.rest, w):
            return None  # another body retires on top of the goal
        latest_obstacle = max(latest_obstacle, trk.makespan)
        for t in range(trk.makespan + 1):
            if bodies_overlap(goal_point, trk.at(t), w):
                goal_clear = max(goal_clear, t + 1)
        for t in range(trk.makespan):
            if bodies_overlap(goal_point, trk.mid(t), w):
                goal_clear = max(goal_clear, t + 1)
        if bodies_overlap(coords[start], trk.at(0), w):
            return None  # boxed in before the first move

    if (start, 0) in banned_vertex:
        return None

    finite = [d for d in dist if d < INF]
    longest = int(max(finite)) if finite else 0
    soft = max(latest_constraint, latest_obstacle, goal_clear) + longest + HORIZON_SLACK
    horizon = limits.horizon if limits.horizon is not None \
        else min(soft, 2 * roadmap.vertex_count)

    def blocked_by_obstacle(u: int, v: int, t: int) -> bool:
        # Transition u -> v departing at t: check arrival body and mid-body.
        pv = coords[v]
        mid_self = pv if u == v else ((coords[u][0] + pv[0]) / 2.0,
                                      (coords[u][1] + pv[1]) / 2.0)
        for trk in tracks:
            w = _pair_width(own_width, trk.width)
            if bodies_overlap(pv, trk.at(t + 1), w):
                return True
            if bodies_overlap(mid_self, trk.mid(t), w):
                return True
        return False

    h0 = dist[start]
    open_heap: list[tuple[float, float, int, int, int]] = [(h0, h0, start, 0, 0)]
    parents: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    expansions = 0

    while open_heap:
        f, h, v, wait_flag, t = heapq.heappop(open_heap)
        if (v, t) in closed:
            continue
        closed.add((v, t))
        expansions += 1
        if expansions > limits.node_budget:
            raise SearchBudgetExceeded("nodes")
        if limits.deadline is not None \
                and time.perf_counter() > limits.deadline:
            raise SearchBudgetExceeded("time")

        if v == goal and t >= goal_clear:
            states = [v]
            key = (v, t)
            while key in parents:
                key = parents[key]
                states.append(key[0])
            states.reverse()
            return AgentPath(task.agent_id, states)

        if t >= horizon:
            continue
        for u in (*roadmap.adjacency[v], v):
            key = (u, t + 1)
            if key in closed or (u, t + 1) in banned_vertex:
                continue
            if u != v and (v, u, t) in banned_edge:
                continue
            if tracks and blocked_by_obstacle(v, u, t):
                continue
            hu = dist[u]
            if hu == INF or t + 1 + hu > horizon:
                continue  # cannot arrive within the horizon from here
            if key not in parents:
                parents[key] = (v, t)
                heapq.heappush(open_heap, (t + 1 + hu, hu, u, 1 if u == v else 0, t + 1))
    return None
