"""Best-first constraint-tree search over joint plans.

Both strategies share one loop: plan every agent alone, pop the cheapest
node, find its first conflict, and branch two ways. They differ only in what
a branch adds. Motion branching (cbs) forbids one agent its own conflict
location at the conflict time and replans that agent; with best-first order
this is complete and returns minimal sum-of-costs. Priority branching
(cbswp) orders the two agents and replans the lower one around every
strictly-higher path; it prunes far harder but can miss solutions and
returns costs at or above the motion-branching optimum.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .conflicts import (AgentPath, Conflict, ConflictKind, TeamPlan,
                        find_first_conflict, iter_conflicts)
from .lowlevel import (DynamicObstacle, MotionConstraint, SearchBudgetExceeded,
                       SearchLimits, distances_to_goal, shortest_path)
from .roadmap import ProblemInstance


class Strategy(Enum):
    CBS = "cbs"
    CBSWP = "cbswp"


class Outcome(Enum):
    SOLVED = "solved"
    INFEASIBLE = "infeasible"
    TIMEOUT = "timeout"
    EXHAUSTED = "exhausted"


class ConsistencyError(RuntimeError):
    """An internal tree invariant broke; indicates a solver bug, not bad input."""


@dataclass(frozen=True)
class Budget:
    time_limit: float | None = None       # seconds of wall time
    node_limit: int | None = None         # high-level expansions
    low_level_budget: int = 1_000_000     # expansions per low-level call


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    nodes_generated: int = 0
    conflicts_resolved: int = 0
    low_level_calls: int = 0
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {
            "nodes_expanded": self.nodes_expanded,
            "nodes_generated": self.nodes_generated,
            "conflicts_resolved": self.conflicts_resolved,
            "low_level_calls": self.low_level_calls,
            "wall_time": self.wall_time,
        }


@dataclass
class SearchNode:
    node_id: int
    paths: dict[int, AgentPath]
    cost: int
    conflict_count: int
    first_conflict: Conflict | None
    constraints: dict[int, frozenset[MotionConstraint]]
    priorities: frozenset[tuple[int, int]]  # (higher, lower) pairs
    parent: int | None = None
    branch_pair: tuple[int, int] | None = None  # conflict pair the parent split on

    def sort_key(self) -> tuple[int, int, int]:
        return (self.cost, self.conflict_count, self.node_id)


@dataclass
class SolveResult:
    outcome: Outcome
    strategy: Strategy
    plan: TeamPlan | None
    stats: SearchStats

    def __post_init__(self):
        assert (self.plan is not None) == (self.outcome is Outcome.SOLVED)

    def to_json(self) -> dict:
        doc = {
            "outcome": self.outcome.value,
            "strategy": self.strategy.value,
            "cost": self.plan.cost if self.plan else None,
            "makespan": self.plan.makespan if self.plan else None,
            "stats": self.stats.to_json(),
        }
        if self.plan:
            doc["paths"] = [{"agent": p.agent_id, "states": list(p.states)}
                            for p in self.plan.paths]
        return doc


def sum_of_costs(plan: TeamPlan) -> int:
    """Total of per-agent arrival timesteps; trailing rest at the goal is free."""
    return plan.cost


def makespan(plan: TeamPlan) -> int:
    return plan.makespan


def resolve_motion(conflict: Conflict) -> tuple[MotionConstraint, MotionConstraint]:
    """Two keep-out constraints, one per agent, each on that agent's own location."""
    out = []
    for agent, loc in zip(conflict.agents, conflict.locations):
        if isinstance(loc, tuple):
            out.append(MotionConstraint(agent, conflict.timestep, edge=loc))
        else:
            out.append(MotionConstraint(agent, conflict.timestep, vertex=loc))
    return out[0], out[1]


def _reachable(pairs: frozenset[tuple[int, int]], src: int, dst: int) -> bool:
    stack = [src]
    seen = {src}
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        for hi, lo in pairs:
            if hi == v and lo not in seen:
                seen.add(lo)
                stack.append(lo)
    return False


def resolve_priority(conflict: Conflict, priorities: frozenset[tuple[int, int]]
                     ) -> list[tuple[tuple[int, int], frozenset[tuple[int, int]]]]:
    """Candidate orderings for an unordered conflicting pair.

    Returns up to two (new_pair, extended_order) entries; an ordering that
    would close a cycle is dropped. Raises ConsistencyError if the pair is
    already ordered: ordered pairs must never conflict.
    """
    i, j = conflict.agents
    if _reachable(priorities, i, j) or _reachable(priorities, j, i):
        raise ConsistencyError(
            f"conflict between ordered agents {i} and {j} at t={conflict.timestep}")
    children = []
    for hi, lo in ((i, j), (j, i)):
        if _reachable(priorities, lo, hi):
            continue  # would create a cycle
        children.append(((hi, lo), priorities | {(hi, lo)}))
    return children


def _ancestors(pairs: frozenset[tuple[int, int]], agent: int) -> set[int]:
    """Agents strictly above ``agent`` under the transitive order."""
    out: set[int] = set()
    frontier = [agent]
    while frontier:
        v = frontier.pop()
        for hi, lo in pairs:
            if lo == v and hi not in out:
                out.add(hi)
                frontier.append(hi)
    return out


def _topo_order(agent_ids: list[int], pairs: frozenset[tuple[int, int]]) -> list[int]:
    below: dict[int, list[int]] = {a: [] for a in agent_ids}
    indeg = {a: 0 for a in agent_ids}
    for hi, lo in pairs:
        below[hi].append(lo)
        indeg[lo] += 1
    ready = sorted(a for a in agent_ids if indeg[a] == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        changed = False
        for u in below[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                ready.append(u)
                changed = True
        if changed:
            ready.sort()
    if len(order) != len(agent_ids):
        raise ConsistencyError("priority order contains a cycle")
    return order


def _paths_collide(a: AgentPath, b: AgentPath, roadmap) -> bool:
    plan = TeamPlan([a, b])
    return find_first_conflict(plan, roadmap) is not None


class _Solver:
    def __init__(self, instance: ProblemInstance, strategy: Strategy,
                 budget: Budget,
                 inspect: Callable[[SearchNode], None] | None = None):
        self.instance = instance
        self.roadmap = instance.roadmap
        self.strategy = strategy
        self.budget = budget
        self.inspect = inspect
        self.stats = SearchStats()
        self.started = time.perf_counter()
        self.deadline = None if budget.time_limit is None \
            else self.started + budget.time_limit
        self.dist = {t.agent_id: distances_to_goal(self.roadmap, t.goal)
                     for t in instance.tasks}
        self.tasks = {t.agent_id: t for t in instance.tasks}
        self.next_id = 0

    def _limits(self) -> SearchLimits:
        return SearchLimits(node_budget=self.budget.low_level_budget,
                            deadline=self.deadline)

    def _plan_one(self, agent: int,
                  constraints: frozenset[MotionConstraint],
                  obstacle_paths: list[AgentPath]) -> AgentPath | None:
        self.stats.low_level_calls += 1
        obstacles = [DynamicObstacle(p, self.roadmap.robot_width)
                     for p in obstacle_paths]
        return shortest_path(self.roadmap, self.tasks[agent],
                             constraints=list(constraints), obstacles=obstacles,
                             limits=self._limits(), dist=self.dist[agent])

    def _make_node(self, paths: dict[int, AgentPath],
                   constraints: dict[int, frozenset[MotionConstraint]],
                   priorities: frozenset[tuple[int, int]],
                   parent: int | None,
                   branch_pair: tuple[int, int] | None) -> SearchNode:
        plan = TeamPlan([paths[a] for a in sorted(paths)])
        conflicts = iter_conflicts(plan, self.roadmap)
        first = next(conflicts, None)
        count = 0 if first is None else 1 + sum(1 for _ in conflicts)
        node = SearchNode(self.next_id, paths, plan.cost, count, first,
                          constraints, priorities, parent, branch_pair)
        self.next_id += 1
        self.stats.nodes_generated += 1
        return node

    def _root(self) -> SearchNode | None:
        paths = {}
        for task in self.instance.tasks:
            path = self._plan_one(task.agent_id, frozenset(), [])
            if path is None:
                return None
            paths[task.agent_id] = path
        empty = {t.agent_id: frozenset() for t in self.instance.tasks}
        return self._make_node(paths, empty, frozenset(), None, None)

    def _children_motion(self, node: SearchNode) -> list[SearchNode]:
        children = []
        for constraint in resolve_motion(node.first_conflict):
            agent = constraint.agent
            if constraint in node.constraints[agent]:
                continue  # already forbidden once on this branch; re-adding loops
            per_agent = dict(node.constraints)
            per_agent[agent] = node.constraints[agent] | {constraint}
            path = self._plan_one(agent, per_agent[agent], [])
            if path is None:
                continue
            paths = dict(node.paths)
            paths[agent] = path
            children.append(self._make_node(paths, per_agent, node.priorities,
                                            node.node_id, node.first_conflict.agents))
        return children

    def _children_priority(self, node: SearchNode) -> list[SearchNode]:
        children = []
        agent_ids = sorted(self.tasks)
        for new_pair, pairs in resolve_priority(node.first_conflict, node.priorities):
            paths = dict(node.paths)
            feasible = True
            # Walk in priority order and revalidate everyone against their
            # (possibly grown) ancestor set: a new pair hi > lo also puts hi
            # above all of lo's descendants, so checking only freshly
            # replanned paths would miss stale collisions with hi's path.
            for agent in _topo_order(agent_ids, pairs):
                higher = sorted(_ancestors(pairs, agent))
                if agent != new_pair[1] and not any(
                        _paths_collide(paths[agent], paths[h], self.roadmap)
                        for h in higher):
                    continue
                path = self._plan_one(agent, node.constraints[agent],
                                      [paths[h] for h in higher])
                if path is None:
                    feasible = False
                    break
                paths[agent] = path
            if feasible:
                children.append(self._make_node(paths, node.constraints, pairs,
                                                node.node_id,
                                                node.first_conflict.agents))
        return children

    def _finish(self, outcome: Outcome, plan: TeamPlan | None = None) -> SolveResult:
        self.stats.wall_time = time.perf_counter() - self.started
        return SolveResult(outcome, self.strategy, plan, self.stats)

    def run(self) -> SolveResult:
        try:
            root = self._root()
        except SearchBudgetExceeded as exc:
            return self._finish(Outcome.TIMEOUT if exc.reason == "time"
                                else Outcome.EXHAUSTED)
        if root is None:
            return self._finish(Outcome.INFEASIBLE)

        open_heap: list[tuple[tuple[int, int, int], SearchNode]] = []
        heapq.heappush(open_heap, (root.sort_key(), root))
        while open_heap:
            if self.deadline is not None and time.perf_counter() > self.deadline:
                return self._finish(Outcome.TIMEOUT)
            if self.budget.node_limit is not None \
                    and self.stats.nodes_expanded >= self.budget.node_limit:
                return self._finish(Outcome.EXHAUSTED)
            _, node = heapq.heappop(open_heap)
            self.stats.nodes_expanded += 1
            if self.inspect is not None:
                self.inspect(node)
            if node.first_conflict is None:
                plan = TeamPlan([node.paths[a] for a in sorted(node.paths)])
                return self._finish(Outcome.SOLVED, plan)
            self.stats.conflicts_resolved += 1
            try:
                if self.strategy is Strategy.CBS:
                    children = self._children_motion(node)
                else:
                    children = self._children_priority(node)
            except SearchBudgetExceeded as exc:
                return self._finish(Outcome.TIMEOUT if exc.reason == "time"
                                    else Outcome.EXHAUSTED)
            for child in children:
                heapq.heappush(open_heap, (child.sort_key(), child))
        return self._finish(Outcome.INFEASIBLE)


def solve(instance: ProblemInstance, strategy: Strategy = Strategy.CBS,
          budget: Budget = Budget(),
          inspect: Callable[[SearchNode], None] | None = None) -> SolveResult:
    """Solve an instance with the chosen branching strategy.

    ``inspect``, when given, observes every expanded node in pop order; it is
    meant for audits and instrumentation and must not mutate the node.
    """
    if isinstance(strategy, str):
        strategy = Strategy(strategy)
    return _Solver(instance, strategy, budget, inspect).run()
