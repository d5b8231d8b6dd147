import os
import random

import pytest

from mapf_lab import (AgentPath, AgentTask, GridMap, ProblemInstance,
                      build_roadmap, instance_from_cells, load_map,
                      project_path)

from helpers import empty_roadmap, grid_from, roadmap_from


def test_empty_map_counts():
    for n, counts in [(8, (64, 225, 841)), (2, (4, 9, 25))]:
        for r, want in zip((1, 2, 4), counts):
            assert empty_roadmap(n, r).vertex_count == want


def test_empty_map_closed_form():
    for n in range(2, 7):
        for r in range(1, 5):
            roadmap = empty_roadmap(n, r)
            assert roadmap.vertex_count == (r * (n - 1) + 1) ** 2


def test_random_fixture_r1_equals_passable(data_dir):
    grid = load_map(os.path.join(data_dir, "random-32-32-10.map"))
    roadmap = build_roadmap(grid, 1)
    assert roadmap.vertex_count == grid.passable_count() == 922


def test_vertex_coordinates():
    roadmap = empty_roadmap(3, 1)
    assert roadmap.coords[roadmap.cell_vertex(0, 0)] == (0.5, 0.5)
    assert roadmap.coords[roadmap.cell_vertex(2, 1)] == (2.5, 1.5)
    fine = empty_roadmap(3, 2)
    xs = sorted({x for x, _ in fine.coords})
    assert xs == [0.5, 1.0, 1.5, 2.0, 2.5]


def test_ids_row_major():
    roadmap = empty_roadmap(4, 2)
    assert list(roadmap.coords) == sorted(roadmap.coords,
                                          key=lambda p: (p[1], p[0]))
    assert roadmap.vertex_id(0, 0) == 0


def test_center_blocked_3x3_r2_counts():
    # 5x5 lattice; body half-width 0.25 hits the open unit square blocked
    # interior for the 3x3 lattice points nearest its center: 25 - 9 = 16.
    roadmap = roadmap_from(["...", ".@.", "..."], resolution=2)
    assert roadmap.vertex_count == 16
    r1 = roadmap_from(["...", ".@.", "..."], resolution=1)
    assert r1.vertex_count == 8


def test_boundary_touch_is_legal():
    # Blocked cell interior is the open square (1,2)x(1,2); a half-width
    # 0.25 body centered 0.25 away touches the boundary and survives, but
    # any center nearer than that overlaps the interior and is dropped.
    roadmap = roadmap_from(["..", ".@"], resolution=4)
    coords = set(roadmap.coords)
    assert (0.75, 0.75) in coords
    assert (1.0, 0.75) in coords
    assert (1.0, 1.0) not in coords
    assert (1.5, 1.5) not in coords


def test_diagonal_pinch_has_no_edges_across():
    roadmap = roadmap_from([".@", "@."], resolution=1)
    assert roadmap.vertex_count == 2
    assert roadmap.edge_count == 0


def test_adjacency_symmetric_and_sorted():
    rng = random.Random(11)
    for _ in range(10):
        rows = ["".join(rng.choice("...@") for _ in range(6))
                for _ in range(6)]
        roadmap = build_roadmap(grid_from(rows), rng.choice((1, 2)))
        for u in range(roadmap.vertex_count):
            assert list(roadmap.neighbors(u)) == sorted(roadmap.neighbors(u))
            for v in roadmap.neighbors(u):
                assert u in roadmap.neighbors(v)


def test_width_monotonicity():
    rng = random.Random(3)
    for _ in range(10):
        rows = ["".join(rng.choice("...@") for _ in range(5))
                for _ in range(5)]
        grid = grid_from(rows)
        wide = build_roadmap(grid, 2, robot_width=0.8)
        narrow = build_roadmap(grid, 2, robot_width=0.4)
        assert set(wide.coords) <= set(narrow.coords)


def test_deterministic_construction():
    grid = grid_from(["..@.", "....", ".@.."])
    a = build_roadmap(grid, 2)
    b = build_roadmap(grid, 2)
    assert a.coords == b.coords
    assert a.adjacency == b.adjacency


def test_argument_errors():
    grid = grid_from(["..", ".."])
    with pytest.raises(ValueError):
        build_roadmap(grid, 0)
    with pytest.raises(ValueError):
        build_roadmap(grid, 1, robot_width=0.0)
    with pytest.raises(ValueError):
        build_roadmap(grid, 1, robot_width=1.5)


def test_project_two_moves_doubles():
    low = empty_roadmap(4, 1)
    high = empty_roadmap(4, 2)
    path = AgentPath(0, [low.cell_vertex(0, 0), low.cell_vertex(1, 0),
                         low.cell_vertex(2, 0)])
    projected = project_path(low, high, path)
    assert len(projected) == 5
    assert high.coords[projected.states[0]] == low.coords[path.states[0]]
    assert high.coords[projected.states[-1]] == low.coords[path.states[-1]]


def test_project_zero_length_identity():
    low = empty_roadmap(3, 1)
    high = empty_roadmap(3, 4)
    v = low.cell_vertex(1, 1)
    projected = project_path(low, high, AgentPath(0, [v]))
    assert len(projected) == 1
    assert high.coords[projected.states[0]] == low.coords[v]


def test_project_r1_to_r4_collinear_segments():
    low = empty_roadmap(3, 1)
    high = empty_roadmap(3, 4)
    path = AgentPath(0, [low.cell_vertex(0, 0), low.cell_vertex(1, 0),
                         low.cell_vertex(1, 1)])
    projected = project_path(low, high, path)
    assert len(projected) == 9
    first = [high.coords[v] for v in projected.states[:5]]
    second = [high.coords[v] for v in projected.states[4:]]
    assert all(y == 0.5 for _, y in first)
    assert [x for x, _ in first] == [0.5, 0.75, 1.0, 1.25, 1.5]
    assert all(x == 1.5 for x, _ in second)
    assert [y for _, y in second] == [0.5, 0.75, 1.0, 1.25, 1.5]


def test_project_expands_waits():
    low = empty_roadmap(3, 1)
    high = empty_roadmap(3, 2)
    v = low.cell_vertex(0, 0)
    u = low.cell_vertex(1, 0)
    projected = project_path(low, high, AgentPath(0, [v, v, u]))
    assert len(projected) == 5
    assert projected.states[0] == projected.states[1] == projected.states[2]


def test_project_non_multiple_errors():
    with pytest.raises(ValueError):
        project_path(empty_roadmap(3, 2), empty_roadmap(3, 3),
                     AgentPath(0, [0]))


def test_instance_from_cells():
    roadmap = empty_roadmap(4, 1)
    instance = instance_from_cells(roadmap, [((0, 0), (3, 3)),
                                             ((3, 0), (0, 3))])
    assert [t.agent_id for t in instance.tasks] == [0, 1]
    assert instance.tasks[0].start == roadmap.cell_vertex(0, 0)
    assert instance.tasks[0].goal == roadmap.cell_vertex(3, 3)


def test_instance_from_blocked_cell_errors():
    roadmap = roadmap_from(["..", ".@"])
    with pytest.raises(ValueError):
        instance_from_cells(roadmap, [((0, 0), (1, 1))])


def test_instance_rejects_overlapping_bodies():
    roadmap = empty_roadmap(3, 4)
    a = roadmap.vertex_id(0, 0)
    b = roadmap.vertex_id(1, 0)  # 0.25 apart at r=4: bodies overlap
    far = roadmap.vertex_id(8, 8)
    mid = roadmap.vertex_id(4, 4)
    with pytest.raises(ValueError):
        ProblemInstance(roadmap, (AgentTask(0, a, far), AgentTask(1, b, mid)))


def test_instance_rejects_duplicate_ids_and_bad_vertices():
    roadmap = empty_roadmap(3, 1)
    task = AgentTask(0, 0, 1)
    with pytest.raises(ValueError):
        ProblemInstance(roadmap, (task, AgentTask(0, 2, 3)))
    with pytest.raises(ValueError):
        ProblemInstance(roadmap, (AgentTask(0, 0, 99),))


def test_roadmap_json_shape():
    roadmap = empty_roadmap(2, 1)
    doc = roadmap.to_json_dict()
    assert [v["id"] for v in doc["vertices"]] == [0, 1, 2, 3]
    assert all(set(v) == {"id", "x", "y"} for v in doc["vertices"])
    assert sorted(tuple(e) for e in doc["edges"]) == [(0, 1), (0, 2), (1, 3),
                                                      (2, 3)]
