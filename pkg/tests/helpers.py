"""Small builders shared across test modules."""

from collections import deque

from mapf_lab import GridMap, build_roadmap, instance_from_cells


def grid_from(rows):
    """GridMap from ASCII art: '.' passable, anything else blocked."""
    width = len(rows[0])
    assert all(len(row) == width for row in rows)
    blocked = tuple(ch != "." for row in rows for ch in row)
    return GridMap(width, len(rows), blocked)


def roadmap_from(rows, resolution=1, robot_width=0.5):
    return build_roadmap(grid_from(rows), resolution, robot_width)


def empty_roadmap(n, resolution=1):
    return roadmap_from(["." * n] * n, resolution)


def passable_cells(grid):
    return [(x, y) for y in range(grid.height) for x in range(grid.width)
            if not grid.is_blocked(x, y)]


def cell_components(grid):
    """4-neighbor component label per passable cell."""
    labels = {}
    for cell in passable_cells(grid):
        if cell in labels:
            continue
        labels[cell] = cell
        queue = deque([cell])
        while queue:
            x, y = queue.popleft()
            for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if (grid.in_bounds(nx, ny) and not grid.is_blocked(nx, ny)
                        and (nx, ny) not in labels):
                    labels[(nx, ny)] = cell
                    queue.append((nx, ny))
    return labels


def random_cell_pairs(grid, rng, count):
    """Distinct starts, distinct goals, each pair in one component."""
    labels = cell_components(grid)
    cells = sorted(labels)
    starts = rng.sample(cells, count)
    pairs = []
    taken = set()
    for start in starts:
        options = [c for c in cells
                   if c not in taken and labels[c] == labels[start]]
        goal = rng.choice(options)
        taken.add(goal)
        pairs.append((start, goal))
    return pairs


def random_instance(grid, roadmap, rng, agents):
    return instance_from_cells(roadmap, random_cell_pairs(grid, rng, agents))
