"""Task rewards over generic displacement outcomes.

The mission-level goal is decoupled from the model: the model predicts a
relative displacement for each behavior, and a per-step reward scores that
displacement by how close it brings the robot to a waypoint. The waypoint
comes from an A* path over a coarse occupancy grid, recomputed every step
from the current pose.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np


class UnreachableGoalError(RuntimeError):
    """No grid path exists from the current pose to the goal."""


@dataclass(frozen=True)
class RewardFunction:
    """Scalar score over predicted outcomes, with a human-readable label."""

    eval: Callable[[np.ndarray], float]
    description: str

    def __call__(self, outcome) -> float:
        return self.eval(outcome)


def displacement_aggregator(pose_before, pose_after) -> np.ndarray:
    """Generic outcome of one executed behavior: the relative displacement."""
    return np.asarray(pose_after, dtype=float) - np.asarray(pose_before, dtype=float)


@dataclass(frozen=True)
class PlannerGrid:
    """Axis-aligned occupancy grid for waypoint planning.

    origin is the lower-left corner of cell (0, 0). Poses outside the grid
    clamp to the nearest boundary cell so planning stays total.
    """

    cell_size: float
    origin: tuple[float, float]
    shape: tuple[int, int]
    blocked: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.shape[0] < 1 or self.shape[1] < 1:
            raise ValueError(f"grid shape must be positive, got {self.shape}")

    @classmethod
    def for_mission(
        cls,
        start,
        goal,
        cell_size: float = 0.1,
        margin: float = 1.0,
        blocked: Iterable[tuple[int, int]] = (),
    ) -> "PlannerGrid":
        """Grid covering start and goal plus a margin.

        The origin is snapped so cell centers land on integer multiples of
        cell_size; a start or goal on such a multiple sits exactly on a
        center.
        """
        start = np.asarray(start, dtype=float)
        goal = np.asarray(goal, dtype=float)
        lo = np.minimum(start, goal) - margin
        hi = np.maximum(start, goal) + margin
        origin = (np.floor(lo / cell_size - 0.5) + 0.5) * cell_size
        shape = np.ceil((hi - origin) / cell_size).astype(int)
        return cls(
            cell_size=cell_size,
            origin=(float(origin[0]), float(origin[1])),
            shape=(int(shape[0]), int(shape[1])),
            blocked=frozenset((int(x), int(y)) for x, y in blocked),
        )

    def cell_of(self, point) -> tuple[int, int]:
        point = np.asarray(point, dtype=float)
        ix = math.floor((point[0] - self.origin[0]) / self.cell_size)
        iy = math.floor((point[1] - self.origin[1]) / self.cell_size)
        ix = min(max(ix, 0), self.shape[0] - 1)
        iy = min(max(iy, 0), self.shape[1] - 1)
        return ix, iy

    def center(self, cell: tuple[int, int]) -> np.ndarray:
        return np.array(
            [
                self.origin[0] + (cell[0] + 0.5) * self.cell_size,
                self.origin[1] + (cell[1] + 0.5) * self.cell_size,
            ]
        )

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        return 0 <= cell[0] < self.shape[0] and 0 <= cell[1] < self.shape[1]


_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def astar(
    grid: PlannerGrid, start: tuple[int, int], goal: tuple[int, int]
) -> Optional[list[tuple[int, int]]]:
    """4-connected shortest path from start to goal, or None if unreachable.

    Unit step costs with a Manhattan heuristic. Among equally short paths the
    search prefers cells near the straight start-goal segment, so free-space
    paths form a balanced staircase instead of an arbitrary L.
    """
    if not grid.in_bounds(start) or not grid.in_bounds(goal):
        return None
    if start == goal:
        return [start]
    if goal in grid.blocked:
        return None

    sx, sy = start
    gx, gy = goal

    def line_bias(cell):
        # cross product of (cell - goal) with (start - goal); zero on the line
        return abs((cell[0] - gx) * (sy - gy) - (sx - gx) * (cell[1] - gy))

    best_g = {start: 0}
    parent = {}
    counter = 0
    frontier = [(abs(sx - gx) + abs(sy - gy), line_bias(start), counter, start)]
    closed = set()
    while frontier:
        _, _, _, cell = heapq.heappop(frontier)
        if cell == goal:
            path = [cell]
            while cell in parent:
                cell = parent[cell]
                path.append(cell)
            path.reverse()
            return path
        if cell in closed:
            continue
        closed.add(cell)
        g = best_g[cell] + 1
        for dx, dy in _NEIGHBORS:
            nxt = (cell[0] + dx, cell[1] + dy)
            if not grid.in_bounds(nxt) or nxt in grid.blocked or nxt in closed:
                continue
            if g < best_g.get(nxt, math.inf):
                best_g[nxt] = g
                parent[nxt] = cell
                counter += 1
                f = g + abs(nxt[0] - gx) + abs(nxt[1] - gy)
                heapq.heappush(frontier, (f, line_bias(nxt), counter, nxt))
    return None


def _waypoint_cell(
    grid: PlannerGrid,
    path: list[tuple[int, int]],
    current_pose,
    lookahead_cells: int,
) -> tuple[int, int]:
    pose_cell = grid.cell_of(current_pose)
    try:
        at = path.index(pose_cell)
    except ValueError:
        at = 0
    return path[min(at + lookahead_cells, len(path) - 1)]


def select_waypoint(
    grid: PlannerGrid,
    path: list[tuple[int, int]],
    current_pose,
    lookahead_cells: int = 2,
) -> np.ndarray:
    """Center of the path cell `lookahead_cells` ahead of the pose's cell,
    clamped to the final cell."""
    if not path:
        raise ValueError("path must contain at least one cell")
    if lookahead_cells < 1:
        raise ValueError("lookahead_cells must be at least 1")
    return grid.center(_waypoint_cell(grid, path, current_pose, lookahead_cells))


def make_distance_reward(waypoint, current_pose) -> RewardFunction:
    """Reward a candidate displacement g by -|| (pose + g) - waypoint ||."""
    waypoint = np.asarray(waypoint, dtype=float)
    pose = np.asarray(current_pose, dtype=float)

    def score(outcome) -> float:
        landing = pose + np.asarray(outcome, dtype=float)
        return -float(np.linalg.norm(landing - waypoint))

    return RewardFunction(
        eval=score,
        description=f"negative distance to waypoint ({waypoint[0]:.3f}, {waypoint[1]:.3f})",
    )


def build_waypoint_reward(
    grid: PlannerGrid,
    pose,
    goal,
    lookahead_cells: int = 2,
) -> RewardFunction:
    """Per-step reward refresh: plan pose -> goal, chase the lookahead waypoint.

    When the waypoint lands on the goal cell the exact goal point is used
    instead of the cell center, so the final approach aims at the true goal.
    """
    if lookahead_cells < 1:
        raise ValueError("lookahead_cells must be at least 1")
    goal = np.asarray(goal, dtype=float)
    start_cell = grid.cell_of(pose)
    goal_cell = grid.cell_of(goal)
    path = astar(grid, start_cell, goal_cell)
    if path is None:
        raise UnreachableGoalError(f"no grid path from cell {start_cell} to cell {goal_cell}")
    cell = _waypoint_cell(grid, path, pose, lookahead_cells)
    waypoint = goal if cell == goal_cell else grid.center(cell)
    return make_distance_reward(waypoint, pose)
