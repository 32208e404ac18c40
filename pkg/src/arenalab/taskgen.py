"""Procedural arena content: mazes, the wall curriculum, a sample battery.

Every generator is a pure function of its seed: documents come out fully
pinned (no RNG left to the spawner) except the wall curriculum, which keeps
the -1 sentinels of the reference listings. solvability_check is the shared
oracle: it rasterizes the built world onto a 0.5-unit heightmap and runs a
climb-limited flood fill from the agent to any positive food.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .configfile import save_config
from .model import (ARENA_SIZE, ArenaConfigDoc, ArenaSpec, ItemSpec, Rgb,
                    Vec3, validate_config)
from .physics import arch_thickness, world_half_extents
from .seeding import derive_seed, rng_for
from .spawn import SpawnError, build_world

MAZE_KINDS = ("2x2", "3x3", "scrambled", "circular")

BATTERY_CATEGORIES = (
    "basic-food", "preferences", "obstacles", "avoidance",
    "spatial-reasoning", "robustness", "internal-models",
    "object-permanence", "numerosity", "causal-reasoning",
)

_WALL_H = 5.0
_SCRAMBLE_LIMIT = 50


class GenerationError(RuntimeError):
    """Raised when rejection sampling cannot produce a solvable layout."""


# ---------------------------------------------------------------------------
# Small builders.

def _item(name: str, positions=(), rotations=(), sizes=(), colors=()) -> ItemSpec:
    return ItemSpec(name=name, positions=tuple(positions),
                    rotations=tuple(rotations), sizes=tuple(sizes),
                    colors=tuple(colors))


def _doc(items, t: int, blackouts=()) -> ArenaConfigDoc:
    spec = ArenaSpec(t=t, blackouts=tuple(blackouts), items=tuple(items))
    return ArenaConfigDoc(arenas={0: spec})


def _goal(name: str, x: float, z: float, d: float = 2.0) -> ItemSpec:
    return _item(name, positions=[Vec3(x, 0, z)], rotations=[0],
                 sizes=[Vec3(d, d, d)])


def _agent(x: float, z: float, rot: float = 0.0) -> ItemSpec:
    return _item("Agent", positions=[Vec3(x, 0, z)], rotations=[rot])


def _zone(name: str, x: float, z: float, sx: float, sz: float) -> ItemSpec:
    return _item(name, positions=[Vec3(x, 0, z)], rotations=[0],
                 sizes=[Vec3(sx, 0, sz)])


class _Walls:
    """Accumulates pinned wall pieces into one ItemSpec."""

    def __init__(self, name: str = "Wall", height: float = _WALL_H,
                 color: Rgb | None = None):
        self.name = name
        self.height = height
        self.color = color
        self.positions: list[Vec3] = []
        self.rotations: list[float] = []
        self.sizes: list[Vec3] = []

    def add(self, x: float, z: float, sx: float, sz: float,
            rot: float = 0.0, h: float | None = None) -> None:
        self.positions.append(Vec3(x, 0, z))
        self.rotations.append(rot)
        self.sizes.append(Vec3(sx, self.height if h is None else h, sz))

    @property
    def count(self) -> int:
        return len(self.positions)

    def item(self) -> ItemSpec:
        colors = [self.color] * self.count if self.color is not None else ()
        return _item(self.name, positions=self.positions,
                     rotations=self.rotations, sizes=self.sizes, colors=colors)


# ---------------------------------------------------------------------------
# Grid maze: n x n cells, 1-thick walls with posts, spanning-tree openings.

def _spanning_tree(n: int, rng) -> set[frozenset[tuple[int, int]]]:
    """Randomized depth-first spanning tree over the n x n cell grid."""
    start = (rng.randrange(n), rng.randrange(n))
    seen = {start}
    stack = [start]
    edges: set[frozenset[tuple[int, int]]] = set()
    while stack:
        i, j = stack[-1]
        options = [(i + di, j + dj) for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))
                   if 0 <= i + di < n and 0 <= j + dj < n
                   and (i + di, j + dj) not in seen]
        if not options:
            stack.pop()
            continue
        nxt = rng.choice(options)
        seen.add(nxt)
        edges.add(frozenset(((i, j), nxt)))
        stack.append(nxt)
    return edges


def _boundary_spans(lo: float, hi: float) -> tuple[float, float]:
    """Trim a boundary run to leave room for the 1 x 1 posts at lattice corners."""
    a = lo + 0.5 if lo > 0 else lo
    b = hi - 0.5 if hi < ARENA_SIZE else hi
    return a, b


def gen_grid_maze(n: int, seed: int) -> ArenaConfigDoc:
    """An n x n cell maze carved by a random spanning tree; fully pinned."""
    if not 2 <= n <= 8:
        raise ValueError(f"grid maze size must be in [2, 8], got {n}")
    rng = rng_for("grid-maze", n, seed)
    cell = ARENA_SIZE / n
    opening = max(2.0, cell / 2.0)
    carved = _spanning_tree(n, rng)
    walls = _Walls()

    for i in range(1, n):
        for j in range(1, n):
            walls.add(i * cell, j * cell, 1.0, 1.0)  # lattice post

    def emit(vertical: bool, line: float, lo: float, hi: float, open_at: float | None):
        spans = [(lo, hi)] if open_at is None else [(lo, open_at),
                                                    (open_at + opening, hi)]
        for a, b in spans:
            if b - a <= 1e-9:
                continue
            mid, length = (a + b) / 2.0, b - a
            if vertical:
                walls.add(line, mid, 1.0, length)
            else:
                walls.add(mid, line, length, 1.0)

    for i in range(n - 1):          # boundaries between (i, j) and (i+1, j)
        for j in range(n):
            lo, hi = _boundary_spans(j * cell, (j + 1) * cell)
            open_at = None
            if frozenset(((i, j), (i + 1, j))) in carved:
                open_at = rng.uniform(lo + 0.5, hi - opening - 0.5)
            emit(True, (i + 1) * cell, lo, hi, open_at)
    for j in range(n - 1):          # boundaries between (i, j) and (i, j+1)
        for i in range(n):
            lo, hi = _boundary_spans(i * cell, (i + 1) * cell)
            open_at = None
            if frozenset(((i, j), (i, j + 1))) in carved:
                open_at = rng.uniform(lo + 0.5, hi - opening - 0.5)
            emit(False, (j + 1) * cell, lo, hi, open_at)

    goal_cell, agent_cell = rng.sample([(i, j) for i in range(n)
                                        for j in range(n)], 2)
    center = lambda c: ((c[0] + 0.5) * cell, (c[1] + 0.5) * cell)
    gx, gz = center(goal_cell)
    ax, az = center(agent_cell)
    items = [walls.item(), _goal("GoodGoal", gx, gz, d=2.0),
             _agent(ax, az, rot=round(rng.uniform(0, 360), 3))]
    return _doc(items, t=500)


def grid_wall_count(n: int) -> int:
    """Wall instances a grid maze emits: posts + split and solid boundary runs."""
    boundaries = 2 * n * (n - 1)
    carved = n * n - 1
    return (n - 1) ** 2 + 2 * carved + (boundaries - carved)


# ---------------------------------------------------------------------------
# Scrambled maze: random walls, rejection-sampled against the oracle.

def gen_scrambled_maze(seed: int) -> ArenaConfigDoc:
    rng = rng_for("scrambled-maze", seed)
    for _ in range(_SCRAMBLE_LIMIT):
        walls = _Walls()
        for _ in range(rng.randint(12, 20)):
            length = round(rng.uniform(3.0, 12.0), 3)
            height = round(rng.uniform(2.0, 4.0), 3)
            yaw = round(rng.uniform(0.0, 360.0), 3)
            hx, hz = world_half_extents("box", (1.0, height, length), yaw)
            x = round(rng.uniform(hx, ARENA_SIZE - hx), 3)
            z = round(rng.uniform(hz, ARENA_SIZE - hz), 3)
            walls.add(x, z, 1.0, length, rot=yaw, h=height)
        gx = round(rng.uniform(2.0, 38.0), 3)
        gz = round(rng.uniform(2.0, 38.0), 3)
        while True:
            ax = round(rng.uniform(1.0, 39.0), 3)
            az = round(rng.uniform(1.0, 39.0), 3)
            if math.hypot(ax - gx, az - gz) >= 10.0:
                break
        doc = _doc([walls.item(), _goal("GoodGoal", gx, gz, d=2.0),
                    _agent(ax, az, rot=round(rng.uniform(0, 360), 3))], t=500)
        if solvability_check(doc, seed):
            return doc
    raise GenerationError(
        f"no solvable scrambled maze within {_SCRAMBLE_LIMIT} resamples")


# ---------------------------------------------------------------------------
# Circular maze: 3 rings of 24 tangential segments, one gap per ring.

_RING_RADII = (6.5, 11.5, 16.5)
_RING_SLOTS = 24


def gen_circular_maze(seed: int) -> ArenaConfigDoc:
    rng = rng_for("circular-maze", seed)
    walls = _Walls(height=3.0)
    mid = ARENA_SIZE / 2.0
    for radius in _RING_RADII:
        gap = rng.randrange(_RING_SLOTS)
        length = 2.0 * radius * math.tan(math.pi / _RING_SLOTS)
        for k in range(_RING_SLOTS):
            if k == gap:
                continue
            theta = math.radians((k + 0.5) * 360.0 / _RING_SLOTS)
            x = mid + radius * math.cos(theta)
            z = mid + radius * math.sin(theta)
            yaw = (-math.degrees(theta)) % 360.0
            walls.add(round(x, 6), round(z, 6), 0.5, round(length, 6),
                      rot=round(yaw, 6))
    alpha = rng.uniform(0.0, 2.0 * math.pi)
    ax = mid + 18.75 * math.cos(alpha)
    az = mid + 18.75 * math.sin(alpha)
    items = [walls.item(), _goal("GoodGoal", mid, mid, d=2.0),
             _agent(round(ax, 6), round(az, 6),
                    rot=round(rng.uniform(0, 360), 3))]
    return _doc(items, t=500)


def circular_gap_slots(seed: int) -> tuple[int, int, int]:
    """The gap slot drawn for each ring, mirroring gen_circular_maze."""
    rng = rng_for("circular-maze", seed)
    return tuple(rng.randrange(_RING_SLOTS) for _ in _RING_RADII)


def gen_maze(kind: str, seed: int) -> ArenaConfigDoc:
    if kind == "2x2":
        return gen_grid_maze(2, seed)
    if kind == "3x3":
        return gen_grid_maze(3, seed)
    if kind == "scrambled":
        return gen_scrambled_maze(seed)
    if kind == "circular":
        return gen_circular_maze(seed)
    raise ValueError(f"unknown maze kind {kind!r}; expected one of {MAZE_KINDS}")


# ---------------------------------------------------------------------------
# Wall curriculum: 13 levels anchored to the three reference layouts.

_Z_LINES_BY_LEVEL = ((10,), (10, 20), (10, 20, 30), (10, 15, 20, 30),
                     (10, 15, 20, 25, 30), (10, 15, 20, 25, 30, 35),
                     (5, 10, 15, 20, 25, 30, 35))
_ALL_LINES = (5, 10, 15, 20, 25, 30, 35)


@dataclass(frozen=True)
class CurriculumLevel:
    level: int
    walls: int
    doc: ArenaConfigDoc

    def __post_init__(self) -> None:
        if self.level < 1:
            raise ValueError("curriculum level index starts at 1")


def _curriculum_lines(level: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(z-line walls, x-line walls) for a level, both ascending."""
    if level <= 7:
        return _Z_LINES_BY_LEVEL[level - 1], ()
    if level <= 12:
        return _ALL_LINES, _ALL_LINES[:level - 7]
    return _ALL_LINES, _ALL_LINES


def gen_wall_curriculum(level: int, seed: int) -> ArenaConfigDoc:
    """Axis-aligned random-offset walls; density and horizon grow with level."""
    if not 1 <= level <= 13:
        raise ValueError(f"curriculum level must be in [1, 13], got {level}")
    z_lines, x_lines = _curriculum_lines(level)
    positions = [Vec3(-1, 0, z) for z in z_lines]
    positions += [Vec3(x, 0, -1) for x in x_lines]
    rotations = [90.0] * len(z_lines) + [0.0] * len(x_lines)
    sizes = [Vec3(1, 5, 9)] * len(positions)
    wall = _item("Wall", positions=positions, rotations=rotations, sizes=sizes)
    goal_free = _item("GoodGoal", sizes=[Vec3(2, 2, 2)])
    if level <= 7:
        t = 250 if level <= 2 else 400
        goal = _item("GoodGoal", positions=[Vec3(-1, 0, 35)],
                     sizes=[Vec3(2, 2, 2)])
        agent = _item("Agent", positions=[Vec3(-1, 1, 5)])
        return _doc([wall, goal, agent], t=t)
    return _doc([goal_free, wall], t=500)


def curriculum_levels(seed: int) -> list[CurriculumLevel]:
    out = []
    for level in range(1, 14):
        z_lines, x_lines = _curriculum_lines(level)
        out.append(CurriculumLevel(level, len(z_lines) + len(x_lines),
                                   gen_wall_curriculum(level, seed)))
    return out


# ---------------------------------------------------------------------------
# Solvability oracle: 0.5-unit heightmap plus climb-limited flood fill.

_CELL = 0.5
_GRID = int(ARENA_SIZE / _CELL)
_PAD = _CELL / 2.0
_CLIMB = 0.5
_AX, _AZ = np.meshgrid((np.arange(_GRID) + 0.5) * _CELL,
                       (np.arange(_GRID) + 0.5) * _CELL, indexing="ij")


def _local_grid(body) -> tuple[np.ndarray, np.ndarray]:
    r = math.radians(body.yaw)
    c, s = math.cos(r), math.sin(r)
    dx = _AX - body.position[0]
    dz = _AZ - body.position[2]
    return dx * c - dz * s, dx * s + dz * c


def _heightmap(world) -> np.ndarray:
    height = np.zeros((_GRID, _GRID), dtype=np.float64)
    for body in world.solids():
        if body.entry.kind != "immovable":
            continue
        lx, lz = _local_grid(body)
        hx, hy, hz = body.half
        top = body.position[1] + hy
        if body.entry.collider == "wedge":
            footprint = (np.abs(lx) <= hx + _PAD) & (np.abs(lz) <= hz + _PAD)
            ratio = np.clip((hz - lz) / (2.0 * hz), 0.0, 1.0)
            slope_top = body.bottom + body.size[1] * ratio
            height = np.where(footprint, np.maximum(height, slope_top), height)
        elif body.entry.collider == "arch":
            a = body.size[0] / 2.0
            th = arch_thickness(body.size)
            ai, bi = a - th, body.size[1] - th
            footprint = (np.abs(lx) <= a + _PAD) & (np.abs(lz) <= hz + _PAD)
            with np.errstate(invalid="ignore"):
                clearance = bi * np.sqrt(np.clip(1.0 - (lx / ai) ** 2, 0.0, 1.0))
            passage = (np.abs(lx) < ai) & (clearance >= 1.0) & (body.bottom <= _PAD)
            blocked = footprint & ~passage
            height = np.where(blocked, np.maximum(height, top), height)
        else:
            footprint = (np.abs(lx) <= hx + _PAD) & (np.abs(lz) <= hz + _PAD)
            height = np.where(footprint, np.maximum(height, top), height)
    return height


def _cell_of(x: float, z: float) -> tuple[int, int]:
    return (min(max(int(x / _CELL), 0), _GRID - 1),
            min(max(int(z / _CELL), 0), _GRID - 1))


def _flood(height: np.ndarray, start: tuple[int, int],
           start_height: float) -> np.ndarray:
    eff = height.copy()
    eff[start] = min(eff[start], start_height)
    reach = np.zeros_like(height, dtype=bool)
    reach[start] = True
    while True:
        grew = False
        for axis, shift in ((0, 1), (0, -1), (1, 1), (1, -1)):
            src = np.roll(reach, shift, axis=axis)
            hsrc = np.roll(eff, shift, axis=axis)
            if axis == 0:
                edge = (0 if shift == 1 else -1, slice(None))
            else:
                edge = (slice(None), 0 if shift == 1 else -1)
            src[edge] = False
            new = src & (eff <= hsrc + _CLIMB) & ~reach
            if new.any():
                reach |= new
                grew = True
        if not grew:
            return reach


def world_is_solvable(world) -> bool:
    """Flood-fill reachability from the agent to any positive food sphere."""
    height = _heightmap(world)
    agent = world.agent
    start = _cell_of(agent.position[0], agent.position[2])
    reach = _flood(height, start, agent.bottom)
    targets = np.zeros_like(reach)
    for goal in world.goals():
        if goal.entry.reward != "size":
            continue
        r = goal.radius + _PAD
        targets |= ((_AX - goal.position[0]) ** 2
                    + (_AZ - goal.position[2]) ** 2) <= r * r
    return bool((reach & targets).any())


def solvability_check(doc: ArenaConfigDoc, seed: int) -> bool:
    """True when every arena in the document can be built and walked."""
    for index, spec in sorted(doc.arenas.items()):
        try:
            world = build_world(spec, derive_seed("solvability", seed, index))
        except SpawnError:
            return False
        if not world_is_solvable(world):
            return False
    return True


# ---------------------------------------------------------------------------
# Sample battery: ten categories, three graded configs each.

@dataclass(frozen=True)
class BatteryEntry:
    category: str
    name: str
    threshold: float
    doc: ArenaConfigDoc

    def __post_init__(self) -> None:
        if self.category not in BATTERY_CATEGORIES:
            raise ValueError(f"unknown battery category {self.category!r}")


def _basic_food() -> list[tuple[float, list[ItemSpec], int, tuple]]:
    ahead = [_goal("GoodGoal", 20, 15), _agent(20, 5)]
    off_axis = [_goal("GoodGoal", 32, 28, d=1.0), _agent(10, 10, rot=45)]
    movers = [
        _item("GoodGoalMove", positions=[Vec3(10, 0, 30)], rotations=[180],
              sizes=[Vec3(2, 2, 2)]),
        _item("GoodGoalMove", positions=[Vec3(30, 0, 30)], rotations=[270],
              sizes=[Vec3(2, 2, 2)]),
        _goal("GoodGoalMulti", 20, 35, d=1.0),
        _agent(20, 10),
    ]
    return [(0.0, ahead, 250, ()), (0.0, off_axis, 250, ()),
            (0.0, movers, 400, ())]


def _preferences() -> list:
    pick_big = [_goal("GoodGoal", 12, 25, d=1.0), _goal("GoodGoal", 28, 25, d=4.0),
                _agent(20, 3)]
    far_big = [_goal("GoodGoal", 8, 30, d=2.0), _goal("GoodGoal", 32, 30, d=5.0),
               _agent(20, 5)]
    resist_near = [_goal("GoodGoal", 20, 14, d=1.0),
                   _goal("GoodGoal", 34, 34, d=3.0), _agent(20, 6)]
    return [(2.0, pick_big, 250, ()), (3.0, far_big, 250, ()),
            (1.5, resist_near, 250, ())]


def _obstacles() -> list:
    low_wall = _Walls(height=2.0)
    low_wall.add(20, 18, 12, 1)
    pocket = _Walls(height=3.0)
    pocket.add(30, 26, 9, 1)
    pocket.add(34, 30, 1, 7)  # flush between the end walls, west side open
    pocket.add(30, 34, 9, 1)
    tunnel_walls = _Walls(height=4.0)
    tunnel_walls.add(8.5, 20, 17, 1)
    tunnel_walls.add(31.5, 20, 17, 1)
    tunnel = _item("CylinderTunnel", positions=[Vec3(20, 0, 20)],
                   rotations=[0], sizes=[Vec3(6, 4, 6)])
    return [
        (0.0, [low_wall.item(), _goal("GoodGoal", 20, 30), _agent(20, 6)], 400, ()),
        (0.0, [pocket.item(), _goal("GoodGoal", 30, 30), _agent(20, 5)], 400, ()),
        (0.0, [tunnel_walls.item(), tunnel, _goal("GoodGoal", 20, 32),
               _agent(20, 5)], 400, ()),
    ]


def _avoidance() -> list:
    moat = [_zone("DeathZone", 20, 20, 24, 6), _goal("GoodGoal", 20, 33),
            _agent(20, 6)]
    decoy = [_goal("BadGoal", 20, 18, d=3.0), _goal("GoodGoal", 20, 31),
             _agent(20, 6)]
    # A full-width strip of floor hazards: hot segments abut the deadly ones
    # exactly (zones may touch but not overlap).
    hot = _item("HotZone",
                positions=[Vec3(4.5, 0, 20), Vec3(20, 0, 20), Vec3(35.5, 0, 20)],
                rotations=[0, 0, 0],
                sizes=[Vec3(9, 0, 8), Vec3(10, 0, 8), Vec3(9, 0, 8)])
    death = _item("DeathZone", positions=[Vec3(12, 0, 20), Vec3(28, 0, 20)],
                  rotations=[0, 0], sizes=[Vec3(6, 0, 8), Vec3(6, 0, 8)])
    field = [hot, death, _goal("GoodGoal", 20, 33), _agent(20, 6)]
    return [(0.0, moat, 400, ()), (0.0, decoy, 400, ()), (0.0, field, 400, ())]


def _spatial() -> list:
    s_bend = _Walls(height=3.0)
    s_bend.add(11, 15, 22, 1)
    s_bend.add(29, 25, 22, 1)
    platform = _Walls(height=2.0)
    platform.add(30, 30, 8, 8, h=2.0)
    ramp = _item("Ramp", positions=[Vec3(30, 0, 23.5)], rotations=[180],
                 sizes=[Vec3(4, 2, 5)])
    raised_goal = _item("GoodGoal", positions=[Vec3(30, 2, 30)], rotations=[0],
                        sizes=[Vec3(2, 2, 2)])
    offset_gaps = _Walls(height=3.0)
    offset_gaps.add(14, 12, 28, 1)
    offset_gaps.add(26, 26, 28, 1)
    return [
        (0.0, [s_bend.item(), _goal("GoodGoal", 35, 35), _agent(5, 5)], 400, ()),
        (0.0, [platform.item(), ramp, raised_goal, _agent(10, 10)], 400, ()),
        (0.0, [offset_gaps.item(), _goal("GoodGoal", 20, 35), _agent(20, 4)],
         400, ()),
    ]


def _robustness() -> list:
    garish = _Walls(height=3.0, color=Rgb(3, 250, 7))
    garish.add(14, 16, 16, 1)
    garish.add(26, 26, 16, 1)
    glass = _Walls(name="WallTransparent", height=3.0)
    glass.add(16, 22, 1, 20)
    glass.add(24, 22, 1, 20)
    clutter = [
        _item("Cardbox1", positions=[Vec3(12, 0, 18)], rotations=[30],
              sizes=[Vec3(2, 1.5, 2)]),
        _item("Cardbox2", positions=[Vec3(28, 0, 14)], rotations=[60],
              sizes=[Vec3(2, 1.5, 2)]),
        _item("Ramp", positions=[Vec3(8, 0, 30)], rotations=[90],
              sizes=[Vec3(3, 1, 4)]),
        _goal("BadGoal", 32, 32, d=1.0),
        _goal("GoodGoal", 20, 36),
        _agent(20, 6),
    ]
    return [
        (0.0, [garish.item(), _goal("GoodGoal", 20, 34), _agent(20, 6)], 400, ()),
        (0.0, [glass.item(), _goal("GoodGoal", 20, 36), _agent(20, 6)], 400, ()),
        (0.0, clutter, 400, ()),
    ]


def _internal_models() -> list:
    simple = [_goal("GoodGoal", 20, 30), _agent(20, 6)]
    walled = _Walls(height=2.0)
    walled.add(20, 18, 10, 1)
    mid = [walled.item(), _goal("GoodGoal", 20, 30), _agent(20, 6)]
    far = [_goal("GoodGoal", 28, 28), _agent(12, 12)]
    return [(0.0, simple, 200, (20,)), (0.0, mid, 400, (-15,)),
            (0.0, far, 300, (10, 30))]


def _object_permanence() -> list:
    blind = _Walls(height=3.0)
    blind.add(20, 24, 16, 1)
    pocket = _Walls(height=3.0)
    pocket.add(12, 26, 9, 1)
    pocket.add(7.5, 30, 1, 7)  # flush between the end walls, east side open
    pocket.add(12, 34, 9, 1)
    crossing_wall = _Walls(height=3.0)
    crossing_wall.add(20, 24, 12, 1)
    mover = _item("GoodGoalMove", positions=[Vec3(32, 0, 26)], rotations=[270],
                  sizes=[Vec3(2, 2, 2)])
    return [
        (0.0, [blind.item(), _goal("GoodGoal", 20, 30), _agent(20, 8)], 400, ()),
        (0.0, [pocket.item(), _goal("GoodGoal", 12, 30), _agent(28, 10)], 400, ()),
        (0.0, [crossing_wall.item(), mover, _agent(20, 10)], 400, ()),
    ]


def _numerosity() -> list:
    def pens(left: list[tuple[float, float, float]],
             right: list[tuple[float, float, float]]) -> list[ItemSpec]:
        divider = _Walls(height=3.0)
        divider.add(20, 33, 1, 14)
        items = [divider.item()]
        for x, z, d in left + right:
            items.append(_goal("GoodGoalMulti", x, z, d=d))
        items.append(_agent(20, 5))
        return items

    one_vs_three = pens([(10, 34, 2.0)],
                        [(27, 33, 2.0), (30, 36, 2.0), (33, 33, 2.0)])
    two_vs_five = pens([(8, 33, 1.5), (12, 36, 1.5)],
                       [(26, 32, 1.5), (29, 35, 1.5), (32, 32, 1.5),
                        (35, 35, 1.5), (28, 38, 1.5)])
    one_vs_four = pens([(10, 34, 2.0)],
                       [(26, 33, 2.0), (29, 36, 2.0), (32, 33, 2.0),
                        (35, 36, 2.0)])
    return [(2.5, one_vs_three, 100, ()), (3.0, two_vs_five, 100, ()),
            (3.0, one_vs_four, 100, ())]


def _causal() -> list:
    # Full-width barrier with a 2-wide doorway at x in [19, 21], plugged by a
    # pushable box that the oracle rightly ignores.
    door = _Walls(height=3.0)
    door.add(9.5, 24, 19, 1)
    door.add(30.5, 24, 19, 1)
    plug = _item("Cardbox1", positions=[Vec3(20, 0, 24)], rotations=[0],
                 sizes=[Vec3(1.9, 1.5, 1.9)])
    tunnel_walls = _Walls(height=4.0)
    tunnel_walls.add(8.5, 20, 17, 1)
    tunnel_walls.add(31.5, 20, 17, 1)
    tunnel = _item("CylinderTunnel", positions=[Vec3(20, 0, 20)],
                   rotations=[0], sizes=[Vec3(6, 4, 6)])
    mouth_box = _item("Cardbox1", positions=[Vec3(20, 0, 15.9)], rotations=[0],
                      sizes=[Vec3(2, 1.5, 2)])
    # Pen with a 3-wide west door (z in [28.5, 31.5]) blocked by a box.
    pen = _Walls(height=3.0)
    pen.add(30, 34, 9, 1)
    pen.add(34, 30, 1, 7)
    pen.add(30, 26, 9, 1)
    pen.add(25.5, 32.5, 1, 2)
    pen.add(25.5, 27.5, 1, 2)
    blocker = _item("Cardbox1", positions=[Vec3(24.4, 0, 30)], rotations=[0],
                    sizes=[Vec3(1.9, 1.5, 2.9)])
    return [
        (0.0, [door.item(), plug, _goal("GoodGoal", 20, 34), _agent(20, 8)],
         400, ()),
        (0.0, [tunnel_walls.item(), tunnel, mouth_box,
               _goal("GoodGoal", 20, 32), _agent(20, 5)], 400, ()),
        (0.0, [pen.item(), blocker, _goal("GoodGoal", 30, 30), _agent(15, 30)],
         400, ()),
    ]


_CATEGORY_BUILDERS = {
    "basic-food": _basic_food,
    "preferences": _preferences,
    "obstacles": _obstacles,
    "avoidance": _avoidance,
    "spatial-reasoning": _spatial,
    "robustness": _robustness,
    "internal-models": _internal_models,
    "object-permanence": _object_permanence,
    "numerosity": _numerosity,
    "causal-reasoning": _causal,
}


def gen_sample_battery(seed: int) -> list[BatteryEntry]:
    """Three graded configs per category; layouts are pinned, seed reserved
    for future jitter so callers can rely on the signature."""
    entries = []
    for category in BATTERY_CATEGORIES:
        for i, (threshold, items, t, blackouts) in enumerate(
                _CATEGORY_BUILDERS[category](), start=1):
            entries.append(BatteryEntry(
                category=category, name=f"{category}-{i}",
                threshold=threshold, doc=_doc(items, t=t, blackouts=blackouts)))
    return entries


def write_battery(entries: list[BatteryEntry], out_dir: str) -> str:
    """Save each entry's config and a manifest.json; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = []
    for entry in entries:
        filename = f"{entry.name}.yml"
        save_config(entry.doc, os.path.join(out_dir, filename))
        manifest.append({"category": entry.category, "config": filename,
                         "threshold": entry.threshold})
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


def check_generated(doc: ArenaConfigDoc) -> list:
    """Validation violations for a generated document (expected empty)."""
    return validate_config(doc)
