"""Turns a parsed arena description into a live physics world.

Placement is seeded and order-exact: items in document order, instances in
list order, and for each instance the draws happen position (as unit values),
rotation, size, then color. Unit position values are mapped onto the floor
inset by the instance's world-aligned half extents only after rotation and
size are known, so every randomly placed object lands fully inside the arena.

An instance whose position, rotation and size are all explicit gets exactly
one placement attempt; anything with a randomized field is redrawn up to
RETRY_LIMIT times before being skipped. A y of -1 rests the object on the
floor and is deterministic, not a redraw trigger.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import (ARENA_SIZE, AGENT_NAME, RANDOM, ArenaSpec, CatalogEntry,
                    CATALOG, ItemSpec, Rgb, Vec3, instance_count)
from .physics import (Body, PhysicsParams, World, heading, overlap_test,
                      world_half_extents)
from .seeding import rng_for

RETRY_LIMIT = 20


class SpawnError(RuntimeError):
    """Raised when the agent cannot be placed."""

    def __init__(self, message: str, reason: str = "agent-placement-failure"):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class SkippedItem:
    item: str
    item_index: int
    instance_index: int
    reason: str


@dataclass
class SpawnReport:
    placed: int = 0
    skipped: list[SkippedItem] = field(default_factory=list)
    max_attempts: int = 1  # worst attempt count over all placed instances

    @property
    def complete(self) -> bool:
        return not self.skipped


@dataclass(frozen=True)
class _Fields:
    """Per-instance slice of the item lists (None = absent = randomize)."""

    position: Vec3 | None
    rotation: float | None
    size: Vec3 | None
    color: Rgb | None


def _instance_fields(item: ItemSpec, k: int) -> _Fields:
    def pick(seq):
        return seq[k] if k < len(seq) else None

    return _Fields(position=pick(item.positions), rotation=pick(item.rotations),
                   size=pick(item.sizes), color=pick(item.colors))


def _is_fixed_pose(entry: CatalogEntry, f: _Fields) -> bool:
    if f.position is None or f.position.x == RANDOM or f.position.z == RANDOM:
        return False
    if f.rotation is None or f.rotation == RANDOM:
        return False
    for axis in range(3):
        lo = entry.size_min.astuple()[axis]
        hi = entry.size_max.astuple()[axis]
        if lo == hi:
            continue  # fixed by the catalog, never drawn
        given = None if f.size is None else f.size.astuple()[axis]
        if given is None or given == RANDOM:
            if entry.collider == "sphere" and axis > 0:
                # Spheres take one diameter from the x slot.
                continue
            return False
    return True


def _resolve_size(entry: CatalogEntry, f: _Fields, rng: random.Random,
                  ) -> tuple[float, float, float]:
    lo = entry.size_min.astuple()
    hi = entry.size_max.astuple()
    given = None if f.size is None else f.size.astuple()
    if entry.collider == "sphere":
        gx = None if given is None else given[0]
        if gx is None or gx == RANDOM:
            d = rng.uniform(lo[0], hi[0])
        else:
            d = gx
        return (d, d, d)
    out = []
    for axis in range(3):
        if lo[axis] == hi[axis]:
            out.append(lo[axis])
            continue
        g = None if given is None else given[axis]
        if g is None or g == RANDOM:
            out.append(rng.uniform(lo[axis], hi[axis]))
        else:
            out.append(g)
    return tuple(out)


def _resolve_color(entry: CatalogEntry, f: _Fields, rng: random.Random,
                   ) -> tuple[int, int, int]:
    if entry.color is not None:
        return entry.color.astuple()
    given = None if f.color is None else f.color.astuple()
    out = []
    for axis in range(3):
        g = None if given is None else given[axis]
        if g is None or g == RANDOM:
            out.append(rng.randrange(256))
        else:
            out.append(int(g))
    return tuple(out)


def _inset_coord(unit: float, half: float) -> float:
    lo, hi = half, ARENA_SIZE - half
    if lo >= hi:
        return ARENA_SIZE / 2.0
    return lo + unit * (hi - lo)


def _draw_instance(entry: CatalogEntry, f: _Fields, rng: random.Random,
                   uid: int, name: str) -> Body:
    px = None if f.position is None else f.position.x
    py = None if f.position is None else f.position.y
    pz = None if f.position is None else f.position.z
    ux = rng.random() if px is None or px == RANDOM else None
    uz = rng.random() if pz is None or pz == RANDOM else None
    if f.rotation is None or f.rotation == RANDOM:
        yaw = rng.uniform(0.0, 360.0)
    else:
        yaw = float(f.rotation) % 360.0
    size = _resolve_size(entry, f, rng)
    color = _resolve_color(entry, f, rng)

    hwx, hwz = world_half_extents(entry.collider, size, yaw)
    x = _inset_coord(ux, hwx) if ux is not None else float(px)
    z = _inset_coord(uz, hwz) if uz is not None else float(pz)
    half_h = size[1] / 2.0
    if entry.kind == "zone":
        y = 0.0
    elif py is None or py == RANDOM:
        y = half_h  # rest on the floor
    else:
        y = float(py) + half_h  # configured y is the base height

    body = Body(uid=uid, name=name, entry=entry, position=[x, y, z], yaw=yaw,
                size=size, color=color, mass=entry.mass)
    if entry.moving:
        hx, hz = heading(yaw)
        speed = PhysicsParams().goal_speed
        body.velocity = [hx * speed, 0.0, hz * speed]
    return body


def _conflicts(candidate: Body, placed: list[Body]) -> bool:
    return any(overlap_test(candidate, other) for other in placed)


def build_world(spec: ArenaSpec, seed: int | random.Random,
                params: PhysicsParams | None = None) -> World:
    """Place every configured item, then the agent if it was not listed.

    Returns a World with a SpawnReport attached as .report. Raises SpawnError
    if the agent cannot be placed after RETRY_LIMIT attempts.
    """
    rng = seed if isinstance(seed, random.Random) else rng_for("spawn", seed)
    params = params or PhysicsParams()
    placed: list[Body] = []
    report = SpawnReport()
    agent_body: Body | None = None
    uid = 0

    for item_index, item in enumerate(spec.items):
        entry = CATALOG[item.name]
        for k in range(instance_count(item)):
            f = _instance_fields(item, k)
            if entry.kind == "agent" and agent_body is not None:
                report.skipped.append(SkippedItem(item.name, item_index, k,
                                                  "duplicate-agent"))
                continue
            attempts = 1 if _is_fixed_pose(entry, f) else RETRY_LIMIT
            body = None
            used = 0
            for _ in range(attempts):
                used += 1
                candidate = _draw_instance(entry, f, rng, uid, item.name)
                if not _conflicts(candidate, placed):
                    body = candidate
                    break
            if body is None:
                if entry.kind == "agent":
                    raise SpawnError(
                        f"agent could not be placed after {attempts} attempt(s)")
                report.skipped.append(SkippedItem(item.name, item_index, k,
                                                  "overlap"))
                continue
            placed.append(body)
            report.placed += 1
            report.max_attempts = max(report.max_attempts, used)
            if entry.kind == "agent":
                agent_body = body
            uid += 1

    if agent_body is None:
        entry = CATALOG[AGENT_NAME]
        f = _Fields(None, None, None, None)
        for attempt in range(RETRY_LIMIT):
            candidate = _draw_instance(entry, f, rng, uid, AGENT_NAME)
            if not _conflicts(candidate, placed):
                agent_body = candidate
                break
        if agent_body is None:
            raise SpawnError(
                f"agent could not be placed after {RETRY_LIMIT} attempts")
        placed.append(agent_body)
        report.placed += 1
        report.max_attempts = max(report.max_attempts, attempt + 1)

    world = World(bodies=placed, agent=agent_body, t_limit=spec.t,
                  blackouts=spec.blackouts, rng=rng, params=params)
    world.report = report
    return world
