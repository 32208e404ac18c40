"""Domain model: config document types, the object catalog, and validation.

Everything downstream (parsing, spawning, physics, rendering) speaks in terms
of these types. The catalog is the single source of truth for what each item
name means: mass, legal size ranges, fixed colors, reward behaviour, and
collider shape.

Conventions:
  * Coordinates are x-right, y-up, z-forward; the floor is the 40x40 square
    [0, 40]^2 in (x, z).
  * -1 in a config field means "randomize" (per component).
  * Item position y is the object's BASE height; y = -1 rests it on the
    ground. Centers are derived later, at spawn time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

RANDOM = -1.0
ARENA_SIZE = 40.0
AGENT_NAME = "Agent"

# Observation constraints.
MIN_RESOLUTION = 4
MAX_RESOLUTION = 512


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def astuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Rgb:
    r: int = 0
    g: int = 0
    b: int = 0

    def astuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class ItemSpec:
    """One item entry in an arena: a name plus parallel per-instance lists."""

    name: str
    positions: tuple[Vec3, ...] = ()
    rotations: tuple[float, ...] = ()
    colors: tuple[Rgb, ...] = ()
    sizes: tuple[Vec3, ...] = ()
    # Unknown scalar keys seen by the parser; surfaced as warnings by
    # validate_config, ignored for structural equality and serialization.
    unknown_keys: tuple[str, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class ArenaSpec:
    """One arena: episode length t (0 = unlimited), blackout schedule, items."""

    t: int = 0
    blackouts: tuple[int, ...] = ()
    items: tuple[ItemSpec, ...] = ()
    unknown_keys: tuple[str, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class ArenaConfigDoc:
    """A full config document: arena index -> ArenaSpec."""

    arenas: dict[int, ArenaSpec] = field(default_factory=dict)


@dataclass(frozen=True)
class ObservationSpec:
    """Pixel resolution k (frames are k x k x 3 RGB, row-major, top row first)."""

    resolution: int = 84

    def __post_init__(self) -> None:
        k = self.resolution
        if not isinstance(k, int) or not MIN_RESOLUTION <= k <= MAX_RESOLUTION:
            raise ValueError(
                f"resolution must be an integer in [{MIN_RESOLUTION}, {MAX_RESOLUTION}], got {k!r}"
            )


# Reward rules: "none", "size" (+diameter), "size-negative" (-diameter),
# "minus-one" (-1 on contact), "hot-step" (min(-10/T, -1e-5) per step).
# Termination: "always", "never", "last-multi" (only when the last gold is
# taken and no plain GoodGoal remains).
@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # reward-sphere | zone | movable | immovable | agent
    mass: float
    size_min: Vec3
    size_max: Vec3
    color: Rgb | None  # fixed color; None = settable/randomizable
    reward: str
    terminates: str
    collider: str  # sphere | box | wedge | arch | ground-quad | compound-l | compound-u
    moving: bool = False

    @property
    def dynamic(self) -> bool:
        return self.mass > 0


def _sphere(name: str, color: Rgb, reward: str, terminates: str, moving: bool) -> CatalogEntry:
    return CatalogEntry(
        name=name, kind="reward-sphere", mass=1.0,
        size_min=Vec3(1, 1, 1), size_max=Vec3(5, 5, 5),
        color=color, reward=reward, terminates=terminates,
        collider="sphere", moving=moving,
    )


GOOD_COLOR = Rgb(0, 255, 0)
MULTI_COLOR = Rgb(255, 200, 0)
BAD_COLOR = Rgb(255, 0, 0)
DEATH_COLOR = Rgb(200, 0, 0)
HOT_COLOR = Rgb(255, 150, 0)
AGENT_COLOR = Rgb(0, 0, 255)
CARDBOX_COLOR = Rgb(170, 125, 80)
TRANSPARENT_TINT = Rgb(190, 210, 225)

CATALOG: dict[str, CatalogEntry] = {}
for _e in [
    _sphere("GoodGoal", GOOD_COLOR, "size", "always", False),
    _sphere("GoodGoalMulti", MULTI_COLOR, "size", "last-multi", False),
    _sphere("BadGoal", BAD_COLOR, "size-negative", "always", False),
    _sphere("GoodGoalMove", GOOD_COLOR, "size", "always", True),
    _sphere("GoodGoalMultiMove", MULTI_COLOR, "size", "last-multi", True),
    _sphere("BadGoalMove", BAD_COLOR, "size-negative", "always", True),
    CatalogEntry(
        name="DeathZone", kind="zone", mass=0.0,
        size_min=Vec3(1, 0, 1), size_max=Vec3(40, 0, 40),
        color=DEATH_COLOR, reward="minus-one", terminates="always",
        collider="ground-quad",
    ),
    CatalogEntry(
        name="HotZone", kind="zone", mass=0.0,
        size_min=Vec3(1, 0, 1), size_max=Vec3(40, 0, 40),
        color=HOT_COLOR, reward="hot-step", terminates="never",
        collider="ground-quad",
    ),
    CatalogEntry(
        name="Cardbox1", kind="movable", mass=1.0,
        size_min=Vec3(0.5, 0.5, 0.5), size_max=Vec3(10, 10, 10),
        color=CARDBOX_COLOR, reward="none", terminates="never", collider="box",
    ),
    CatalogEntry(
        name="Cardbox2", kind="movable", mass=2.0,
        size_min=Vec3(0.5, 0.5, 0.5), size_max=Vec3(10, 10, 10),
        color=CARDBOX_COLOR, reward="none", terminates="never", collider="box",
    ),
    CatalogEntry(
        name="LObject", kind="movable", mass=3.0,
        size_min=Vec3(1, 0.3, 3), size_max=Vec3(5, 2, 20),
        color=None, reward="none", terminates="never", collider="compound-l",
    ),
    CatalogEntry(
        name="LObject2", kind="movable", mass=3.0,
        size_min=Vec3(1, 0.3, 3), size_max=Vec3(5, 2, 20),
        color=None, reward="none", terminates="never", collider="compound-l",
    ),
    CatalogEntry(
        name="UObject", kind="movable", mass=3.0,
        size_min=Vec3(1, 0.3, 3), size_max=Vec3(5, 2, 20),
        color=None, reward="none", terminates="never", collider="compound-u",
    ),
    CatalogEntry(
        name="Wall", kind="immovable", mass=0.0,
        size_min=Vec3(0.1, 0.1, 0.1), size_max=Vec3(40, 10, 40),
        color=None, reward="none", terminates="never", collider="box",
    ),
    CatalogEntry(
        name="WallTransparent", kind="immovable", mass=0.0,
        size_min=Vec3(0.1, 0.1, 0.1), size_max=Vec3(40, 10, 40),
        color=TRANSPARENT_TINT, reward="none", terminates="never", collider="box",
    ),
    CatalogEntry(
        name="CylinderTunnel", kind="immovable", mass=0.0,
        size_min=Vec3(2.5, 2.5, 2.5), size_max=Vec3(10, 10, 10),
        color=None, reward="none", terminates="never", collider="arch",
    ),
    CatalogEntry(
        name="CylinderTunnelTransparent", kind="immovable", mass=0.0,
        size_min=Vec3(2.5, 2.5, 2.5), size_max=Vec3(10, 10, 10),
        color=TRANSPARENT_TINT, reward="none", terminates="never", collider="arch",
    ),
    CatalogEntry(
        name="Ramp", kind="immovable", mass=0.0,
        size_min=Vec3(0.5, 0.1, 0.5), size_max=Vec3(40, 10, 40),
        color=None, reward="none", terminates="never", collider="wedge",
    ),
    CatalogEntry(
        name=AGENT_NAME, kind="agent", mass=1.0,
        size_min=Vec3(1, 1, 1), size_max=Vec3(1, 1, 1),
        color=AGENT_COLOR, reward="none", terminates="never", collider="sphere",
    ),
]:
    CATALOG[_e.name] = _e
del _e

TRANSPARENT_NAMES = frozenset({"WallTransparent", "CylinderTunnelTransparent"})


def catalog_lookup(name: str) -> CatalogEntry:
    """Return the catalog entry for an item name, raising KeyError if unknown."""
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown item name {name!r}") from None


def catalog_as_dict() -> dict:
    """JSON-ready snapshot of the catalog (used by the CLI export and the UI)."""
    out = {}
    for name, e in sorted(CATALOG.items()):
        out[name] = {
            "kind": e.kind,
            "mass": e.mass,
            "size_min": {"x": e.size_min.x, "y": e.size_min.y, "z": e.size_min.z},
            "size_max": {"x": e.size_max.x, "y": e.size_max.y, "z": e.size_max.z},
            "color": None if e.color is None else
                     {"r": e.color.r, "g": e.color.g, "b": e.color.b},
            "reward": e.reward,
            "terminates": e.terminates,
            "collider": e.collider,
            "moving": e.moving,
        }
    return out


def export_catalog(path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(catalog_as_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


@dataclass(frozen=True)
class Violation:
    """One validation finding. severity is "error" or "warning"."""

    arena: int | None
    item: int | None
    field: str
    reason: str
    severity: str = "error"

    def __str__(self) -> str:
        where = []
        if self.arena is not None:
            where.append(f"arena {self.arena}")
        if self.item is not None:
            where.append(f"item {self.item}")
        loc = ", ".join(where) or "document"
        return f"[{self.severity}] {loc}, {self.field}: {self.reason}"


def instance_count(item: ItemSpec) -> int:
    """Number of instances an item materializes: the longest field list, min 1."""
    return max(1, len(item.positions), len(item.rotations), len(item.colors), len(item.sizes))


def _check_size(v: Violation | None, out: list[Violation], arena: int, idx: int,
                entry: CatalogEntry, size: Vec3) -> None:
    lo, hi = entry.size_min, entry.size_max
    for axis, val, a, b in (
        ("x", size.x, lo.x, hi.x),
        ("y", size.y, lo.y, hi.y),
        ("z", size.z, lo.z, hi.z),
    ):
        if val == RANDOM:
            continue
        if not a <= val <= b:
            out.append(Violation(arena, idx, f"sizes.{axis}",
                                 f"{val} outside [{a}, {b}] for {entry.name}"))
    if entry.collider == "sphere":
        explicit = [v for v in (size.x, size.y, size.z) if v != RANDOM]
        if len(set(explicit)) > 1:
            out.append(Violation(arena, idx, "sizes",
                                 f"{entry.name} is a uniform sphere; unequal axes, x wins",
                                 severity="warning"))


def _check_blackouts(arena: int, blackouts: tuple[int, ...], out: list[Violation]) -> None:
    if not blackouts:
        return
    if len(blackouts) == 1 and blackouts[0] < 0:
        return
    if all(b > 0 for b in blackouts) and all(
        blackouts[i] < blackouts[i + 1] for i in range(len(blackouts) - 1)
    ):
        return
    out.append(Violation(arena, None, "blackouts",
                         "must be strictly increasing positive steps, or a single "
                         f"negative period, got {list(blackouts)}"))


def validate_config(doc: ArenaConfigDoc) -> list[Violation]:
    """Check a document against the catalog. Empty list = fully valid.

    Errors: unknown item names, out-of-range non-sentinel sizes, rotations
    outside [0, 360] (other than -1), color channels outside [0, 255] (other
    than -1), malformed blackouts, negative t, more than one agent instance.
    Warnings: unknown scalar keys, colors on fixed-color items, unequal sphere
    axes, positions outside the floor square.
    """
    out: list[Violation] = []
    for arena_idx, arena in doc.arenas.items():
        if arena.t < 0:
            out.append(Violation(arena_idx, None, "t", f"must be >= 0, got {arena.t}"))
        _check_blackouts(arena_idx, arena.blackouts, out)
        for key in arena.unknown_keys:
            out.append(Violation(arena_idx, None, key, "unknown key ignored",
                                 severity="warning"))
        agent_instances = 0
        for idx, item in enumerate(arena.items):
            entry = CATALOG.get(item.name)
            if entry is None:
                out.append(Violation(arena_idx, idx, "name", f"unknown item {item.name!r}"))
                continue
            if entry.kind == "agent":
                agent_instances += instance_count(item)
            for key in item.unknown_keys:
                out.append(Violation(arena_idx, idx, key, "unknown key ignored",
                                     severity="warning"))
            for size in item.sizes:
                _check_size(None, out, arena_idx, idx, entry, size)
            for rot in item.rotations:
                if rot != RANDOM and not 0 <= rot <= 360:
                    out.append(Violation(arena_idx, idx, "rotations",
                                         f"{rot} outside [0, 360] and not -1"))
            for color in item.colors:
                for ch, val in (("r", color.r), ("g", color.g), ("b", color.b)):
                    if val != RANDOM and not 0 <= val <= 255:
                        out.append(Violation(arena_idx, idx, f"colors.{ch}",
                                             f"{val} outside [0, 255] and not -1"))
            if item.colors and entry.color is not None:
                out.append(Violation(arena_idx, idx, "colors",
                                     f"{entry.name} has a fixed color; entry ignored",
                                     severity="warning"))
            for pos in item.positions:
                for axis, val in (("x", pos.x), ("z", pos.z)):
                    if val != RANDOM and not 0 <= val <= ARENA_SIZE:
                        out.append(Violation(arena_idx, idx, f"positions.{axis}",
                                             f"{val} outside [0, {ARENA_SIZE:g}]",
                                             severity="warning"))
                if pos.y != RANDOM and pos.y < 0:
                    out.append(Violation(arena_idx, idx, "positions.y",
                                         f"{pos.y} below ground", severity="warning"))
        if agent_instances > 1:
            out.append(Violation(arena_idx, None, "items",
                                 f"{agent_instances} agent instances; exactly one allowed"))
    return out
