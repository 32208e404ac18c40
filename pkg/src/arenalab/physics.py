"""Rigid-body core: bodies, contacts, stepping, overlap tests, raycasts.

Fixed-step semi-implicit integration at dt = 0.02 s with 3 sub-steps per
agent action. Contacts are resolved with sequential impulses (restitution
suppressed below an approach-speed threshold so pushing is inelastic) and a
positional pass that projects penetration below the tolerance.

Everything is float64 Python math on the simulation path; the vectorized ray
kernels used by the renderer (and by raycast() through a batch of one) are
numpy. One writer at a time per World; nothing here spawns threads.

The speed cap is the no-tunneling guarantee: cap * dt must stay below the
thinnest wall half-thickness (0.05) plus the smallest sphere radius (0.5),
so a sphere center can never cross a wall mid-plane in a single sub-step.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, asdict

import numpy as np

from .model import ARENA_SIZE, CatalogEntry, CATALOG, Rgb

_EPS = 1e-9
_WOOD = (145, 105, 70)


@dataclass(frozen=True)
class PhysicsParams:
    """Tunable constants. drag is per-mass (-drag * v on the horizontal axes)."""

    gravity: float = 9.81
    dt: float = 0.02
    substeps: int = 3
    drive_force: float = 30.0
    drag: float = 2.5
    friction: float = 0.4
    restitution: float = 0.1
    restitution_min_speed: float = 1.0
    goal_speed: float = 3.0
    max_speed: float = 15.0
    penetration_tol: float = 1e-3

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.substeps < 1:
            raise ValueError("dt must be positive and substeps >= 1")
        if self.max_speed * self.dt >= 0.55:
            raise ValueError(
                "max_speed * dt must stay below 0.55 (wall half-thickness + "
                "smallest sphere radius) or thin walls can be tunneled")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicsParams":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(data) - known
        if bad:
            raise ValueError(f"unknown physics parameter(s): {', '.join(sorted(bad))}")
        return cls(**data)


@dataclass
class Body:
    """One rigid body. position is the CENTER; yaw in degrees about +y."""

    uid: int
    name: str
    entry: CatalogEntry
    position: list[float]
    yaw: float
    size: tuple[float, float, float]
    color: tuple[int, int, int]
    mass: float
    velocity: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    removed: bool = False
    boundary: bool = False  # perimeter fence, not part of the configured world

    @property
    def kinematic(self) -> bool:
        return self.mass <= 0

    @property
    def inv_mass(self) -> float:
        return 0.0 if self.mass <= 0 else 1.0 / self.mass

    @property
    def is_zone(self) -> bool:
        return self.entry.kind == "zone"

    @property
    def is_agent(self) -> bool:
        return self.entry.kind == "agent"

    @property
    def is_goal(self) -> bool:
        return self.entry.kind == "reward-sphere"

    @property
    def moving_goal(self) -> bool:
        return self.entry.moving

    @property
    def radius(self) -> float:
        return self.size[0] / 2.0

    @property
    def half(self) -> tuple[float, float, float]:
        return (self.size[0] / 2.0, self.size[1] / 2.0, self.size[2] / 2.0)

    @property
    def bottom(self) -> float:
        return self.position[1] - (self.radius if self.entry.collider == "sphere"
                                   else self.size[1] / 2.0)

    def snapshot(self) -> tuple:
        return (self.uid, self.name, tuple(self.position), self.yaw, self.size,
                self.color, tuple(self.velocity), self.removed)


# --------------------------------------------------------------------------
# Frame helpers. Yaw rotates +z toward +x (clockwise from above); a body at
# yaw g has forward (sin g, 0, cos g) and right (cos g, 0, -sin g).

def heading(yaw_deg: float) -> tuple[float, float]:
    r = math.radians(yaw_deg)
    return (math.sin(r), math.cos(r))


def to_local(dx: float, dz: float, yaw_deg: float) -> tuple[float, float]:
    r = math.radians(yaw_deg)
    c, s = math.cos(r), math.sin(r)
    return (dx * c - dz * s, dx * s + dz * c)


def to_world(lx: float, lz: float, yaw_deg: float) -> tuple[float, float]:
    r = math.radians(yaw_deg)
    c, s = math.cos(r), math.sin(r)
    return (lx * c + lz * s, -lx * s + lz * c)


def world_half_extents(collider: str, size: tuple[float, float, float],
                       yaw_deg: float) -> tuple[float, float]:
    """World-aligned (x, z) half extents of a shape's bounding box."""
    if collider == "sphere":
        r = size[0] / 2.0
        return (r, r)
    hx, hz = size[0] / 2.0, size[2] / 2.0
    r = math.radians(yaw_deg)
    c, s = abs(math.cos(r)), abs(math.sin(r))
    return (hx * c + hz * s, hx * s + hz * c)


def arch_thickness(size: tuple[float, float, float]) -> float:
    return 0.15 * min(size[0] / 2.0, size[1])


def compound_members(entry: CatalogEntry, size: tuple[float, float, float],
                     ) -> list[tuple[float, float, float, float, float]]:
    """Member boxes of L/U shapes as (ox, oz, hx, hy, hz) in the local frame.

    The declared size is the bounding box; bar thickness is 35% of the x size
    (floored at 0.3 so thin configurations stay solid).
    """
    hx, hy, hz = size[0] / 2.0, size[1] / 2.0, size[2] / 2.0
    w = max(0.3, 0.35 * size[0])
    w = min(w, size[0])
    fz = min(w, size[2])
    if entry.collider == "compound-l":
        sign = -1.0 if entry.name == "LObject" else 1.0
        stem = (sign * (-hx + w / 2.0), 0.0, w / 2.0, hy, hz)
        foot = (sign * (w / 2.0), hz - fz / 2.0, (2 * hx - w) / 2.0, hy, fz / 2.0)
        return [stem, foot]
    if entry.collider == "compound-u":
        left = (-hx + w / 2.0, 0.0, w / 2.0, hy, hz)
        right = (hx - w / 2.0, 0.0, w / 2.0, hy, hz)
        base = (0.0, hz - fz / 2.0, hx - w, hy, fz / 2.0)
        return [left, right, base]
    raise ValueError(f"not a compound collider: {entry.collider}")


def _member_world(body: Body, member: tuple[float, float, float, float, float],
                  ) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    ox, oz, hx, hy, hz = member
    wx, wz = to_world(ox, oz, body.yaw)
    center = (body.position[0] + wx, body.position[1], body.position[2] + wz)
    return center, (hx, hy, hz)


# --------------------------------------------------------------------------
# Scalar contact queries. Every function returns (depth, nx, ny, nz) with the
# normal pointing toward the first argument (the push-out direction for it),
# or None when separated. Touching exactly counts as separated.

Contact = tuple[float, float, float, float]


def _sphere_sphere(pa, ra, pb, rb) -> Contact | None:
    dx = pa[0] - pb[0]
    dy = pa[1] - pb[1]
    dz = pa[2] - pb[2]
    d2 = dx * dx + dy * dy + dz * dz
    rsum = ra + rb
    if d2 >= rsum * rsum:
        return None
    d = math.sqrt(d2)
    if d < _EPS:
        return (rsum, 0.0, 1.0, 0.0)
    return (rsum - d, dx / d, dy / d, dz / d)


def _sphere_box(center, r, box_center, half, yaw) -> Contact | None:
    lx, lz = to_local(center[0] - box_center[0], center[2] - box_center[2], yaw)
    ly = center[1] - box_center[1]
    hx, hy, hz = half
    cx = min(max(lx, -hx), hx)
    cy = min(max(ly, -hy), hy)
    cz = min(max(lz, -hz), hz)
    dx, dy, dz = lx - cx, ly - cy, lz - cz
    d2 = dx * dx + dy * dy + dz * dz
    if d2 > _EPS * _EPS:
        if d2 >= r * r:
            return None
        d = math.sqrt(d2)
        nx, nz = to_world(dx / d, dz / d, yaw)
        return (r - d, nx, dy / d, nz)
    # Center inside the box: push out through the nearest face.
    faces = (
        (hx - abs(lx), (1.0 if lx >= 0 else -1.0, 0.0, 0.0)),
        (hy - abs(ly), (0.0, 1.0 if ly >= 0 else -1.0, 0.0)),
        (hz - abs(lz), (0.0, 0.0, 1.0 if lz >= 0 else -1.0)),
    )
    depth_in, nl = min(faces, key=lambda f: f[0])
    nx, nz = to_world(nl[0], nl[2], yaw)
    return (r + depth_in, nx, nl[1], nz)


def _closest_on_tri_2d(p, a, b, c):
    """Closest point to p on triangle abc, all 2-tuples."""

    def sub(u, v):
        return (u[0] - v[0], u[1] - v[1])

    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1]

    ab, ac, ap = sub(b, a), sub(c, a), sub(p, a)
    d1, d2 = dot(ab, ap), dot(ac, ap)
    if d1 <= 0 and d2 <= 0:
        return a
    bp = sub(p, b)
    d3, d4 = dot(ab, bp), dot(ac, bp)
    if d3 >= 0 and d4 <= d3:
        return b
    vc = d1 * d4 - d3 * d2
    if vc <= 0 <= d1 and d3 <= 0:
        t = d1 / (d1 - d3)
        return (a[0] + ab[0] * t, a[1] + ab[1] * t)
    cp = sub(p, c)
    d5, d6 = dot(ab, cp), dot(ac, cp)
    if d6 >= 0 and d5 <= d6:
        return c
    vb = d5 * d2 - d1 * d6
    if vb <= 0 <= d2 and d6 <= 0:
        t = d2 / (d2 - d6)
        return (a[0] + ac[0] * t, a[1] + ac[1] * t)
    va = d3 * d6 - d5 * d4
    if va <= 0 and d4 - d3 >= 0 and d5 - d6 >= 0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return (b[0] + (c[0] - b[0]) * t, b[1] + (c[1] - b[1]) * t)
    denom = va + vb + vc
    v = vb / denom
    w = vc / denom
    return (a[0] + ab[0] * v + ac[0] * w, a[1] + ab[1] * v + ac[1] * w)


def _sphere_wedge(center, r, wedge_center, half, yaw) -> Contact | None:
    """Wedge solid in its local frame: |x|<=hx, y>=-hy, z in [-hz,hz],
    y <= -(hy/hz) z. The slope descends toward +z; the tall face is at -z."""
    lx, lz = to_local(center[0] - wedge_center[0], center[2] - wedge_center[2], yaw)
    ly = center[1] - wedge_center[1]
    hx, hy, hz = half
    # Slope plane hz*y + hy*z = 0, outward normal (0, hz, hy) normalized.
    slen = math.hypot(hz, hy)
    ny_s, nz_s = hz / slen, hy / slen

    d_bottom = ly + hy
    d_back = lz + hz
    d_front = hz - lz
    d_sides = hx - abs(lx)
    d_slope = -(ly * ny_s + lz * nz_s)
    if d_bottom >= 0 and d_back >= 0 and d_front >= 0 and d_sides >= 0 and d_slope >= 0:
        # Inside: push through the least-buried face.
        options = [
            (d_bottom, (0.0, -1.0, 0.0)),
            (d_back, (0.0, 0.0, -1.0)),
            (d_sides, (1.0 if lx >= 0 else -1.0, 0.0, 0.0)),
            (d_slope, (0.0, ny_s, nz_s)),
        ]
        depth_in, nl = min(options, key=lambda o: o[0])
        nx, nz = to_world(nl[0], nl[2], yaw)
        return (r + depth_in, nx, nl[1], nz)

    # Outside: closest point over the five faces.
    best = None

    def consider(px, py, pz):
        nonlocal best
        dx, dy, dz = lx - px, ly - py, lz - pz
        d2 = dx * dx + dy * dy + dz * dz
        if best is None or d2 < best[0]:
            best = (d2, px, py, pz)

    cx = min(max(lx, -hx), hx)
    cz = min(max(lz, -hz), hz)
    consider(cx, -hy, cz)  # bottom
    cy = min(max(ly, -hy), hy)
    consider(cx, cy, -hz)  # back
    # Slope rectangle: from edge (y=hy, z=-hz) to (y=-hy, z=hz).
    az, ay = -hz, hy
    bz, by = hz, -hy
    t = ((lz - az) * (bz - az) + (ly - ay) * (by - ay)) / ((bz - az) ** 2 + (by - ay) ** 2)
    t = min(max(t, 0.0), 1.0)
    consider(cx, ay + (by - ay) * t, az + (bz - az) * t)
    # Triangular sides at x = +-hx: triangle in (z, y).
    if abs(lx) > hx:
        sx = hx if lx > 0 else -hx
        tz, ty = _closest_on_tri_2d((lz, ly), (-hz, -hy), (hz, -hy), (-hz, hy))
        consider(sx, ty, tz)

    d2, px, py, pz = best
    if d2 >= r * r:
        return None
    d = math.sqrt(d2)
    if d < _EPS:
        return (r, 0.0, 1.0, 0.0)
    dx, dy, dz = (lx - px) / d, (ly - py) / d, (lz - pz) / d
    nx, nz = to_world(dx, dz, yaw)
    return (r - d, nx, dy, nz)


def _arch_chords(size: tuple[float, float, float]) -> list[tuple[float, float]]:
    a = size[0] / 2.0
    b = size[1]
    th = arch_thickness(size)
    ma, mb = a - th / 2.0, b - th / 2.0
    pts = []
    for j in range(13):
        ang = math.pi * j / 12.0
        pts.append((ma * math.cos(ang), mb * math.sin(ang)))
    return pts


def _sphere_arch(center, r, arch_center, size, yaw) -> Contact | None:
    """12-chord approximation of the half-elliptical shell band."""
    half = (size[0] / 2.0, size[1] / 2.0, size[2] / 2.0)
    lx, lz = to_local(center[0] - arch_center[0], center[2] - arch_center[2], yaw)
    eta = center[1] - (arch_center[1] - half[1])  # height above the arch base
    th = arch_thickness(size)
    hl = half[2]

    over_z = abs(lz) - hl
    if over_z >= r:
        return None
    pts = _arch_chords(size)
    best = None  # (d2d, cx, cy)
    for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
        ex, ey = x2 - x1, y2 - y1
        ln2 = ex * ex + ey * ey
        t = ((lx - x1) * ex + (eta - y1) * ey) / ln2
        t = min(max(t, 0.0), 1.0)
        cx, cy = x1 + ex * t, y1 + ey * t
        d2 = (lx - cx) ** 2 + (eta - cy) ** 2
        if best is None or d2 < best[0]:
            best = (d2, cx, cy)
    d2d = math.sqrt(best[0])
    sep2d = d2d - th / 2.0  # distance to the band in the cross-section plane
    if d2d < _EPS:
        n2x, n2y = 0.0, 1.0
    else:
        n2x, n2y = (lx - best[1]) / d2d, (eta - best[2]) / d2d

    if over_z <= 0:
        sep = sep2d
        nl = (n2x, n2y, 0.0)
    elif sep2d <= 0:
        sep = over_z
        nl = (0.0, 0.0, 1.0 if lz > 0 else -1.0)
    else:
        sep = math.hypot(sep2d, over_z)
        zs = 1.0 if lz > 0 else -1.0
        nl = (n2x * sep2d / sep, n2y * sep2d / sep, zs * over_z / sep)
    if sep >= r:
        return None
    nx, nz = to_world(nl[0], nl[2], yaw)
    return (r - sep, nx, nl[1], nz)


def _rect_corners(center, half_x, half_z, yaw):
    cx, cz = center
    out = []
    for sx, sz in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        wx, wz = to_world(sx * half_x, sz * half_z, yaw)
        out.append((cx + wx, cz + wz))
    return out


def _rect_axes(yaw):
    r = math.radians(yaw)
    c, s = math.cos(r), math.sin(r)
    return [(c, -s), (s, c)]  # local x and z axes in world (x, z)


def _project(points, axis):
    vals = [p[0] * axis[0] + p[1] * axis[1] for p in points]
    return min(vals), max(vals)


def _rect_rect_overlap_2d(ca, ha_x, ha_z, yaw_a, cb, hb_x, hb_z, yaw_b,
                          ) -> tuple[float, tuple[float, float]] | None:
    """SAT over the 4 edge axes; returns (escape distance, axis that moves
    rect a out of rect b) or None when separated. The escape distance per
    axis is min(bHi - aLo, aHi - bLo): when one projection contains the
    other the raw interval intersection understates the required push."""
    pa = _rect_corners(ca, ha_x, ha_z, yaw_a)
    pb = _rect_corners(cb, hb_x, hb_z, yaw_b)
    best = None
    for axis in _rect_axes(yaw_a) + _rect_axes(yaw_b):
        a_lo, a_hi = _project(pa, axis)
        b_lo, b_hi = _project(pb, axis)
        e_up = b_hi - a_lo  # escape by moving a toward +axis
        e_dn = a_hi - b_lo  # escape by moving a toward -axis
        esc = min(e_up, e_dn)
        if esc <= _EPS:
            return None
        if best is None or esc < best[0]:
            best = (esc, axis if e_up <= e_dn else (-axis[0], -axis[1]))
    return best


def _box_box(ca, half_a, yaw_a, cb, half_b, yaw_b) -> Contact | None:
    e_up = (cb[1] + half_b[1]) - (ca[1] - half_a[1])
    e_dn = (ca[1] + half_a[1]) - (cb[1] - half_b[1])
    oy = min(e_up, e_dn)
    if oy <= _EPS:
        return None
    planar = _rect_rect_overlap_2d((ca[0], ca[2]), half_a[0], half_a[2], yaw_a,
                                   (cb[0], cb[2]), half_b[0], half_b[2], yaw_b)
    if planar is None:
        return None
    depth_2d, axis = planar
    if oy < depth_2d:
        return (oy, 0.0, 1.0 if e_up <= e_dn else -1.0, 0.0)
    return (depth_2d, axis[0], 0.0, axis[1])


def _boxes_of(body: Body) -> list[tuple[tuple[float, float, float],
                                         tuple[float, float, float]]]:
    """Box approximations of a body: members for compounds, the bounding box
    for wedge/arch, the box itself otherwise."""
    if body.entry.collider in ("compound-l", "compound-u"):
        return [_member_world(body, m) for m in
                compound_members(body.entry, body.size)]
    return [(tuple(body.position), body.half)]


def _sphere_vs_body(pos, r, other: Body) -> Contact | None:
    col = other.entry.collider
    if col == "sphere":
        return _sphere_sphere(pos, r, other.position, other.radius)
    if col == "box":
        return _sphere_box(pos, r, other.position, other.half, other.yaw)
    if col == "wedge":
        return _sphere_wedge(pos, r, other.position, other.half, other.yaw)
    if col == "arch":
        return _sphere_arch(pos, r, other.position, other.size, other.yaw)
    if col in ("compound-l", "compound-u"):
        best = None
        for center, half in _boxes_of(other):
            c = _sphere_box(pos, r, center, half, other.yaw)
            if c and (best is None or c[0] > best[0]):
                best = c
        return best
    raise ValueError(f"sphere contact vs {col} not supported")


def pair_contact(a: Body, b: Body) -> Contact | None:
    """Deepest contact between two solid bodies; normal pushes `a` out of `b`.

    Sphere-vs-wedge and sphere-vs-arch shapes are exact; box-involved pairs
    approximate wedge/arch by their bounding boxes.
    """
    ca = a.entry.collider
    if ca == "sphere":
        return _sphere_vs_body(a.position, a.radius, b)
    if b.entry.collider == "sphere":
        c = _sphere_vs_body(b.position, b.radius, a)
        if c is None:
            return None
        return (c[0], -c[1], -c[2], -c[3])
    best = None
    for (pa, ha) in _boxes_of(a):
        for (pb, hb) in _boxes_of(b):
            c = _box_box(pa, ha, a.yaw, pb, hb, b.yaw)
            if c and (best is None or c[0] > best[0]):
                best = c
    return best


def ground_contact(body: Body) -> Contact | None:
    depth = -body.bottom
    if depth <= _EPS:
        return None
    return (depth, 0.0, 1.0, 0.0)


# --------------------------------------------------------------------------
# Spawn-time overlap predicate.

def _zone_zone_overlap(a: Body, b: Body) -> bool:
    hit = _rect_rect_overlap_2d((a.position[0], a.position[2]), a.half[0], a.half[2],
                                a.yaw,
                                (b.position[0], b.position[2]), b.half[0], b.half[2],
                                b.yaw)
    return hit is not None


def _zone_circle_overlap(zone: Body, center, r) -> bool:
    lx, lz = to_local(center[0] - zone.position[0], center[2] - zone.position[2],
                      zone.yaw)
    hx, hz = zone.half[0], zone.half[2]
    dx = abs(lx) - hx
    dz = abs(lz) - hz
    if dx >= r or dz >= r:
        return False
    if dx <= 0 or dz <= 0:
        return max(dx, dz) < -_EPS or min(dx, dz) < 0 and max(dx, dz) < r - _EPS
    return dx * dx + dz * dz < (r - _EPS) ** 2


def overlap_test(a: Body, b: Body) -> bool:
    """Strict interior overlap (boundary contact is allowed).

    Zones only ever overlap-test against other zones and against the agent's
    footprint; a zone paired with any other solid reports False.
    """
    if a.is_zone or b.is_zone:
        zone, other = (a, b) if a.is_zone else (b, a)
        if other.is_zone:
            return _zone_zone_overlap(zone, other)
        if other.is_agent:
            return _zone_circle_overlap(zone, other.position, other.radius)
        return False
    c = pair_contact(a, b)
    return c is not None and c[0] > 1e-9


# --------------------------------------------------------------------------
# World and stepping.

def make_fences(uid_start: int = -4) -> list[Body]:
    wall = CATALOG["Wall"]
    mid = ARENA_SIZE / 2.0
    span = ARENA_SIZE + 2.0
    spots = [
        ((-0.5, 5.0, mid), (1.0, 10.0, span)),
        ((ARENA_SIZE + 0.5, 5.0, mid), (1.0, 10.0, span)),
        ((mid, 5.0, -0.5), (span, 10.0, 1.0)),
        ((mid, 5.0, ARENA_SIZE + 0.5), (span, 10.0, 1.0)),
    ]
    out = []
    for i, (pos, size) in enumerate(spots):
        out.append(Body(uid=uid_start + i, name="fence", entry=wall,
                        position=list(pos), yaw=0.0, size=size, color=_WOOD,
                        mass=0.0, boundary=True))
    return out


class World:
    """Mutable simulation state for one arena."""

    def __init__(self, bodies: list[Body], agent: Body, t_limit: int,
                 blackouts: tuple[int, ...], rng: random.Random,
                 params: PhysicsParams | None = None):
        self.bodies = bodies
        self.agent = agent
        self.t_limit = t_limit
        self.blackouts = blackouts
        self.rng = rng
        self.params = params or PhysicsParams()
        self.fences = make_fences()
        self.pending_drive = 0.0  # signed: +forward, -backward
        self.report = None  # SpawnReport, attached by the spawn module
        self.goal_touches: set[int] = set()  # goal uids the agent hit mid-step

    def solids(self, include_fences: bool = True) -> list[Body]:
        out = [b for b in self.bodies if not b.removed and not b.is_zone]
        if include_fences:
            out.extend(self.fences)
        return out

    def zones(self) -> list[Body]:
        return [b for b in self.bodies if not b.removed and b.is_zone]

    def goals(self) -> list[Body]:
        return [b for b in self.bodies if not b.removed and b.is_goal]

    def snapshot(self) -> tuple:
        return tuple(b.snapshot() for b in self.bodies)


def apply_agent_action(world: World, m: int, r: int) -> None:
    """Rotate the agent instantly and queue the drive force for the next step.

    m: 0 none, 1 forward, 2 backward. r: 0 none, 1 right (+6 deg), 2 left.
    """
    if m not in (0, 1, 2) or r not in (0, 1, 2):
        raise ValueError(f"action components must be in {{0, 1, 2}}, got ({m}, {r})")
    agent = world.agent
    if r == 1:
        agent.yaw = (agent.yaw + 6.0) % 360.0
    elif r == 2:
        agent.yaw = (agent.yaw - 6.0) % 360.0
    if m == 1:
        world.pending_drive = world.params.drive_force
    elif m == 2:
        world.pending_drive = -world.params.drive_force
    else:
        world.pending_drive = 0.0


def _grounded(body: Body) -> bool:
    return body.bottom <= 2e-3


def _integrate(world: World, body: Body, dt: float) -> None:
    p = world.params
    vx, vy, vz = body.velocity
    # Drag damps locomotion in the ground plane only; vertical motion is
    # ballistic so drop timing follows plain kinematics.
    ax, ay, az = 0.0, -p.gravity, 0.0
    ax -= p.drag * vx
    az -= p.drag * vz
    if body.is_agent and world.pending_drive:
        hx, hz = heading(body.yaw)
        ax += world.pending_drive * hx * body.inv_mass
        az += world.pending_drive * hz * body.inv_mass
    vx += ax * dt
    vy += ay * dt
    vz += az * dt
    if _grounded(body):
        hmag = math.hypot(vx, vz)
        if hmag > 0:
            drop = min(p.friction * p.gravity * dt, hmag)
            scale = (hmag - drop) / hmag
            vx *= scale
            vz *= scale
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    if speed > p.max_speed:
        k = p.max_speed / speed
        vx, vy, vz = vx * k, vy * k, vz * k
    body.velocity[0], body.velocity[1], body.velocity[2] = vx, vy, vz
    body.position[0] += vx * dt
    body.position[1] += vy * dt
    body.position[2] += vz * dt


def _collect_contacts(world: World) -> list[tuple[Body, Body | None, Contact]]:
    """(dynamic body, other or None for ground, contact). Deterministic order."""
    contacts = []
    solids = world.solids()
    for a in solids:
        if a.kinematic or a.moving_goal:
            continue
        g = ground_contact(a)
        if g:
            contacts.append((a, None, g))
        for b in solids:
            if b is a:
                continue
            if not b.kinematic and not b.moving_goal and b.uid <= a.uid:
                continue  # dynamic pair handled once, from the lower uid
            if a.is_agent and b.moving_goal:
                continue  # collection, not collision; the episode consumes it
            c = pair_contact(a, b)
            if c:
                contacts.append((a, b, c))
    return contacts


def _resolve_velocity(world: World, contacts) -> None:
    p = world.params
    for _ in range(6):
        any_change = False
        for a, b, (depth, nx, ny, nz) in contacts:
            if b is None:
                bvx = bvy = bvz = 0.0
                inv_b = 0.0
            else:
                bvx, bvy, bvz = b.velocity
                inv_b = 0.0 if (b.kinematic or b.moving_goal) else b.inv_mass
            rvx = a.velocity[0] - bvx
            rvy = a.velocity[1] - bvy
            rvz = a.velocity[2] - bvz
            vn = rvx * nx + rvy * ny + rvz * nz
            if vn >= -1e-12:
                continue
            e = p.restitution if -vn > p.restitution_min_speed else 0.0
            j = -(1.0 + e) * vn / (a.inv_mass + inv_b)
            a.velocity[0] += j * a.inv_mass * nx
            a.velocity[1] += j * a.inv_mass * ny
            a.velocity[2] += j * a.inv_mass * nz
            if inv_b:
                b.velocity[0] -= j * inv_b * nx
                b.velocity[1] -= j * inv_b * ny
                b.velocity[2] -= j * inv_b * nz
            any_change = True
        if not any_change:
            break


def _resolve_positions(world: World) -> None:
    tol = world.params.penetration_tol
    solids = world.solids()
    for _ in range(4):
        worst = 0.0
        for a in solids:
            if a.kinematic or a.moving_goal:
                continue
            g = ground_contact(a)
            if g and g[0] > tol * 0.5:
                a.position[1] += g[0]
                worst = max(worst, g[0])
            for b in solids:
                if b is a:
                    continue
                if not b.kinematic and not b.moving_goal and b.uid <= a.uid:
                    continue
                if a.is_agent and b.moving_goal:
                    continue
                c = pair_contact(a, b)
                if not c or c[0] <= tol * 0.5:
                    continue
                depth, nx, ny, nz = c
                worst = max(worst, depth)
                inv_b = 0.0 if (b.kinematic or b.moving_goal) else b.inv_mass
                total = a.inv_mass + inv_b
                share_a = depth * a.inv_mass / total
                a.position[0] += nx * share_a
                a.position[1] += ny * share_a
                a.position[2] += nz * share_a
                if inv_b:
                    share_b = depth * inv_b / total
                    b.position[0] -= nx * share_b
                    b.position[1] -= ny * share_b
                    b.position[2] -= nz * share_b
        if worst <= tol * 0.5:
            break


def _advance_moving_goals(world: World, dt: float) -> None:
    p = world.params
    movers = [b for b in world.bodies
              if not b.removed and b.moving_goal]
    if not movers:
        return
    obstacles = [b for b in world.solids() if not b.is_agent]
    for goal in movers:
        goal.position[0] += goal.velocity[0] * dt
        goal.position[2] += goal.velocity[2] * dt
        for other in obstacles:
            if other is goal:
                continue
            c = pair_contact(goal, other)
            if not c or c[0] <= world.params.penetration_tol:
                continue
            depth, nx, ny, nz = c
            goal.position[0] += nx * depth
            goal.position[2] += nz * depth
            hmag = math.hypot(nx, nz)
            if hmag < _EPS:
                continue
            hx, hz = nx / hmag, nz / hmag
            vdotn = goal.velocity[0] * hx + goal.velocity[2] * hz
            if vdotn < 0:
                vx = goal.velocity[0] - 2.0 * vdotn * hx
                vz = goal.velocity[2] - 2.0 * vdotn * hz
                mag = math.hypot(vx, vz)
                if mag > _EPS:
                    goal.velocity[0] = vx / mag * p.goal_speed
                    goal.velocity[2] = vz / mag * p.goal_speed


def step_physics(world: World) -> None:
    """Advance one action step (params.substeps sub-steps of params.dt).

    Goal spheres the agent overlaps during any sub-step are recorded in
    world.goal_touches (checked before positional correction separates them)
    so collection cannot be missed between frames.
    """
    p = world.params
    for _ in range(p.substeps):
        for body in world.bodies:
            if body.removed or body.kinematic or body.is_zone or body.moving_goal:
                continue
            _integrate(world, body, p.dt)
        _advance_moving_goals(world, p.dt)
        contacts = _collect_contacts(world)
        for goal in world.goals():
            if goal is world.agent:
                continue
            c = pair_contact(world.agent, goal)
            if c is not None and c[0] > 0:
                world.goal_touches.add(goal.uid)
        _resolve_velocity(world, contacts)
        _resolve_positions(world)
    world.pending_drive = 0.0


# --------------------------------------------------------------------------
# Ray kernels. Batched numpy; raycast() runs a batch of one. The renderer
# composes these directly. Rays report (t, normal); misses are +inf.

def ray_spheres(o: np.ndarray, d: np.ndarray, center, radius: float):
    oc = o - np.asarray(center, dtype=o.dtype)
    b = 2.0 * np.einsum("ij,ij->i", oc, d)
    c = np.einsum("ij,ij->i", oc, oc) - radius * radius
    disc = b * b - 4.0 * c * np.einsum("ij,ij->i", d, d)
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    a2 = 2.0 * np.einsum("ij,ij->i", d, d)
    t0 = (-b - sq) / a2
    t1 = (-b + sq) / a2
    t = np.where(t0 > 1e-5, t0, np.where(t1 > 1e-5, t1, np.inf))
    t = np.where(ok, t, np.inf)
    t_safe = np.where(np.isfinite(t), t, 0.0)
    hit = o + d * t_safe[:, None]
    n = hit - np.asarray(center, dtype=o.dtype)
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    n = np.divide(n, np.maximum(norm, 1e-12))
    return t, n


def _rot_to_local(v: np.ndarray, yaw_deg: float) -> np.ndarray:
    r = math.radians(yaw_deg)
    c, s = math.cos(r), math.sin(r)
    out = v.copy()
    out[:, 0] = v[:, 0] * c - v[:, 2] * s
    out[:, 2] = v[:, 0] * s + v[:, 2] * c
    return out


def _rot_to_world(v: np.ndarray, yaw_deg: float) -> np.ndarray:
    r = math.radians(yaw_deg)
    c, s = math.cos(r), math.sin(r)
    out = v.copy()
    out[:, 0] = v[:, 0] * c + v[:, 2] * s
    out[:, 2] = -v[:, 0] * s + v[:, 2] * c
    return out


def ray_box(o: np.ndarray, d: np.ndarray, center, half, yaw_deg: float):
    co = o - np.asarray(center, dtype=o.dtype)
    lo = _rot_to_local(co, yaw_deg)
    ld = _rot_to_local(d, yaw_deg)
    h = np.asarray(half, dtype=o.dtype)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / ld
        t1 = (-h - lo) * inv
        t2 = (h - lo) * inv
    tmin = np.minimum(t1, t2)
    tmax = np.maximum(t1, t2)
    # Parallel rays: slab test degenerates to an inside check per axis.
    par = np.abs(ld) < 1e-12
    inside = np.abs(lo) <= h
    tmin = np.where(par, np.where(inside, -np.inf, np.inf), tmin)
    tmax = np.where(par, np.where(inside, np.inf, -np.inf), tmax)
    t_enter = tmin.max(axis=1)
    t_exit = tmax.min(axis=1)
    ok = (t_enter <= t_exit) & (t_exit > 1e-5) & (t_enter > 1e-5)
    t = np.where(ok, t_enter, np.inf)
    axis = np.argmax(tmin, axis=1)
    n_local = np.zeros_like(o)
    rows = np.arange(o.shape[0])
    signs = np.where(ld[rows, axis] > 0, -1.0, 1.0)
    n_local[rows, axis] = signs
    n = _rot_to_world(n_local, yaw_deg)
    return t, n


def ray_wedge(o: np.ndarray, d: np.ndarray, center, half, yaw_deg: float):
    hx, hy, hz = half
    co = o - np.asarray(center, dtype=o.dtype)
    lo = _rot_to_local(co, yaw_deg)
    ld = _rot_to_local(d, yaw_deg)
    slen = math.hypot(hz, hy)
    ns = (0.0, hz / slen, hy / slen)
    planes = [
        ((0.0, -1.0, 0.0), hy),
        ((0.0, 0.0, -1.0), hz),
        ((0.0, 0.0, 1.0), hz),
        ((1.0, 0.0, 0.0), hx),
        ((-1.0, 0.0, 0.0), hx),
        (ns, 0.0),
    ]
    n_rays = o.shape[0]
    t_enter = np.full(n_rays, -np.inf)
    t_exit = np.full(n_rays, np.inf)
    enter_idx = np.zeros(n_rays, dtype=np.int64)
    alive = np.ones(n_rays, dtype=bool)
    for i, (n, offset) in enumerate(planes):
        nv = np.asarray(n, dtype=o.dtype)
        denom = ld @ nv
        dist = offset - lo @ nv
        with np.errstate(divide="ignore", invalid="ignore"):
            tp = dist / denom
        par = np.abs(denom) < 1e-12
        outside_par = par & (dist < 0)
        alive &= ~outside_par
        entering = (~par) & (denom < 0)
        upd = entering & (tp > t_enter)
        t_enter = np.where(upd, tp, t_enter)
        enter_idx = np.where(upd, i, enter_idx)
        exiting = (~par) & (denom > 0)
        t_exit = np.where(exiting, np.minimum(t_exit, tp), t_exit)
    ok = alive & (t_enter <= t_exit) & (t_enter > 1e-5) & (t_exit > 0)
    t = np.where(ok, t_enter, np.inf)
    normals_local = np.array([p[0] for p in planes], dtype=o.dtype)
    n_local = normals_local[enter_idx]
    n = _rot_to_world(n_local, yaw_deg)
    return t, n


def ray_arch(o: np.ndarray, d: np.ndarray, center, size, yaw_deg: float):
    """Analytic half-elliptical shell: outer and inner surfaces plus end rings."""
    a = size[0] / 2.0
    b = size[1]
    th = arch_thickness(size)
    ai, bi = a - th, b - th
    hl = size[2] / 2.0
    base = np.asarray([center[0], center[1] - size[1] / 2.0, center[2]], dtype=o.dtype)
    lo = _rot_to_local(o - base, yaw_deg)
    ld = _rot_to_local(d, yaw_deg)

    n_rays = o.shape[0]
    best_t = np.full(n_rays, np.inf)
    best_n = np.zeros((n_rays, 3), dtype=o.dtype)

    def try_hit(t, n_local):
        nonlocal best_t, best_n
        better = t < best_t
        best_t = np.where(better, t, best_t)
        best_n = np.where(better[:, None], n_local, best_n)

    def ellipse_roots(sa, sb):
        ox, oy = lo[:, 0] / sa, lo[:, 1] / sb
        dx, dy = ld[:, 0] / sa, ld[:, 1] / sb
        qa = dx * dx + dy * dy
        qb = 2 * (ox * dx + oy * dy)
        qc = ox * ox + oy * oy - 1.0
        disc = qb * qb - 4 * qa * qc
        ok = (disc >= 0) & (qa > 1e-16)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r0 = (-qb - sq) / (2 * qa)
            r1 = (-qb + sq) / (2 * qa)
        return ok, r0, r1

    def surface(sa, sb, sign):
        ok, r0, r1 = ellipse_roots(sa, sb)
        for t_raw in (r0, r1):
            t_cand = np.where(np.isfinite(t_raw), t_raw, 0.0)
            valid = ok & np.isfinite(t_raw) & (t_cand > 1e-5)
            px = lo[:, 0] + ld[:, 0] * t_cand
            py = lo[:, 1] + ld[:, 1] * t_cand
            pz = lo[:, 2] + ld[:, 2] * t_cand
            valid &= (py >= -1e-9) & (np.abs(pz) <= hl)
            t = np.where(valid, t_cand, np.inf)
            n = np.zeros((n_rays, 3), dtype=o.dtype)
            nx = px / (sa * sa)
            ny = py / (sb * sb)
            mag = np.sqrt(nx * nx + ny * ny)
            mag = np.maximum(mag, 1e-12)
            n[:, 0] = sign * nx / mag
            n[:, 1] = sign * ny / mag
            # Face the incoming ray.
            flip = np.einsum("ij,ij->i", n, ld) > 0
            n[flip] = -n[flip]
            try_hit(t, n)

    surface(a, b, 1.0)
    if ai > 1e-6 and bi > 1e-6:
        surface(ai, bi, -1.0)

    # End rings at z = +-hl: the half-annulus between the ellipses.
    for zs in (-1.0, 1.0):
        denom = ld[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_cap = (zs * hl - lo[:, 2]) / denom
        t_cap = np.where(np.isfinite(t_cap), t_cap, 0.0)
        valid = (np.abs(denom) > 1e-12) & (t_cap > 1e-5)
        px = lo[:, 0] + ld[:, 0] * t_cap
        py = lo[:, 1] + ld[:, 1] * t_cap
        e_out = (px / a) ** 2 + (py / b) ** 2
        if ai > 1e-6 and bi > 1e-6:
            e_in = (px / ai) ** 2 + (py / bi) ** 2
        else:
            e_in = np.full(n_rays, 2.0)
        valid &= (py >= -1e-9) & (e_out <= 1.0) & (e_in >= 1.0)
        t = np.where(valid, t_cap, np.inf)
        n = np.zeros((n_rays, 3), dtype=o.dtype)
        n[:, 2] = zs
        flip = n[:, 2] * ld[:, 2] > 0
        n[flip] = -n[flip]
        try_hit(t, n)

    return best_t, _rot_to_world(best_n, yaw_deg)


def ray_ground(o: np.ndarray, d: np.ndarray):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -o[:, 1] / d[:, 1]
    t = np.where((d[:, 1] < -1e-12) & (t > 1e-5), t, np.inf)
    n = np.zeros_like(o)
    n[:, 1] = 1.0
    return t, n


def ray_body(o: np.ndarray, d: np.ndarray, body: Body):
    col = body.entry.collider
    if col == "sphere":
        return ray_spheres(o, d, body.position, body.radius)
    if col == "box":
        return ray_box(o, d, body.position, body.half, body.yaw)
    if col == "wedge":
        return ray_wedge(o, d, body.position, body.half, body.yaw)
    if col == "arch":
        return ray_arch(o, d, body.position, body.size, body.yaw)
    if col in ("compound-l", "compound-u"):
        best_t = np.full(o.shape[0], np.inf)
        best_n = np.zeros_like(o)
        for center, half in _boxes_of(body):
            t, n = ray_box(o, d, center, half, body.yaw)
            better = t < best_t
            best_t = np.where(better, t, best_t)
            best_n = np.where(better[:, None], n, best_n)
        return best_t, best_n
    raise ValueError(f"no ray kernel for collider {col}")


@dataclass(frozen=True)
class RayHit:
    kind: str  # "body", "fence", "ground" or "none"
    body_uid: int | None
    distance: float
    normal: tuple[float, float, float]


def raycast(world: World, origin, direction, max_dist: float = 200.0) -> RayHit:
    """Nearest solid hit for a single ray. Zones are decals, not hit targets."""
    o = np.asarray([origin], dtype=np.float64)
    d = np.asarray([direction], dtype=np.float64)
    norm = np.linalg.norm(d)
    if norm < _EPS:
        raise ValueError("ray direction must be nonzero")
    d = d / norm
    best = ("none", None, math.inf, (0.0, 0.0, 0.0))
    for body in world.solids():
        if body.is_agent:
            continue
        t, n = ray_body(o, d, body)
        if t[0] < best[2]:
            kind = "fence" if body.boundary else "body"
            best = (kind, body.uid, float(t[0]), tuple(float(v) for v in n[0]))
    t, n = ray_ground(o, d)
    if t[0] < best[2]:
        best = ("ground", None, float(t[0]), (0.0, 1.0, 0.0))
    if best[2] > max_dist:
        return RayHit("none", None, math.inf, (0.0, 0.0, 0.0))
    return RayHit(*best)
