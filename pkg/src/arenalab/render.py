"""First-person raycast renderer for agent observations.

One ray per pixel from the agent's center (pitch locked level), square
aspect, 60 degree vertical field of view. Opaque surfaces get Lambert
shading with a fixed ambient floor; transparent bodies tint whatever lies
behind them; zones are unlit-order decals painted onto the ground hit.

Rendering math runs in float32 numpy; physics state stays float64. Both are
deterministic for a fixed platform and input state.
"""

from __future__ import annotations

import math

import numpy as np

from .model import TRANSPARENT_NAMES, TRANSPARENT_TINT
from .physics import Body, World, ray_body, ray_ground, to_local

VFOV_DEGREES = 60.0
AMBIENT = 0.35
DIFFUSE = 0.65
TINT_ALPHA = 0.3
SKY = (135.0, 175.0, 215.0)
CHECKER_LIGHT = (125.0, 135.0, 130.0)
CHECKER_DARK = (105.0, 115.0, 110.0)

_LIGHT = np.asarray((1.0, -2.0, 1.0), dtype=np.float32)
_LIGHT = _LIGHT / np.linalg.norm(_LIGHT)


def camera_rays(yaw_deg: float, resolution: int) -> np.ndarray:
    """Unit ray directions, row-major from the top-left pixel, shape (k*k, 3)."""
    k = resolution
    half = math.tan(math.radians(VFOV_DEGREES) / 2.0)
    idx = (np.arange(k, dtype=np.float32) + 0.5) / k
    u = (idx * 2.0 - 1.0) * half          # right
    v = (1.0 - idx * 2.0) * half          # up, top row first
    uu, vv = np.meshgrid(u, v)
    local = np.stack([uu.ravel(), vv.ravel(), np.ones(k * k, dtype=np.float32)],
                     axis=1)
    local /= np.linalg.norm(local, axis=1, keepdims=True)
    r = math.radians(yaw_deg)
    c, s = math.cos(r), math.sin(r)
    world = np.empty_like(local)
    world[:, 0] = local[:, 0] * c + local[:, 2] * s
    world[:, 1] = local[:, 1]
    world[:, 2] = -local[:, 0] * s + local[:, 2] * c
    return world


def _zone_decals(world: World, points_x: np.ndarray, points_z: np.ndarray,
                 colors: np.ndarray, mask: np.ndarray) -> None:
    """Paint zone footprints over ground-hit pixels, later zones on top."""
    for zone in world.zones():
        r = math.radians(zone.yaw)
        c, s = math.cos(r), math.sin(r)
        dx = points_x - zone.position[0]
        dz = points_z - zone.position[2]
        lx = dx * c - dz * s
        lz = dx * s + dz * c
        hx, hz = zone.half[0], zone.half[2]
        inside = mask & (np.abs(lx) <= hx) & (np.abs(lz) <= hz)
        colors[inside] = np.asarray(zone.color, dtype=np.float32)


def render_rays(world: World, origin, directions: np.ndarray) -> np.ndarray:
    """Shade a batch of rays; returns float32 colors in 0..255, shape (n, 3)."""
    n = directions.shape[0]
    o = np.broadcast_to(np.asarray(origin, dtype=np.float32), (n, 3))
    o = np.ascontiguousarray(o)
    d = directions.astype(np.float32, copy=False)

    best_t = np.full(n, np.inf, dtype=np.float32)
    best_n = np.zeros((n, 3), dtype=np.float32)
    base = np.zeros((n, 3), dtype=np.float32)

    opaque = []
    transparent = []
    for body in world.solids():
        if body.is_agent:
            continue
        (transparent if body.name in TRANSPARENT_NAMES else opaque).append(body)

    for body in opaque:
        t, nrm = ray_body(o, d, body)
        better = t < best_t
        if not better.any():
            continue
        best_t = np.where(better, t, best_t)
        best_n = np.where(better[:, None], nrm, best_n)
        base[better] = np.asarray(body.color, dtype=np.float32)

    t_g, n_g = ray_ground(o, d)
    ground_hit = t_g < best_t
    if ground_hit.any():
        best_t = np.where(ground_hit, t_g, best_t)
        best_n = np.where(ground_hit[:, None], n_g, best_n)
        gx = o[:, 0] + d[:, 0] * np.where(ground_hit, t_g, 0.0)
        gz = o[:, 2] + d[:, 2] * np.where(ground_hit, t_g, 0.0)
        parity = (np.floor(gx).astype(np.int64) +
                  np.floor(gz).astype(np.int64)) % 2 == 0
        checker = np.where(parity[:, None],
                           np.asarray(CHECKER_LIGHT, dtype=np.float32),
                           np.asarray(CHECKER_DARK, dtype=np.float32))
        base = np.where(ground_hit[:, None], checker, base)
        _zone_decals(world, gx, gz, base, ground_hit)

    hit = np.isfinite(best_t)
    lambert = AMBIENT + DIFFUSE * np.maximum(
        0.0, best_n @ (-_LIGHT).astype(np.float32))
    colors = base * lambert[:, None]
    colors[~hit] = np.asarray(SKY, dtype=np.float32)

    if transparent:
        layers = np.zeros(n, dtype=np.int64)
        for body in transparent:
            t, _ = ray_body(o, d, body)
            layers += (t < best_t).astype(np.int64)
        keep = np.power(np.float32(1.0 - TINT_ALPHA), layers.astype(np.float32))
        tint = np.asarray(TRANSPARENT_TINT.astuple(), dtype=np.float32)
        colors = colors * keep[:, None] + tint[None, :] * (1.0 - keep[:, None])

    return colors


def render(world: World, resolution: int = 84, lights_on: bool = True,
           ) -> np.ndarray:
    """The agent's view as a (k, k, 3) uint8 image; black during blackouts."""
    k = resolution
    if not lights_on:
        return np.zeros((k, k, 3), dtype=np.uint8)
    dirs = camera_rays(world.agent.yaw, k)
    colors = render_rays(world, world.agent.position, dirs)
    img = np.clip(colors + 0.5, 0.0, 255.0).astype(np.uint8)
    return img.reshape(k, k, 3)


def local_velocity(world: World) -> tuple[float, float, float]:
    """Agent velocity in its own frame: (forward, right, up)."""
    agent = world.agent
    vx, vy, vz = agent.velocity
    right, forward = to_local(vx, vz, agent.yaw)
    return (forward, right, vy)
