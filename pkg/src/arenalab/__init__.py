"""Headless arena environments: seeded spawning, physics, pixels, protocol."""

from .model import (ArenaConfigDoc, ArenaSpec, CatalogEntry, CATALOG, ItemSpec,
                    ObservationSpec, Rgb, Vec3, Violation, validate_config)
from .configfile import ParseError, load_config, parse_config, save_config, \
    serialize_config
from .physics import Body, PhysicsParams, World, raycast
from .spawn import SpawnError, SpawnReport, build_world
from .episode import ArenaSession, Environment, Observation
from .render import render

__version__ = "0.1.0"

__all__ = [
    "ArenaConfigDoc", "ArenaSpec", "ArenaSession", "Body", "CATALOG",
    "CatalogEntry", "Environment", "ItemSpec", "Observation",
    "ObservationSpec", "ParseError", "PhysicsParams", "Rgb", "SpawnError",
    "SpawnReport", "Vec3", "Violation", "World", "build_world", "load_config",
    "parse_config", "raycast", "render", "save_config", "serialize_config",
    "validate_config", "__version__",
]
