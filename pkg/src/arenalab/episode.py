"""Episode state machine: rewards, termination, lights, multi-arena stepping.

Step indexing: the reset observation is step 0 and the k-th step() call
produces step k. The per-step time penalty, zone charges and goal rewards
all land on the step they occur, and every reward earned on the terminal
step is included in it. After termination an arena is absorbing: further
actions return the frozen terminal frame with reward 0.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .model import ArenaConfigDoc, ArenaSpec, ObservationSpec, validate_config
from .physics import PhysicsParams, apply_agent_action, step_physics, to_local
from .render import local_velocity, render
from .seeding import derive_seed
from .spawn import build_world

HOT_FLOOR = -1e-5

# Lower number wins when several causes land on one step.
_CAUSE_RANK = {
    "good-goal": 0,
    "bad-goal": 1,
    "multi-complete": 2,
    "death-zone": 3,
    "time-limit": 4,
}

TERMINATION_CAUSES = tuple(_CAUSE_RANK)


def lights_state(blackouts: tuple[int, ...], step: int) -> bool:
    """True when the lights are on at the given step.

    An increasing list toggles at each listed step (starting on); a single
    negative value -p alternates every p steps; empty means always on.
    """
    if not blackouts:
        return True
    if blackouts[0] < 0:
        period = -blackouts[0]
        return (step // period) % 2 == 0
    return bisect.bisect_right(blackouts, step) % 2 == 0


def step_penalty(t_limit: int) -> float:
    return -1.0 / t_limit if t_limit > 0 else 0.0


def hot_zone_penalty(t_limit: int) -> float:
    if t_limit > 0:
        return min(-10.0 / t_limit, HOT_FLOOR)
    return HOT_FLOOR


def _merge_cause(current: str | None, new: str) -> str:
    if current is None or _CAUSE_RANK[new] < _CAUSE_RANK[current]:
        return new
    return current


@dataclass(frozen=True, eq=False)
class Observation:
    arena: int
    step: int
    pixels: np.ndarray  # (k, k, 3) uint8
    velocity: tuple[float, float, float]  # agent frame: forward, right, up
    reward: float
    score: float
    done: bool
    cause: str | None
    lights_on: bool


class ArenaSession:
    """One arena's episode. Create via Environment or directly from a spec."""

    def __init__(self, arena_index: int, spec: ArenaSpec, seed: int,
                 resolution: int = 84, params: PhysicsParams | None = None):
        self.arena_index = arena_index
        self.spec = spec
        self.resolution = ObservationSpec(resolution).resolution
        self.params = params or PhysicsParams()
        self.seed = seed
        self.world = None
        self.step_index = 0
        self.score = 0.0
        self.done = False
        self._cause: str | None = None
        self._frozen: Observation | None = None
        self.reset(seed)

    @property
    def cause(self) -> str | None:
        """Why the episode ended; None while it is still running."""
        return self._cause if self.done else None

    def reset(self, seed: int | None = None) -> Observation:
        if seed is not None:
            self.seed = seed
        self.world = build_world(self.spec, self.seed, self.params)
        self.step_index = 0
        self.score = 0.0
        self.done = False
        self._cause = None
        self._frozen = None
        return self._observe(reward=0.0)

    def _observe(self, reward: float) -> Observation:
        lights = lights_state(self.spec.blackouts, self.step_index)
        pixels = render(self.world, self.resolution, lights)
        return Observation(arena=self.arena_index, step=self.step_index,
                           pixels=pixels, velocity=local_velocity(self.world),
                           reward=reward, score=self.score, done=self.done,
                           cause=None if not self.done else self._cause,
                           lights_on=lights)

    def step(self, m: int, r: int) -> Observation:
        if self.done:
            return self._frozen
        self.step_index += 1
        world = self.world
        apply_agent_action(world, m, r)
        world.goal_touches.clear()
        step_physics(world)

        t = world.t_limit
        reward = step_penalty(t)
        cause: str | None = None

        touched = [b for b in world.bodies
                   if b.uid in world.goal_touches and not b.removed]
        collected_multi = False
        for goal in touched:
            d = goal.size[0]
            goal.removed = True
            if goal.entry.reward == "size":
                if goal.name.startswith("GoodGoalMulti"):
                    reward += d
                    collected_multi = True
                else:
                    reward += d
                    cause = _merge_cause(cause, "good-goal")
            elif goal.entry.reward == "size-negative":
                reward -= d
                cause = _merge_cause(cause, "bad-goal")
        if collected_multi:
            remaining = [b for b in world.bodies if b.is_goal and not b.removed]
            golds_left = any(b.name.startswith("GoodGoalMulti") for b in remaining)
            greens = any(b.name in ("GoodGoal", "GoodGoalMove") for b in remaining)
            if not golds_left and not greens:
                cause = _merge_cause(cause, "multi-complete")

        agent = world.agent
        if agent.position[1] < 1.0:
            in_death = False
            in_hot = False
            for zone in world.zones():
                lx, lz = to_local(agent.position[0] - zone.position[0],
                                  agent.position[2] - zone.position[2], zone.yaw)
                if abs(lx) <= zone.half[0] and abs(lz) <= zone.half[2]:
                    if zone.entry.reward == "minus-one":
                        in_death = True
                    else:
                        in_hot = True
            if in_hot:
                reward += hot_zone_penalty(t)
            if in_death:
                reward += -1.0
                cause = _merge_cause(cause, "death-zone")

        if t > 0 and self.step_index >= t:
            cause = _merge_cause(cause, "time-limit")

        self.score += reward
        if cause is not None:
            self.done = True
            self._cause = cause
        obs = self._observe(reward)
        if self.done:
            self._frozen = replace(obs, reward=0.0)
        return obs


class Environment:
    """All arenas of one configuration document, stepped in lockstep."""

    def __init__(self, doc: ArenaConfigDoc, seed: int = 0, resolution: int = 84,
                 params: PhysicsParams | None = None, validate: bool = True):
        if validate:
            errors = [v for v in validate_config(doc) if v.severity == "error"]
            if errors:
                listing = "; ".join(str(v) for v in errors)
                raise ValueError(f"configuration rejected: {listing}")
        self.doc = doc
        self.seed = seed
        self.resolution = ObservationSpec(resolution).resolution
        self.params = params or PhysicsParams()
        self.sessions: dict[int, ArenaSession] = {}
        self._build()

    def _build(self) -> None:
        self.sessions = {
            index: ArenaSession(index, spec, derive_seed(self.seed, index),
                                self.resolution, self.params)
            for index, spec in sorted(self.doc.arenas.items())
        }

    def reset(self, doc: ArenaConfigDoc | None = None, seed: int | None = None,
              ) -> dict[int, Observation]:
        if doc is not None:
            self.doc = doc
        if seed is not None:
            self.seed = seed
        self._build()
        return {i: s._observe(reward=0.0) for i, s in self.sessions.items()}

    def step(self, actions: Mapping[int, tuple[int, int]],
             ) -> dict[int, Observation]:
        """Advance every arena one step. Done arenas may be omitted from the
        action map; live arenas must all be present."""
        out: dict[int, Observation] = {}
        for index, session in self.sessions.items():
            if index not in actions:
                if not session.done:
                    raise ValueError(f"missing action for live arena {index}")
                out[index] = session.step(0, 0)
                continue
            m, r = actions[index]
            out[index] = session.step(m, r)
        extra = set(actions) - set(self.sessions)
        if extra:
            raise ValueError(f"actions for unknown arena(s): {sorted(extra)}")
        return out

    @property
    def all_done(self) -> bool:
        return all(s.done for s in self.sessions.values())
