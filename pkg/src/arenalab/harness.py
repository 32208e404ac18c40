"""Episode runners: batch stats, the curriculum loop, battery reports.

An episode's reward is the summed final score of every arena in the
document; "success" means that total is strictly positive. Per-episode
seeds derive from (seed, episode index), so every run is reproducible
bit-for-bit with the built-in drivers.
"""

from __future__ import annotations

import csv
import json
import os
from collections import deque
from dataclasses import dataclass, field

from .episode import Environment
from .model import ArenaConfigDoc
from .seeding import derive_seed
from .taskgen import BATTERY_CATEGORIES, BatteryEntry


@dataclass(frozen=True)
class EpisodeResult:
    episode: int
    seed: int
    reward: float
    steps: int
    causes: dict[int, str | None]
    success: bool


@dataclass(frozen=True)
class RunStats:
    episodes: int
    average_reward: float | None
    success_rate: float | None
    log: tuple[EpisodeResult, ...]

    def payload(self) -> dict:
        return {
            "episodes": self.episodes,
            "average_reward": self.average_reward,
            "success_rate": self.success_rate,
            "log": [{"episode": r.episode, "seed": r.seed,
                     "reward": r.reward, "steps": r.steps,
                     "causes": {str(k): v for k, v in r.causes.items()},
                     "success": r.success} for r in self.log],
        }


def _play_episode(agent, doc: ArenaConfigDoc, seed: int,
                  resolution: int, params) -> tuple[float, int, dict]:
    env = Environment(doc, seed=seed, resolution=resolution, params=params)
    agent.reset()
    observations = env.reset()
    steps = 0
    while not env.all_done:
        actions = {i: agent.act(obs) for i, obs in observations.items()
                   if not env.sessions[i].done}
        observations = env.step(actions)
        steps += 1
    total = sum(s.score for s in env.sessions.values())
    causes = {i: s.cause for i, s in env.sessions.items()}
    return total, steps, causes


def run_episodes(agent, doc: ArenaConfigDoc, episodes: int, seed: int = 0,
                 resolution: int = 84, params=None,
                 json_path: str | None = None,
                 csv_path: str | None = None) -> RunStats:
    """n independent episodes of one document; success = total reward > 0."""
    log = []
    for i in range(episodes):
        episode_seed = derive_seed(seed, i)
        total, steps, causes = _play_episode(agent, doc, episode_seed,
                                             resolution, params)
        log.append(EpisodeResult(episode=i, seed=episode_seed, reward=total,
                                 steps=steps, causes=causes,
                                 success=total > 0))
    if episodes:
        stats = RunStats(episodes=episodes,
                         average_reward=sum(r.reward for r in log) / episodes,
                         success_rate=sum(r.success for r in log) / episodes,
                         log=tuple(log))
    else:
        stats = RunStats(episodes=0, average_reward=None, success_rate=None,
                         log=())
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(stats.payload(), fh, indent=2)
            fh.write("\n")
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["episode", "seed", "reward", "steps", "success"])
            for r in log:
                writer.writerow([r.episode, r.seed, r.reward, r.steps,
                                 int(r.success)])
    return stats


class CurriculumTrigger:
    """The advancement rule: trailing-window success rate at or above the
    threshold, never before a full window of episodes on the level."""

    def __init__(self, threshold: float = 0.85, window: int = 600):
        if not 0 < threshold <= 1:
            raise ValueError(f"threshold {threshold} outside (0, 1]")
        if window < 1:
            raise ValueError(f"window {window} must be at least 1")
        self.threshold = threshold
        self.window = window
        self._recent: deque[bool] = deque(maxlen=window)

    def record(self, success: bool) -> bool:
        """Feed one episode outcome; True when the level should advance."""
        self._recent.append(success)
        if len(self._recent) < self.window:
            return False
        return sum(self._recent) / self.window >= self.threshold

    def advance(self) -> None:
        self._recent.clear()


@dataclass(frozen=True)
class CurriculumEpisode:
    episode: int
    level: int
    success: bool
    reward: float


@dataclass(frozen=True)
class CurriculumResult:
    episodes: tuple[CurriculumEpisode, ...]
    final_level: int

    def payload(self) -> dict:
        return {
            "final_level": self.final_level,
            "episodes": [{"episode": e.episode, "level": e.level,
                          "success": e.success, "reward": e.reward}
                         for e in self.episodes],
        }


def run_curriculum(levels: list[ArenaConfigDoc], agent, episodes: int,
                   seed: int = 0, threshold: float = 0.85, window: int = 600,
                   resolution: int = 84, params=None,
                   json_path: str | None = None) -> CurriculumResult:
    """Loop episodes on each level in turn, advancing on the trigger; the
    last level absorbs whatever remains of the episode budget."""
    if not levels:
        raise ValueError("curriculum needs at least one level")
    trigger = CurriculumTrigger(threshold=threshold, window=window)
    level = 0
    log = []
    for episode in range(episodes):
        total, _, _ = _play_episode(agent, levels[level],
                                    derive_seed(seed, episode),
                                    resolution, params)
        success = total > 0
        log.append(CurriculumEpisode(episode=episode, level=level,
                                     success=success, reward=total))
        if trigger.record(success) and level < len(levels) - 1:
            level += 1
            trigger.advance()
    result = CurriculumResult(episodes=tuple(log), final_level=level)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(result.payload(), fh, indent=2)
            fh.write("\n")
    return result


@dataclass(frozen=True)
class EntryResult:
    category: str
    name: str
    reward: float
    threshold: float
    passed: bool
    causes: dict[int, str | None]


@dataclass(frozen=True)
class CategoryReport:
    category: str
    entries: tuple[EntryResult, ...]
    pass_rate: float
    average_reward: float


@dataclass(frozen=True)
class BatteryReport:
    categories: tuple[CategoryReport, ...] = field(default=())

    @property
    def overall_score(self) -> float | None:
        if not self.categories:
            return None
        return sum(c.pass_rate for c in self.categories) / len(self.categories)

    def payload(self) -> dict:
        return {
            "overall_score": self.overall_score,
            "categories": [{
                "category": c.category,
                "pass_rate": c.pass_rate,
                "average_reward": c.average_reward,
                "entries": [{"name": e.name, "reward": e.reward,
                             "threshold": e.threshold, "passed": e.passed}
                            for e in c.entries],
            } for c in self.categories],
        }


def load_manifest(path: str) -> list[BatteryEntry]:
    """Read a battery manifest and its config files (paths are relative)."""
    from .configfile import load_config
    base = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as fh:
        rows = json.load(fh)
    entries = []
    for row in rows:
        config_path = os.path.join(base, row["config"])
        name = os.path.splitext(os.path.basename(row["config"]))[0]
        entries.append(BatteryEntry(category=row["category"], name=name,
                                    threshold=float(row["threshold"]),
                                    doc=load_config(config_path)))
    return entries


def run_battery(entries: list[BatteryEntry], agent, seed: int = 0,
                resolution: int = 84, params=None,
                json_path: str | None = None,
                csv_path: str | None = None) -> BatteryReport:
    """One scored episode per entry; passing means reward above threshold."""
    results: dict[str, list[EntryResult]] = {}
    for entry in entries:
        total, _, causes = _play_episode(agent, entry.doc,
                                         derive_seed(seed, entry.name),
                                         resolution, params)
        results.setdefault(entry.category, []).append(EntryResult(
            category=entry.category, name=entry.name, reward=total,
            threshold=entry.threshold, passed=total > entry.threshold,
            causes=causes))
    order = [c for c in BATTERY_CATEGORIES if c in results]
    order += [c for c in results if c not in BATTERY_CATEGORIES]
    categories = []
    for category in order:
        rows = results[category]
        categories.append(CategoryReport(
            category=category, entries=tuple(rows),
            pass_rate=sum(r.passed for r in rows) / len(rows),
            average_reward=sum(r.reward for r in rows) / len(rows)))
    report = BatteryReport(categories=tuple(categories))
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report.payload(), fh, indent=2)
            fh.write("\n")
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["category", "name", "reward", "threshold",
                             "passed"])
            for c in report.categories:
                for e in c.entries:
                    writer.writerow([e.category, e.name, e.reward,
                                     e.threshold, int(e.passed)])
    return report
