"""Tests for procedural content: mazes, curriculum, battery, solvability."""

from __future__ import annotations

import json
import math
import os

import pytest

from arenalab.configfile import load_config
from arenalab.model import ArenaConfigDoc, ArenaSpec, ItemSpec, Vec3
from arenalab.seeding import derive_seed
from arenalab.spawn import build_world
from arenalab.taskgen import (BATTERY_CATEGORIES, MAZE_KINDS, BatteryEntry,
                              check_generated, circular_gap_slots,
                              curriculum_levels, gen_grid_maze, gen_maze,
                              gen_sample_battery, gen_scrambled_maze,
                              gen_wall_curriculum, grid_wall_count,
                              solvability_check, write_battery)

DATA = os.path.join(os.path.dirname(__file__), "data")


def _simple_doc(items, t=200):
    spec = ArenaSpec(t=t, blackouts=(), items=tuple(items))
    return ArenaConfigDoc(arenas={0: spec})


def _item(name, positions=(), rotations=(), sizes=()):
    return ItemSpec(name=name, positions=tuple(positions),
                    rotations=tuple(rotations), sizes=tuple(sizes), colors=())


def _fixed_agent(x, z):
    return _item("Agent", positions=[Vec3(x, 0, z)], rotations=[0])


def _fixed_goal(x, z, d=2.0):
    return _item("GoodGoal", positions=[Vec3(x, 0, z)], rotations=[0],
                 sizes=[Vec3(d, d, d)])


def _wall(x, z, sx, sy, sz):
    return _item("Wall", positions=[Vec3(x, 0, z)], rotations=[0],
                 sizes=[Vec3(sx, sy, sz)])


# ---------------------------------------------------------------------------
# Maze generators.

def test_maze_generation_is_deterministic():
    for kind in MAZE_KINDS:
        assert gen_maze(kind, 11) == gen_maze(kind, 11)
        assert gen_maze(kind, 11) != gen_maze(kind, 12)


def test_unknown_maze_kind_rejected():
    with pytest.raises(ValueError):
        gen_maze("hexagonal", 0)


def test_grid_maze_size_bounds():
    for bad in (1, 9, 0, -3):
        with pytest.raises(ValueError):
            gen_grid_maze(bad, 0)
    gen_grid_maze(2, 0)
    gen_grid_maze(8, 0)


def test_grid_maze_wall_count_matches_topology():
    # posts + two pieces per carved boundary + one per solid boundary
    assert grid_wall_count(2) == 8
    assert grid_wall_count(3) == 24
    for n in (2, 3, 4, 5):
        for seed in range(4):
            doc = gen_grid_maze(n, seed)
            walls = doc.arenas[0].items[0]
            assert walls.name == "Wall"
            assert len(walls.positions) == grid_wall_count(n)
            assert len(walls.rotations) == len(walls.positions)
            assert len(walls.sizes) == len(walls.positions)


def test_grid_maze_is_fully_pinned_and_valid():
    doc = gen_grid_maze(3, 2)
    for item in doc.arenas[0].items:
        assert len(item.rotations) == len(item.positions)
        for pos in item.positions:
            assert pos.x >= 0 and pos.z >= 0  # no random sentinels
    assert check_generated(doc) == []


def test_grid_maze_goal_and_agent_in_distinct_cells():
    for seed in range(8):
        doc = gen_grid_maze(4, seed)
        items = doc.arenas[0].items
        goal = next(i for i in items if i.name == "GoodGoal")
        agent = next(i for i in items if i.name == "Agent")
        assert goal.positions[0] != agent.positions[0]
        cell = 40.0 / 4
        for pos in (goal.positions[0], agent.positions[0]):
            # cell centers sit at (k + 0.5) * cell on both axes
            assert (pos.x / cell) % 1.0 == pytest.approx(0.5)
            assert (pos.z / cell) % 1.0 == pytest.approx(0.5)


def test_grid_mazes_are_solvable():
    for n in (2, 3, 8):
        for seed in range(25):
            assert solvability_check(gen_grid_maze(n, seed), seed)


def test_scrambled_maze_wall_budget_and_pinning():
    for seed in range(10):
        doc = gen_scrambled_maze(seed)
        walls = doc.arenas[0].items[0]
        assert 12 <= len(walls.positions) <= 20
        assert len(walls.rotations) == len(walls.positions)
        assert len(walls.sizes) == len(walls.positions)
        for pos, size in zip(walls.positions, walls.sizes):
            assert 2.0 <= size.y <= 4.0
            assert 3.0 <= size.z <= 12.0
            assert 0.0 <= pos.x <= 40.0 and 0.0 <= pos.z <= 40.0
        assert check_generated(doc) == []
        assert solvability_check(doc, seed)


def test_scrambled_maze_keeps_agent_away_from_goal():
    for seed in range(10):
        items = gen_scrambled_maze(seed).arenas[0].items
        goal = next(i for i in items if i.name == "GoodGoal").positions[0]
        agent = next(i for i in items if i.name == "Agent").positions[0]
        assert math.hypot(agent.x - goal.x, agent.z - goal.z) >= 10.0


def test_circular_maze_rings_and_gaps():
    doc = gen_maze("circular", 4)
    walls = doc.arenas[0].items[0]
    assert len(walls.positions) == 3 * 23  # 24 slots per ring, one left open
    radii = sorted({round(math.hypot(p.x - 20, p.z - 20), 3)
                    for p in walls.positions})
    assert radii == [6.5, 11.5, 16.5]
    for pos, rot in zip(walls.positions, walls.rotations):
        theta = math.degrees(math.atan2(pos.z - 20, pos.x - 20)) % 360.0
        off = (rot + theta) % 360.0
        assert min(off, 360.0 - off) < 1e-3  # yaw cancels the slot angle
    assert check_generated(doc) == []


def test_circular_mazes_are_solvable():
    for seed in range(25):
        assert solvability_check(gen_maze("circular", seed), seed)


def test_circular_gap_alignment_statistics():
    # three independent draws from 24 slots: P(all distinct) = (23*22)/24^2
    distinct = sum(1 for seed in range(1000)
                   if len(set(circular_gap_slots(seed))) == 3)
    assert 830 <= distinct <= 920


# ---------------------------------------------------------------------------
# Wall curriculum.

def test_curriculum_level_bounds():
    for bad in (0, 14, -1):
        with pytest.raises(ValueError):
            gen_wall_curriculum(bad, 0)


def test_curriculum_anchor_levels_match_reference_configs():
    assert gen_wall_curriculum(1, 0).arenas[0] == \
        load_config(os.path.join(DATA, "config2.yml")).arenas[0]
    assert gen_wall_curriculum(3, 0).arenas[0] == \
        load_config(os.path.join(DATA, "config3.yml")).arenas[0]


def test_curriculum_top_level_matches_dense_reference():
    gen = gen_wall_curriculum(13, 0).arenas[0]
    ref = load_config(os.path.join(DATA, "config4.yml")).arenas[0]
    assert gen.t == ref.t
    assert [i.name for i in gen.items] == [i.name for i in ref.items]
    for gi, ri in zip(gen.items, ref.items):
        assert gi.positions == ri.positions
        assert gi.rotations == ri.rotations
        # the reference file elides repeated wall sizes; the generator pins all
        assert gi.sizes[:len(ri.sizes)] == ri.sizes
    walls = gen.items[1]
    assert len(walls.sizes) == len(walls.positions) == 14


def test_curriculum_wall_counts_and_horizons():
    levels = curriculum_levels(0)
    assert [lv.level for lv in levels] == list(range(1, 14))
    assert [lv.walls for lv in levels] == [1, 2, 3, 4, 5, 6, 7,
                                           8, 9, 10, 11, 12, 14]
    assert [lv.doc.arenas[0].t for lv in levels] == \
        [250, 250] + [400] * 5 + [500] * 6
    for lv in levels:
        walls = next(i for i in lv.doc.arenas[0].items if i.name == "Wall")
        assert len(walls.positions) == lv.walls
        z_lines = [p.z for p in walls.positions if p.x == -1]
        assert z_lines == sorted(z_lines)


def test_curriculum_levels_validate_and_solve():
    for lv in curriculum_levels(0):
        assert check_generated(lv.doc) == []
        for seed in range(3):
            assert solvability_check(lv.doc, seed)


# ---------------------------------------------------------------------------
# Solvability oracle.

def test_open_arena_is_solvable():
    doc = _simple_doc([_fixed_goal(30, 30), _fixed_agent(10, 10)])
    assert solvability_check(doc, 0)


def test_sealed_goal_is_unsolvable():
    box = _item("Wall", positions=[Vec3(30, 0, 26.5), Vec3(30, 0, 33.5),
                                   Vec3(26.5, 0, 30), Vec3(33.5, 0, 30)],
                rotations=[0, 0, 0, 0],
                sizes=[Vec3(8, 3, 1), Vec3(8, 3, 1),
                       Vec3(1, 3, 6), Vec3(1, 3, 6)])
    doc = _simple_doc([box, _fixed_goal(30, 30), _fixed_agent(10, 10)])
    world = build_world(doc.arenas[0], 0)
    assert world.report.complete  # flush walls, nothing skipped
    assert not solvability_check(doc, 0)


def test_wall_across_arena_blocks_but_tunnel_opens():
    barrier = [_wall(8.5, 20, 17, 4, 1), _wall(31.5, 20, 17, 4, 1)]
    filler = _wall(20, 20, 6, 4, 1)
    tunnel = _item("CylinderTunnel", positions=[Vec3(20, 0, 20)],
                   rotations=[0], sizes=[Vec3(6, 4, 6)])
    ends = [_fixed_goal(20, 32), _fixed_agent(20, 6)]
    assert not solvability_check(_simple_doc(barrier + [filler] + ends), 0)
    assert solvability_check(_simple_doc(barrier + [tunnel] + ends), 0)


def test_platform_goal_needs_a_ramp():
    platform = _wall(30, 30, 8, 2, 8)
    raised = _item("GoodGoal", positions=[Vec3(30, 2, 30)], rotations=[0],
                   sizes=[Vec3(2, 2, 2)])
    ramp = _item("Ramp", positions=[Vec3(30, 0, 23.5)], rotations=[180],
                 sizes=[Vec3(4, 2, 5)])
    without = _simple_doc([platform, raised, _fixed_agent(10, 10)])
    with_ramp = _simple_doc([platform, ramp, raised, _fixed_agent(10, 10)])
    assert not solvability_check(without, 0)
    assert solvability_check(with_ramp, 0)


def test_low_step_is_climbable():
    # a 0.4-high slab is within the climb allowance; 1.5 is not
    low = _wall(20, 20, 40, 0.4, 4)
    high = _wall(20, 20, 40, 1.5, 4)
    ends = [_fixed_goal(20, 32), _fixed_agent(20, 6)]
    assert solvability_check(_simple_doc([low] + ends), 0)
    assert not solvability_check(_simple_doc([high] + ends), 0)


def test_unplaceable_agent_reads_as_unsolvable():
    zone = _item("DeathZone", positions=[Vec3(20, 0, 20)], rotations=[0],
                 sizes=[Vec3(40, 0, 40)])
    doc = _simple_doc([zone, _fixed_goal(30, 30)])
    assert not solvability_check(doc, 0)


def test_goal_lost_to_overlap_reads_as_unsolvable():
    blocker = _wall(20, 18, 12, 3, 1)
    doc = _simple_doc([blocker, _fixed_goal(20, 18), _fixed_agent(20, 6)])
    assert not solvability_check(doc, 0)


# ---------------------------------------------------------------------------
# Sample battery.

def test_battery_covers_every_category_three_times():
    entries = gen_sample_battery(0)
    by_cat = {}
    for e in entries:
        by_cat.setdefault(e.category, []).append(e)
    assert set(by_cat) == set(BATTERY_CATEGORIES)
    assert len(by_cat) == 10
    for cat, group in by_cat.items():
        assert len(group) >= 3
        assert [e.name for e in group] == [f"{cat}-{i + 1}"
                                           for i in range(len(group))]


def test_battery_configs_validate_spawn_and_solve():
    for e in gen_sample_battery(0):
        assert check_generated(e.doc) == [], e.name
        for idx, spec in e.doc.arenas.items():
            world = build_world(spec, derive_seed(0, idx))
            assert world.report.complete, e.name
        assert solvability_check(e.doc, 0), e.name


def test_battery_thresholds_are_graded():
    entries = gen_sample_battery(0)
    thresholds = {e.name: e.threshold for e in entries}
    assert thresholds["basic-food-1"] == 0.0
    assert thresholds["preferences-1"] > 0.0
    assert thresholds["numerosity-1"] > 0.0


def test_battery_rejects_unknown_category():
    doc = _simple_doc([_fixed_goal(30, 30), _fixed_agent(10, 10)])
    with pytest.raises(ValueError):
        BatteryEntry(category="telepathy", name="telepathy-1",
                     threshold=0.0, doc=doc)


def test_write_battery_emits_configs_and_manifest(tmp_path):
    entries = gen_sample_battery(0)
    manifest_path = write_battery(entries, str(tmp_path))
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    assert len(manifest) == len(entries)
    for row, entry in zip(manifest, entries):
        assert row["category"] == entry.category
        assert row["threshold"] == entry.threshold
        loaded = load_config(str(tmp_path / row["config"]))
        assert loaded == entry.doc
