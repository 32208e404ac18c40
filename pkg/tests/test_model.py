import json
import random

import pytest

from arenalab.model import (CATALOG, ArenaConfigDoc, ArenaSpec, ItemSpec,
                            ObservationSpec, Rgb, Vec3, catalog_lookup,
                            export_catalog, instance_count, validate_config)


def _doc(items, t=250, blackouts=()):
    spec = ArenaSpec(t=t, blackouts=tuple(blackouts), items=tuple(items))
    return ArenaConfigDoc(arenas={0: spec})


def _errors(doc):
    return [v for v in validate_config(doc) if v.severity == "error"]


def _warnings(doc):
    return [v for v in validate_config(doc) if v.severity == "warning"]


def test_catalog_has_every_placeable_object():
    expected = {
        "GoodGoal", "GoodGoalMulti", "BadGoal", "GoodGoalMove",
        "GoodGoalMultiMove", "BadGoalMove", "DeathZone", "HotZone",
        "Cardbox1", "Cardbox2", "LObject", "LObject2", "UObject",
        "Wall", "WallTransparent", "CylinderTunnel",
        "CylinderTunnelTransparent", "Ramp", "Agent",
    }
    assert set(CATALOG) == expected


def test_catalog_reward_spheres_reward_matches_kind():
    for name in ("GoodGoal", "GoodGoalMulti", "GoodGoalMove", "GoodGoalMultiMove"):
        assert CATALOG[name].reward == "size"
    for name in ("BadGoal", "BadGoalMove"):
        assert CATALOG[name].reward == "size-negative"
    for name in ("GoodGoal", "BadGoal", "GoodGoalMove", "BadGoalMove"):
        assert CATALOG[name].terminates == "always"
    for name in ("GoodGoalMulti", "GoodGoalMultiMove"):
        assert CATALOG[name].terminates == "last-multi"


def test_catalog_move_variants_are_marked_moving():
    for name, entry in CATALOG.items():
        assert entry.moving == name.endswith("Move")


def test_catalog_masses():
    assert CATALOG["Cardbox1"].mass == 1.0
    assert CATALOG["Cardbox2"].mass == 2.0
    for name in ("LObject", "LObject2", "UObject"):
        assert CATALOG[name].mass == 3.0
    for name in ("Wall", "Ramp", "CylinderTunnel", "DeathZone", "HotZone"):
        assert CATALOG[name].mass == 0.0
    assert CATALOG["Agent"].mass == 1.0


def test_catalog_zone_sizes_are_flat():
    for name in ("DeathZone", "HotZone"):
        entry = CATALOG[name]
        assert entry.size_min.y == 0
        assert entry.size_max.y == 0
        assert entry.size_min.x == 1
        assert entry.size_max.x == 40


def test_catalog_lookup_rejects_unknown_names():
    assert catalog_lookup("Ramp").collider == "wedge"
    with pytest.raises(KeyError):
        catalog_lookup("Rampp")


def test_export_catalog_round_trips_as_json(tmp_path):
    path = tmp_path / "catalog.json"
    export_catalog(path)
    data = json.loads(path.read_text())
    assert len(data) == 19
    assert data["GoodGoal"]["reward"] == "size"
    assert data["Wall"]["size_max"] == {"x": 40, "y": 10, "z": 40}


def test_instance_count_is_longest_list_or_one():
    item = ItemSpec(name="Wall")
    assert instance_count(item) == 1
    item = ItemSpec(name="Wall", positions=(Vec3(1, 0, 1), Vec3(2, 0, 2)),
                    rotations=(0.0,))
    assert instance_count(item) == 2
    item = ItemSpec(name="Wall", colors=(Rgb(1, 2, 3),) * 5)
    assert instance_count(item) == 5


def test_observation_spec_bounds():
    assert ObservationSpec(4).resolution == 4
    assert ObservationSpec(512).resolution == 512
    with pytest.raises(ValueError):
        ObservationSpec(3)
    with pytest.raises(ValueError):
        ObservationSpec(513)


def test_validate_accepts_plain_goal():
    doc = _doc([ItemSpec(name="GoodGoal")])
    assert validate_config(doc) == []


def test_validate_rejects_unknown_item_name():
    doc = _doc([ItemSpec(name="GoodGole")])
    errs = _errors(doc)
    assert len(errs) == 1
    assert "GoodGole" in str(errs[0])


def test_validate_rejects_negative_time_limit():
    doc = ArenaConfigDoc(arenas={0: ArenaSpec(t=-5)})
    assert _errors(doc)


def test_validate_blackout_shapes():
    assert not _errors(ArenaConfigDoc(arenas={0: ArenaSpec(blackouts=(5, 10, 25))}))
    assert not _errors(ArenaConfigDoc(arenas={0: ArenaSpec(blackouts=(-20,))}))
    assert _errors(ArenaConfigDoc(arenas={0: ArenaSpec(blackouts=(10, 5))}))
    assert _errors(ArenaConfigDoc(arenas={0: ArenaSpec(blackouts=(-20, 5))}))
    assert _errors(ArenaConfigDoc(arenas={0: ArenaSpec(blackouts=(0, 5))}))


def test_validate_size_range_per_axis():
    doc = _doc([ItemSpec(name="Wall", sizes=(Vec3(41, 5, 5),))])
    assert _errors(doc)
    doc = _doc([ItemSpec(name="Wall", sizes=(Vec3(-1, 5, 5),))])
    assert not _errors(doc)
    doc = _doc([ItemSpec(name="Ramp", sizes=(Vec3(1, 0.05, 1),))])
    assert _errors(doc)


def test_validate_sphere_with_unequal_axes_warns():
    doc = _doc([ItemSpec(name="GoodGoal", sizes=(Vec3(2, 3, 2),))])
    assert not _errors(doc)
    assert _warnings(doc)


def test_validate_rotation_range():
    assert not _errors(_doc([ItemSpec(name="Wall", rotations=(0.0, 360.0, -1.0))]))
    assert _errors(_doc([ItemSpec(name="Wall", rotations=(361.0,))]))
    assert _errors(_doc([ItemSpec(name="Wall", rotations=(-2.0,))]))


def test_validate_color_channels():
    assert not _errors(_doc([ItemSpec(name="Wall", colors=(Rgb(0, 255, -1),))]))
    assert _errors(_doc([ItemSpec(name="Wall", colors=(Rgb(0, 256, 0),))]))


def test_validate_color_on_fixed_color_item_warns():
    doc = _doc([ItemSpec(name="Cardbox1", colors=(Rgb(10, 10, 10),))])
    assert not _errors(doc)
    assert _warnings(doc)


def test_validate_position_outside_floor_warns():
    doc = _doc([ItemSpec(name="Wall", positions=(Vec3(50, 0, 10),))])
    assert _warnings(doc)
    doc = _doc([ItemSpec(name="Wall", positions=(Vec3(10, -0.5, 10),))])
    assert _warnings(doc)
    doc = _doc([ItemSpec(name="Wall", positions=(Vec3(10, -1, 10),))])
    assert not _warnings(doc)


def test_validate_single_agent_only():
    doc = _doc([ItemSpec(name="Agent", positions=(Vec3(5, 0, 5), Vec3(6, 0, 6)))])
    assert _errors(doc)
    doc = _doc([ItemSpec(name="Agent"), ItemSpec(name="Agent")])
    assert _errors(doc)


def test_validate_unknown_keys_warn():
    doc = _doc([ItemSpec(name="Wall", unknown_keys=("frictions",))])
    assert _warnings(doc)
    spec = ArenaSpec(t=10, unknown_keys=("pass_mark",))
    assert _warnings(ArenaConfigDoc(arenas={0: spec}))


def test_validate_zone_thickness_must_be_zero():
    doc = _doc([ItemSpec(name="DeathZone", sizes=(Vec3(4, 1, 4),))])
    assert _errors(doc)
    doc = _doc([ItemSpec(name="DeathZone", sizes=(Vec3(4, 0, 4),))])
    assert not _errors(doc)


def test_validation_is_deterministic_over_random_docs():
    rng = random.Random(90125)
    names = sorted(CATALOG)
    for _ in range(50):
        items = []
        for _ in range(rng.randrange(0, 6)):
            name = rng.choice(names)
            fields = {}
            if rng.random() < 0.7:
                fields["positions"] = tuple(
                    Vec3(rng.uniform(-2, 42), 0, rng.uniform(-2, 42))
                    for _ in range(rng.randrange(1, 4)))
            if rng.random() < 0.5:
                fields["rotations"] = tuple(
                    rng.uniform(-5, 365) for _ in range(rng.randrange(1, 3)))
            items.append(ItemSpec(name=name, **fields))
        doc = _doc(items, t=rng.randrange(0, 500))
        first = validate_config(doc)
        second = validate_config(doc)
        assert first == second
