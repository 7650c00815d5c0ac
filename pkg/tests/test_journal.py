import random

import pytest

from lobe.journal import JournalError, replay_digest
from lobe.objspace import World
from lobe.parser import parse_program

from conftest import load_fixture


def define(world, source):
    for decl in parse_program(source):
        world.define_class(decl)


def test_fixture_load_record_count(kernel):
    load_fixture(kernel, "logistics.lob")
    records = kernel.journal_slice()
    assert len(records) == 13  # 4 classes + 9 methods
    assert [r.seq for r in records] == list(range(1, 14))


def test_slice_bounds():
    world = World()
    define(world, "class A [ f [ ^ 1 ] ]")
    assert world.journal.slice(5, 3) == []
    assert [r.seq for r in world.journal.slice(1, 2)] == [1, 2]
    with pytest.raises(JournalError):
        world.journal.slice(-1, 2)


def test_before_source_matches_prior_source():
    world = World()
    define(world, "class A [ f [ ^ 1 ] ]")
    original = world.class_named("A").method_dict["f"].source_text
    world.define_method("A", "f [ ^ 2 ]")
    record = world.journal.records[-1]
    assert record.kind == "redefineMethod"
    assert record.before_source == original
    assert record.after_source == "f [ ^ 2 ]"


def test_rollback_restores_source_and_appends():
    world = World()
    define(world, "class A [ ]")
    world.define_method("A", "m1 [ ^ 1 ]")
    checkpoint = world.journal.latest_seq
    world.define_method("A", "m1 [ ^ 2 ]")
    added = world.rollback_to(checkpoint)
    assert len(added) == 1
    assert world.class_named("A").method_dict["m1"].source_text == "m1 [ ^ 1 ]"
    assert world.journal.latest_seq == checkpoint + 2


def test_rollback_to_zero_empties_code_state():
    world = World()
    define(world, "class A [ f [ ^ 1 ] ] class B extends A [ ]")
    world.rollback_to(0)
    assert not world.has_class("A")
    assert not world.has_class("B")
    assert world.digest() == replay_digest([])
    assert world.journal.latest_seq == 6  # 3 forward + 3 inverse


def test_rollback_out_of_range():
    world = World()
    with pytest.raises(JournalError):
        world.rollback_to(5)


def test_replay_digest_equals_live_digest_at_cut_points():
    world = World()
    define(world, "class A [ f [ ^ 1 ] g [ ^ 2 ] ]")
    world.define_method("A", "f [ ^ 10 ]")
    world.remove_method("A", "g")
    records = world.journal.records
    for cut in range(len(records) + 1):
        assert replay_digest(records[:cut]) is not None
    assert world.digest() == replay_digest(records)


def test_define_then_remove_restores_empty_digest():
    world = World()
    empty = world.digest()
    world.define_method("Integer", "double [ ^ self * 2 ]")
    world.remove_method("Integer", "double")
    assert world.digest() == empty
    assert replay_digest(world.journal.records) == empty


def test_invalid_replay_prefix_rejected():
    world = World()
    define(world, "class A [ f [ ^ 1 ] ]")
    world.define_method("A", "f [ ^ 2 ]")
    records = world.journal.records
    with pytest.raises(JournalError):
        replay_digest([records[-1]])  # redefine without its define


def _random_action(rng, world, class_pool):
    roll = rng.random()
    live = [c for c in class_pool if world.has_class(c)]
    if roll < 0.25 or not live:
        name = f"K{rng.randrange(1000)}"
        if not world.has_class(name):
            fields = " ".join(f"f{i}" for i in range(rng.randrange(0, 3)))
            bar = f"| {fields} |" if fields else ""
            define(world, f"class {name} [ {bar} ]")
            class_pool.append(name)
            return
        roll = 0.5
    name = rng.choice(live)
    cref = world.class_named(name)
    selectors = sorted(cref.method_dict)
    if roll < 0.5:
        sel = f"m{rng.randrange(6)}"
        world.define_method(name, f"{sel} [ ^ {rng.randrange(100)} ]")
    elif roll < 0.7 and selectors:
        world.remove_method(name, rng.choice(selectors))
    elif roll < 0.9:
        fields = " ".join(f"g{i}" for i in range(rng.randrange(0, 3)))
        bar = f"| {fields} |" if fields else ""
        body = " ".join(f"{s} [ ^ 0 ]" for s in selectors[:2])
        define(world, f"class {name} [ {bar} {body} ]")
    else:
        sel = f"b{rng.randrange(3)}"
        world.define_method("Integer", f"{sel} [ ^ self ]")


def test_randomized_rollback_replay_equivalence():
    rng = random.Random(20260810)
    world = World()
    class_pool = []
    for _ in range(50):
        _random_action(rng, world, class_pool)
    for _ in range(20):
        before_len = world.journal.latest_seq
        cut = rng.randrange(0, world.journal.latest_seq + 1)
        world.rollback_to(cut)
        assert world.journal.latest_seq == before_len + (before_len - cut)
        assert world.digest() == replay_digest(world.journal.records[:cut])


def test_live_objects_survive_rollback():
    world = World()
    define(world, "class Box [ |v| ]")
    obj = world.instantiate("Box")
    obj.fields["v"] = 123
    checkpoint = world.journal.latest_seq
    world.define_method("Box", "get [ ^ v ]")
    world.define_method("Box", "get [ ^ v , v ]")
    world.rollback_to(checkpoint)
    assert world.heap[obj.object_id] is obj
    assert obj.fields["v"] == 123


def test_export_lines_are_flat_key_value():
    world = World()
    define(world, "class A [ f [ ^ 'x y' ] ]")
    lines = world.journal.export_lines()
    assert len(lines) == 2
    assert lines[0].startswith("seq=1 kind=defineClass class=A selector= origin=user")
    assert 'after="f [ ^ \'x y\' ]"' in lines[1]


def test_monotone_history():
    world = World()
    define(world, "class A [ ]")
    world.define_method("A", "f [ ^ 1 ]")
    lengths = [world.journal.latest_seq]
    world.rollback_to(1)
    lengths.append(world.journal.latest_seq)
    world.rollback_to(0)
    lengths.append(world.journal.latest_seq)
    assert lengths == sorted(lengths)
    assert all(r.seq == i + 1 for i, r in enumerate(world.journal.records))
