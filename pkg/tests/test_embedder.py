import random

import pytest

from classmark import classfile as cf
from classmark import bytecode as bc
from classmark.codec import (WatermarkConfig, KeySpec, extended_codebook,
                             InsufficientCapacity)
from classmark import dummygen as dg
from classmark.embedder import embed, capacity, resolve_method, NoCode
from classmark.extractor import verify_model

from conftest import fixture_model, scratch_host

CONFIG = WatermarkConfig(extended_codebook(), KeySpec("1100101011", "AND"),
                         bc.MODE_REPLACE)


def carrier(name="z0", bits=64, mode=bc.MODE_REPLACE):
    return dg.synthesize_dummy(scratch_host(),
                               dg.DummySpec(bits, name, mode=mode))


def test_embed_returns_fresh_model():
    model = carrier()
    before = cf.serialize(model)
    marked, plan = embed(model, "z0", "ITS", CONFIG)
    assert cf.serialize(model) == before
    assert cf.serialize(marked) != before
    assert plan.method_name == "z0"


def test_embed_is_deterministic():
    model = carrier()
    a, _ = embed(model, "z0", "SURABAYA", CONFIG)
    b, _ = embed(model, "z0", "SURABAYA", CONFIG)
    assert cf.serialize(a) == cf.serialize(b)


def test_embed_diff_confined_to_target_code_span():
    model = fixture_model("GuardedRing")
    data = cf.serialize(model)
    marked, plan = embed(model, "Z", "ITS SURABAYA", CONFIG)
    marked_data = cf.serialize(marked)
    assert len(marked_data) == len(data)
    start, end = cf.code_spans(model)[plan.method_index]
    assert marked_data[:start] == data[:start]
    assert marked_data[end:] == data[end:]
    assert marked_data[start:end] != data[start:end]


def test_plan_records_sites_and_counts():
    model = carrier()
    _, plan = embed(model, "z0", "ITS", CONFIG)
    assert plan.required_bits == 12
    assert plan.mode == bc.MODE_REPLACE
    assert plan.consumed_sites == sum(1 for s in plan.sites if s.bits)
    assert sum(len(s.bits) for s in plan.sites) == plan.required_bits
    untouched = [s for s in plan.sites if not s.bits]
    assert all(s.before == s.after for s in untouched)
    d = plan.to_dict()
    assert d["message"] == "ITS"
    assert d["total_sites"] == len(plan.sites)


def test_embedded_model_revalidates():
    model = carrier()
    marked, plan = embed(model, "z0", "BAY", CONFIG)
    index = resolve_method(marked, "z0")
    assert dg.validate_structure(marked, index) is None


def test_extract_roundtrip_found():
    model = carrier()
    marked, _ = embed(model, "z0", "ITS SUR", CONFIG)
    verdict = verify_model(marked, "ITS SUR", CONFIG)
    assert verdict.found
    assert verdict.method_name == "z0"
    assert verdict.bit_offset == 0


def test_multi_embed_different_methods():
    model = carrier("first")
    model = dg.synthesize_dummy(model, dg.DummySpec(64, "second"))
    step1, _ = embed(model, "first", "ITS", CONFIG)
    step2, _ = embed(step1, "second", "BAY", CONFIG)
    assert verify_model(step2, "ITS", CONFIG).found
    assert verify_model(step2, "BAY", CONFIG).found


def test_reembedding_same_method_overwrites():
    model = carrier()
    first, _ = embed(model, "z0", "RUB", CONFIG)
    second, _ = embed(first, "z0", "ITS SUR", CONFIG)
    assert verify_model(second, "ITS SUR", CONFIG).found


def test_capacity_error_reports_shortfall():
    model = carrier(bits=16)
    with pytest.raises(InsufficientCapacity) as exc:
        embed(model, "z0", "ITS SURABAYA ITS SURABAYA", CONFIG)
    text = str(exc.value)
    assert "z0" in text and "need" in text


def test_operand_mode_embeds_in_operand_bytes_only():
    config = WatermarkConfig(extended_codebook(), None, bc.MODE_OPERANDS)
    model = carrier("zop", bits=64, mode=bc.MODE_OPERANDS)
    marked, plan = embed(model, "zop", "ITS", config)
    original = cf.code_of(model.methods[plan.method_index]).code
    mutated = cf.code_of(marked.methods[plan.method_index]).code
    changed = [i for i, (a, b) in enumerate(zip(original, mutated)) if a != b]
    instructions = bc.decode_instructions(original)
    opcode_offsets = {instr.offset for instr in instructions}
    assert changed and not any(i in opcode_offsets for i in changed)


def test_replace_mode_changes_opcode_bytes_only():
    model = carrier()
    marked, plan = embed(model, "z0", "ITS SUR", CONFIG)
    original = cf.code_of(model.methods[plan.method_index]).code
    mutated = cf.code_of(marked.methods[plan.method_index]).code
    instructions = bc.decode_instructions(original)
    opcode_offsets = {instr.offset for instr in instructions}
    changed = [i for i, (a, b) in enumerate(zip(original, mutated)) if a != b]
    assert changed and all(i in opcode_offsets for i in changed)


def test_empty_message_leaves_bytes_identical():
    model = carrier()
    marked, plan = embed(model, "z0", "", CONFIG)
    assert cf.serialize(marked) == cf.serialize(model)
    assert plan.required_bits == 0
    assert plan.consumed_sites == 0


def test_resolve_method_by_index_and_name():
    model = fixture_model("GuardedRing")
    by_name = resolve_method(model, "Z")
    assert resolve_method(model, by_name) == by_name
    with pytest.raises(LookupError):
        resolve_method(model, "missing")
    with pytest.raises(LookupError):
        resolve_method(model, 999)


def test_resolve_method_ambiguity():
    model = fixture_model("Node")  # moveNext/moveBack unique; fake a clash
    model.methods[2].name_index = model.methods[1].name_index
    model.methods[2].descriptor_index = model.methods[1].descriptor_index
    with pytest.raises(LookupError):
        resolve_method(model, cf.member_name(model, model.methods[1]))


def test_no_code_method_rejected():
    model = carrier()
    model.methods.append(cf.MemberInfo(cf.ACC_PRIVATE | 0x0400,
                                       cf.add_utf8(model, "ghost"),
                                       cf.add_utf8(model, "()V"), []))
    with pytest.raises(NoCode):
        embed(model, "ghost", "ITS", CONFIG)
    with pytest.raises(NoCode):
        capacity(model, "ghost", bc.MODE_REPLACE)


def test_capacity_matches_manifest_value():
    model = fixture_model("GuardedRing")
    assert capacity(model, "Z", bc.MODE_REPLACE) == 59
    assert capacity(model, "Z", bc.MODE_OPERANDS) == 56
    assert capacity(model, "Z", bc.MODE_COMBINED) == 115


def test_random_messages_round_trip_all_modes():
    rng = random.Random(77)
    alphabet = list(extended_codebook().to_code)
    for trial in range(60):
        mode = rng.choice(bc.MODES)
        message = "".join(rng.choice(alphabet)
                          for _ in range(rng.randrange(1, 10)))
        config = WatermarkConfig(extended_codebook(), None, mode)
        model = carrier("m%d" % trial, bits=len(message) * 4, mode=mode)
        marked, _ = embed(model, "m%d" % trial, message, config)
        assert verify_model(marked, message, config).found, (mode, message)
