import random
import struct

import pytest

from classmark import classfile as cf

from conftest import fixture_bytes, fixture_model, scratch_host

NAMES = ["HelloWorld", "Node", "GuardedRing", "GuardedRingCond",
         "UnguardedDummy"]


@pytest.mark.parametrize("name", NAMES)
def test_round_trip_bit_exact(name):
    data = fixture_bytes(name)
    assert cf.serialize(cf.parse(data)) == data


def test_parse_reads_all_pool_tags():
    model = fixture_model("UnguardedDummy")
    tags = {type(e) for e in model.constant_pool if e is not None}
    assert {cf.Utf8Entry, cf.IntegerEntry, cf.FloatEntry, cf.LongEntry,
            cf.DoubleEntry, cf.ClassEntry, cf.StringEntry, cf.FieldrefEntry,
            cf.MethodrefEntry, cf.InterfaceMethodrefEntry,
            cf.NameAndTypeEntry} <= tags


def test_long_entry_occupies_two_slots():
    model = fixture_model("UnguardedDummy")
    for i, entry in enumerate(model.constant_pool):
        if isinstance(entry, (cf.LongEntry, cf.DoubleEntry)):
            assert model.constant_pool[i + 1] is None


def test_bad_magic():
    with pytest.raises(cf.BadMagic):
        cf.parse(b"\x00\x00\x00\x00" + fixture_bytes("HelloWorld")[4:])


def test_truncated_input():
    data = fixture_bytes("HelloWorld")
    with pytest.raises(cf.Truncated):
        cf.parse(data[: len(data) // 2])


def test_trailing_data_rejected():
    with pytest.raises(cf.Truncated):
        cf.parse(fixture_bytes("HelloWorld") + b"\x00")


def test_bad_pool_tag():
    data = bytearray(fixture_bytes("HelloWorld"))
    data[10] = 99  # first pool entry's tag byte
    with pytest.raises(cf.BadPoolTag):
        cf.parse(bytes(data))


def test_dangling_index_caught_by_validate():
    model = fixture_model("HelloWorld")
    model.methods[0].name_index = 9999
    with pytest.raises(cf.DanglingIndex):
        cf.validate(model)


def test_unknown_attribute_kept_as_opaque_blob():
    model = fixture_model("HelloWorld")
    name_idx = cf.add_utf8(model, "MysteryAttr")
    payload = b"\x01\x02\x03"
    model.attributes.append(cf.AttributeBlob(name_idx, payload))
    again = cf.parse(cf.serialize(model))
    blob = again.attributes[-1]
    assert blob.parsed is None
    assert blob.data == payload


def test_malformed_debug_attribute_falls_back_to_blob():
    # a LineNumberTable whose payload contradicts its own count must
    # round-trip untouched rather than be "repaired"
    model = fixture_model("HelloWorld")
    name_idx = cf.add_utf8(model, "LineNumberTable")
    bogus = struct.pack(">H", 3) + struct.pack(">HH", 0, 1)  # claims 3, has 1
    model.attributes.append(cf.AttributeBlob(name_idx, bogus))
    data = cf.serialize(model)
    again = cf.parse(data)
    assert again.attributes[-1].parsed is None
    assert cf.serialize(again) == data


def test_parsed_views_present_on_fixture():
    model = fixture_model("Node")
    kinds = set()
    for method in model.methods:
        code = cf.code_of(method)
        assert code is not None
        for attr in code.attributes:
            kinds.add(type(attr.parsed))
    assert cf.LineNumberTableView in kinds
    assert cf.LocalVariableTableView in kinds
    assert any(isinstance(a.parsed, cf.SourceFileView)
               for a in model.attributes)


def test_add_utf8_deduplicates():
    model = scratch_host()
    first = cf.add_utf8(model, "shared")
    second = cf.add_utf8(model, "shared")
    assert first == second


def test_code_spans_cover_method_code_bytes():
    name = "GuardedRing"
    data = fixture_bytes(name)
    model = cf.parse(data)
    spans = cf.code_spans(model)
    assert set(spans) == {i for i, m in enumerate(model.methods)
                          if cf.code_of(m) is not None}
    for index, (start, end) in spans.items():
        assert data[start:end] == cf.code_of(model.methods[index]).code


def test_helpers_resolve_names():
    model = fixture_model("GuardedRing")
    assert cf.class_name(model) == "GuardedRing"
    names = [cf.member_name(model, m) for m in model.methods]
    assert names == ["<init>", "run", "work", "Z", "main"]
    found = cf.find_methods(model, lambda n, d, f: n == "Z" and d == "(I)V")
    assert len(found) == 1


def test_fuzzed_truncations_never_crash():
    rng = random.Random(1234)
    data = fixture_bytes("UnguardedDummy")
    for _ in range(300):
        cut = rng.randrange(len(data))
        try:
            cf.parse(data[:cut])
        except (cf.BadMagic, cf.Truncated, cf.BadPoolTag, cf.DanglingIndex,
                cf.IndexOverflow):
            pass


def test_fuzzed_byte_flips_raise_only_parse_errors():
    rng = random.Random(99)
    data = bytearray(fixture_bytes("HelloWorld"))
    for _ in range(300):
        flipped = bytearray(data)
        pos = rng.randrange(8, len(data))
        flipped[pos] ^= 1 << rng.randrange(8)
        try:
            model = cf.parse(bytes(flipped))
        except (cf.BadMagic, cf.Truncated, cf.BadPoolTag, cf.DanglingIndex,
                cf.IndexOverflow):
            continue
        assert cf.serialize(model) == bytes(flipped)
