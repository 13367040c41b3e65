import pytest

from classmark import bytecode as bc
from classmark import classfile as cf

from conftest import fixture_model


def all_fixture_codes():
    out = []
    for name in ("HelloWorld", "Node", "GuardedRing", "GuardedRingCond",
                 "UnguardedDummy"):
        model = fixture_model(name)
        for idx, view in cf.find_methods(model):
            out.append((name, cf.member_name(model, model.methods[idx]),
                        view.code))
    return out


@pytest.mark.parametrize("cls,method,code", all_fixture_codes())
def test_decode_encode_identity(cls, method, code):
    assert bc.encode(bc.decode_instructions(code)) == code


def test_offsets_and_lengths_are_consistent():
    for _, _, code in all_fixture_codes():
        pos = 0
        for instr in bc.decode_instructions(code):
            assert instr.offset == pos
            pos += instr.length
        assert pos == len(code)


def test_unknown_opcode():
    with pytest.raises(bc.UnknownOpcode):
        bc.decode_instructions(b"\xcb")


def test_truncated_instruction():
    with pytest.raises(bc.TruncatedInstruction):
        bc.decode_instructions(b"\x10")  # bipush missing its byte


def test_tableswitch_padding_depends_on_offset():
    model = fixture_model("UnguardedDummy")
    found = cf.find_methods(model, lambda n, d, f: n == "pick")
    (_, view), = found
    instructions = bc.decode_instructions(view.code)
    switch = next(i for i in instructions if i.opcode == bc.OP_TABLESWITCH)
    pad = (4 - ((switch.offset + 1) % 4)) % 4
    assert switch.length == 1 + pad + 12 + 4 * 3
    targets = bc.branch_targets(switch)
    assert len(targets) == 4  # default + three cases
    assert all(0 <= t < len(view.code) for t in targets)


def test_lookupswitch_decodes():
    model = fixture_model("UnguardedDummy")
    (_, view), = cf.find_methods(model, lambda n, d, f: n == "grade")
    instructions = bc.decode_instructions(view.code)
    switch = next(i for i in instructions if i.opcode == bc.OP_LOOKUPSWITCH)
    assert len(bc.branch_targets(switch)) == 3


def test_wide_iinc_round_trips():
    code = bytes((0xC4, 0x84, 0x01, 0x00, 0x00, 0x10)) + b"\xb1"
    instructions = bc.decode_instructions(code)
    assert instructions[0].length == 6
    assert bc.encode(instructions) == code


def test_wide_load_round_trips():
    code = bytes((0xC4, 0x15, 0x01, 0x00)) + b"\xb1"  # wide iload 256
    instructions = bc.decode_instructions(code)
    assert instructions[0].length == 4
    assert bc.encode(instructions) == code


ARITH_TABLE = {0x60: "000", 0x64: "001", 0x68: "010", 0x6C: "011",
               0x70: "100", 0x7E: "101", 0x80: "110", 0x82: "111"}
BRANCH4_TABLE = {0x9B: "00", 0x9C: "01", 0x9D: "10", 0x9E: "11"}
BRANCH2_TABLE = {0xC6: "0", 0xC7: "1"}


def test_codepoint_tables():
    assert bc.ARITH8_TO_BITS == ARITH_TABLE
    assert bc.BRANCH4_TO_BITS == BRANCH4_TABLE
    assert bc.BRANCH2_TO_BITS == BRANCH2_TABLE


def test_ifeq_ifne_are_not_codepoints():
    code = bytes((0x99, 0x00, 0x03, 0x9A, 0x00, 0x03)) + b"\xb1"
    instructions = bc.decode_instructions(code)
    assert bc.scan_codepoints(instructions, bc.MODE_COMBINED) == []


def test_scan_modes_partition_sites():
    model = fixture_model("GuardedRing")
    (_, view), = cf.find_methods(model, lambda n, d, f: n == "Z")
    instructions = bc.decode_instructions(view.code)
    replace = bc.scan_codepoints(instructions, bc.MODE_REPLACE)
    operands = bc.scan_codepoints(instructions, bc.MODE_OPERANDS)
    combined = bc.scan_codepoints(instructions, bc.MODE_COMBINED)
    assert sorted(replace + operands) == sorted(combined)
    assert set(k for _, k in replace) == {bc.CodepointKind.ARITH8,
                                          bc.CodepointKind.BRANCH4,
                                          bc.CodepointKind.BRANCH2}
    assert set(k for _, k in operands) == {bc.CodepointKind.OPERAND_BIPUSH,
                                           bc.CodepointKind.OPERAND_IINC}
    width = sum(bc.KIND_WIDTH[k] for _, k in replace)
    assert width == 59  # 18 arith * 3 + 2 branch4 * 2 + 1 branch2


def test_rewrite_preserves_length_and_offsets():
    model = fixture_model("GuardedRing")
    (_, view), = cf.find_methods(model, lambda n, d, f: n == "Z")
    instructions = bc.decode_instructions(view.code)
    sites = bc.scan_codepoints(instructions, bc.MODE_REPLACE)
    index, kind = next((i, k) for i, k in sites
                       if k is bc.CodepointKind.ARITH8)
    new_code = bc.rewrite(instructions, index, new_opcode=0x82)  # ixor
    assert len(new_code) == len(view.code)
    before = bc.decode_instructions(view.code)
    after = bc.decode_instructions(new_code)
    assert [i.offset for i in before] == [i.offset for i in after]
    diffs = [i for i, (a, b) in enumerate(zip(before, after))
             if (a.opcode, a.operands) != (b.opcode, b.operands)]
    assert diffs == [index]


def test_rewrite_rejects_cross_family():
    model = fixture_model("GuardedRing")
    (_, view), = cf.find_methods(model, lambda n, d, f: n == "Z")
    instructions = bc.decode_instructions(view.code)
    index = next(i for i, k in bc.scan_codepoints(instructions,
                                                  bc.MODE_REPLACE)
                 if k is bc.CodepointKind.ARITH8)
    with pytest.raises(bc.FamilyViolation):
        bc.rewrite(instructions, index, new_opcode=0x9B)  # iflt


def test_rewrite_operand_site_hits_only_the_value_byte():
    model = fixture_model("GuardedRing")
    (_, view), = cf.find_methods(model, lambda n, d, f: n == "Z")
    instructions = bc.decode_instructions(view.code)
    index = next(i for i, k in bc.scan_codepoints(instructions,
                                                  bc.MODE_OPERANDS)
                 if k is bc.CodepointKind.OPERAND_IINC)
    local_index = instructions[index].operands[0]
    bc.rewrite(instructions, index, new_operand=0xAB)
    assert instructions[index].operands == bytes((local_index, 0xAB))


def test_rewrite_rejects_non_codepoint():
    instructions = bc.decode_instructions(b"\x03\xb1")  # iconst_0; return
    with pytest.raises(bc.NotACodepoint):
        bc.rewrite(instructions, 0, new_opcode=0x60)
    with pytest.raises(bc.NotACodepoint):
        bc.rewrite(instructions, 0, new_operand=1)


def test_site_bits_reads_current_encoding():
    code = bytes((0x60, 0x10, 0x2A, 0x84, 0x01, 0x05, 0xb1))
    instructions = bc.decode_instructions(code)
    sites = bc.scan_codepoints(instructions, bc.MODE_COMBINED)
    values = [bc.site_bits(instructions[i], k) for i, k in sites]
    assert values == ["000", format(0x2A, "08b"), format(5, "08b")]


def test_branch_targets_for_conditionals():
    code = bytes((0x9B, 0x00, 0x04, 0x00, 0xb1))  # iflt +4; nop; return
    instructions = bc.decode_instructions(code)
    assert bc.branch_targets(instructions[0]) == [4]


def test_falls_through():
    assert not bc.falls_through(0xA7)  # goto
    assert not bc.falls_through(0xB1)  # return
    assert not bc.falls_through(0xAA)  # tableswitch
    assert bc.falls_through(0x9B)      # iflt
    assert bc.falls_through(0x60)      # iadd
