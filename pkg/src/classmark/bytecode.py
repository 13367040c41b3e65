"""JVM bytecode decoding and watermark codepoint rewriting.

Instructions decode to (offset, opcode, operand bytes) triples; the
only rewrites the toolkit performs swap an opcode within its family or
overwrite a single operand byte, so code length never changes and no
branch offset ever needs relocation.

Codepoint families and their bit widths:

  Arith8   iadd isub imul idiv irem iand ior ixor   3 bits (opcode)
  Branch4  iflt ifge ifgt ifle                      2 bits (opcode)
  Branch2  ifnull ifnonnull                         1 bit  (opcode)
  OperandBipush  bipush immediate byte              8 bits
  OperandIinc    iinc increment byte                8 bits

ifeq/ifne stay out of Branch4: their heavy use in ordinary control flow
would make rewrites far too visible, and four opcodes encode exactly
two bits.
"""

import struct
from dataclasses import dataclass
from enum import Enum


class UnknownOpcode(Exception):
    """Opcode byte outside the standard instruction set."""


class TruncatedInstruction(Exception):
    """Code array ends inside an instruction's operands."""


class FamilyViolation(Exception):
    """Replacement opcode is not in the same codepoint family."""


class NotACodepoint(Exception):
    """Rewrite targeted an instruction that carries no watermark bits."""


@dataclass(frozen=True)
class OpSpec:
    name: str
    value: int
    length: int  # total bytes including the opcode; 0 = variable
    consume: object  # stack slots popped; None = resolved from the pool
    produce: object  # stack slots pushed; None = resolved from the pool


OPCODES = {}
BY_NAME = {}


def _op(name, value, length=1, consume=0, produce=0):
    spec = OpSpec(name, value, length, consume, produce)
    OPCODES[value] = spec
    BY_NAME[name] = spec


_op("nop", 0x00)
_op("aconst_null", 0x01, 1, 0, 1)
for _i in range(7):
    _op("iconst_%s" % ("m1" if _i == 0 else _i - 1), 0x02 + _i, 1, 0, 1)
_op("lconst_0", 0x09, 1, 0, 2)
_op("lconst_1", 0x0A, 1, 0, 2)
_op("fconst_0", 0x0B, 1, 0, 1)
_op("fconst_1", 0x0C, 1, 0, 1)
_op("fconst_2", 0x0D, 1, 0, 1)
_op("dconst_0", 0x0E, 1, 0, 2)
_op("dconst_1", 0x0F, 1, 0, 2)
_op("bipush", 0x10, 2, 0, 1)
_op("sipush", 0x11, 3, 0, 1)
_op("ldc", 0x12, 2, 0, 1)
_op("ldc_w", 0x13, 3, 0, 1)
_op("ldc2_w", 0x14, 3, 0, 2)
_op("iload", 0x15, 2, 0, 1)
_op("lload", 0x16, 2, 0, 2)
_op("fload", 0x17, 2, 0, 1)
_op("dload", 0x18, 2, 0, 2)
_op("aload", 0x19, 2, 0, 1)
for _i in range(4):
    _op("iload_%d" % _i, 0x1A + _i, 1, 0, 1)
    _op("lload_%d" % _i, 0x1E + _i, 1, 0, 2)
    _op("fload_%d" % _i, 0x22 + _i, 1, 0, 1)
    _op("dload_%d" % _i, 0x26 + _i, 1, 0, 2)
    _op("aload_%d" % _i, 0x2A + _i, 1, 0, 1)
_op("iaload", 0x2E, 1, 2, 1)
_op("laload", 0x2F, 1, 2, 2)
_op("faload", 0x30, 1, 2, 1)
_op("daload", 0x31, 1, 2, 2)
_op("aaload", 0x32, 1, 2, 1)
_op("baload", 0x33, 1, 2, 1)
_op("caload", 0x34, 1, 2, 1)
_op("saload", 0x35, 1, 2, 1)
_op("istore", 0x36, 2, 1, 0)
_op("lstore", 0x37, 2, 2, 0)
_op("fstore", 0x38, 2, 1, 0)
_op("dstore", 0x39, 2, 2, 0)
_op("astore", 0x3A, 2, 1, 0)
for _i in range(4):
    _op("istore_%d" % _i, 0x3B + _i, 1, 1, 0)
    _op("lstore_%d" % _i, 0x3F + _i, 1, 2, 0)
    _op("fstore_%d" % _i, 0x43 + _i, 1, 1, 0)
    _op("dstore_%d" % _i, 0x47 + _i, 1, 2, 0)
    _op("astore_%d" % _i, 0x4B + _i, 1, 1, 0)
_op("iastore", 0x4F, 1, 3, 0)
_op("lastore", 0x50, 1, 4, 0)
_op("fastore", 0x51, 1, 3, 0)
_op("dastore", 0x52, 1, 4, 0)
_op("aastore", 0x53, 1, 3, 0)
_op("bastore", 0x54, 1, 3, 0)
_op("castore", 0x55, 1, 3, 0)
_op("sastore", 0x56, 1, 3, 0)
_op("pop", 0x57, 1, 1, 0)
_op("pop2", 0x58, 1, 2, 0)
_op("dup", 0x59, 1, 1, 2)
_op("dup_x1", 0x5A, 1, 2, 3)
_op("dup_x2", 0x5B, 1, 3, 4)
_op("dup2", 0x5C, 1, 2, 4)
_op("dup2_x1", 0x5D, 1, 3, 5)
_op("dup2_x2", 0x5E, 1, 4, 6)
_op("swap", 0x5F, 1, 2, 2)
for _i, _n in enumerate(("add", "sub", "mul", "div", "rem")):
    _op("i%s" % _n, 0x60 + 4 * _i, 1, 2, 1)
    _op("l%s" % _n, 0x61 + 4 * _i, 1, 4, 2)
    _op("f%s" % _n, 0x62 + 4 * _i, 1, 2, 1)
    _op("d%s" % _n, 0x63 + 4 * _i, 1, 4, 2)
_op("ineg", 0x74, 1, 1, 1)
_op("lneg", 0x75, 1, 2, 2)
_op("fneg", 0x76, 1, 1, 1)
_op("dneg", 0x77, 1, 2, 2)
_op("ishl", 0x78, 1, 2, 1)
_op("lshl", 0x79, 1, 3, 2)
_op("ishr", 0x7A, 1, 2, 1)
_op("lshr", 0x7B, 1, 3, 2)
_op("iushr", 0x7C, 1, 2, 1)
_op("lushr", 0x7D, 1, 3, 2)
_op("iand", 0x7E, 1, 2, 1)
_op("land", 0x7F, 1, 4, 2)
_op("ior", 0x80, 1, 2, 1)
_op("lor", 0x81, 1, 4, 2)
_op("ixor", 0x82, 1, 2, 1)
_op("lxor", 0x83, 1, 4, 2)
_op("iinc", 0x84, 3, 0, 0)
_op("i2l", 0x85, 1, 1, 2)
_op("i2f", 0x86, 1, 1, 1)
_op("i2d", 0x87, 1, 1, 2)
_op("l2i", 0x88, 1, 2, 1)
_op("l2f", 0x89, 1, 2, 1)
_op("l2d", 0x8A, 1, 2, 2)
_op("f2i", 0x8B, 1, 1, 1)
_op("f2l", 0x8C, 1, 1, 2)
_op("f2d", 0x8D, 1, 1, 2)
_op("d2i", 0x8E, 1, 2, 1)
_op("d2l", 0x8F, 1, 2, 2)
_op("d2f", 0x90, 1, 2, 1)
_op("i2b", 0x91, 1, 1, 1)
_op("i2c", 0x92, 1, 1, 1)
_op("i2s", 0x93, 1, 1, 1)
_op("lcmp", 0x94, 1, 4, 1)
_op("fcmpl", 0x95, 1, 2, 1)
_op("fcmpg", 0x96, 1, 2, 1)
_op("dcmpl", 0x97, 1, 4, 1)
_op("dcmpg", 0x98, 1, 4, 1)
for _i, _n in enumerate(("eq", "ne", "lt", "ge", "gt", "le")):
    _op("if%s" % _n, 0x99 + _i, 3, 1, 0)
for _i, _n in enumerate(("eq", "ne", "lt", "ge", "gt", "le")):
    _op("if_icmp%s" % _n, 0x9F + _i, 3, 2, 0)
_op("if_acmpeq", 0xA5, 3, 2, 0)
_op("if_acmpne", 0xA6, 3, 2, 0)
_op("goto", 0xA7, 3, 0, 0)
_op("jsr", 0xA8, 3, 0, 1)
_op("ret", 0xA9, 2, 0, 0)
_op("tableswitch", 0xAA, 0, 1, 0)
_op("lookupswitch", 0xAB, 0, 1, 0)
_op("ireturn", 0xAC, 1, 1, 0)
_op("lreturn", 0xAD, 1, 2, 0)
_op("freturn", 0xAE, 1, 1, 0)
_op("dreturn", 0xAF, 1, 2, 0)
_op("areturn", 0xB0, 1, 1, 0)
_op("return", 0xB1, 1, 0, 0)
_op("getstatic", 0xB2, 3, None, None)
_op("putstatic", 0xB3, 3, None, None)
_op("getfield", 0xB4, 3, None, None)
_op("putfield", 0xB5, 3, None, None)
_op("invokevirtual", 0xB6, 3, None, None)
_op("invokespecial", 0xB7, 3, None, None)
_op("invokestatic", 0xB8, 3, None, None)
_op("invokeinterface", 0xB9, 5, None, None)
_op("invokedynamic", 0xBA, 5, None, None)
_op("new", 0xBB, 3, 0, 1)
_op("newarray", 0xBC, 2, 1, 1)
_op("anewarray", 0xBD, 3, 1, 1)
_op("arraylength", 0xBE, 1, 1, 1)
_op("athrow", 0xBF, 1, 1, 0)
_op("checkcast", 0xC0, 3, 1, 1)
_op("instanceof", 0xC1, 3, 1, 1)
_op("monitorenter", 0xC2, 1, 1, 0)
_op("monitorexit", 0xC3, 1, 1, 0)
_op("wide", 0xC4, 0, 0, 0)
_op("multianewarray", 0xC5, 4, None, None)
_op("ifnull", 0xC6, 3, 1, 0)
_op("ifnonnull", 0xC7, 3, 1, 0)
_op("goto_w", 0xC8, 5, 0, 0)
_op("jsr_w", 0xC9, 5, 0, 1)

OP_BIPUSH = 0x10
OP_IINC = 0x84
OP_WIDE = 0xC4
OP_TABLESWITCH = 0xAA
OP_LOOKUPSWITCH = 0xAB

# opcodes that never fall through to the next instruction
_NO_FALLTHROUGH = frozenset((0xA7, 0xA9, 0xAA, 0xAB, 0xAC, 0xAD, 0xAE, 0xAF,
                             0xB0, 0xB1, 0xBF, 0xC8))

# wide-modifiable opcodes taking a u2 local index
_WIDE_U2 = frozenset((0x15, 0x16, 0x17, 0x18, 0x19,
                      0x36, 0x37, 0x38, 0x39, 0x3A, 0xA9))


@dataclass
class Instruction:
    offset: int
    opcode: int
    operands: bytes

    @property
    def mnemonic(self) -> str:
        return OPCODES[self.opcode].name

    @property
    def length(self) -> int:
        return 1 + len(self.operands)

    def __repr__(self):
        spec = OPCODES.get(self.opcode)
        name = spec.name if spec else "0x%02X" % self.opcode
        return "<%d: %s %s>" % (self.offset, name, self.operands.hex())


def decode_instructions(code: bytes) -> list:
    """Decode a code array into an instruction list.

    tableswitch/lookupswitch padding is computed relative to the start
    of the code array; wide consumes its modified instruction.
    """
    out = []
    i = 0
    n = len(code)
    while i < n:
        opcode = code[i]
        spec = OPCODES.get(opcode)
        if spec is None:
            raise UnknownOpcode("opcode 0x%02X at offset %d" % (opcode, i))
        if opcode == OP_WIDE:
            if i + 1 >= n:
                raise TruncatedInstruction("wide at offset %d has no opcode" % i)
            modified = code[i + 1]
            if modified == OP_IINC:
                length = 6
            elif modified in _WIDE_U2:
                length = 4
            else:
                raise UnknownOpcode("wide cannot modify 0x%02X at offset %d"
                                    % (modified, i))
        elif opcode == OP_TABLESWITCH:
            pad = (4 - ((i + 1) % 4)) % 4
            base = i + 1 + pad
            if base + 12 > n:
                raise TruncatedInstruction("tableswitch header at offset %d" % i)
            low, high = struct.unpack_from(">ii", code, base + 4)
            if high < low:
                raise TruncatedInstruction("tableswitch bounds %d..%d" % (low, high))
            length = 1 + pad + 12 + 4 * (high - low + 1)
        elif opcode == OP_LOOKUPSWITCH:
            pad = (4 - ((i + 1) % 4)) % 4
            base = i + 1 + pad
            if base + 8 > n:
                raise TruncatedInstruction("lookupswitch header at offset %d" % i)
            (npairs,) = struct.unpack_from(">i", code, base + 4)
            if npairs < 0:
                raise TruncatedInstruction("lookupswitch npairs %d" % npairs)
            length = 1 + pad + 8 + 8 * npairs
        else:
            length = spec.length
        if i + length > n:
            raise TruncatedInstruction("%s at offset %d runs past code end"
                                       % (spec.name, i))
        out.append(Instruction(i, opcode, bytes(code[i + 1:i + length])))
        i += length
    return out


def encode(instructions: list) -> bytes:
    return b"".join(bytes((ins.opcode,)) + ins.operands for ins in instructions)


def branch_targets(instr: Instruction) -> list:
    """Absolute offsets this instruction can jump to (empty if none)."""
    op = instr.opcode
    if 0x99 <= op <= 0xA8 or op in (0xC6, 0xC7):
        (rel,) = struct.unpack(">h", instr.operands[:2])
        return [instr.offset + rel]
    if op in (0xC8, 0xC9):
        (rel,) = struct.unpack(">i", instr.operands[:4])
        return [instr.offset + rel]
    if op == OP_TABLESWITCH:
        pad = (4 - ((instr.offset + 1) % 4)) % 4
        body = instr.operands[pad:]
        default, low, high = struct.unpack_from(">iii", body, 0)
        targets = [instr.offset + default]
        for k in range(high - low + 1):
            (rel,) = struct.unpack_from(">i", body, 12 + 4 * k)
            targets.append(instr.offset + rel)
        return targets
    if op == OP_LOOKUPSWITCH:
        pad = (4 - ((instr.offset + 1) % 4)) % 4
        body = instr.operands[pad:]
        default, npairs = struct.unpack_from(">ii", body, 0)
        targets = [instr.offset + default]
        for k in range(npairs):
            (rel,) = struct.unpack_from(">i", body, 8 + 8 * k + 4)
            targets.append(instr.offset + rel)
        return targets
    return []


def falls_through(opcode: int) -> bool:
    return opcode not in _NO_FALLTHROUGH


# --- codepoint families ------------------------------------------------------

class CodepointKind(Enum):
    ARITH8 = "arith8"
    BRANCH4 = "branch4"
    BRANCH2 = "branch2"
    OPERAND_BIPUSH = "operand_bipush"
    OPERAND_IINC = "operand_iinc"


KIND_WIDTH = {
    CodepointKind.ARITH8: 3,
    CodepointKind.BRANCH4: 2,
    CodepointKind.BRANCH2: 1,
    CodepointKind.OPERAND_BIPUSH: 8,
    CodepointKind.OPERAND_IINC: 8,
}

ARITH8_TO_BITS = {
    BY_NAME["iadd"].value: "000",
    BY_NAME["isub"].value: "001",
    BY_NAME["imul"].value: "010",
    BY_NAME["idiv"].value: "011",
    BY_NAME["irem"].value: "100",
    BY_NAME["iand"].value: "101",
    BY_NAME["ior"].value: "110",
    BY_NAME["ixor"].value: "111",
}
BRANCH4_TO_BITS = {
    BY_NAME["iflt"].value: "00",
    BY_NAME["ifge"].value: "01",
    BY_NAME["ifgt"].value: "10",
    BY_NAME["ifle"].value: "11",
}
BRANCH2_TO_BITS = {
    BY_NAME["ifnull"].value: "0",
    BY_NAME["ifnonnull"].value: "1",
}
BITS_TO_ARITH8 = {v: k for k, v in ARITH8_TO_BITS.items()}
BITS_TO_BRANCH4 = {v: k for k, v in BRANCH4_TO_BITS.items()}
BITS_TO_BRANCH2 = {v: k for k, v in BRANCH2_TO_BITS.items()}

_OPCODE_FAMILY = {}
for _v in ARITH8_TO_BITS:
    _OPCODE_FAMILY[_v] = CodepointKind.ARITH8
for _v in BRANCH4_TO_BITS:
    _OPCODE_FAMILY[_v] = CodepointKind.BRANCH4
for _v in BRANCH2_TO_BITS:
    _OPCODE_FAMILY[_v] = CodepointKind.BRANCH2

MODE_REPLACE = "replace_opcodes"
MODE_OPERANDS = "overwrite_operands"
MODE_COMBINED = "combined"
MODES = (MODE_REPLACE, MODE_OPERANDS, MODE_COMBINED)

_OPCODE_KINDS = frozenset((CodepointKind.ARITH8, CodepointKind.BRANCH4,
                           CodepointKind.BRANCH2))
_OPERAND_KINDS = frozenset((CodepointKind.OPERAND_BIPUSH,
                            CodepointKind.OPERAND_IINC))


def _site_kind(instr: Instruction):
    kind = _OPCODE_FAMILY.get(instr.opcode)
    if kind is not None:
        return kind
    if instr.opcode == OP_BIPUSH:
        return CodepointKind.OPERAND_BIPUSH
    if instr.opcode == OP_IINC:
        return CodepointKind.OPERAND_IINC
    return None


def scan_codepoints(instructions: list, mode: str) -> list:
    """All codepoint sites under `mode`: (instruction index, kind) in code order."""
    if mode not in MODES:
        raise ValueError("unknown mode %r" % mode)
    if mode == MODE_REPLACE:
        wanted = _OPCODE_KINDS
    elif mode == MODE_OPERANDS:
        wanted = _OPERAND_KINDS
    else:
        wanted = _OPCODE_KINDS | _OPERAND_KINDS
    out = []
    for index, instr in enumerate(instructions):
        kind = _site_kind(instr)
        if kind in wanted:
            out.append((index, kind))
    return out


def site_bits(instr: Instruction, kind: CodepointKind) -> str:
    """The bits a site currently encodes."""
    if kind is CodepointKind.ARITH8:
        return ARITH8_TO_BITS[instr.opcode]
    if kind is CodepointKind.BRANCH4:
        return BRANCH4_TO_BITS[instr.opcode]
    if kind is CodepointKind.BRANCH2:
        return BRANCH2_TO_BITS[instr.opcode]
    if kind is CodepointKind.OPERAND_BIPUSH:
        return format(instr.operands[0], "08b")
    if kind is CodepointKind.OPERAND_IINC:
        return format(instr.operands[1], "08b")
    raise ValueError("unknown kind %r" % kind)


def rewrite(instructions: list, index: int, new_opcode=None, new_operand=None) -> bytes:
    """Rewrite one codepoint site in place and return the new code bytes.

    Exactly one of new_opcode / new_operand must be given. Opcode
    replacement stays within the site's family; operand overwrite hits
    the bipush immediate or the iinc increment byte, never the local
    index. Code length is preserved by construction.
    """
    if (new_opcode is None) == (new_operand is None):
        raise ValueError("give exactly one of new_opcode, new_operand")
    instr = instructions[index]
    if new_opcode is not None:
        family = _OPCODE_FAMILY.get(instr.opcode)
        if family is None:
            raise NotACodepoint("%s at offset %d has no opcode family"
                                % (instr.mnemonic, instr.offset))
        if _OPCODE_FAMILY.get(new_opcode) is not family:
            raise FamilyViolation("0x%02X is outside family %s"
                                  % (new_opcode, family.value))
        instr.opcode = new_opcode
    else:
        if not 0 <= new_operand <= 0xFF:
            raise ValueError("operand byte %r out of range" % (new_operand,))
        if instr.opcode == OP_BIPUSH:
            instr.operands = bytes((new_operand,))
        elif instr.opcode == OP_IINC:
            instr.operands = bytes((instr.operands[0], new_operand))
        else:
            raise NotACodepoint("%s at offset %d has no operand site"
                                % (instr.mnemonic, instr.offset))
    return encode(instructions)
