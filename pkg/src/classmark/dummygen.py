"""Dummy method synthesis, source snippet emission, structural validation.

Two routes produce a watermark carrier:

* class-level synthesis (`synthesize_dummy`) appends a private,
  uncalled int-arithmetic method with enough codepoint sites for a
  target bit capacity, directly into a parsed class model;
* source emission (`emit_source_snippets`) writes the classic five
  arithmetic method shapes R/S/X/Y/Z plus the ring data structure,
  mover-thread scaffolding, and an opaque guard fragment, as plain
  text for manual insertion before compilation.

`validate_structure` is a depth-only abstract interpreter standing in
for the real bytecode verifier: stack never underflows, never exceeds
max_stack, and every branch lands on an instruction start.
"""

import zlib
from dataclasses import dataclass
from math import ceil

from . import classfile
from .bytecode import (BY_NAME, OPCODES, OP_BIPUSH, OP_IINC, OP_WIDE,
                       MODE_REPLACE, MODE_OPERANDS, MODE_COMBINED, MODES,
                       KIND_WIDTH, branch_targets, decode_instructions,
                       falls_through, scan_codepoints,
                       TruncatedInstruction, UnknownOpcode)
from .classfile import (ACC_PRIVATE, AttributeBlob, CodeView, MemberInfo,
                        IndexOverflow, code_of, member_name)


class NameCollision(Exception):
    """The class already declares a method with the requested name."""


class PoolOverflow(Exception):
    """Constant pool cannot take the entries the new method needs."""


SHAPES = ("R", "S", "X", "Y", "Z")


@dataclass
class DummySpec:
    capacity_bits: int
    name: str
    shape: str = "Z"
    mode: str = MODE_REPLACE

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError("shape must be one of %s" % (SHAPES,))
        if self.mode not in MODES:
            raise ValueError("mode must be one of %s" % (MODES,))
        if self.capacity_bits < 0:
            raise ValueError("capacity_bits must be >= 0")


_ARITH_CYCLE = ("iadd", "isub", "imul", "idiv", "irem", "iand", "ior", "ixor")


def _dummy_code(spec: DummySpec) -> bytes:
    """Straight-line arithmetic blocks, then branch blocks, then return.

    Block shapes (all depth-balanced, max stack 2, locals 0..1):
      arithmetic   iload_1; bipush c; <arith>; istore_1        3 opcode bits + 8 operand bits
      int branch   iload_1; iflt +6; iinc 1, c                 2 + 8
      ref branch   aload_0; ifnull +6; iinc 1, c               1 + 8

    Arithmetic blocks alone meet any replace-mode target; the four
    branch blocks keep every codepoint family present in the carrier.
    """
    n = spec.capacity_bits
    if n == 0:
        return bytes((BY_NAME["return"].value,))
    # deterministic flavor per (shape, name): rotation and constant ramp
    salt = zlib.crc32(("%s:%s" % (spec.shape, spec.name)).encode("utf-8"))
    rot = salt % 8
    base = 7 + salt % 64
    arith_blocks = max(ceil(n / 3), 1)
    out = bytearray()
    iload_1 = BY_NAME["iload_1"].value
    istore_1 = BY_NAME["istore_1"].value
    aload_0 = BY_NAME["aload_0"].value
    for i in range(arith_blocks):
        opcode = BY_NAME[_ARITH_CYCLE[(rot + i) % 8]].value
        const = (base + 13 * i) % 120 + 1
        out += bytes((iload_1, OP_BIPUSH, const, opcode, istore_1))
    for i in range(2):
        const = (base + 29 * i) % 120 + 1
        out += bytes((iload_1, BY_NAME["iflt"].value, 0x00, 0x06,
                      OP_IINC, 0x01, const))
    for i in range(2):
        const = (base + 41 * i) % 120 + 1
        out += bytes((aload_0, BY_NAME["ifnull"].value, 0x00, 0x06,
                      OP_IINC, 0x01, const))
    out.append(BY_NAME["return"].value)
    return bytes(out)


def capacity_of_code(code: bytes, mode: str) -> int:
    instructions = decode_instructions(code)
    return sum(KIND_WIDTH[kind] for _, kind in scan_codepoints(instructions, mode))


def synthesize_dummy(model: classfile.ClassFileModel, spec: DummySpec) -> classfile.ClassFileModel:
    """A copy of the model with one more private method meeting spec capacity.

    The method is never referenced, so only a guard wired in by the
    caller (or the trimmer's mercy) keeps it alive.
    """
    import copy
    for m in model.methods:
        if member_name(model, m) == spec.name:
            raise NameCollision("method %r already exists" % spec.name)
    out = copy.deepcopy(model)
    code = _dummy_code(spec)
    got = capacity_of_code(code, spec.mode)
    assert got >= spec.capacity_bits, "generator shortfall: %d < %d" % (got, spec.capacity_bits)
    try:
        name_idx = classfile.add_utf8(out, spec.name)
        desc_idx = classfile.add_utf8(out, "(I)V")
        code_idx = classfile.add_utf8(out, "Code")
    except IndexOverflow as exc:
        raise PoolOverflow(str(exc)) from exc
    view = CodeView(max_stack=2, max_locals=2, code=code)
    out.methods.append(MemberInfo(ACC_PRIVATE, name_idx, desc_idx,
                                  [AttributeBlob(code_idx, parsed=view)]))
    classfile.validate(out)
    diag = validate_structure(out, len(out.methods) - 1)
    assert diag is None, "generator produced invalid code: %s" % diag
    return out


# --- structural validation ---------------------------------------------------

def _type_slots(desc: str, pos: int):
    """Slots of the field type starting at desc[pos]; returns (slots, next pos)."""
    c = desc[pos]
    while c == "[":
        pos += 1
        c = desc[pos]
    if c == "L":
        end = desc.index(";", pos)
        return 1, end + 1
    if c in "JD":
        return 2, pos + 1
    if c in "BCFISZ":
        return 1, pos + 1
    raise ValueError("bad descriptor at %d: %r" % (pos, desc))


def _method_slots(desc: str):
    """(argument slots, return slots) for a method descriptor."""
    if not desc.startswith("("):
        raise ValueError("not a method descriptor: %r" % desc)
    pos = 1
    args = 0
    while desc[pos] != ")":
        slots, pos = _type_slots(desc, pos)
        args += slots
    ret = desc[pos + 1]
    if ret == "V":
        return args, 0
    slots, _ = _type_slots(desc, pos + 1)
    return args, slots


def _field_slots(desc: str) -> int:
    slots, _ = _type_slots(desc, 0)
    return slots


def _ref_descriptor(model, index: int) -> str:
    entry = model.constant_pool[index]
    nat = model.constant_pool[entry.name_and_type_index]
    return classfile.utf8_text(model, nat.descriptor_index)


def _effect(model, instr):
    """(consume, produce) in slots, resolving pool-dependent opcodes."""
    spec = OPCODES[instr.opcode]
    if spec.consume is not None:
        return spec.consume, spec.produce
    name = spec.name
    operands = instr.operands
    if name in ("getstatic", "putstatic", "getfield", "putfield"):
        index = (operands[0] << 8) | operands[1]
        slots = _field_slots(_ref_descriptor(model, index))
        if name == "getstatic":
            return 0, slots
        if name == "putstatic":
            return slots, 0
        if name == "getfield":
            return 1, slots
        return 1 + slots, 0
    if name in ("invokevirtual", "invokespecial", "invokestatic",
                "invokeinterface", "invokedynamic"):
        index = (operands[0] << 8) | operands[1]
        args, ret = _method_slots(_ref_descriptor(model, index))
        receiver = 0 if name in ("invokestatic", "invokedynamic") else 1
        return receiver + args, ret
    if name == "multianewarray":
        return operands[2], 1
    raise ValueError("no effect rule for %s" % name)


def validate_structure(model, method_index: int):
    """None when the method's code passes depth simulation, else a diagnostic."""
    method = model.methods[method_index]
    view = code_of(method)
    if view is None:
        return "method has no code"
    try:
        instructions = decode_instructions(view.code)
    except (UnknownOpcode, TruncatedInstruction) as exc:
        return "undecodable code: %s" % exc
    if not instructions:
        return "empty code array"
    starts = {ins.offset: i for i, ins in enumerate(instructions)}
    code_len = len(view.code)

    for h in view.exception_table:
        if h.start_pc not in starts or h.handler_pc not in starts:
            return "exception handler pcs %d/%d not at instruction starts" % (
                h.start_pc, h.handler_pc)
        if not h.start_pc <= h.end_pc <= code_len:
            return "exception range %d..%d out of bounds" % (h.start_pc, h.end_pc)

    depths = {}
    work = [(0, 0)] + [(h.handler_pc, 1) for h in view.exception_table]
    while work:
        offset, depth = work.pop()
        if offset not in starts:
            return "jump to %d, not an instruction start" % offset
        seen = depths.get(offset)
        if seen is not None:
            if seen != depth:
                return "inconsistent stack depth at %d: %d vs %d" % (offset, seen, depth)
            continue
        depths[offset] = depth
        instr = instructions[starts[offset]]
        try:
            consume, produce = _effect(model, instr)
        except (ValueError, IndexError, AttributeError, classfile.DanglingIndex) as exc:
            return "cannot resolve effect of %s at %d: %s" % (instr.mnemonic, offset, exc)
        if depth - consume < 0:
            return "stack underflow at %d (%s needs %d, has %d)" % (
                offset, instr.mnemonic, consume, depth)
        after = depth - consume + produce
        if after > view.max_stack:
            return "stack overflow at %d (%d > max_stack %d)" % (
                offset, after, view.max_stack)
        opcode = instr.opcode
        if opcode == 0xA9 or (opcode == OP_WIDE and instr.operands and
                              instr.operands[0] == 0xA9):
            continue  # subroutine return: successor unknown, path ends here
        for target in branch_targets(instr):
            work.append((target, after))
        if opcode == 0xA8 or opcode == 0xC9:
            # the jsr fallthrough resumes after the subroutine rets, without
            # the pushed return address
            work.append((instr.offset + instr.length, after - 1))
        elif falls_through(opcode):
            nxt = instr.offset + instr.length
            if nxt >= code_len:
                return "%s at %d falls off the end of the code" % (instr.mnemonic, offset)
            work.append((nxt, after))
    return None


# --- source snippet emission -------------------------------------------------

# the five arithmetic dummy shapes, emitted verbatim modulo the method name
_SHAPE_TEMPLATES = {
    "R": '''private void R(int k){
    int i, j;
    for(i = 0; i < 100 ; i++){
        if(k % i != 0) {
            System.out.println("no." + i + " is OK.");
        }
    }
    for(i = 0; i < 10 ; i++){
        for(j = 0; j < 10 ; j++){
            k = k * 10 + i * 20 + j * 30;
        }
        for(j = 0; j < 50 ; j++){
            k+=j*3;
        }
    }
    System.out.println("k = " + k);
    for(i = 0; i < 20 ; i++){
        k+=i*5;
    }
    System.out.println("k = " + k);
}
''',
    "S": '''private void S(int k){
    int i, j;
    int[] A;
    A = new int[100];
    A[0] = 105;
    A[1] = 127;
    A[2] = 51;
    A[3] = 16;
    A[4] = 44;
    A[5] = 74;
    A[6] = 84;
    System.out.println("k = " + k);
    for(i = 0; i < 7 ; i++){
        System.out.println("A["+ i + "] = " + A[i]);
    }
    for(i = 0; i < 7 ; i++){
        A[i] = k * i;
        System.out.println("A["+ i + "] = " + A[i]);
    }
    for(i = 0; i < 100 ; i++){
        A[i] += k + i * 5;
        System.out.println("A["+ i + "] = " + A[i]);
    }
}
''',
    "X": '''private void X(int k){
    int i, j;
    for(i = 0; i < 10 ; i++)
        for(j = 0; j < 10 ; j++) k+=i*10+j;
    System.out.println("k = " + k);
    for(i = 0; i < 20 ; i++)
        for(j = 0; j < 30 ; j++) k+=i*3-j;
    System.out.println("k = " + k);
    for(i = 0; i < 25 ; i++)
        for(j = 0; j < 20 ; j++) k+=i*4-j*3;
    System.out.println("k = " + k);
}
''',
    "Y": '''private void Y(int k){
    int i, j;
    int t;
    int tmp;
    int[] A;
    if(k > 100) return;
    A = new int[100];
    for(i = 0; i < 100; i++){
        A[i] = i * 10 + k;
    }
    t = 0;
    for(i = 0; i < k; i++){
        t += A[i]/A[i-k];
    }
    System.out.println("k = " + k);
    System.out.println("t = " + t);
    for(i = 0; i < 100 ; i++){
        for(j = 0; j < k ; j++){
            A[i] = k + j;
        }
        System.out.println("A[" + i + "] = " + A[i]);
    }
    for(i = 0; i < 100 ; i++)
        for(j = 0; j < 100 ; j++) k += i * 5;
    System.out.println("k = " + k);
}
''',
    "Z": '''private void Z(int k){
    int i, j;
    int tmp;
    int[] A;
    A = new int[100];
    A[0] = 5;
    A[1] = 7;
    A[2] = 1;
    A[3] = 6;
    A[4] = 4;
    System.out.println("k = " + k);
    for(i = 0; i < 5 ; i++){
        System.out.println("A[" + i + "] = " + A[i]);
    }
    for(i = 0; i < 4; i++){
        for(j = 1; j < 5; j++){
            if(A[j] < A[i]){
                tmp = A[j];
                A[i] = A[j];
                A[j] = tmp;
            }
        }
    }
    for(i = 0; i < 5 ; i++){
        System.out.println("A["+ i + "] = " + A[i]);
    }
    for(i = 0; i < 5 ; i++){
        for(j = 0; i < 100 ; j++){
            A[i] += k + j * 5;
        }
        System.out.println("A["+ i + "] = " + A[i]);
    }
}
''',
}

_NODE_RING_SOURCE = '''public class Node {
    public boolean token;
    public Node head, tail;
    public Node() {
        this.token = false;
        this.head = this.tail = this;
    }
    public Node addNode() {
        Node p = new Node();
        p.head = this.tail;
        this.head = p;
        return p;
    }
    Node MoveNext () {
        return this.tail.head;
    }
    Node MoveBack () {
        return this.head.tail;
    }
}
'''

_RING_SETUP_SOURCE = '''g = new Node();
g.token = true;
h = new Node();
h.token = true;
p = g.addNode();
q = h.addNode();
'''

_THREAD_MOVERS_SOURCE = '''t = new Thread(this);
s = new Thread(this);
t.start();
s.start();

public void run() {
    while (true) {
        Thread ct = Thread.currentThread();
        if (ct == t) {
            p = p.MoveNext();
        } else if (ct == s) {
            q = q.MoveBack();
        }
        try {
            if (ct == t) {
                Thread.sleep(12000);
            } else if (ct == s) {
                Thread.sleep(4000);
            }
        } catch (InterruptedException ie) {}
    }
}
'''

_GUARD_UNCONDITIONAL = '''b2 = (h.equals(p) || p.token);
b1 = p.token;
if (b2 && b1 && (g.equals(h))) {
    %(name)s(10);
}
'''

# the conditional grouping forces the second reference predicate false
# whenever the first holds, so the conjunction can never fire
_GUARD_CONDITIONAL = '''boolean p1 = p.token;
boolean p2 = (h.equals(p) || q.token);
if (p1) p2 = false;
b1 = p.token;
if (p1 && p2 && b1) {
    %(name)s(10);
}
'''


def emit_source_snippets(spec: DummySpec, algorithm: str = "I") -> dict:
    """Text bundle for manual insertion: {artifact name: source text}.

    algorithm "I" guards with a structurally-false ring-inequality
    atom; "II" emits the conditional enforcement line instead.
    """
    if algorithm not in ("I", "II"):
        raise ValueError("algorithm must be 'I' or 'II'")
    template = _SHAPE_TEMPLATES[spec.shape]
    dummy = template.replace("private void %s(int k)" % spec.shape,
                             "private void %s(int k)" % spec.name, 1)
    guard = (_GUARD_UNCONDITIONAL if algorithm == "I" else _GUARD_CONDITIONAL)
    return {
        "dummy_method.java": dummy,
        "node_ring.java": _NODE_RING_SOURCE,
        "ring_setup.java": _RING_SETUP_SOURCE,
        "thread_movers.java": _THREAD_MOVERS_SOURCE,
        "guard.java": guard % {"name": spec.name},
    }


def write_snippets(bundle: dict, directory) -> list:
    """Write each artifact as a UTF-8 text file; returns the paths."""
    import os
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, text in sorted(bundle.items()):
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        paths.append(path)
    return paths
