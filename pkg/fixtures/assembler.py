"""Minimal class-file assembler for building the fixture corpus.

Deliberately independent of the main package: fixtures are inputs to
its test suite, so they must not be produced by the code under test.
Only what the corpus needs is supported: the eleven constant-pool tags,
u1/u2-operand instructions, label-resolved branches, both switch
forms, and Code/LineNumberTable/LocalVariableTable/SourceFile/
ConstantValue attributes.
"""

import struct

MAGIC = 0xCAFEBABE

ACC_PUBLIC = 0x0001
ACC_PRIVATE = 0x0002
ACC_STATIC = 0x0008
ACC_FINAL = 0x0010
ACC_SUPER = 0x0020


class PoolBuilder:
    """Deduplicating constant-pool builder; indexes are 1-based."""

    def __init__(self):
        self.entries = [None]  # slot 0 unused
        self._memo = {}

    def _add(self, key, slots=1):
        if key in self._memo:
            return self._memo[key]
        index = len(self.entries)
        if index + slots > 0xFFFF:
            raise OverflowError("constant pool full")
        self.entries.append(key)
        for _ in range(slots - 1):
            self.entries.append(None)
        self._memo[key] = index
        return index

    def utf8(self, text: str) -> int:
        return self._add(("utf8", text.encode("utf-8")))

    def integer(self, value: int) -> int:
        return self._add(("int", value & 0xFFFFFFFF))

    def float_raw(self, bits: int) -> int:
        return self._add(("float", bits & 0xFFFFFFFF))

    def long_(self, value: int) -> int:
        return self._add(("long", value & 0xFFFFFFFFFFFFFFFF), slots=2)

    def double_raw(self, bits: int) -> int:
        return self._add(("double", bits & 0xFFFFFFFFFFFFFFFF), slots=2)

    def cls(self, name: str) -> int:
        return self._add(("class", self.utf8(name)))

    def string(self, text: str) -> int:
        return self._add(("string", self.utf8(text)))

    def nat(self, name: str, desc: str) -> int:
        return self._add(("nat", self.utf8(name), self.utf8(desc)))

    def fieldref(self, cls: str, name: str, desc: str) -> int:
        return self._add(("fieldref", self.cls(cls), self.nat(name, desc)))

    def methodref(self, cls: str, name: str, desc: str) -> int:
        return self._add(("methodref", self.cls(cls), self.nat(name, desc)))

    def ifaceref(self, cls: str, name: str, desc: str) -> int:
        return self._add(("ifaceref", self.cls(cls), self.nat(name, desc)))

    def build(self) -> bytes:
        out = [struct.pack(">H", len(self.entries))]
        for entry in self.entries[1:]:
            if entry is None:
                continue  # the high half of a long/double
            tag = entry[0]
            if tag == "utf8":
                out.append(struct.pack(">BH", 1, len(entry[1])) + entry[1])
            elif tag == "int":
                out.append(struct.pack(">BI", 3, entry[1]))
            elif tag == "float":
                out.append(struct.pack(">BI", 4, entry[1]))
            elif tag == "long":
                out.append(struct.pack(">BQ", 5, entry[1]))
            elif tag == "double":
                out.append(struct.pack(">BQ", 6, entry[1]))
            elif tag == "class":
                out.append(struct.pack(">BH", 7, entry[1]))
            elif tag == "string":
                out.append(struct.pack(">BH", 8, entry[1]))
            elif tag == "fieldref":
                out.append(struct.pack(">BHH", 9, entry[1], entry[2]))
            elif tag == "methodref":
                out.append(struct.pack(">BHH", 10, entry[1], entry[2]))
            elif tag == "ifaceref":
                out.append(struct.pack(">BHH", 11, entry[1], entry[2]))
            elif tag == "nat":
                out.append(struct.pack(">BHH", 12, entry[1], entry[2]))
            else:
                raise ValueError("unknown tag %r" % tag)
        return b"".join(out)


OPS = {
    "iconst_m1": 0x02, "iconst_0": 0x03, "iconst_1": 0x04, "iconst_2": 0x05,
    "iconst_3": 0x06, "iconst_4": 0x07, "iconst_5": 0x08,
    "bipush": 0x10, "ldc": 0x12,
    "iload": 0x15, "aload": 0x19,
    "iload_0": 0x1A, "iload_1": 0x1B, "iload_2": 0x1C, "iload_3": 0x1D,
    "aload_0": 0x2A, "aload_1": 0x2B, "aload_2": 0x2C, "aload_3": 0x2D,
    "iaload": 0x2E,
    "istore": 0x36, "astore": 0x3A,
    "istore_0": 0x3B, "istore_1": 0x3C, "istore_2": 0x3D, "istore_3": 0x3E,
    "astore_0": 0x4B, "astore_1": 0x4C, "astore_2": 0x4D, "astore_3": 0x4E,
    "iastore": 0x4F,
    "dup": 0x59, "iadd": 0x60, "isub": 0x64, "imul": 0x68, "idiv": 0x6C,
    "irem": 0x70, "ineg": 0x74, "iand": 0x7E, "ior": 0x80, "ixor": 0x82,
    "iinc": 0x84,
    "ifeq": 0x99, "ifne": 0x9A, "iflt": 0x9B, "ifge": 0x9C, "ifgt": 0x9D,
    "ifle": 0x9E,
    "if_icmpeq": 0x9F, "if_icmpne": 0xA0, "if_icmplt": 0xA1, "if_icmpge": 0xA2,
    "if_icmpgt": 0xA3, "if_icmple": 0xA4,
    "goto": 0xA7, "tableswitch": 0xAA, "lookupswitch": 0xAB,
    "ireturn": 0xAC, "areturn": 0xB0, "return": 0xB1,
    "getstatic": 0xB2, "putstatic": 0xB3, "getfield": 0xB4, "putfield": 0xB5,
    "invokevirtual": 0xB6, "invokespecial": 0xB7, "invokestatic": 0xB8,
    "invokeinterface": 0xB9,
    "new": 0xBB, "newarray": 0xBC, "ifnull": 0xC6, "ifnonnull": 0xC7,
}

_BRANCH_OPS = {OPS[n] for n in ("ifeq", "ifne", "iflt", "ifge", "ifgt",
                                "ifle", "if_icmpeq", "if_icmpne", "if_icmplt",
                                "if_icmpge", "if_icmpgt", "if_icmple", "goto",
                                "ifnull", "ifnonnull")}


class Asm:
    """Label-based code assembler (two-pass, switch padding resolved)."""

    def __init__(self):
        self.items = []  # ("bytes", b) | ("branch", op, label)
        #                | ("label", name) | ("tswitch", ...) | ("lswitch", ...)
        self.lines = []  # (pc, line number), filled in by assemble()

    def op(self, name: str, *operands: int):
        self.items.append(("bytes", bytes((OPS[name],) + operands)))
        return self

    def u2(self, name: str, index: int):
        self.items.append(("bytes", struct.pack(">BH", OPS[name], index)))
        return self

    def invokeinterface(self, index: int, count: int):
        self.items.append(("bytes", struct.pack(">BHBB", OPS["invokeinterface"],
                                                index, count, 0)))
        return self

    def iinc(self, local: int, const: int):
        self.items.append(("bytes", struct.pack(">BBb", OPS["iinc"],
                                                local, const)))
        return self

    def branch(self, name: str, label: str):
        opcode = OPS[name]
        if opcode not in _BRANCH_OPS:
            raise ValueError("%s is not a branch" % name)
        self.items.append(("branch", opcode, label))
        return self

    def label(self, name: str):
        self.items.append(("label", name))
        return self

    def line(self, number: int):
        """Mark the next instruction's pc with a source line number."""
        self.items.append(("line", number))
        return self

    def tableswitch(self, default: str, low: int, targets: list):
        self.items.append(("tswitch", default, low, list(targets)))
        return self

    def lookupswitch(self, default: str, pairs: list):
        self.items.append(("lswitch", default, sorted(pairs)))
        return self

    def _sizes(self):
        offsets = []
        labels = {}
        self.lines = []
        pos = 0
        for item in self.items:
            offsets.append(pos)
            kind = item[0]
            if kind == "bytes":
                pos += len(item[1])
            elif kind == "branch":
                pos += 3
            elif kind == "label":
                labels[item[1]] = pos
            elif kind == "line":
                self.lines.append((pos, item[1]))
            elif kind == "tswitch":
                pad = (4 - ((pos + 1) % 4)) % 4
                pos += 1 + pad + 12 + 4 * len(item[3])
            elif kind == "lswitch":
                pad = (4 - ((pos + 1) % 4)) % 4
                pos += 1 + pad + 8 + 8 * len(item[2])
        return offsets, labels

    def assemble(self) -> bytes:
        offsets, labels = self._sizes()
        out = bytearray()
        for item, base in zip(self.items, offsets):
            kind = item[0]
            if kind == "bytes":
                out += item[1]
            elif kind in ("label", "line"):
                continue
            elif kind == "branch":
                out += struct.pack(">Bh", item[1], labels[item[2]] - base)
            elif kind == "tswitch":
                _, default, low, targets = item
                pad = (4 - ((base + 1) % 4)) % 4
                out += bytes((OPS["tableswitch"],)) + b"\x00" * pad
                out += struct.pack(">iii", labels[default] - base, low,
                                   low + len(targets) - 1)
                for t in targets:
                    out += struct.pack(">i", labels[t] - base)
            elif kind == "lswitch":
                _, default, pairs = item
                pad = (4 - ((base + 1) % 4)) % 4
                out += bytes((OPS["lookupswitch"],)) + b"\x00" * pad
                out += struct.pack(">ii", labels[default] - base, len(pairs))
                for match, target in pairs:
                    out += struct.pack(">ii", match, labels[target] - base)
        return bytes(out)


def attribute(pool: PoolBuilder, name: str, payload: bytes) -> bytes:
    return struct.pack(">HI", pool.utf8(name), len(payload)) + payload


def code_attribute(pool: PoolBuilder, max_stack: int, max_locals: int,
                   code: bytes, lines=None, local_vars=None) -> bytes:
    sub = []
    if lines:
        payload = struct.pack(">H", len(lines)) + b"".join(
            struct.pack(">HH", pc, line) for pc, line in lines)
        sub.append(attribute(pool, "LineNumberTable", payload))
    if local_vars:
        payload = struct.pack(">H", len(local_vars)) + b"".join(
            struct.pack(">HHHHH", start, length, pool.utf8(name),
                        pool.utf8(desc), index)
            for start, length, name, desc, index in local_vars)
        sub.append(attribute(pool, "LocalVariableTable", payload))
    payload = (struct.pack(">HHI", max_stack, max_locals, len(code)) + code
               + struct.pack(">H", 0)  # no exception table
               + struct.pack(">H", len(sub)) + b"".join(sub))
    return attribute(pool, "Code", payload)


def member(pool: PoolBuilder, flags: int, name: str, desc: str,
           attrs: list) -> bytes:
    return (struct.pack(">HHHH", flags, pool.utf8(name), pool.utf8(desc),
                        len(attrs)) + b"".join(attrs))


def const_field(pool: PoolBuilder, flags: int, name: str, desc: str,
                value_index: int) -> bytes:
    return member(pool, flags, name, desc,
                  [attribute(pool, "ConstantValue",
                             struct.pack(">H", value_index))])


def class_file(pool: PoolBuilder, flags: int, this_name: str,
               super_name: str, interfaces: list, fields: list,
               methods: list, source_file: str = None,
               major: int = 46) -> bytes:
    this_idx = pool.cls(this_name)
    super_idx = pool.cls(super_name)
    iface_idx = [pool.cls(name) for name in interfaces]
    attrs = []
    if source_file:
        attrs.append(attribute(pool, "SourceFile",
                               struct.pack(">H", pool.utf8(source_file))))
    body = struct.pack(">HHH", flags, this_idx, super_idx)
    body += struct.pack(">H", len(iface_idx))
    body += b"".join(struct.pack(">H", i) for i in iface_idx)
    body += struct.pack(">H", len(fields)) + b"".join(fields)
    body += struct.pack(">H", len(methods)) + b"".join(methods)
    body += struct.pack(">H", len(attrs)) + b"".join(attrs)
    return struct.pack(">IHH", MAGIC, 0, major) + pool.build() + body
