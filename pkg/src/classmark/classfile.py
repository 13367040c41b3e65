"""Java class file model with bit-exact parse/serialize.

The model keeps every structure the toolkit mutates (constant pool,
members, Code / LineNumberTable / LocalVariableTable / SourceFile
attributes) as typed values and everything else as opaque byte blobs,
so serialize(parse(data)) == data holds for any file that parses.

All multi-byte fields are big-endian. The constant pool list is
1-indexed: slot 0 is None, and the slot after a Long or Double entry
is None as well (those entries occupy two indices).
"""

import struct
from dataclasses import dataclass, field

MAGIC = 0xCAFEBABE

# constant pool tags
CONST_UTF8 = 1
CONST_INTEGER = 3
CONST_FLOAT = 4
CONST_LONG = 5
CONST_DOUBLE = 6
CONST_CLASS = 7
CONST_STRING = 8
CONST_FIELDREF = 9
CONST_METHODREF = 10
CONST_INTERFACE_METHODREF = 11
CONST_NAME_AND_TYPE = 12

# access flags
ACC_PUBLIC = 0x0001
ACC_PRIVATE = 0x0002
ACC_PROTECTED = 0x0004
ACC_STATIC = 0x0008
ACC_FINAL = 0x0010
ACC_SUPER = 0x0020
ACC_SYNCHRONIZED = 0x0020
ACC_VOLATILE = 0x0040
ACC_TRANSIENT = 0x0080
ACC_NATIVE = 0x0100
ACC_INTERFACE = 0x0200
ACC_ABSTRACT = 0x0400


class BadMagic(Exception):
    """Stream does not start with 0xCAFEBABE."""


class Truncated(Exception):
    """Stream ended early, or carries trailing data past the last attribute."""


class BadPoolTag(Exception):
    """Unknown constant pool tag byte."""


class DanglingIndex(Exception):
    """A stored pool index does not resolve to an entry of the required tag."""


class IndexOverflow(Exception):
    """A count or index exceeds its u2/u4 field width."""


@dataclass
class Utf8Entry:
    # raw modified-UTF-8 bytes; kept as bytes so non-ASCII round-trips exactly
    data: bytes
    tag = CONST_UTF8

    @property
    def text(self) -> str:
        return self.data.decode("utf-8", "replace")


@dataclass
class IntegerEntry:
    raw: int  # unsigned 32-bit image
    tag = CONST_INTEGER


@dataclass
class FloatEntry:
    raw: int  # unsigned 32-bit image, preserves NaN payloads
    tag = CONST_FLOAT


@dataclass
class LongEntry:
    raw: int  # unsigned 64-bit image
    tag = CONST_LONG


@dataclass
class DoubleEntry:
    raw: int  # unsigned 64-bit image
    tag = CONST_DOUBLE


@dataclass
class ClassEntry:
    name_index: int
    tag = CONST_CLASS


@dataclass
class StringEntry:
    string_index: int
    tag = CONST_STRING


@dataclass
class FieldrefEntry:
    class_index: int
    name_and_type_index: int
    tag = CONST_FIELDREF


@dataclass
class MethodrefEntry:
    class_index: int
    name_and_type_index: int
    tag = CONST_METHODREF


@dataclass
class InterfaceMethodrefEntry:
    class_index: int
    name_and_type_index: int
    tag = CONST_INTERFACE_METHODREF


@dataclass
class NameAndTypeEntry:
    name_index: int
    descriptor_index: int
    tag = CONST_NAME_AND_TYPE


MEMBER_REF_TAGS = (CONST_FIELDREF, CONST_METHODREF, CONST_INTERFACE_METHODREF)


@dataclass
class ExceptionHandler:
    start_pc: int
    end_pc: int
    handler_pc: int
    catch_type: int  # 0 = catch-all


@dataclass
class CodeView:
    """Parsed Code attribute: the only attribute the embedder mutates."""

    max_stack: int
    max_locals: int
    code: bytes
    exception_table: list = field(default_factory=list)
    attributes: list = field(default_factory=list)


@dataclass
class LineNumberTableView:
    entries: list  # of (start_pc, line_number)


@dataclass
class LocalVariableTableView:
    entries: list  # of (start_pc, length, name_index, descriptor_index, index)


@dataclass
class SourceFileView:
    sourcefile_index: int


@dataclass
class AttributeBlob:
    """An attribute: either an opaque payload or a parsed view.

    When `parsed` is set, `data` is ignored and serialization rebuilds
    the payload from the view; the parser only installs a view after
    checking that the rebuild is byte-identical to the original payload.
    """

    name_index: int
    data: bytes = b""
    parsed: object = None


@dataclass
class MemberInfo:
    access_flags: int
    name_index: int
    descriptor_index: int
    attributes: list = field(default_factory=list)


@dataclass
class ClassFileModel:
    minor_version: int
    major_version: int
    constant_pool: list  # [None, entry, ...]; None after Long/Double
    access_flags: int
    this_class: int
    super_class: int
    interfaces: list
    fields: list
    methods: list
    attributes: list
    magic: int = MAGIC


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _need(self, n: int):
        if self.pos + n > len(self.data):
            raise Truncated("need %d bytes at offset %d, have %d"
                            % (n, self.pos, len(self.data) - self.pos))

    def u1(self) -> int:
        self._need(1)
        v = self.data[self.pos]
        self.pos += 1
        return v

    def u2(self) -> int:
        self._need(2)
        (v,) = struct.unpack_from(">H", self.data, self.pos)
        self.pos += 2
        return v

    def u4(self) -> int:
        self._need(4)
        (v,) = struct.unpack_from(">I", self.data, self.pos)
        self.pos += 4
        return v

    def raw(self, n: int) -> bytes:
        self._need(n)
        v = self.data[self.pos:self.pos + n]
        self.pos += n
        return v

    @property
    def at_end(self) -> bool:
        return self.pos == len(self.data)


class _Writer:
    __slots__ = ("parts", "length")

    def __init__(self):
        self.parts = []
        self.length = 0

    def u1(self, v: int):
        self.parts.append(struct.pack(">B", v))
        self.length += 1

    def u2(self, v: int):
        if not 0 <= v <= 0xFFFF:
            raise IndexOverflow("value %d does not fit in u2" % v)
        self.parts.append(struct.pack(">H", v))
        self.length += 2

    def u4(self, v: int):
        if not 0 <= v <= 0xFFFFFFFF:
            raise IndexOverflow("value %d does not fit in u4" % v)
        self.parts.append(struct.pack(">I", v))
        self.length += 4

    def raw(self, b: bytes):
        self.parts.append(b)
        self.length += len(b)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


def _parse_pool_entry(r: _Reader):
    tag = r.u1()
    if tag == CONST_UTF8:
        return Utf8Entry(r.raw(r.u2()))
    if tag == CONST_INTEGER:
        return IntegerEntry(r.u4())
    if tag == CONST_FLOAT:
        return FloatEntry(r.u4())
    if tag == CONST_LONG:
        return LongEntry((r.u4() << 32) | r.u4())
    if tag == CONST_DOUBLE:
        return DoubleEntry((r.u4() << 32) | r.u4())
    if tag == CONST_CLASS:
        return ClassEntry(r.u2())
    if tag == CONST_STRING:
        return StringEntry(r.u2())
    if tag == CONST_FIELDREF:
        return FieldrefEntry(r.u2(), r.u2())
    if tag == CONST_METHODREF:
        return MethodrefEntry(r.u2(), r.u2())
    if tag == CONST_INTERFACE_METHODREF:
        return InterfaceMethodrefEntry(r.u2(), r.u2())
    if tag == CONST_NAME_AND_TYPE:
        return NameAndTypeEntry(r.u2(), r.u2())
    raise BadPoolTag("unknown constant pool tag %d at offset %d" % (tag, r.pos - 1))


def _pool_utf8(pool: list, index: int) -> Utf8Entry:
    if not 1 <= index < len(pool) or not isinstance(pool[index], Utf8Entry):
        raise DanglingIndex("index %d is not a Utf8 entry" % index)
    return pool[index]


def _parse_attribute(r: _Reader, pool: list) -> AttributeBlob:
    name_index = r.u2()
    name = _pool_utf8(pool, name_index).text
    data = r.raw(r.u4())
    attr = AttributeBlob(name_index, data)
    view = _try_parse_view(name, data, pool)
    if view is not None:
        attr.parsed = view
        attr.data = b""
    return attr


def _try_parse_view(name: str, data: bytes, pool: list):
    """Parse a known attribute payload, or return None to keep it opaque.

    The view is only accepted if re-serializing it reproduces the raw
    payload exactly; anything nonstandard stays an opaque blob.
    """
    try:
        if name == "Code":
            view = _parse_code(data, pool)
        elif name == "LineNumberTable":
            view = _parse_lnt(data)
        elif name == "LocalVariableTable":
            view = _parse_lvt(data)
        elif name == "SourceFile":
            view = _parse_sourcefile(data)
        else:
            return None
    except (Truncated, DanglingIndex, struct.error):
        return None
    if _serialize_view(view) != data:
        return None
    return view


def _parse_code(data: bytes, pool: list) -> CodeView:
    r = _Reader(data)
    max_stack = r.u2()
    max_locals = r.u2()
    code = r.raw(r.u4())
    table = [ExceptionHandler(r.u2(), r.u2(), r.u2(), r.u2())
             for _ in range(r.u2())]
    attrs = [_parse_attribute(r, pool) for _ in range(r.u2())]
    if not r.at_end:
        raise Truncated("trailing data inside Code attribute")
    return CodeView(max_stack, max_locals, code, table, attrs)


def _parse_lnt(data: bytes) -> LineNumberTableView:
    r = _Reader(data)
    entries = [(r.u2(), r.u2()) for _ in range(r.u2())]
    if not r.at_end:
        raise Truncated("trailing data inside LineNumberTable")
    return LineNumberTableView(entries)


def _parse_lvt(data: bytes) -> LocalVariableTableView:
    r = _Reader(data)
    entries = [(r.u2(), r.u2(), r.u2(), r.u2(), r.u2()) for _ in range(r.u2())]
    if not r.at_end:
        raise Truncated("trailing data inside LocalVariableTable")
    return LocalVariableTableView(entries)


def _parse_sourcefile(data: bytes) -> SourceFileView:
    r = _Reader(data)
    view = SourceFileView(r.u2())
    if not r.at_end:
        raise Truncated("trailing data inside SourceFile")
    return SourceFileView(view.sourcefile_index)


def _parse_member(r: _Reader, pool: list) -> MemberInfo:
    flags = r.u2()
    name_index = r.u2()
    descriptor_index = r.u2()
    attrs = [_parse_attribute(r, pool) for _ in range(r.u2())]
    return MemberInfo(flags, name_index, descriptor_index, attrs)


def parse(data: bytes) -> ClassFileModel:
    """Parse class file bytes into a model; strict about structure."""
    r = _Reader(data)
    magic = r.u4()
    if magic != MAGIC:
        raise BadMagic("bad magic 0x%08X" % magic)
    minor = r.u2()
    major = r.u2()
    count = r.u2()
    pool: list = [None]
    while len(pool) < count:
        entry = _parse_pool_entry(r)
        pool.append(entry)
        if isinstance(entry, (LongEntry, DoubleEntry)):
            # second slot of an 8-byte constant
            pool.append(None)
    if len(pool) != count:
        # a Long/Double in the final slot claimed the phantom index past the pool
        raise BadPoolTag("8-byte constant overruns declared pool count %d" % count)
    access_flags = r.u2()
    this_class = r.u2()
    super_class = r.u2()
    interfaces = [r.u2() for _ in range(r.u2())]
    fields = [_parse_member(r, pool) for _ in range(r.u2())]
    methods = [_parse_member(r, pool) for _ in range(r.u2())]
    attributes = [_parse_attribute(r, pool) for _ in range(r.u2())]
    if not r.at_end:
        raise Truncated("trailing data after class attributes (offset %d of %d)"
                        % (r.pos, len(r.data)))
    model = ClassFileModel(minor, major, pool, access_flags, this_class,
                           super_class, interfaces, fields, methods,
                           attributes, magic)
    validate(model)
    return model


def _serialize_view(view) -> bytes:
    w = _Writer()
    if isinstance(view, CodeView):
        w.u2(view.max_stack)
        w.u2(view.max_locals)
        w.u4(len(view.code))
        w.raw(view.code)
        w.u2(len(view.exception_table))
        for h in view.exception_table:
            w.u2(h.start_pc)
            w.u2(h.end_pc)
            w.u2(h.handler_pc)
            w.u2(h.catch_type)
        w.u2(len(view.attributes))
        for a in view.attributes:
            _serialize_attribute(w, a)
    elif isinstance(view, LineNumberTableView):
        w.u2(len(view.entries))
        for start_pc, line in view.entries:
            w.u2(start_pc)
            w.u2(line)
    elif isinstance(view, LocalVariableTableView):
        w.u2(len(view.entries))
        for entry in view.entries:
            for v in entry:
                w.u2(v)
    elif isinstance(view, SourceFileView):
        w.u2(view.sourcefile_index)
    else:
        raise TypeError("not an attribute view: %r" % (view,))
    return w.getvalue()


def _serialize_attribute(w: _Writer, attr: AttributeBlob):
    payload = _serialize_view(attr.parsed) if attr.parsed is not None else attr.data
    w.u2(attr.name_index)
    w.u4(len(payload))
    w.raw(payload)


def _serialize_member(w: _Writer, m: MemberInfo):
    w.u2(m.access_flags)
    w.u2(m.name_index)
    w.u2(m.descriptor_index)
    w.u2(len(m.attributes))
    for a in m.attributes:
        _serialize_attribute(w, a)


def _write_pool(w: _Writer, pool: list):
    w.u2(len(pool))
    expect_placeholder = False
    for i, entry in enumerate(pool):
        if i == 0:
            continue
        if entry is None:
            if not expect_placeholder:
                raise DanglingIndex("pool slot %d is an orphan placeholder" % i)
            expect_placeholder = False
            continue
        if expect_placeholder:
            raise DanglingIndex("pool slot %d should be a placeholder" % i)
        tag = entry.tag
        w.u1(tag)
        if tag == CONST_UTF8:
            w.u2(len(entry.data))
            w.raw(entry.data)
        elif tag in (CONST_INTEGER, CONST_FLOAT):
            w.u4(entry.raw)
        elif tag in (CONST_LONG, CONST_DOUBLE):
            w.u4(entry.raw >> 32)
            w.u4(entry.raw & 0xFFFFFFFF)
            expect_placeholder = True
        elif tag == CONST_CLASS:
            w.u2(entry.name_index)
        elif tag == CONST_STRING:
            w.u2(entry.string_index)
        elif tag in MEMBER_REF_TAGS:
            w.u2(entry.class_index)
            w.u2(entry.name_and_type_index)
        elif tag == CONST_NAME_AND_TYPE:
            w.u2(entry.name_index)
            w.u2(entry.descriptor_index)
        else:
            raise BadPoolTag("cannot serialize tag %d" % tag)
    if expect_placeholder:
        raise DanglingIndex("pool ends inside an 8-byte constant")


def serialize(model: ClassFileModel) -> bytes:
    w = _Writer()
    w.u4(model.magic)
    w.u2(model.minor_version)
    w.u2(model.major_version)
    _write_pool(w, model.constant_pool)
    w.u2(model.access_flags)
    w.u2(model.this_class)
    w.u2(model.super_class)
    w.u2(len(model.interfaces))
    for i in model.interfaces:
        w.u2(i)
    w.u2(len(model.fields))
    for f in model.fields:
        _serialize_member(w, f)
    w.u2(len(model.methods))
    for m in model.methods:
        _serialize_member(w, m)
    w.u2(len(model.attributes))
    for a in model.attributes:
        _serialize_attribute(w, a)
    return w.getvalue()


def code_spans(model: ClassFileModel) -> dict:
    """Byte range of each method's code array in serialize(model).

    Returns {method_index: (start, end)} over methods that have a Code
    view. Used to prove an embedding touched nothing outside its target.
    """
    prefix = _Writer()
    prefix.u4(model.magic)
    prefix.u2(model.minor_version)
    prefix.u2(model.major_version)
    _write_pool(prefix, model.constant_pool)
    prefix.u2(model.access_flags)
    prefix.u2(model.this_class)
    prefix.u2(model.super_class)
    prefix.u2(len(model.interfaces))
    for i in model.interfaces:
        prefix.u2(i)
    prefix.u2(len(model.fields))
    for f in model.fields:
        _serialize_member(prefix, f)
    prefix.u2(len(model.methods))
    pos = prefix.length
    spans = {}
    for idx, m in enumerate(model.methods):
        pos += 8  # flags, name, descriptor, attr count
        for a in m.attributes:
            payload = _serialize_view(a.parsed) if a.parsed is not None else a.data
            pos += 6  # name index + length
            if isinstance(a.parsed, CodeView):
                start = pos + 8  # max_stack, max_locals, code_length
                spans[idx] = (start, start + len(a.parsed.code))
            pos += len(payload)
    return spans


def validate(model: ClassFileModel):
    """Check pool-index closure; raises DanglingIndex on the first hole.

    Re-run after any mutation (embed, rename, strip, trim, synthesis).
    """
    pool = model.constant_pool

    def want(index, cls, what, zero_ok=False):
        if index == 0:
            if zero_ok:
                return
            raise DanglingIndex("%s index is 0" % what)
        if not 1 <= index < len(pool) or not isinstance(pool[index], cls):
            raise DanglingIndex("%s index %d does not resolve to %s"
                                % (what, index, cls.__name__))

    for i, entry in enumerate(pool):
        if entry is None:
            continue
        if isinstance(entry, ClassEntry):
            want(entry.name_index, Utf8Entry, "Class.name")
        elif isinstance(entry, StringEntry):
            want(entry.string_index, Utf8Entry, "String.string")
        elif isinstance(entry, (FieldrefEntry, MethodrefEntry, InterfaceMethodrefEntry)):
            want(entry.class_index, ClassEntry, "ref.class")
            want(entry.name_and_type_index, NameAndTypeEntry, "ref.name_and_type")
        elif isinstance(entry, NameAndTypeEntry):
            want(entry.name_index, Utf8Entry, "NameAndType.name")
            want(entry.descriptor_index, Utf8Entry, "NameAndType.descriptor")
    want(model.this_class, ClassEntry, "this_class")
    want(model.super_class, ClassEntry, "super_class", zero_ok=True)
    for idx in model.interfaces:
        want(idx, ClassEntry, "interface")

    def check_attrs(attrs):
        for a in attrs:
            want(a.name_index, Utf8Entry, "attribute.name")
            if isinstance(a.parsed, CodeView):
                for h in a.parsed.exception_table:
                    want(h.catch_type, ClassEntry, "handler.catch_type", zero_ok=True)
                check_attrs(a.parsed.attributes)
            elif isinstance(a.parsed, SourceFileView):
                want(a.parsed.sourcefile_index, Utf8Entry, "SourceFile.sourcefile")
            elif isinstance(a.parsed, LocalVariableTableView):
                for _, _, name_i, desc_i, _ in a.parsed.entries:
                    want(name_i, Utf8Entry, "LocalVariable.name")
                    want(desc_i, Utf8Entry, "LocalVariable.descriptor")

    for member in list(model.fields) + list(model.methods):
        want(member.name_index, Utf8Entry, "member.name")
        want(member.descriptor_index, Utf8Entry, "member.descriptor")
        check_attrs(member.attributes)
    check_attrs(model.attributes)


# --- pool and member helpers -------------------------------------------------

def utf8_text(model: ClassFileModel, index: int) -> str:
    return _pool_utf8(model.constant_pool, index).text


def add_utf8(model: ClassFileModel, text: str) -> int:
    """Find or append a Utf8 entry; returns its pool index."""
    data = text.encode("utf-8")
    for i, entry in enumerate(model.constant_pool):
        if isinstance(entry, Utf8Entry) and entry.data == data:
            return i
    return add_entry(model, Utf8Entry(data))


def add_entry(model: ClassFileModel, entry) -> int:
    """Append a pool entry (no dedup); returns its index."""
    pool = model.constant_pool
    index = len(pool)
    slots = 2 if isinstance(entry, (LongEntry, DoubleEntry)) else 1
    if index + slots > 0xFFFF:
        raise IndexOverflow("constant pool is full")
    pool.append(entry)
    if slots == 2:
        pool.append(None)
    return index


def member_name(model: ClassFileModel, member: MemberInfo) -> str:
    return utf8_text(model, member.name_index)


def member_descriptor(model: ClassFileModel, member: MemberInfo) -> str:
    return utf8_text(model, member.descriptor_index)


def class_name(model: ClassFileModel, class_index: int = 0) -> str:
    index = class_index or model.this_class
    entry = model.constant_pool[index]
    if not isinstance(entry, ClassEntry):
        raise DanglingIndex("index %d is not a Class entry" % index)
    return utf8_text(model, entry.name_index)


def code_of(member: MemberInfo):
    """The member's CodeView, or None (abstract/native, or field)."""
    for a in member.attributes:
        if isinstance(a.parsed, CodeView):
            return a.parsed
    return None


def find_methods(model: ClassFileModel, predicate=None):
    """Methods with code matching predicate(name, descriptor, flags).

    Returns [(method_index, CodeView)] in file order; a None predicate
    matches everything. Abstract and native methods never appear.
    """
    out = []
    for idx, m in enumerate(model.methods):
        code = code_of(m)
        if code is None:
            continue
        if predicate is None or predicate(member_name(model, m),
                                          member_descriptor(model, m),
                                          m.access_flags):
            out.append((idx, code))
    return out
