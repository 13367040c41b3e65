#!/usr/bin/env python3
"""Offline fixture builder: assembles the corpus and writes the manifest.

Run from anywhere:  python3 fixtures/build.py [--out-dir DIR]

Class files are produced by the local assembler (no Java toolchain
needed) and committed; the manifest's method inventories and
capacities come from the installed `classmark` CLI, the same interface
the tests use, so the manifest never embeds assumptions beyond what a
consumer could observe.
"""

import argparse
import hashlib
import json
import os
import struct
import subprocess
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from assembler import (PoolBuilder, Asm, ACC_PUBLIC, ACC_PRIVATE, ACC_STATIC,
                       ACC_FINAL, ACC_SUPER, MAGIC, attribute, code_attribute,
                       member, const_field, class_file)

HERE = os.path.dirname(os.path.abspath(__file__))

WATERMARK_CONFIG = {
    "codebook": {
        " ": "0000", "I": "0001", "T": "0010", "S": "0011", "U": "0100",
        "R": "0101", "A": "0110", "B": "0111", "Y": "1000",
    },
    "key": {"bits": "1100101011", "op": "AND"},
    "mode": "replace_opcodes",
}


def hello_world_bytes() -> bytes:
    """HelloWorld.class laid out byte by byte, bypassing the assembler,
    so at least one committed file's layout owes nothing to any builder
    logic shared with other fixtures."""
    def u1(v): return struct.pack(">B", v)
    def u2(v): return struct.pack(">H", v)
    def u4(v): return struct.pack(">I", v)
    def utf8(text):
        data = text.encode("utf-8")
        return u1(1) + u2(len(data)) + data

    pool = [
        utf8("HelloWorld"),                  # 1
        u1(7) + u2(1),                       # 2  Class HelloWorld
        utf8("java/lang/Object"),            # 3
        u1(7) + u2(3),                       # 4  Class Object
        utf8("<init>"),                      # 5
        utf8("()V"),                         # 6
        u1(12) + u2(5) + u2(6),              # 7  NameAndType <init> ()V
        u1(10) + u2(4) + u2(7),              # 8  Methodref Object.<init>
        utf8("Code"),                        # 9
        utf8("LineNumberTable"),             # 10
        utf8("main"),                        # 11
        utf8("([Ljava/lang/String;)V"),      # 12
        utf8("java/lang/System"),            # 13
        u1(7) + u2(13),                      # 14 Class System
        utf8("out"),                         # 15
        utf8("Ljava/io/PrintStream;"),       # 16
        u1(12) + u2(15) + u2(16),            # 17 NameAndType out
        u1(9) + u2(14) + u2(17),             # 18 Fieldref System.out
        utf8("Hello World"),                 # 19
        u1(8) + u2(19),                      # 20 String "Hello World"
        utf8("java/io/PrintStream"),         # 21
        u1(7) + u2(21),                      # 22 Class PrintStream
        utf8("println"),                     # 23
        utf8("(Ljava/lang/String;)V"),       # 24
        u1(12) + u2(23) + u2(24),            # 25 NameAndType println
        u1(10) + u2(22) + u2(25),            # 26 Methodref println
        utf8("SourceFile"),                  # 27
        utf8("HelloWorld.java"),             # 28
    ]

    def lnt(entries):
        payload = u2(len(entries)) + b"".join(u2(pc) + u2(ln)
                                              for pc, ln in entries)
        return u2(10) + u4(len(payload)) + payload

    def code_attr(max_stack, max_locals, code, lines):
        table = lnt(lines)
        payload = (u2(max_stack) + u2(max_locals) + u4(len(code)) + code
                   + u2(0) + u2(1) + table)
        return u2(9) + u4(len(payload)) + payload

    init_code = bytes((0x2A,)) + bytes((0xB7,)) + u2(8) + bytes((0xB1,))
    main_code = (bytes((0xB2,)) + u2(18) + bytes((0x12, 20))
                 + bytes((0xB6,)) + u2(26) + bytes((0xB1,)))
    init_method = (u2(0x0001) + u2(5) + u2(6) + u2(1)
                   + code_attr(1, 1, init_code, [(0, 1)]))
    main_method = (u2(0x0009) + u2(11) + u2(12) + u2(1)
                   + code_attr(2, 1, main_code, [(0, 3), (8, 4)]))
    source_attr = u2(27) + u4(2) + u2(28)

    out = u4(0xCAFEBABE) + u2(0) + u2(46)
    out += u2(len(pool) + 1) + b"".join(pool)
    out += u2(0x0021) + u2(2) + u2(4)   # public super, this, super
    out += u2(0)                        # interfaces
    out += u2(0)                        # fields
    out += u2(2) + init_method + main_method
    out += u2(1) + source_attr
    return out


def node_bytes() -> bytes:
    pool = PoolBuilder()
    init_ref = pool.methodref("java/lang/Object", "<init>", "()V")
    token = pool.fieldref("Node", "token", "Z")
    head = pool.fieldref("Node", "head", "LNode;")
    tail = pool.fieldref("Node", "tail", "LNode;")
    node_init = pool.methodref("Node", "<init>", "()V")
    node_cls = pool.cls("Node")

    a = Asm()
    (a.op("aload_0").u2("invokespecial", init_ref)
      .op("aload_0").op("iconst_0").u2("putfield", token)
      .op("aload_0").op("aload_0").u2("putfield", head)
      .op("aload_0").op("aload_0").u2("putfield", tail)
      .op("return"))
    init = member(pool, ACC_PUBLIC, "<init>", "()V",
                  [code_attribute(pool, 2, 1, a.assemble(),
                                  lines=[(0, 6), (4, 7), (9, 8), (14, 9),
                                         (19, 10)])])

    a = Asm()
    (a.u2("new", node_cls).op("dup").u2("invokespecial", node_init)
      .op("astore_1")
      .op("aload_1").op("aload_0").u2("getfield", tail).u2("putfield", head)
      .op("aload_0").op("aload_1").u2("putfield", head)
      .op("aload_1").op("areturn"))
    code = a.assemble()
    add_node = member(pool, ACC_PUBLIC, "addNode", "()LNode;",
                      [code_attribute(pool, 2, 2, code,
                                      lines=[(0, 13), (8, 14), (16, 15),
                                             (21, 16)],
                                      local_vars=[(0, len(code), "this",
                                                   "LNode;", 0),
                                                  (8, len(code) - 8, "p",
                                                   "LNode;", 1)])])

    a = Asm()
    a.op("aload_0").u2("getfield", tail).u2("getfield", head).op("areturn")
    move_next = member(pool, ACC_PUBLIC, "moveNext", "()LNode;",
                       [code_attribute(pool, 1, 1, a.assemble(),
                                       lines=[(0, 20)])])

    a = Asm()
    a.op("aload_0").u2("getfield", head).u2("getfield", tail).op("areturn")
    move_back = member(pool, ACC_PUBLIC, "moveBack", "()LNode;",
                       [code_attribute(pool, 1, 1, a.assemble(),
                                       lines=[(0, 24)])])

    fields = [member(pool, ACC_PUBLIC, "token", "Z", []),
              member(pool, ACC_PUBLIC, "head", "LNode;", []),
              member(pool, ACC_PUBLIC, "tail", "LNode;", [])]
    return class_file(pool, ACC_PUBLIC | ACC_SUPER, "Node",
                      "java/lang/Object", [], fields,
                      [init, add_node, move_next, move_back],
                      source_file="Node.java")


def dummy_method_code(pool: PoolBuilder):
    """Array-juggling body shared by the Z and W dummies.

    Every interchangeable arithmetic opcode appears at least twice, two
    compare-with-zero branches and one null check give branch sites,
    and bipush/iinc immediates give operand sites. Locals: 0 this,
    1 k, 2 a, 3 tmp, 4 i, 5 j.
    """
    out_ref = pool.fieldref("java/lang/System", "out", "Ljava/io/PrintStream;")
    println_i = pool.methodref("java/io/PrintStream", "println", "(I)V")
    a = Asm()
    a.line(4)
    a.op("iconst_5").op("newarray", 10).op("astore_2")
    a.line(5)
    (a.op("aload_2").op("iconst_0").op("iconst_5").op("iastore")
      .op("aload_2").op("iconst_1").op("bipush", 7).op("iastore")
      .op("aload_2").op("iconst_2").op("iconst_1").op("iastore")
      .op("aload_2").op("iconst_3").op("bipush", 6).op("iastore")
      .op("aload_2").op("iconst_4").op("iconst_4").op("iastore"))
    a.line(6)
    (a.op("iconst_0").op("istore_3")
      .op("iconst_0").op("istore", 4)
      .op("iconst_0").op("istore", 5))
    a.line(8)
    a.label("sort_outer")
    a.op("iload", 4).op("iconst_4").branch("if_icmpge", "sort_end")
    a.op("iconst_1").op("istore", 5)
    a.label("sort_inner")
    a.op("iload", 5).op("iconst_5").branch("if_icmpge", "outer_inc")
    a.line(10)
    (a.op("aload_2").op("iload", 5).op("iaload")
      .op("aload_2").op("iload", 4).op("iaload")
      .branch("if_icmpge", "no_swap"))
    a.line(11)
    a.op("aload_2").op("iload", 5).op("iaload").op("istore_3")
    a.line(12)
    (a.op("aload_2").op("iload", 4)
      .op("aload_2").op("iload", 5).op("iaload").op("iastore"))
    a.line(13)
    a.op("aload_2").op("iload", 5).op("iload_3").op("iastore")
    a.label("no_swap")
    a.iinc(5, 1).branch("goto", "sort_inner")
    a.label("outer_inc")
    a.iinc(4, 1).branch("goto", "sort_outer")
    a.label("sort_end")
    a.line(17)
    a.op("iconst_0").op("istore", 4)
    a.label("arith")
    a.op("iload", 4).op("iconst_5").branch("if_icmpge", "arith_end")
    a.line(18)
    a.op("iload_3").op("iload_1").op("iadd").op("istore_3")
    a.line(19)
    (a.op("iload_3").op("aload_2").op("iload", 4).op("iaload")
      .op("isub").op("istore_3"))
    a.line(20)
    a.op("iload_3").op("iconst_3").op("imul").op("istore_3")
    a.line(21)
    a.op("iload_3").op("iconst_2").op("idiv").op("istore_3")
    a.line(22)
    a.op("iload_3").op("bipush", 7).op("irem").op("istore_3")
    a.line(23)
    a.op("iload_3").op("iload_1").op("iand").op("istore_3")
    a.line(24)
    (a.op("iload_3").op("aload_2").op("iload", 4).op("iaload")
      .op("ior").op("istore_3"))
    a.line(25)
    a.op("iload_3").op("iload", 4).op("ixor").op("istore_3")
    a.line(26)
    a.op("iload_3").branch("ifge", "pos")
    a.op("iload_1").op("iload_3").op("isub").op("istore_3")
    a.label("pos")
    a.line(29)
    a.op("iload_3").branch("ifle", "nonpos")
    a.op("iload_3").op("iload", 5).op("iadd").op("istore_3")
    a.label("nonpos")
    a.line(32)
    (a.op("aload_2").op("iload", 4)
      .op("iload_3").op("iconst_5").op("irem").op("iastore"))
    a.line(33)
    (a.op("iload_3").op("iload", 4).op("iconst_1").op("iadd")
      .op("imul").op("istore_3"))
    a.line(34)
    (a.op("iload_3").op("iload", 5).op("iconst_2").op("iadd")
      .op("idiv").op("istore_3"))
    a.line(35)
    a.op("iload_3").op("bipush", 15).op("iand").op("istore_3")
    a.line(36)
    a.op("iload_3").op("iconst_1").op("ior").op("istore_3")
    a.line(37)
    (a.op("iload_3").op("aload_2").op("iload", 4).op("iaload")
      .op("ixor").op("istore_3"))
    a.iinc(4, 1).branch("goto", "arith")
    a.label("arith_end")
    a.line(40)
    a.op("aload_2").branch("ifnull", "skip")
    a.op("aload_2").op("iconst_0").op("iload_3").op("iastore")
    a.label("skip")
    a.line(43)
    (a.u2("getstatic", out_ref)
      .op("aload_2").op("iconst_2").op("iaload")
      .u2("invokevirtual", println_i))
    a.op("return")
    code = a.assemble()
    local_vars = [(0, len(code), "this", None, 0),
                  (0, len(code), "k", "I", 1),
                  (4, len(code) - 4, "a", "[I", 2),
                  (28, len(code) - 28, "tmp", "I", 3),
                  (30, len(code) - 30, "i", "I", 4),
                  (33, len(code) - 33, "j", "I", 5)]
    return code, a.lines, local_vars


def dummy_method(pool: PoolBuilder, name: str, this_desc: str) -> bytes:
    code, lines, local_vars = dummy_method_code(pool)
    local_vars = [(s, l, n, this_desc if d is None else d, i)
                  for s, l, n, d, i in local_vars]
    return member(pool, ACC_PRIVATE, name, "(I)V",
                  [code_attribute(pool, 4, 6, code, lines=lines,
                                  local_vars=local_vars)])


def _ring_init(pool: PoolBuilder, cls: str, with_movers: bool = True) -> bytes:
    """this.g/h = new Node (tokens true); this.p/q = added nodes."""
    init_ref = pool.methodref("java/lang/Object", "<init>", "()V")
    node_cls = pool.cls("Node")
    node_init = pool.methodref("Node", "<init>", "()V")
    token = pool.fieldref("Node", "token", "Z")
    add_node = pool.methodref("Node", "addNode", "()LNode;")
    g = pool.fieldref(cls, "g", "LNode;")
    h = pool.fieldref(cls, "h", "LNode;")
    p = pool.fieldref(cls, "p", "LNode;")
    q = pool.fieldref(cls, "q", "LNode;")
    a = Asm()
    a.line(8)
    a.op("aload_0").u2("invokespecial", init_ref)
    a.line(9)
    a.op("aload_0").u2("new", node_cls).op("dup")
    a.u2("invokespecial", node_init).u2("putfield", g)
    a.line(10)
    a.op("aload_0").u2("new", node_cls).op("dup")
    a.u2("invokespecial", node_init).u2("putfield", h)
    a.line(11)
    a.op("aload_0").u2("getfield", g).op("iconst_1").u2("putfield", token)
    a.line(12)
    a.op("aload_0").u2("getfield", h).op("iconst_1").u2("putfield", token)
    a.line(13)
    (a.op("aload_0").op("aload_0").u2("getfield", g)
      .u2("invokevirtual", add_node).u2("putfield", p))
    a.line(14)
    (a.op("aload_0").op("aload_0").u2("getfield", h)
      .u2("invokevirtual", add_node).u2("putfield", q))
    a.op("return")
    return member(pool, ACC_PUBLIC, "<init>", "()V",
                  [code_attribute(pool, 3, 1, a.assemble(), lines=a.lines)])


def _ring_run(pool: PoolBuilder, cls: str) -> bytes:
    """Bounded walk standing in for the two threads: every pass advances
    p forward and q backward, then hits the guard point."""
    move_next = pool.methodref("Node", "moveNext", "()LNode;")
    move_back = pool.methodref("Node", "moveBack", "()LNode;")
    p = pool.fieldref(cls, "p", "LNode;")
    q = pool.fieldref(cls, "q", "LNode;")
    work = pool.methodref(cls, "work", "()V")
    a = Asm()
    a.line(18)
    a.op("iconst_0").op("istore_1")
    a.label("loop")
    a.op("iload_1").op("bipush", 12).branch("if_icmpge", "end")
    a.line(19)
    (a.op("aload_0").op("aload_0").u2("getfield", p)
      .u2("invokevirtual", move_next).u2("putfield", p))
    a.line(20)
    (a.op("aload_0").op("aload_0").u2("getfield", q)
      .u2("invokevirtual", move_back).u2("putfield", q))
    a.line(21)
    a.op("aload_0").u2("invokespecial", work)
    a.iinc(1, 1).branch("goto", "loop")
    a.label("end")
    a.op("return")
    code = a.assemble()
    return member(pool, ACC_PUBLIC, "run", "()V",
                  [code_attribute(pool, 2, 2, code, lines=a.lines,
                                  local_vars=[(2, len(code) - 2, "step",
                                               "I", 1)])])


def _ring_main(pool: PoolBuilder, cls: str) -> bytes:
    this_cls = pool.cls(cls)
    this_init = pool.methodref(cls, "<init>", "()V")
    run = pool.methodref(cls, "run", "()V")
    a = Asm()
    a.line(50)
    a.u2("new", this_cls).op("dup").u2("invokespecial", this_init)
    a.op("astore_1")
    a.line(51)
    a.op("aload_1").u2("invokevirtual", run)
    a.op("return")
    return member(pool, ACC_PUBLIC | ACC_STATIC, "main",
                  "([Ljava/lang/String;)V",
                  [code_attribute(pool, 2, 2, a.assemble(), lines=a.lines)])


def guarded_ring_bytes() -> bytes:
    """Algorithm I shape: b2 = (h.equals(p) || p.token); b1 = p.token;
    guarded call fires only if b2 && b1 && g.equals(h), and g/h sit on
    different rings, so the Z call is opaque-dead yet referenced."""
    cls = "GuardedRing"
    pool = PoolBuilder()
    equals = pool.methodref("Node", "equals", "(Ljava/lang/Object;)Z")
    token = pool.fieldref("Node", "token", "Z")
    g = pool.fieldref(cls, "g", "LNode;")
    h = pool.fieldref(cls, "h", "LNode;")
    p = pool.fieldref(cls, "p", "LNode;")
    b1 = pool.fieldref(cls, "b1", "Z")
    b2 = pool.fieldref(cls, "b2", "Z")
    z_ref = pool.methodref(cls, "Z", "(I)V")

    a = Asm()
    a.line(26)
    (a.op("aload_0")
      .op("aload_0").u2("getfield", h)
      .op("aload_0").u2("getfield", p)
      .u2("invokevirtual", equals)
      .branch("ifne", "b2_true")
      .op("aload_0").u2("getfield", p).u2("getfield", token)
      .branch("ifne", "b2_true")
      .op("iconst_0").branch("goto", "b2_store")
      .label("b2_true").op("iconst_1")
      .label("b2_store").u2("putfield", b2))
    a.line(27)
    (a.op("aload_0").op("aload_0").u2("getfield", p)
      .u2("getfield", token).u2("putfield", b1))
    a.line(28)
    a.op("aload_0").u2("getfield", b2).branch("ifeq", "done")
    a.op("aload_0").u2("getfield", b1).branch("ifeq", "done")
    (a.op("aload_0").u2("getfield", g)
      .op("aload_0").u2("getfield", h)
      .u2("invokevirtual", equals).branch("ifeq", "done"))
    a.line(29)
    a.op("aload_0").op("bipush", 10).u2("invokespecial", z_ref)
    a.label("done")
    a.op("return")
    work = member(pool, ACC_PRIVATE, "work", "()V",
                  [code_attribute(pool, 3, 1, a.assemble(), lines=a.lines)])

    methods = [_ring_init(pool, cls), _ring_run(pool, cls), work,
               dummy_method(pool, "Z", "L%s;" % cls), _ring_main(pool, cls)]
    fields = [member(pool, ACC_PRIVATE, n, "LNode;", [])
              for n in ("g", "h", "p", "q")]
    fields += [member(pool, ACC_PRIVATE, n, "Z", []) for n in ("b1", "b2")]
    return class_file(pool, ACC_PUBLIC | ACC_SUPER, cls, "java/lang/Object",
                      ["java/lang/Runnable"], fields, methods,
                      source_file="GuardedRing.java")


def guarded_ring_cond_bytes() -> bytes:
    """Algorithm II shape: p1 = p.token; p2 = q.token;
    if (p1) p2 = false;  then the guard needs p1 && p2."""
    cls = "GuardedRingCond"
    pool = PoolBuilder()
    token = pool.fieldref("Node", "token", "Z")
    p = pool.fieldref(cls, "p", "LNode;")
    q = pool.fieldref(cls, "q", "LNode;")
    b1 = pool.fieldref(cls, "b1", "Z")
    b2 = pool.fieldref(cls, "b2", "Z")
    z_ref = pool.methodref(cls, "Z", "(I)V")

    a = Asm()
    a.line(26)
    (a.op("aload_0").op("aload_0").u2("getfield", p)
      .u2("getfield", token).u2("putfield", b1))
    a.line(27)
    (a.op("aload_0").op("aload_0").u2("getfield", q)
      .u2("getfield", token).u2("putfield", b2))
    a.line(28)
    a.op("aload_0").u2("getfield", b1).branch("ifeq", "check")
    a.op("aload_0").op("iconst_0").u2("putfield", b2)
    a.label("check")
    a.line(29)
    a.op("aload_0").u2("getfield", b1).branch("ifeq", "done")
    a.op("aload_0").u2("getfield", b2).branch("ifeq", "done")
    a.line(30)
    a.op("aload_0").op("bipush", 10).u2("invokespecial", z_ref)
    a.label("done")
    a.op("return")
    work = member(pool, ACC_PRIVATE, "work", "()V",
                  [code_attribute(pool, 2, 1, a.assemble(), lines=a.lines)])

    methods = [_ring_init(pool, cls), _ring_run(pool, cls), work,
               dummy_method(pool, "Z", "L%s;" % cls), _ring_main(pool, cls)]
    fields = [member(pool, ACC_PRIVATE, n, "LNode;", [])
              for n in ("g", "h", "p", "q")]
    fields += [member(pool, ACC_PRIVATE, n, "Z", []) for n in ("b1", "b2")]
    return class_file(pool, ACC_PUBLIC | ACC_SUPER, cls, "java/lang/Object",
                      ["java/lang/Runnable"], fields, methods,
                      source_file="GuardedRingCond.java")


def unguarded_dummy_bytes() -> bytes:
    """Negative control: W has the same carrier body as Z but no caller,
    plus enough constant/instruction variety (all eleven pool tags, both
    switch forms, invokeinterface) to exercise the parser."""
    cls = "UnguardedDummy"
    pool = PoolBuilder()
    init_ref = pool.methodref("java/lang/Object", "<init>", "()V")
    out_ref = pool.fieldref("java/lang/System", "out", "Ljava/io/PrintStream;")
    println_s = pool.methodref("java/io/PrintStream", "println",
                               "(Ljava/lang/String;)V")
    banner = pool.string("unguarded")
    run_ref = pool.ifaceref("java/lang/Runnable", "run", "()V")

    a = Asm()
    a.op("aload_0").u2("invokespecial", init_ref).op("return")
    init = member(pool, ACC_PUBLIC, "<init>", "()V",
                  [code_attribute(pool, 1, 1, a.assemble(), lines=[(0, 3)])])

    a = Asm()
    a.op("iload_0")
    a.tableswitch("dflt", 0, ["c0", "c1", "c2"])
    a.label("c0").op("bipush", 10).op("ireturn")
    a.label("c1").op("bipush", 20).op("ireturn")
    a.label("c2").op("bipush", 30).op("ireturn")
    a.label("dflt").op("iconst_0").op("ireturn")
    pick = member(pool, ACC_PUBLIC | ACC_STATIC, "pick", "(I)I",
                  [code_attribute(pool, 1, 1, a.assemble())])

    a = Asm()
    a.op("iload_0")
    a.lookupswitch("dflt", [(10, "ten"), (100, "hundred")])
    a.label("ten").op("iconst_1").op("ireturn")
    a.label("hundred").op("iconst_2").op("ireturn")
    a.label("dflt").op("iconst_m1").op("ireturn")
    grade = member(pool, ACC_PUBLIC | ACC_STATIC, "grade", "(I)I",
                   [code_attribute(pool, 1, 1, a.assemble())])

    a = Asm()
    a.op("aload_1").invokeinterface(run_ref, 1).op("return")
    poke = member(pool, ACC_PUBLIC, "poke", "(Ljava/lang/Runnable;)V",
                  [code_attribute(pool, 1, 2, a.assemble())])

    a = Asm()
    a.line(40)
    a.u2("getstatic", out_ref).op("ldc", banner)
    a.u2("invokevirtual", println_s)
    a.op("return")
    main = member(pool, ACC_PUBLIC | ACC_STATIC, "main",
                  "([Ljava/lang/String;)V",
                  [code_attribute(pool, 2, 1, a.assemble(), lines=a.lines)])

    fields = [
        const_field(pool, ACC_PUBLIC | ACC_STATIC | ACC_FINAL, "LIMIT", "I",
                    pool.integer(100)),
        const_field(pool, ACC_PUBLIC | ACC_STATIC | ACC_FINAL, "SEED", "J",
                    pool.long_(0x0123456789ABCDEF)),
        const_field(pool, ACC_PUBLIC | ACC_STATIC | ACC_FINAL, "SCALE", "F",
                    pool.float_raw(0x3FC00000)),       # 1.5f
        const_field(pool, ACC_PUBLIC | ACC_STATIC | ACC_FINAL, "RATIO", "D",
                    pool.double_raw(0x4004000000000000)),  # 2.5
    ]
    methods = [init, pick, grade, poke,
               dummy_method(pool, "W", "L%s;" % cls), main]
    return class_file(pool, ACC_PUBLIC | ACC_SUPER, cls, "java/lang/Object",
                      [], fields, methods, source_file="UnguardedDummy.java")


FIXTURES = [
    ("HelloWorld", hello_world_bytes, "minimal", ["main"], None),
    ("Node", node_bytes, "ring_structure", ["main"], None),
    ("GuardedRing", guarded_ring_bytes, "guarded", ["main"], "Z"),
    ("GuardedRingCond", guarded_ring_cond_bytes, "guarded_conditional",
     ["main"], "Z"),
    ("UnguardedDummy", unguarded_dummy_bytes, "negative_control",
     ["main"], "W"),
]


def inspect_via_cli(path: str) -> dict:
    proc = subprocess.run([sys.executable, "-m", "classmark.cli",
                           "inspect", path, "--json"],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError("classmark inspect failed on %s: %s"
                           % (path, proc.stderr))
    return json.loads(proc.stdout)["files"][0]


def build(out_dir: str) -> dict:
    classes_dir = os.path.join(out_dir, "classes")
    os.makedirs(classes_dir, exist_ok=True)
    manifest = {"config": "watermark-config.json", "fixtures": []}
    for name, builder, role, entries, dummy in FIXTURES:
        data = builder()
        class_path = os.path.join(classes_dir, name + ".class")
        with open(class_path, "wb") as fh:
            fh.write(data)
        info = inspect_via_cli(class_path)
        manifest["fixtures"].append({
            "name": name,
            "source": "src/%s.java" % name,
            "class_file": "classes/%s.class" % name,
            "sha256": hashlib.sha256(data).hexdigest(),
            "class_name": info["class"],
            "version": info["version"],
            "role": role,
            "entry_points": entries,
            "dummy_method": dummy,
            "methods": [
                {"name": m["name"], "descriptor": m["descriptor"],
                 "access_flags": m["access_flags"],
                 "code_bytes": m["code_bytes"],
                 "capacity_bits": m.get("capacity_bits")}
                for m in info["methods"]
            ],
        })
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "watermark-config.json"), "w",
              encoding="utf-8") as fh:
        json.dump(WATERMARK_CONFIG, fh, indent=2)
        fh.write("\n")
    return manifest


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=HERE)
    args = parser.parse_args()
    manifest = build(args.out_dir)
    for fx in manifest["fixtures"]:
        caps = [m["capacity_bits"]["replace_opcodes"]
                for m in fx["methods"] if m.get("capacity_bits")]
        print("%-16s %-22s methods=%d max-capacity=%s"
              % (fx["name"], fx["role"], len(fx["methods"]),
                 max(caps) if caps else "-"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
