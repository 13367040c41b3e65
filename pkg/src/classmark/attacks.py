"""Resilience harness: transformations an adversary might run on a
watermarked class, plus a survival matrix that verifies the mark after
each one.

Built-in attacks model the usual obfuscator passes: identifier
renaming, debug-info stripping, line-number scrambling, dead-private-
method removal, and opcode normalization. External tools can be added
by command template. All transforms take and return a parsed model and
never mutate their input.
"""

import copy
import os
import random
import shlex
import string
import subprocess
import tempfile
from dataclasses import dataclass

from . import classfile as cf
from . import bytecode as bc
from .extractor import verify_bytes


class ToolMissing(Exception):
    """External command's executable was not found."""


class ToolFailed(Exception):
    """External command exited nonzero or produced no output file."""


# --- built-in transforms -----------------------------------------------------

def attack_rename(model, seed: int = 0):
    """Rename private fields and methods to fresh random identifiers.

    NameAndType entries that referred to a renamed member (matched by
    old name text plus descriptor text) are repointed; new names get
    fresh Utf8 entries so unrelated sharers of the old text keep it.
    Constructors and <clinit> keep their names. Code is untouched.
    """
    out = copy.deepcopy(model)
    rng = random.Random(seed)
    taken = {e.text for e in out.constant_pool if isinstance(e, cf.Utf8Entry)}

    def fresh_name():
        while True:
            name = "".join(rng.choice(string.ascii_lowercase) for _ in range(6))
            if name not in taken:
                taken.add(name)
                return name

    renames = {}  # (old name text, descriptor text) -> new Utf8 index
    for member in out.fields + out.methods:
        if not member.access_flags & cf.ACC_PRIVATE:
            continue
        name = cf.member_name(out, member)
        if name.startswith("<"):
            continue
        desc = cf.member_descriptor(out, member)
        key = (name, desc)
        if key not in renames:
            new_index = cf.add_entry(out, cf.Utf8Entry(fresh_name().encode()))
            renames[key] = new_index
        member.name_index = renames[key]
    for entry in out.constant_pool:
        if not isinstance(entry, cf.NameAndTypeEntry):
            continue
        key = (cf.utf8_text(out, entry.name_index),
               cf.utf8_text(out, entry.descriptor_index))
        if key in renames:
            entry.name_index = renames[key]
    cf.validate(out)
    return out


_DEBUG_ATTRS = ("LineNumberTable", "LocalVariableTable",
                "LocalVariableTypeTable", "SourceFile")


def _attr_name(model, attr) -> str:
    return cf.utf8_text(model, attr.name_index)


def attack_strip_debug(model):
    """Drop line-number, local-variable, and source-file attributes."""
    out = copy.deepcopy(model)

    def keep(attrs):
        return [a for a in attrs if _attr_name(out, a) not in _DEBUG_ATTRS]

    out.attributes = keep(out.attributes)
    for member in out.fields + out.methods:
        member.attributes = keep(member.attributes)
        code = cf.code_of(member)
        if code is not None:
            code.attributes = keep(code.attributes)
    cf.validate(out)
    return out


def attack_scramble_lines(model, seed: int = 0):
    """Permute the line numbers inside each LineNumberTable."""
    out = copy.deepcopy(model)
    rng = random.Random(seed)
    for member in out.methods:
        code = cf.code_of(member)
        if code is None:
            continue
        for attr in code.attributes:
            if not isinstance(attr.parsed, cf.LineNumberTableView):
                continue
            lines = [line for _, line in attr.parsed.entries]
            rng.shuffle(lines)
            attr.parsed.entries = [(pc, line) for (pc, _), line
                                   in zip(attr.parsed.entries, lines)]
    cf.validate(out)
    return out


def _invoked_keys(model, code) -> set:
    """(name, descriptor) of same-class methods this code invokes."""
    own = cf.class_name(model)
    keys = set()
    for instr in bc.decode_instructions(code.code):
        if instr.mnemonic not in ("invokevirtual", "invokespecial",
                                  "invokestatic", "invokeinterface"):
            continue
        ref = model.constant_pool[int.from_bytes(instr.operands[:2], "big")]
        if cf.class_name(model, ref.class_index) != own:
            continue
        nat = model.constant_pool[ref.name_and_type_index]
        keys.add((cf.utf8_text(model, nat.name_index),
                  cf.utf8_text(model, nat.descriptor_index)))
    return keys


def attack_trim(model, entry_points=("main",)):
    """Remove private methods unreachable from the entry points.

    Reachability is a fixed point over same-class invocations starting
    from every method named in entry_points, every non-private method,
    and all initializers. This is the pass that kills an unreferenced
    dummy method while leaving a guard-referenced one alone.
    """
    out = copy.deepcopy(model)
    entry_names = set(entry_points) | {"<init>", "<clinit>"}
    keys = [(cf.member_name(out, m), cf.member_descriptor(out, m))
            for m in out.methods]
    reachable = set()
    work = []
    for m, key in zip(out.methods, keys):
        if key[0] in entry_names or not m.access_flags & cf.ACC_PRIVATE:
            reachable.add(key)
            work.append(m)
    while work:
        code = cf.code_of(work.pop())
        if code is None:
            continue
        for key in _invoked_keys(out, code):
            if key in reachable:
                continue
            reachable.add(key)
            work.extend(m for m, k in zip(out.methods, keys) if k == key)
    out.methods = [m for m, key in zip(out.methods, keys)
                   if key in reachable or not m.access_flags & cf.ACC_PRIVATE]
    cf.validate(out)
    return out


def attack_normalize(model):
    """Collapse every opcode family to its canonical member.

    Integer arithmetic becomes iadd and four-way comparisons become
    iflt, erasing anything carried by opcode choice; operands are kept,
    so an operand-mode mark rides through.
    """
    out = copy.deepcopy(model)
    for _, code in cf.find_methods(out):
        instructions = bc.decode_instructions(code.code)
        changed = False
        for instr in instructions:
            if instr.opcode in bc.ARITH8_TO_BITS:
                instr.opcode = bc.BITS_TO_ARITH8["000"]
                changed = True
            elif instr.opcode in bc.BRANCH4_TO_BITS:
                instr.opcode = bc.BITS_TO_BRANCH4["00"]
                changed = True
        if changed:
            code.code = bc.encode(instructions)
    cf.validate(out)
    return out


def run_external(command: str, data: bytes) -> bytes:
    """Run a command template over class bytes via temp files.

    `{in}` and `{out}` in the template are replaced with temp paths;
    a template without `{out}` is expected to rewrite `{in}` in place.
    """
    with tempfile.TemporaryDirectory(prefix="attack-") as tmp:
        in_path = os.path.join(tmp, "in.class")
        out_path = os.path.join(tmp, "out.class") if "{out}" in command else in_path
        with open(in_path, "wb") as fh:
            fh.write(data)
        argv = [a.replace("{in}", in_path).replace("{out}", out_path)
                for a in shlex.split(command)]
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=120)
        except FileNotFoundError as exc:
            raise ToolMissing(str(exc)) from None
        if proc.returncode != 0:
            raise ToolFailed("%s exited %d: %s" % (
                argv[0], proc.returncode,
                proc.stderr.decode("utf-8", "replace").strip()))
        if not os.path.exists(out_path):
            raise ToolFailed("%s produced no output file" % argv[0])
        with open(out_path, "rb") as fh:
            return fh.read()


# --- the harness -------------------------------------------------------------

@dataclass
class AttackSpec:
    label: str
    transform: object  # model -> model

    def apply(self, model):
        return self.transform(model)


def builtin_attacks(seed: int = 0, entry_points=("main",)) -> list:
    return [
        AttackSpec("rename", lambda m: attack_rename(m, seed)),
        AttackSpec("strip_debug", attack_strip_debug),
        AttackSpec("scramble_lines", lambda m: attack_scramble_lines(m, seed)),
        AttackSpec("trim", lambda m: attack_trim(m, entry_points)),
        AttackSpec("normalize", attack_normalize),
    ]


def external_attack(label: str, command: str) -> AttackSpec:
    def transform(model):
        return cf.parse(run_external(command, cf.serialize(model)))
    return AttackSpec(label, transform)


SURVIVED = "Survived"
DESTROYED = "Destroyed"
ERROR = "Error"


@dataclass
class SurvivalMatrix:
    attacks: list      # attack labels, column order
    rows: list         # (file label, {attack label: cell})
    message: str
    errors: dict       # (file, attack) -> error text

    def to_dict(self) -> dict:
        return {
            "message": self.message,
            "attacks": list(self.attacks),
            "rows": [{"file": name, "results": dict(cells)}
                     for name, cells in self.rows],
            "errors": {"%s/%s" % k: v for k, v in self.errors.items()},
        }

    def to_text(self) -> str:
        names = [name for name, _ in self.rows]
        left = max([len(n) for n in names] + [4])
        widths = [max(len(a), len(DESTROYED)) for a in self.attacks]
        header = "file".ljust(left) + "  " + "  ".join(
            a.ljust(w) for a, w in zip(self.attacks, widths))
        lines = [header, "-" * len(header)]
        for name, cells in self.rows:
            lines.append(name.ljust(left) + "  " + "  ".join(
                cells[a].ljust(w) for a, w in zip(self.attacks, widths)))
        return "\n".join(lines)


def _label_for(path) -> str:
    return os.path.basename(str(path))


def survival_matrix(paths, attacks, message: str,
                    config, save_dir=None) -> SurvivalMatrix:
    """Verify `message` in every file after every attack.

    Cells are Survived / Destroyed / Error; errors keep their text in
    the matrix's errors map. With save_dir set, each attacked class is
    written there as <file stem>.<attack>.class.
    """
    rows = []
    errors = {}
    if save_dir:
        os.makedirs(save_dir, exist_ok=True)
    for path in paths:
        name = _label_for(path)
        with open(path, "rb") as fh:
            model = cf.parse(fh.read())
        cells = {}
        for spec in attacks:
            try:
                attacked = cf.serialize(spec.apply(model))
                verdict = verify_bytes(attacked, message, config,
                                       file="%s after %s" % (name, spec.label))
                cells[spec.label] = SURVIVED if verdict.found else DESTROYED
                if save_dir:
                    stem = name[:-6] if name.endswith(".class") else name
                    dest = os.path.join(save_dir,
                                        "%s.%s.class" % (stem, spec.label))
                    with open(dest, "wb") as fh:
                        fh.write(attacked)
            except (ToolMissing, ToolFailed, cf.BadMagic, cf.Truncated,
                    cf.BadPoolTag, cf.DanglingIndex, cf.IndexOverflow) as exc:
                cells[spec.label] = ERROR
                errors[(name, spec.label)] = str(exc)
        rows.append((name, cells))
    return SurvivalMatrix([a.label for a in attacks], rows, message, errors)
