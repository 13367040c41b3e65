"""Embed keyed watermark bits into one method's codepoint sites.

Embedding never moves a byte: opcode sites swap within their family
and operand sites overwrite a single immediate, so the diff against
the input is confined to the target method's code array and bounded
by the number of consumed sites.
"""

import copy
import json
from dataclasses import dataclass, field

from . import classfile
from .bytecode import (KIND_WIDTH, decode_instructions, encode,
                       scan_codepoints, site_bits, rewrite,
                       CodepointKind)
from .codec import (InsufficientCapacity, WatermarkConfig,
                    bits_to_codepoints)


class NoCode(Exception):
    """Target method is abstract or native: nothing to carry bits."""


def resolve_method(model, method) -> int:
    """Accepts a method index or name; returns the method index.

    A name must match exactly one method with code; raises LookupError
    otherwise.
    """
    if isinstance(method, int):
        if not 0 <= method < len(model.methods):
            raise LookupError("method index %d out of range" % method)
        return method
    hits = [idx for idx, m in enumerate(model.methods)
            if classfile.member_name(model, m) == method]
    if not hits:
        raise LookupError("no method named %r" % method)
    if len(hits) > 1:
        raise LookupError("method name %r is ambiguous (%d overloads); "
                          "use an index" % (method, len(hits)))
    return hits[0]


def capacity(model, method, mode: str) -> int:
    """Bit capacity of one method under the given mode."""
    idx = resolve_method(model, method)
    view = classfile.code_of(model.methods[idx])
    if view is None:
        raise NoCode("method %r has no code"
                     % classfile.member_name(model, model.methods[idx]))
    instructions = decode_instructions(view.code)
    return sum(KIND_WIDTH[kind] for _, kind in scan_codepoints(instructions, mode))


@dataclass
class PlanSite:
    offset: int
    kind: str
    bits: str        # the chunk this site received ("" if untouched)
    before: int      # opcode byte or operand byte prior to embedding
    after: int       # value written; equals before when untouched

    def to_dict(self) -> dict:
        return {"offset": self.offset, "kind": self.kind, "bits": self.bits,
                "before": self.before, "after": self.after}


@dataclass
class EmbedPlan:
    method_index: int
    method_name: str
    method_descriptor: str
    mode: str
    message: str
    required_bits: int
    capacity_bits: int
    consumed_sites: int
    sites: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method_index": self.method_index,
            "method_name": self.method_name,
            "method_descriptor": self.method_descriptor,
            "mode": self.mode,
            "message": self.message,
            "required_bits": self.required_bits,
            "capacity_bits": self.capacity_bits,
            "consumed_sites": self.consumed_sites,
            "total_sites": len(self.sites),
            "sites": [s.to_dict() for s in self.sites],
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _site_value(instr, kind):
    if kind in (CodepointKind.OPERAND_BIPUSH,):
        return instr.operands[0]
    if kind is CodepointKind.OPERAND_IINC:
        return instr.operands[1]
    return instr.opcode


def embed(model, method, message: str, config: WatermarkConfig):
    """Returns (watermarked model copy, EmbedPlan); the input is untouched.

    Deterministic: identical inputs give identical outputs. An empty
    message leaves the model byte-identical.
    """
    idx = resolve_method(model, method)
    out = copy.deepcopy(model)
    member = out.methods[idx]
    view = classfile.code_of(member)
    if view is None:
        raise NoCode("method %r has no code" % classfile.member_name(out, member))
    instructions = decode_instructions(view.code)
    sites = scan_codepoints(instructions, config.mode)
    bits = config.keyed_bits(message) if message else ""
    cap = sum(KIND_WIDTH[kind] for _, kind in sites)
    try:
        assignments = bits_to_codepoints(bits, [kind for _, kind in sites])
    except InsufficientCapacity as exc:
        raise InsufficientCapacity(
            "method %r under mode %s: %s"
            % (classfile.member_name(out, member), config.mode, exc)) from exc
    plan = EmbedPlan(idx, classfile.member_name(out, member),
                     classfile.member_descriptor(out, member),
                     config.mode, message, len(bits), cap, 0)
    for (index, kind), assignment in zip(sites, assignments):
        instr = instructions[index]
        before = _site_value(instr, kind)
        if assignment.value is None:
            plan.sites.append(PlanSite(instr.offset, kind.value, "", before, before))
            continue
        if kind in (CodepointKind.OPERAND_BIPUSH, CodepointKind.OPERAND_IINC):
            rewrite(instructions, index, new_operand=assignment.value)
        else:
            rewrite(instructions, index, new_opcode=assignment.value)
        plan.consumed_sites += 1
        plan.sites.append(PlanSite(instr.offset, kind.value, assignment.bits,
                                   before, assignment.value))
    view.code = encode(instructions)
    classfile.validate(out)
    return out, plan
