"""Static watermarking for Java class files.

Embeds short identifying messages into never-executed dummy methods by
choosing among interchangeable opcodes or overwriting dead operand
bytes, generates the dummy methods plus opaque-predicate guard
scaffolding that keeps them in the shipped class, and measures how the
marks hold up under common obfuscator passes.
"""

__version__ = "0.1.0"

from .classfile import (parse, serialize, validate, ClassFileModel,
                        BadMagic, Truncated, BadPoolTag, DanglingIndex,
                        IndexOverflow)
from .bytecode import (decode_instructions, encode, scan_codepoints,
                       CodepointKind, MODE_REPLACE, MODE_OPERANDS,
                       MODE_COMBINED, MODES)
from .codec import (Codebook, KeySpec, WatermarkConfig, Bitstream,
                    example_codebook, extended_codebook, apply_key,
                    encode_chars, decode_chars, UnmappedCharacter,
                    KeyTooLong, InsufficientCapacity)
from .dummygen import (DummySpec, SHAPES, synthesize_dummy,
                       validate_structure, emit_source_snippets,
                       write_snippets)
from .embedder import embed, capacity, resolve_method, EmbedPlan, NoCode
from .extractor import decode_all, verify_model, verify_bytes, verify_files, Verdict
from .opaque import (PredicateWorld, make_world, two_ring_world,
                     single_ring_world, step_world, run_observation,
                     unconditional_group, conditional_group, eval_group,
                     pell_predicate, MalformedGroup, WORLD_SHAPES)
from .attacks import (builtin_attacks, external_attack, survival_matrix,
                      AttackSpec, SurvivalMatrix, ToolMissing, ToolFailed)

__all__ = [name for name in dir() if not name.startswith("_")]
