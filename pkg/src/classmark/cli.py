"""Command-line front end.

Subcommands cover the full workflow: inspect a class, synthesize a
dummy carrier method (with matching source snippets for manual
insertion), embed and extract marks, verify against an expected
message, run the attack harness, and simulate the opaque-predicate
scheduler.

Exit codes: 0 success, 1 watermark not found, 2 usage or configuration
error, 3 I/O or class-parse error, 4 insufficient capacity.
"""

import argparse
import json
import os
import sys

from . import classfile as cf
from . import bytecode as bc
from . import opaque
from .codec import (WatermarkConfig, UnmappedCharacter, KeyTooLong,
                    InsufficientCapacity)
from .dummygen import (DummySpec, SHAPES, synthesize_dummy, validate_structure,
                       emit_source_snippets, write_snippets, NameCollision,
                       PoolOverflow)
from .embedder import embed, capacity, resolve_method, NoCode
from .extractor import decode_all, verify_bytes, verify_files
from . import attacks as atk

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CAPACITY = 4

_PARSE_ERRORS = (cf.BadMagic, cf.Truncated, cf.BadPoolTag, cf.DanglingIndex,
                 cf.IndexOverflow, bc.UnknownOpcode, bc.TruncatedInstruction)
_USAGE_ERRORS = (UnmappedCharacter, KeyTooLong, ValueError, LookupError,
                 opaque.MalformedGroup, NameCollision)
_CAPACITY_ERRORS = (InsufficientCapacity, NoCode, PoolOverflow)


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_config(args) -> WatermarkConfig:
    path = getattr(args, "config", None) or os.environ.get("WM_CONFIG")
    if not path:
        return WatermarkConfig()
    try:
        return WatermarkConfig.from_json_file(path)
    except OSError as exc:
        raise _Fail(EXIT_IO, "cannot read config: %s" % exc)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise _Fail(EXIT_USAGE, "bad config %s: %s" % (path, exc))


def _read_class(path) -> cf.ClassFileModel:
    with open(path, "rb") as fh:
        return cf.parse(fh.read())


def _write_class(path, model):
    with open(path, "wb") as fh:
        fh.write(cf.serialize(model))


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2))
    elif text:
        print(text)


# --- subcommands -------------------------------------------------------------

def _cmd_inspect(args):
    config = _load_config(args)
    records = []
    for path in args.files:
        model = _read_class(path)
        methods = []
        for idx, member in enumerate(model.methods):
            code = cf.code_of(member)
            entry = {
                "index": idx,
                "name": cf.member_name(model, member),
                "descriptor": cf.member_descriptor(model, member),
                "access_flags": "0x%04X" % member.access_flags,
                "code_bytes": len(code.code) if code else None,
            }
            if code is not None:
                entry["capacity_bits"] = {
                    mode: capacity(model, idx, mode) for mode in bc.MODES}
                entry["structure"] = validate_structure(model, idx) or "ok"
            methods.append(entry)
        records.append({
            "file": str(path),
            "class": cf.class_name(model),
            "version": "%d.%d" % (model.major_version, model.minor_version),
            "constant_pool_entries": sum(e is not None
                                         for e in model.constant_pool[1:]),
            "mode": config.mode,
            "methods": methods,
        })
    lines = []
    for rec in records:
        lines.append("%s  class %s  version %s  pool %d"
                     % (rec["file"], rec["class"], rec["version"],
                        rec["constant_pool_entries"]))
        for m in rec["methods"]:
            cap = m.get("capacity_bits", {}).get(config.mode)
            lines.append("  [%d] %s%s  flags %s  code %s  capacity %s"
                         % (m["index"], m["name"], m["descriptor"],
                            m["access_flags"],
                            m["code_bytes"] if m["code_bytes"] is not None else "-",
                            cap if cap is not None else "-"))
    _emit(args, {"files": records}, "\n".join(lines))
    return EXIT_OK


def _fresh_host(name: str) -> cf.ClassFileModel:
    pool = [None,
            cf.Utf8Entry(name.encode("utf-8")), cf.ClassEntry(1),
            cf.Utf8Entry(b"java/lang/Object"), cf.ClassEntry(3)]
    return cf.ClassFileModel(0, 46, pool, cf.ACC_PUBLIC | cf.ACC_SUPER,
                             2, 4, [], [], [], [])


def _cmd_gen_dummy(args):
    config = _load_config(args)
    mode = args.mode or config.mode
    spec = DummySpec(args.capacity, args.name, args.shape, mode)
    if args.file:
        model = _read_class(args.file)
        out_path = args.out or args.file
    else:
        model = _fresh_host(args.class_name)
        out_path = args.out or args.class_name + ".class"
    result = synthesize_dummy(model, spec)
    index = resolve_method(result, args.name)
    problem = validate_structure(result, index)
    if problem is not None:
        raise _Fail(EXIT_USAGE, "generated method failed checks: %s" % problem)
    _write_class(out_path, result)
    written = []
    if args.emit_source:
        bundle = emit_source_snippets(spec, args.algorithm)
        written = write_snippets(bundle, args.emit_source)
    payload = {
        "file": str(out_path),
        "method": args.name,
        "shape": args.shape,
        "mode": mode,
        "capacity_bits": capacity(result, index, mode),
        "snippets": [str(p) for p in written],
    }
    text = "wrote %s: method %s shape %s capacity %d bits (%s)" % (
        out_path, args.name, args.shape, payload["capacity_bits"], mode)
    if written:
        text += "\nsnippets: " + ", ".join(str(p) for p in written)
    _emit(args, payload, text)
    return EXIT_OK


def _cmd_embed(args):
    config = _load_config(args)
    model = _read_class(args.file)
    method = args.method
    if method.isdigit():
        method = int(method)
    try:
        marked, plan = embed(model, method, args.message, config)
    except InsufficientCapacity as exc:
        raise _Fail(EXIT_CAPACITY, str(exc))
    out_path = args.out or args.file
    _write_class(out_path, marked)
    if args.plan:
        with open(args.plan, "w", encoding="utf-8") as fh:
            fh.write(plan.to_json())
    text = ("embedded %d bits into %s%s of %s (%d sites, %d/%d bits used)"
            % (plan.required_bits, plan.method_name, plan.method_descriptor,
               out_path, len(plan.sites), plan.required_bits,
               plan.capacity_bits))
    _emit(args, plan.to_dict(), text)
    return EXIT_OK


def _cmd_extract(args):
    config = _load_config(args)
    records = []
    lines = []
    for path in args.files:
        model = _read_class(path)
        decodings = [d.to_dict() for d in decode_all(model, config)]
        records.append({"file": str(path), "methods": decodings})
        for d in decodings:
            lines.append("%s %s%s: %r (%d bits)"
                         % (path, d["method"], d["descriptor"], d["text"],
                            d["bit_length"]))
    _emit(args, {"files": records}, "\n".join(lines))
    return EXIT_OK


def _cmd_verify(args):
    config = _load_config(args)
    try:
        verdicts = verify_files(args.files, args.message, config)
    except _PARSE_ERRORS as exc:
        raise _Fail(EXIT_IO, str(exc))
    lines = []
    all_found = True
    for path in args.files:
        v = verdicts[str(path)]
        all_found &= v.found
        if v.found:
            lines.append("%s: Found in %s at bit %d"
                         % (path, v.method_name, v.bit_offset))
        else:
            lines.append("%s: NotFound" % path)
    payload = {"message": args.message,
               "files": {str(p): verdicts[str(p)].to_dict()
                         for p in args.files}}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if all_found else EXIT_NOT_FOUND


def _cmd_attack(args):
    config = _load_config(args)
    registry = {spec.label: spec
                for spec in atk.builtin_attacks(args.seed,
                                                tuple(args.entry_points))}
    chosen = []
    if args.attacks == "all":
        chosen = list(registry.values())
    else:
        for label in args.attacks.split(","):
            label = label.strip()
            if label not in registry:
                raise _Fail(EXIT_USAGE, "unknown attack %r (have %s)"
                            % (label, ", ".join(sorted(registry))))
            chosen.append(registry[label])
    for item in args.external or []:
        label, _, command = item.partition("=")
        if not command:
            raise _Fail(EXIT_USAGE, "--external needs LABEL=COMMAND, got %r"
                        % item)
        chosen.append(atk.external_attack(label, command))
    matrix = atk.survival_matrix(args.files, chosen, args.message, config,
                                 save_dir=args.save_dir)
    _emit(args, matrix.to_dict(), matrix.to_text())
    return EXIT_OK


def _cmd_simulate(args):
    world = opaque.make_world(args.world)
    groups = opaque.groups_for(world)
    if args.algorithm != "both":
        groups = [g for g in groups if g.algorithm == args.algorithm]
    log = opaque.run_observation(world, groups, args.seed,
                                 args.runs, args.ticks)
    payload = {"world": args.world, "seed": args.seed,
               "lines": log.lines, "stats": log.stats}
    _emit(args, payload, log.text.rstrip("\n"))
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="classmark",
        description="Static watermarks for Java class files via dummy "
                    "methods and opaque-predicate guards.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="watermark config JSON (default: $WM_CONFIG)")
    common.add_argument("--json", action="store_true",
                        help="emit machine-readable JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", parents=[common],
                       help="list methods, capacities, and structure checks")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("gen-dummy", parents=[common],
                       help="add a never-called carrier method")
    p.add_argument("file", nargs="?",
                   help="host class (omit to start a fresh one)")
    p.add_argument("--capacity", type=int, required=True,
                   help="minimum bits the method must hold")
    p.add_argument("--name", required=True, help="method name")
    p.add_argument("--shape", choices=SHAPES, default="Z")
    p.add_argument("--mode", choices=bc.MODES,
                   help="capacity is measured for this mode (default: config)")
    p.add_argument("--class-name", default="DummyHost",
                   help="class name when no host file is given")
    p.add_argument("--out", help="output path (default: in place)")
    p.add_argument("--emit-source", metavar="DIR",
                   help="also write source snippets for manual insertion")
    p.add_argument("--algorithm", choices=("I", "II"), default="I",
                   help="guard style for the emitted snippets")
    p.set_defaults(func=_cmd_gen_dummy)

    p = sub.add_parser("embed", parents=[common],
                       help="write a message into one method")
    p.add_argument("file")
    p.add_argument("--method", required=True, help="method name or index")
    p.add_argument("--message", required=True)
    p.add_argument("--out", help="output path (default: in place)")
    p.add_argument("--plan", metavar="PATH", help="write the site plan JSON")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("extract", parents=[common],
                       help="decode every method's bitstream")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("verify", parents=[common],
                       help="check files for an expected message")
    p.add_argument("files", nargs="+")
    p.add_argument("--message", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("attack", parents=[common],
                       help="run attacks and report mark survival")
    p.add_argument("files", nargs="+")
    p.add_argument("--message", required=True)
    p.add_argument("--attacks", default="all",
                   help="comma-separated builtin attacks (default: all)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--entry-points", type=lambda s: s.split(","),
                   default=["main"], help="comma-separated roots for trim")
    p.add_argument("--external", action="append", metavar="LABEL=CMD",
                   help="external tool template with {in}/{out} placeholders")
    p.add_argument("--save-dir", help="keep each attacked class here")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("simulate", parents=[common],
                       help="run the opaque-predicate scheduler")
    p.add_argument("--world", choices=sorted(opaque.WORLD_SHAPES),
                   default="3:1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--ticks", type=int, default=6)
    p.add_argument("--algorithm", choices=("I", "II", "both"), default="both")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except _Fail as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.code
    except _CAPACITY_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CAPACITY
    except _PARSE_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except _USAGE_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
