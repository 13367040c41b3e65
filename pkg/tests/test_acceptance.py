"""End-to-end acceptance checks, one test per advertised guarantee.

Each test is a single pass/fail line under pytest -v. Timing budgets
guard against pathological slowdowns, not micro-performance.
"""

import hashlib
import json
import os
import random
import time

import pytest

from classmark import bytecode as bc
from classmark import classfile as cf
from classmark import opaque
from classmark.attacks import (DESTROYED, SURVIVED, builtin_attacks,
                               survival_matrix)
from classmark.bytecode import (BITS_TO_ARITH8, BITS_TO_BRANCH2,
                                BITS_TO_BRANCH4)
from classmark.codec import (KeySpec, WatermarkConfig, apply_key,
                             decode_chars, encode_chars, example_codebook,
                             extended_codebook)
from classmark.dummygen import DummySpec, synthesize_dummy, validate_structure
from classmark.embedder import embed
from classmark.extractor import verify_model

from conftest import CLASSES, fixture_bytes, scratch_host

FIXTURE_NAMES = ("HelloWorld", "Node", "GuardedRing", "GuardedRingCond",
                 "UnguardedDummy")
ALPHABET = " ITSURABY"
MESSAGE = "ITS SURABAYA"
FULL_CONFIG = WatermarkConfig(extended_codebook(),
                              KeySpec("1100101011", "AND"))


# --- shared 1000-trial embed/verify loop -------------------------------------

@pytest.fixture(scope="module")
def embed_trials():
    rng = random.Random(20040614)
    host = scratch_host("TrialHost")
    trials = []
    start = time.monotonic()
    for _ in range(1000):
        message = "".join(rng.choice(ALPHABET)
                          for _ in range(rng.randint(1, 8)))
        mode = rng.choice(bc.MODES)
        operator = rng.choice((None, "AND", "OR", "XOR"))
        bit_count = 4 * len(message)
        key = None if operator is None else KeySpec(
            "".join(rng.choice("01") for _ in range(rng.randint(1, bit_count))),
            operator)
        config = WatermarkConfig(extended_codebook(), key, mode)
        carrier = synthesize_dummy(host, DummySpec(bit_count, "z0", mode=mode))
        baseline = cf.serialize(carrier)
        marked, plan = embed(carrier, "z0", message, config)
        data = cf.serialize(marked)
        verdict = verify_model(marked, message, config)
        trials.append((message, config, baseline, data, plan, verdict))
    elapsed = time.monotonic() - start
    return trials, elapsed


def test_round_trip_is_byte_identical_for_committed_corpus():
    start = time.monotonic()
    for name in FIXTURE_NAMES:
        data = fixture_bytes(name)
        assert cf.serialize(cf.parse(data)) == data, name
    assert time.monotonic() - start < 1.0


def test_codepoint_tables_and_key_example_are_exact():
    assert BITS_TO_ARITH8 == {"000": 0x60, "001": 0x64, "010": 0x68,
                              "011": 0x6C, "100": 0x70, "101": 0x7E,
                              "110": 0x80, "111": 0x82}
    assert BITS_TO_BRANCH4 == {"00": 0x9B, "01": 0x9C, "10": 0x9D,
                               "11": 0x9E}
    assert BITS_TO_BRANCH2 == {"0": 0xC6, "1": 0xC7}
    keyed = apply_key("110011001000110", KeySpec("1100101011", "AND"))
    assert keyed == "110011000000010"
    prefix = encode_chars("ITS SUR", example_codebook()).bits
    assert decode_chars(prefix, example_codebook()).text == "ITS SUR"


def test_embed_then_verify_finds_every_message(embed_trials):
    trials, elapsed = embed_trials
    assert len(trials) == 1000
    assert all(verdict.found for *_, verdict in trials)
    for message, config, *_ in trials:
        if config.key is not None and config.key.op == "XOR":
            plain = encode_chars(message, config.codebook).bits
            once = apply_key(plain, config.key)
            assert apply_key(once, config.key) == plain
    assert elapsed < 30.0


def test_embedding_preserves_structure_and_touches_only_target(embed_trials):
    trials, _ = embed_trials
    for message, config, baseline, data, plan, _ in trials:
        reparsed = cf.parse(data)
        assert validate_structure(reparsed, plan.method_index) is None
        start, end = cf.code_spans(reparsed)[plan.method_index]
        assert data[:start] == baseline[:start], message
        assert data[end:] == baseline[end:], message


def test_predicate_groups_stay_false_while_tokens_vary():
    for shape in ("3:1", "2:1"):
        for seed in range(50):
            world = opaque.make_world(shape)
            groups = opaque.groups_for(world)
            assert {g.algorithm for g in groups} == {"I", "II"}
            log = opaque.run_observation(world, groups, seed=seed,
                                         runs=1, ticks_per_run=200)
            assert all(count == 0
                       for count in log.stats["group_true_count"].values())
            assert 0.0 < log.stats["token_true_rate"]["p"] < 1.0
            tail = ("P == Q false" if shape == "3:1"
                    else "(G == H) = false")
            observed = [line for line in log.lines
                        if line.startswith("P ")]
            assert len(observed) == 200
            assert all(line.endswith(tail) for line in observed)


def test_pell_identity_never_holds():
    start = time.monotonic()
    pell = opaque.pell_predicate
    assert not any(pell(x, y) for x in range(1001) for y in range(1001))
    rng = random.Random(7)
    assert not any(pell(rng.getrandbits(64), rng.getrandbits(64))
                   for _ in range(1_000_000))
    assert time.monotonic() - start < 10.0


def _marked_file(tmp_path, name, method, message, config):
    model = cf.parse(fixture_bytes(name))
    marked, _ = embed(model, method, message, config)
    path = tmp_path / ("%s.class" % name)
    path.write_bytes(cf.serialize(marked))
    return path


def test_survival_matrix_matches_expected_pattern(tmp_path):
    guarded = _marked_file(tmp_path, "GuardedRing", "Z", MESSAGE, FULL_CONFIG)
    guarded_cond = _marked_file(tmp_path, "GuardedRingCond", "Z", MESSAGE,
                                FULL_CONFIG)
    matrix = survival_matrix([guarded, guarded_cond], builtin_attacks(),
                             MESSAGE, FULL_CONFIG)
    assert not matrix.errors
    for _, cells in matrix.rows:
        assert cells["rename"] == SURVIVED
        assert cells["strip_debug"] == SURVIVED
        assert cells["scramble_lines"] == SURVIVED
        assert cells["trim"] == SURVIVED
        assert cells["normalize"] == DESTROYED

    unguarded = _marked_file(tmp_path, "UnguardedDummy", "W", MESSAGE,
                             FULL_CONFIG)
    matrix = survival_matrix([unguarded], builtin_attacks(), MESSAGE,
                             FULL_CONFIG)
    _, cells = matrix.rows[0]
    assert cells["trim"] == DESTROYED

    operand_config = WatermarkConfig(extended_codebook(),
                                     KeySpec("1100101011", "AND"),
                                     bc.MODE_OPERANDS)
    operand = _marked_file(tmp_path, "GuardedRing", "Z", "ITS SUR",
                           operand_config)
    matrix = survival_matrix([operand], builtin_attacks(), "ITS SUR",
                             operand_config)
    _, cells = matrix.rows[0]
    assert cells["normalize"] == SURVIVED


def test_unwatermarked_corpus_never_reports_found():
    assert len(MESSAGE) == 12
    for name in FIXTURE_NAMES:
        model = cf.parse(fixture_bytes(name))
        verdict = verify_model(model, MESSAGE, FULL_CONFIG)
        assert not verdict.found, name


def test_fixture_manifest_matches_recomputed_inventory():
    root = os.path.dirname(CLASSES)
    manifest = json.load(open(os.path.join(root, "manifest.json")))
    assert {f["name"] for f in manifest["fixtures"]} == set(FIXTURE_NAMES)
    for entry in manifest["fixtures"]:
        data = open(os.path.join(root, entry["class_file"]), "rb").read()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        model = cf.parse(data)
        pool = model.constant_pool
        assert pool[pool[model.this_class].name_index].text == \
            entry["class_name"]
        recomputed = []
        for m in model.methods:
            code = cf.code_of(m)
            instrs = (bc.decode_instructions(code.code)
                      if code is not None else [])
            caps = {mode: sum(len(bc.site_bits(instrs[i], k))
                              for i, k in bc.scan_codepoints(instrs, mode))
                    for mode in bc.MODES}
            recomputed.append({
                "name": pool[m.name_index].text,
                "descriptor": pool[m.descriptor_index].text,
                "access_flags": "0x%04X" % m.access_flags,
                "code_bytes": len(code.code) if code is not None else 0,
                "capacity_bits": caps,
            })
        assert recomputed == entry["methods"]

    # the guard fixtures really do call their dummy from guarded code
    for name in ("GuardedRing", "GuardedRingCond"):
        model = cf.parse(fixture_bytes(name))
        pool = model.constant_pool
        work = next(m for m in model.methods
                    if pool[m.name_index].text == "work")
        calls = []
        for instr in bc.decode_instructions(cf.code_of(work).code):
            if instr.opcode != 0xB7:  # invokespecial
                continue
            ref = pool[(instr.operands[0] << 8) | instr.operands[1]]
            nat = pool[ref.name_and_type_index]
            calls.append((pool[nat.name_index].text,
                          pool[nat.descriptor_index].text))
        assert ("Z", "(I)V") in calls, name
