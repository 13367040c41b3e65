"""Corpus self-checks: committed bytes, manifest, and CLI behavior.

These tests treat the main package as a black box reached only through
its command line; everything else is file comparison. They must stay
importable without the classmark modules on sys.path.
"""

import hashlib
import json
import os
import shutil
import subprocess
import sys

import pytest

FIXTURES_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MANIFEST = os.path.join(FIXTURES_DIR, "manifest.json")
CONFIG = os.path.join(FIXTURES_DIR, "watermark-config.json")
MESSAGE = "ITS SURABAYA"


def cli(*args):
    return subprocess.run([sys.executable, "-m", "classmark.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def manifest():
    with open(MANIFEST, encoding="utf-8") as fh:
        return json.load(fh)


def fixture_path(entry):
    return os.path.join(FIXTURES_DIR, entry["class_file"])


def test_manifest_lists_all_committed_classes(manifest):
    classes_dir = os.path.join(FIXTURES_DIR, "classes")
    committed = sorted(f for f in os.listdir(classes_dir)
                       if f.endswith(".class"))
    listed = sorted(os.path.basename(e["class_file"])
                    for e in manifest["fixtures"])
    assert committed == listed


def test_sha256_matches_committed_bytes(manifest):
    for entry in manifest["fixtures"]:
        with open(fixture_path(entry), "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        assert digest == entry["sha256"], entry["name"]


def test_sources_exist_for_every_fixture(manifest):
    for entry in manifest["fixtures"]:
        assert os.path.exists(os.path.join(FIXTURES_DIR, entry["source"]))


def test_every_class_inspects_clean(manifest):
    for entry in manifest["fixtures"]:
        proc = cli("inspect", fixture_path(entry), "--json")
        assert proc.returncode == 0, proc.stderr
        info = json.loads(proc.stdout)["files"][0]
        assert info["class"] == entry["class_name"]
        for m in info["methods"]:
            if m["code_bytes"] is not None:
                assert m["structure"] == "ok", (entry["name"], m)


def test_manifest_matches_recomputed_inventory(manifest):
    for entry in manifest["fixtures"]:
        proc = cli("inspect", fixture_path(entry), "--json")
        assert proc.returncode == 0, proc.stderr
        info = json.loads(proc.stdout)["files"][0]
        recomputed = [
            {"name": m["name"], "descriptor": m["descriptor"],
             "access_flags": m["access_flags"],
             "code_bytes": m["code_bytes"],
             "capacity_bits": m.get("capacity_bits")}
            for m in info["methods"]
        ]
        assert recomputed == entry["methods"], entry["name"]


def test_dummy_capacity_fits_twelve_characters(manifest):
    for entry in manifest["fixtures"]:
        if not entry["dummy_method"]:
            continue
        caps = {m["name"]: m["capacity_bits"] for m in entry["methods"]
                if m["capacity_bits"]}
        assert caps[entry["dummy_method"]]["replace_opcodes"] >= 48, entry["name"]


def test_negative_corpus_verifies_notfound(manifest):
    paths = [fixture_path(e) for e in manifest["fixtures"]]
    proc = cli("verify", *paths, "--message", MESSAGE, "--config", CONFIG,
               "--json")
    assert proc.returncode == 1
    results = json.loads(proc.stdout)["files"]
    assert all(not v["found"] for v in results.values())


def test_rebuild_reproduces_committed_bytes(tmp_path, manifest):
    build = os.path.join(FIXTURES_DIR, "build.py")
    proc = subprocess.run([sys.executable, build, "--out-dir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    for entry in manifest["fixtures"]:
        rebuilt = tmp_path / entry["class_file"]
        with open(fixture_path(entry), "rb") as fh:
            committed = fh.read()
        assert rebuilt.read_bytes() == committed, entry["name"]
    with open(tmp_path / "manifest.json", encoding="utf-8") as fh:
        assert json.load(fh) == manifest


def test_embed_verify_attack_pipeline_via_cli(tmp_path, manifest):
    by_role = {e["role"]: e for e in manifest["fixtures"]}
    guarded = by_role["guarded"]
    negative = by_role["negative_control"]

    gpath = str(tmp_path / "guarded.class")
    shutil.copy(fixture_path(guarded), gpath)
    proc = cli("embed", gpath, "--method", guarded["dummy_method"],
               "--message", MESSAGE, "--config", CONFIG)
    assert proc.returncode == 0, proc.stderr
    proc = cli("verify", gpath, "--message", MESSAGE, "--config", CONFIG)
    assert proc.returncode == 0, proc.stderr

    upath = str(tmp_path / "negative.class")
    shutil.copy(fixture_path(negative), upath)
    proc = cli("embed", upath, "--method", negative["dummy_method"],
               "--message", MESSAGE, "--config", CONFIG)
    assert proc.returncode == 0, proc.stderr

    proc = cli("attack", gpath, upath, "--message", MESSAGE,
               "--config", CONFIG, "--attacks", "trim", "--json")
    assert proc.returncode == 0, proc.stderr
    rows = {r["file"]: r["results"] for r in json.loads(proc.stdout)["rows"]}
    assert rows["guarded.class"]["trim"] == "Survived"
    assert rows["negative.class"]["trim"] == "Destroyed"


def test_config_round_trips_through_cli(manifest):
    with open(CONFIG, encoding="utf-8") as fh:
        config = json.load(fh)
    assert config["key"] == {"bits": "1100101011", "op": "AND"}
    assert config["mode"] == "replace_opcodes"
    assert len(config["codebook"]) == 9
    assert all(len(code) == 4 for code in config["codebook"].values())
    assert set(MESSAGE) <= set(config["codebook"])
