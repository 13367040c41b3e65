import json
import os

import pytest

from classmark import classfile as cf
from classmark.codec import WatermarkConfig

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(REPO, "fixtures")
CLASSES = os.path.join(FIXTURES, "classes")


def fixture_bytes(name: str) -> bytes:
    with open(os.path.join(CLASSES, name + ".class"), "rb") as fh:
        return fh.read()


def fixture_model(name: str) -> cf.ClassFileModel:
    return cf.parse(fixture_bytes(name))


def scratch_host(name: str = "Scratch") -> cf.ClassFileModel:
    """Empty public class for synthesizing carriers onto."""
    pool = [None,
            cf.Utf8Entry(name.encode("utf-8")), cf.ClassEntry(1),
            cf.Utf8Entry(b"java/lang/Object"), cf.ClassEntry(3)]
    return cf.ClassFileModel(0, 46, pool, cf.ACC_PUBLIC | cf.ACC_SUPER,
                             2, 4, [], [], [], [])


@pytest.fixture(scope="session")
def manifest() -> dict:
    with open(os.path.join(FIXTURES, "manifest.json"), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def corpus_paths(manifest) -> list:
    return [os.path.join(FIXTURES, e["class_file"])
            for e in manifest["fixtures"]]


@pytest.fixture(scope="session")
def wm_config() -> WatermarkConfig:
    path = os.path.join(FIXTURES, "watermark-config.json")
    return WatermarkConfig.from_json_file(path)


@pytest.fixture(scope="session")
def config_path() -> str:
    return os.path.join(FIXTURES, "watermark-config.json")
