from __future__ import annotations

import io
import json
from pathlib import Path

import pytest
from PIL import Image

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def java_corpus() -> Path:
    return FIXTURES / "javaproj"


@pytest.fixture(scope="session")
def expected_referents() -> dict:
    return json.loads((FIXTURES / "javaproj_expected.json").read_text())


@pytest.fixture(scope="session")
def minitree() -> Path:
    return FIXTURES / "minitree"


@pytest.fixture(scope="session")
def generictree() -> Path:
    return FIXTURES / "generictree"


def make_png(width: int = 4, height: int = 3, color=(200, 40, 40)) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (width, height), color).save(buf, format="PNG")
    return buf.getvalue()


def make_jpeg(width: int = 4, height: int = 3) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (width, height), (10, 110, 210)).save(buf, format="JPEG")
    return buf.getvalue()


@pytest.fixture
def png_bytes() -> bytes:
    return make_png()


@pytest.fixture
def jpeg_bytes() -> bytes:
    return make_jpeg()
