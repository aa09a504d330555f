import json
from pathlib import Path

import pytest

from stereokg.config import default_config
from stereokg.scorer import ScorerGateway, StubBackend

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def stub_gateway(cfg):
    return ScorerGateway(StubBackend(seed=cfg.seed))


@pytest.fixture()
def write_jsonl(tmp_path):
    def _write(name, records):
        path = tmp_path / name
        with path.open("w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        return path

    return _write
