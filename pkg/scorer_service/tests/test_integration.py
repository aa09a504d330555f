"""Cross-component integration: the pipeline CLI, pointed at a live
stub-mode service over HTTP, must produce byte-identical artifacts to its
own in-process stub backend. The pipeline is driven purely through its
external surfaces (CLI + wire protocol)."""

import os
import shutil
import socket
import subprocess
import sys
import threading
import time
from pathlib import Path

import pytest
import uvicorn

from scorer_service.app import create_app
from scorer_service.config import ServiceConfig

REPO = Path(__file__).resolve().parents[2]
POSTS = REPO / "tests" / "data" / "posts_200.jsonl"


@pytest.fixture(scope="module")
def service_url():
    config = ServiceConfig(stub_mode=True, seed=13)
    server = uvicorn.Server(
        uvicorn.Config(create_app(config), host="127.0.0.1", port=0, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.05)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def _run_pipeline(out_dir: Path, backend: str, env_extra=None):
    env = dict(os.environ)
    env.update(env_extra or {})
    result = subprocess.run(
        [sys.executable, "-m", "stereokg.cli", "run-all",
         "--backend", backend, "--in", str(POSTS), "--out-dir", str(out_dir)],
        capture_output=True, text=True, env=env, cwd=REPO,
    )
    assert result.returncode == 0, result.stderr
    return result


def test_http_run_matches_stub_run(service_url, tmp_path):
    stub_out = tmp_path / "stub"
    http_out = tmp_path / "http"
    _run_pipeline(stub_out, "stub")
    _run_pipeline(http_out, "http", {"STEREOKG_SCORER_URL": service_url})
    for name in ("kg.jsonl", "sentiment.tsv", "association.tsv", "uk.txt", "sk.txt",
                 "clusters.jsonl", "representatives.jsonl"):
        assert (stub_out / name).read_bytes() == (http_out / name).read_bytes(), name


def test_service_health_over_http(service_url):
    import urllib.request
    import json

    with urllib.request.urlopen(f"{service_url}/health", timeout=5) as resp:
        doc = json.loads(resp.read())
    assert all(doc["capabilities"].values())
