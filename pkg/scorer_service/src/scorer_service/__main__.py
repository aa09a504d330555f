"""Run the scorer service: python -m scorer_service [--port N] [--stub|--models]"""

import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main() -> None:
    parser = argparse.ArgumentParser(prog="scorer_service", description=__doc__)
    parser.add_argument("--port", type=int, default=8750)
    parser.add_argument("--host", default="127.0.0.1")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--stub", action="store_true", help="serve deterministic stubs (default)")
    mode.add_argument("--models", action="store_true", help="serve real pretrained models")
    parser.add_argument("--seed", type=int, default=13, help="stub hashing seed")
    parser.add_argument("--max-batch", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args()

    config = ServiceConfig.from_env()
    config.port = args.port
    config.stub_mode = not args.models
    config.seed = args.seed
    config.max_batch = args.max_batch
    config.device = args.device

    uvicorn.run(create_app(config), host=args.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
