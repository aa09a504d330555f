#!/usr/bin/env python3
"""Record scorer outputs for a built KG into a replayable cache file.

Queries the configured backend (http by default) for every capability the
analysis and export stages would need - embeddings and acceptability for
the mined statements, sentiment for masked verbalizations, verbalize for
the KG triples - and appends the results to a cache file usable with
`--backend cache`.
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from stereokg import kg as kg_store  # noqa: E402
from stereokg.analytics import mask_entity  # noqa: E402
from stereokg.config import default_config, load_config  # noqa: E402
from stereokg.mining import load_assertions  # noqa: E402
from stereokg.scorer import append_cache_records, make_gateway, triple_key_text  # noqa: E402
from stereokg.triples import verbalize_plain  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config")
    parser.add_argument("--kg", required=True)
    parser.add_argument("--mined", help="mined assertion file (for embed/acceptability)")
    parser.add_argument("--out", required=True, help="cache JSONL to append to")
    parser.add_argument("--backend", default="http", choices=["http", "stub"])
    args = parser.parse_args()

    cfg = load_config(args.config) if args.config else default_config()
    gateway = make_gateway(cfg.scorer, cfg.seed, backend_override=args.backend)
    entries = kg_store.load(args.kg, cfg.entities)

    if args.mined:
        statements = [a.statement_text for a in load_assertions(args.mined)]
        append_cache_records(args.out, "embed", statements, gateway.embed(statements))
        append_cache_records(
            args.out, "acceptability", statements, gateway.acceptability(statements)
        )

    masked = [
        mask_entity(verbalize_plain(e.triple), cfg.entity(e.entity_id)) for e in entries
    ]
    append_cache_records(args.out, "sentiment", masked, gateway.sentiment(masked))

    triples = [e.triple.fields() for e in entries]
    append_cache_records(
        args.out,
        "verbalize",
        [triple_key_text(t) for t in triples],
        gateway.verbalize(triples),
    )
    print(f"recorded scorer outputs for {len(entries)} entries -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
