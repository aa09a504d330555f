"""Command-line entry points for the full pipeline and its analyses.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 scorer-backend
error. `run-all` chains ingest through export under one config and seed and
writes a deterministic run manifest (timings go to a sidecar).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__, analytics, evaluation, export, ingest, kg, mining, pipeline
from .clustering import load_clusters, save_clusters
from .config import PipelineConfig, config_hash, default_config, load_config, serialize_config, write_config
from .errors import ConfigError, DataError, ScorerError, StereoKgError
from .manifest import RunManifest
from .scorer import make_gateway
from .triples import Triple


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems map to exit code 1
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _load_cfg(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else default_config()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "threshold", None) is not None:
        overrides["threshold"] = args.threshold
    if getattr(args, "min_size", None) is not None:
        overrides["min_size"] = args.min_size
    if overrides:
        from dataclasses import replace

        clustering = replace(
            cfg.clustering,
            threshold=overrides.get("threshold", cfg.clustering.threshold),
            min_size=overrides.get("min_size", cfg.clustering.min_size),
        )
        cfg = replace(cfg, clustering=clustering, seed=overrides.get("seed", cfg.seed))
        cfg.validate()
    return cfg


def _gateway(cfg: PipelineConfig, args):
    return make_gateway(cfg.scorer, cfg.seed, backend_override=getattr(args, "backend", None))


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- pipeline stages ---------------------------------------------------------

def cmd_ingest(args) -> int:
    cfg = _load_cfg(args)
    posts, report = ingest.load_dump(args.infile, platform=args.platform)
    kept, channel_dropped = ingest.apply_allowlist(posts, cfg.subreddit_allowlist)
    ingest.save_posts(kept, args.out)
    drops = report.as_dict()
    if channel_dropped:
        drops["channel_not_allowed"] = channel_dropped
    _info(f"ingest: {len(kept)} posts kept, drops {drops}")
    return 0


def cmd_mine(args) -> int:
    cfg = _load_cfg(args)
    posts = ingest.load_posts(args.infile)
    report = mining.MiningReport()
    assertions = mining.mine(posts, cfg.entities, cfg.templates, report)
    mining.save_assertions(assertions, args.out)
    _info(
        f"mine: {len(assertions)} assertions from {len(posts)} posts "
        f"(matches {report.matched}, conversion failures {report.conversion_failures}, "
        f"deduplicated {report.deduplicated})"
    )
    return 0


def cmd_cluster(args) -> int:
    cfg = _load_cfg(args)
    assertions = mining.load_assertions(args.infile)
    gateway = _gateway(cfg, args)
    clusters = pipeline.cluster_assertions(
        assertions, gateway, cfg.clustering.threshold, cfg.clustering.min_size
    )
    save_clusters(clusters, args.out)
    n_communities = sum(1 for c in clusters if not c.is_singleton)
    _info(
        f"cluster: {len(clusters)} clusters "
        f"({n_communities} communities, {len(clusters) - n_communities} singletons)"
    )
    return 0


def cmd_extract(args) -> int:
    cfg = _load_cfg(args)
    assertions = mining.load_assertions(args.infile)
    clusters = load_clusters(args.clusters)
    gateway = _gateway(cfg, args)
    report = pipeline.ExtractionReport()
    representatives, survivors = pipeline.extract_representatives(
        assertions, clusters, cfg, gateway, report
    )
    _save_representatives(representatives, clusters, args.out)
    if args.triples:
        _save_triples_tsv(survivors, args.triples)
    _info(
        f"extract: {len(representatives)} representatives from {len(clusters)} clusters "
        f"(candidates {report.candidates}, pronoun drops {report.filter.dropped_pronoun}, "
        f"no-entity drops {report.filter.dropped_no_entity_subject}, "
        f"emptied {report.filter.dropped_emptied}, "
        f"unrepresentable {report.unrepresentable_clusters})"
    )
    return 0


def _save_representatives(representatives, clusters, path) -> None:
    by_id = {c.cluster_id: c for c in clusters}
    with Path(path).open("w", encoding="utf-8") as fh:
        for cluster_id in sorted(representatives):
            t = representatives[cluster_id]
            fh.write(
                json.dumps(
                    {
                        "cluster_id": cluster_id,
                        "entity": by_id[cluster_id].entity_id,
                        "subject": t.subject,
                        "predicate": t.predicate,
                        "object": t.object,
                        "score": t.score,
                        "source_assertion": t.source_assertion,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def _load_representatives(path) -> dict[int, Triple]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected representatives file {path}")
    out: dict[int, Triple] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out[rec["cluster_id"]] = Triple(
                    subject=rec["subject"],
                    predicate=rec["predicate"],
                    object=rec["object"],
                    source_assertion=rec.get("source_assertion", -1),
                    score=rec.get("score"),
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: bad representative record: {exc}") from exc
    return out


def _save_triples_tsv(survivors, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("entity\tsubject\tpredicate\tobject\tcluster_id\tmember_count\n")
        for cluster, t in survivors:
            fh.write(
                f"{cluster.entity_id}\t{t.subject}\t{t.predicate}\t{t.object}\t"
                f"{cluster.cluster_id}\t{len(cluster.members)}\n"
            )


def cmd_build_kg(args) -> int:
    mining_assertions = mining.load_assertions(args.infile)
    clusters = load_clusters(args.clusters)
    representatives = _load_representatives(args.representatives)
    report = kg.BuildReport()
    entries = pipeline.build_kg(mining_assertions, clusters, representatives, report)
    kg.save(entries, args.out)
    if args.tsv:
        kg.save_tsv(entries, args.tsv)
    summary = kg.stats(entries)
    _info(f"build-kg: {summary.total} entries {summary.per_entity_counts}")
    return 0


# --- analyses ----------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = _load_cfg(args)
    entries = kg.load(args.infile, cfg.entities)
    if args.what == "sentiment":
        gateway = _gateway(cfg, args)
        report = analytics.sentiment_report(entries, cfg.entities, gateway)
        analytics.save_sentiment_tsv(report, args.out)
        for s in report.summaries:
            print(f"{s.entity_id}\tn={s.n}\tpos={s.pos_pct:.1f}\tneu={s.neu_pct:.1f}\tneg={s.neg_pct:.1f}")
        if report.excluded:
            _info(f"sentiment: {report.excluded} entries excluded by scorer failures")
        return 0
    table = analytics.association(entries, cfg.stopwords)
    analytics.save_association_tsv(table, args.out)
    counts = kg.stats(entries).per_entity_counts
    print(analytics.format_summary(table, counts, k=args.k or 12))
    return 0


# --- evaluation --------------------------------------------------------------

def cmd_eval(args) -> int:
    if args.what == "sample":
        cfg = _load_cfg(args)
        entries = kg.load(args.infile, cfg.entities)
        items = evaluation.sample_eval_set(
            entries,
            n_per_stratum=args.n_per_stratum,
            n_duplicates=args.duplicates,
            seed=args.seed if args.seed is not None else cfg.seed,
        )
        evaluation.save_sheet(items, args.out)
        _info(f"eval sample: {len(items)} items -> {args.out}")
        return 0
    if args.what == "suc":
        entries = kg.load(args.kg) if args.kg else None
        items = evaluation.load_sheet(args.sheet, entries)
        records = evaluation.load_responses(args.responses)
        rates = evaluation.success_rate(items, records, aggregate=args.aggregate)
        print(f"SUC all: {rates.suc_all:.1f}")
        print(f"SUC singleton-derived: {rates.suc_sd:.1f}")
        print(f"SUC cluster-derived: {rates.suc_cd:.1f}")
        return 0
    if args.what == "agreement":
        records = evaluation.load_responses(args.responses)
        metrics = evaluation.METRICS if args.metric == "all" else (args.metric,)
        for metric in metrics:
            oa = evaluation.observed_agreement(records, metric)
            print(f"OA {metric}: {oa:.4f}")
        if args.sheet:
            items = evaluation.load_sheet(args.sheet)
            for annotator, value in sorted(evaluation.intra_consistency(items, records).items()):
                print(f"intra {annotator}: {value:.4f}")
        return 0
    # acc5
    probes = evaluation.load_probes(args.probes)
    if args.predictions:
        predictions = evaluation.load_predictions(args.predictions)
    else:
        cfg = _load_cfg(args)
        gateway = _gateway(cfg, args)
        topk = gateway.fill_mask([p.sentence_with_mask for p in probes], args.k)
        predictions = {p.probe_id: ranked for p, ranked in zip(probes, topk)}
    acc = evaluation.acc_at_k(probes, predictions, args.k)
    print(f"ACC@{args.k}: {acc:.1f}")
    return 0


# --- export ------------------------------------------------------------------

def cmd_export(args) -> int:
    if args.what == "splits":
        labels = export.load_labels(args.labels)
        stereotype_ids = []
        if args.stereotype_ids:
            stereotype_ids = [
                line.strip()
                for line in Path(args.stereotype_ids).read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        ratios = tuple(float(x) for x in args.ratios.split(","))
        if len(ratios) != 3:
            raise ConfigError("--ratios must be three comma-separated floats")
        manifest = export.build_split_manifest(
            labels, args.name, stereotype_ids, seed=args.seed if args.seed is not None else 13,
            ratios=ratios,
        )
        export.save_manifest(manifest, args.out)
        _info(f"export splits: {manifest.counts()}")
        return 0
    cfg = _load_cfg(args)
    entries = kg.load(args.infile, cfg.entities)
    report = export.ExportReport()
    if args.what == "uk":
        corpus = export.export_uk(entries, dedup=not args.no_dedup, report=report)
    else:
        gateway = _gateway(cfg, args)
        corpus = export.export_sk(entries, gateway, fallback=not args.no_fallback, report=report)
    export.save_corpus(corpus, args.out, sidecar=args.sidecar)
    _info(
        f"export {args.what}: {report.emitted} sentences "
        f"(deduplicated {report.deduplicated}, skipped {report.skipped})"
    )
    return 0


# --- run-all -----------------------------------------------------------------

def cmd_run_all(args) -> int:
    cfg = _load_cfg(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gateway = _gateway(cfg, args)
    manifest = RunManifest(config_hash=config_hash(cfg), seed=cfg.seed)
    timings: list[tuple[str, float]] = []

    def timed(name):
        class _T:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timings.append((name, time.perf_counter() - self.t0))

        return _T()

    dump_path = args.infile

    with timed("ingest"):
        posts, skip_report = ingest.load_dump(dump_path, platform=args.platform)
        total_lines = len(posts) + skip_report.total_skipped
        kept, channel_dropped = ingest.apply_allowlist(posts, cfg.subreddit_allowlist)
        ingest.save_posts(kept, out_dir / "posts.jsonl")
    drops = skip_report.as_dict()
    if channel_dropped:
        drops["channel_not_allowed"] = channel_dropped
    manifest.add_stage("ingest", [str(dump_path)], ["posts.jsonl"], total_lines, len(kept), drops)

    with timed("mine"):
        mine_report = mining.MiningReport()
        assertions = mining.mine(kept, cfg.entities, cfg.templates, mine_report)
        mining.save_assertions(assertions, out_dir / "mined.jsonl")
    manifest.add_stage(
        "mine", ["posts.jsonl"], ["mined.jsonl"], len(kept), len(assertions),
        {"conversion_failed": mine_report.conversion_failures,
         "deduplicated": mine_report.deduplicated},
    )

    with timed("cluster"):
        clusters = pipeline.cluster_assertions(
            assertions, gateway, cfg.clustering.threshold, cfg.clustering.min_size
        )
        save_clusters(clusters, out_dir / "clusters.jsonl")
    manifest.add_stage("cluster", ["mined.jsonl"], ["clusters.jsonl"], len(assertions), len(clusters))

    with timed("extract"):
        ex_report = pipeline.ExtractionReport()
        representatives, survivors = pipeline.extract_representatives(
            assertions, clusters, cfg, gateway, ex_report
        )
        _save_representatives(representatives, clusters, out_dir / "representatives.jsonl")
        _save_triples_tsv(survivors, out_dir / "triples.tsv")
    manifest.add_stage(
        "extract", ["clusters.jsonl"], ["representatives.jsonl", "triples.tsv"],
        len(clusters), len(representatives),
        {
            "no_verb": ex_report.no_verb,
            "pronoun": ex_report.filter.dropped_pronoun,
            "no_entity_subject": ex_report.filter.dropped_no_entity_subject,
            "emptied": ex_report.filter.dropped_emptied,
            "unrepresentable": ex_report.unrepresentable_clusters,
        },
    )

    with timed("build-kg"):
        build_report = kg.BuildReport()
        entries = pipeline.build_kg(assertions, clusters, representatives, build_report)
        kg.save(entries, out_dir / "kg.jsonl")
        kg.save_tsv(entries, out_dir / "kg.tsv")
    manifest.add_stage(
        "build-kg", ["representatives.jsonl"], ["kg.jsonl", "kg.tsv"],
        len(representatives), len(entries),
    )

    with timed("analyze-sentiment"):
        sent_report = analytics.sentiment_report(entries, cfg.entities, gateway)
        analytics.save_sentiment_tsv(sent_report, out_dir / "sentiment.tsv")
    manifest.add_stage(
        "analyze-sentiment", ["kg.jsonl"], ["sentiment.tsv"],
        len(entries), len(sent_report.summaries),
        {"excluded": sent_report.excluded} if sent_report.excluded else {},
    )

    with timed("analyze-pmi"):
        table = analytics.association(entries, cfg.stopwords)
        analytics.save_association_tsv(table, out_dir / "association.tsv")
    manifest.add_stage(
        "analyze-pmi", ["kg.jsonl"], ["association.tsv"], len(entries), len(table.counts)
    )

    with timed("export-uk"):
        uk_report = export.ExportReport()
        uk = export.export_uk(entries, report=uk_report)
        export.save_corpus(uk, out_dir / "uk.txt")
    manifest.add_stage(
        "export-uk", ["kg.jsonl"], ["uk.txt"], len(entries), len(uk.sentences),
        {"deduplicated": uk_report.deduplicated} if uk_report.deduplicated else {},
    )

    with timed("export-sk"):
        sk = export.export_sk(entries, gateway)
        export.save_corpus(sk, out_dir / "sk.txt")
    manifest.add_stage("export-sk", ["kg.jsonl"], ["sk.txt"], len(entries), len(sk.sentences))

    manifest.save(out_dir / "manifest.json")
    with (out_dir / "timings.txt").open("w", encoding="utf-8") as fh:
        for name, dt in timings:
            fh.write(f"{name}\t{dt:.3f}s\n")
    _info(f"run-all: {len(entries)} KG entries -> {out_dir}")
    return 0


def cmd_dump_config(args) -> int:
    write_config(default_config(), args.out)
    _info(f"wrote default config to {args.out}")
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="stereokg", description=__doc__)
    parser.add_argument("--version", action="version", version=f"stereokg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scorer=False, seed=False):
        p.add_argument("--config", help="pipeline config JSON (default: shipped config)")
        if scorer:
            p.add_argument("--backend", choices=["stub", "http", "cache"],
                           help="scorer backend override")
        if seed:
            p.add_argument("--seed", type=int, help="seed override")

    p = sub.add_parser("ingest", help="normalize a raw dump into a post file")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--platform", default="other", choices=["reddit", "twitter", "other"])
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mine", help="mine template-matched assertions from posts")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("cluster", help="group similar assertions per entity")
    common(p, scorer=True, seed=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, help="cosine threshold override")
    p.add_argument("--min-size", dest="min_size", type=int, help="minimum community size")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("extract", help="extract, filter, and rank triples")
    common(p, scorer=True, seed=True)
    p.add_argument("--in", dest="infile", required=True, help="mined assertion file")
    p.add_argument("--clusters", required=True)
    p.add_argument("--out", required=True, help="representatives JSONL")
    p.add_argument("--triples", help="optional TSV dump of all surviving triples")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build-kg", help="assemble the knowledge graph file")
    common(p)
    p.add_argument("--in", dest="infile", required=True, help="mined assertion file")
    p.add_argument("--clusters", required=True)
    p.add_argument("--representatives", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tsv", help="optional flat TSV export")
    p.set_defaults(func=cmd_build_kg)

    p = sub.add_parser("analyze", help="sentiment or PMI association reports")
    p.add_argument("what", choices=["sentiment", "pmi"])
    common(p, scorer=True, seed=True)
    p.add_argument("--in", dest="infile", required=True, help="KG file")
    p.add_argument("--out", required=True, help="report TSV")
    p.add_argument("--k", type=int, help="tokens per entity in the console summary")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eval", help="human-evaluation and masked-prediction metrics")
    p.add_argument("what", choices=["sample", "suc", "agreement", "acc5"])
    common(p, scorer=True, seed=True)
    p.add_argument("--in", dest="infile", help="KG file (for sample)")
    p.add_argument("--out", help="output sheet CSV (for sample)")
    p.add_argument("--n-per-stratum", dest="n_per_stratum", type=int, default=50)
    p.add_argument("--duplicates", type=int, default=10)
    p.add_argument("--sheet", help="annotation sheet CSV")
    p.add_argument("--responses", help="annotation responses CSV")
    p.add_argument("--kg", help="KG file for derivation lookup")
    p.add_argument("--aggregate", choices=["mean", "majority"], default="mean")
    p.add_argument("--metric", default="all",
                   choices=["all", "coh", "com", "dom", "cr1", "cr2"])
    p.add_argument("--probes", help="masked probe JSONL")
    p.add_argument("--predictions", help="predictions JSONL; omit to use the scorer")
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="UK/SK corpora and split manifests")
    p.add_argument("what", choices=["uk", "sk", "splits"])
    common(p, scorer=True, seed=True)
    p.add_argument("--in", dest="infile", help="KG file (for uk/sk)")
    p.add_argument("--out", required=True)
    p.add_argument("--sidecar", help="line-to-entry map path (default: <out>.map.jsonl)")
    p.add_argument("--no-dedup", action="store_true", help="keep duplicate UK sentences")
    p.add_argument("--no-fallback", action="store_true",
                   help="skip entries the scorer cannot verbalize")
    p.add_argument("--labels", help="id<TAB>label file (for splits)")
    p.add_argument("--name", default="dataset", help="dataset name (for splits)")
    p.add_argument("--stereotype-ids", dest="stereotype_ids",
                   help="file with one stereotype sample id per line")
    p.add_argument("--ratios", default="0.7,0.1,0.2")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("run-all", help="run the whole pipeline into one directory")
    common(p, scorer=True, seed=True)
    p.add_argument("--in", dest="infile", required=True, help="raw dump JSONL")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--platform", default="other", choices=["reddit", "twitter", "other"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-size", dest="min_size", type=int)
    p.set_defaults(func=cmd_run_all)

    p = sub.add_parser("dump-config", help="write the shipped default config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dump_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ScorerError as exc:
        print(f"scorer error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except StereoKgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
