"""Command-line surface for the corpus pipeline.

Subcommands:

    ingest   validate a snippet corpus, optionally rewriting it normalized
    trace    run the full execution-feedback pipeline over a corpus
    advgen   grow a function-calling pool with the adversarial loop
    export   write a fine-tuning stage file plus the training manifest
    stats    summarize stats files as TSV and render figures

Exit codes: 0 on success, 1 when per-record failures occurred, 2 on
fatal configuration errors. Backend credentials are read only from the
environment variable named in the configuration, never from flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import advloop, export, pipeline, report
from .backends import HttpBackend, MockDiscriminatorBackend, MockGeneratorBackend
from .config import BackendConfig, ConfigError, PipelineConfig, apply_overrides, load_config
from .records import dump_snippets, load_annotated, load_snippets, validate_snippet, write_jsonl
from .sandbox import ToolchainError

log = logging.getLogger("corpusmill")

EXIT_OK = 0
EXIT_RECORD_FAILURES = 1
EXIT_FATAL = 2


def _load_criteria(cfg: PipelineConfig) -> str:
    if cfg.criteria_file:
        return Path(cfg.criteria_file).read_text(encoding="utf-8")
    return (
        resources.files("corpusmill").joinpath("prompts/fncall_criteria.txt").read_text("utf-8")
    )


def _make_generator(bc: BackendConfig):
    if bc.kind == "mock":
        return MockGeneratorBackend(seed=bc.mock_seed)
    return HttpBackend(bc.endpoint, bc.credential_env)


def _make_discriminator(bc: BackendConfig):
    if bc.kind == "mock":
        return MockDiscriminatorBackend()
    return HttpBackend(bc.endpoint, bc.credential_env)


def _write_json(obj: dict | list, path: str) -> None:
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    tmp.replace(target)


def cmd_ingest(cfg: PipelineConfig, out: str | None) -> int:
    try:
        snippets, errors = load_snippets(cfg.corpus_in)
    except OSError as exc:
        log.error("cannot read corpus %s: %s", cfg.corpus_in, exc)
        return EXIT_FATAL
    bad = list(errors)
    good = []
    for snippet in snippets:
        violations = validate_snippet(snippet)
        if violations:
            bad.append((snippet.id, "; ".join(violations)))
        else:
            good.append(snippet)
    for entry in bad:
        if hasattr(entry, "line_no"):
            log.error("line %d: %s", entry.line_no, entry.reason)
        else:
            log.error("record %s: %s", entry[0], entry[1])
    if out:
        dump_snippets(good, out)
    log.info("ingest: %d valid, %d rejected", len(good), len(bad))
    return EXIT_RECORD_FAILURES if bad else EXIT_OK


def cmd_trace(cfg: PipelineConfig) -> int:
    try:
        snippets, errors = load_snippets(cfg.corpus_in)
    except OSError as exc:
        log.error("cannot read corpus %s: %s", cfg.corpus_in, exc)
        return EXIT_FATAL
    for err in errors:
        log.error("corpus line %d: %s", err.line_no, err.reason)
    valid = []
    invalid_records = 0
    for snippet in snippets:
        violations = validate_snippet(snippet)
        if violations:
            invalid_records += 1
            log.error("record %s: %s", snippet.id, "; ".join(violations))
        else:
            valid.append(snippet)

    annotated, stats = pipeline.run_trace_pipeline(
        valid,
        cfg.limits,
        cfg.refine,
        mode=cfg.mode,
        workers=cfg.workers,
        tracer_cmd=cfg.tracer_cmd,
    )
    write_jsonl(cfg.annotated_out, (a.to_json() for a in annotated))
    _write_json(stats.to_dict(), cfg.trace_stats_out)
    log.info(
        "trace: %d ingested, %d annotated, %d dropped, %d errored",
        stats.ingested,
        stats.annotated,
        sum(stats.drops.values()),
        stats.errored,
    )
    failures = stats.errored + len(errors) + invalid_records
    return EXIT_RECORD_FAILURES if failures else EXIT_OK


def cmd_advgen(cfg: PipelineConfig) -> int:
    if not Path(cfg.seed_in).exists():
        log.error("seed file %s does not exist", cfg.seed_in)
        return EXIT_FATAL
    criteria = _load_criteria(cfg)
    seed_report = advloop.load_seed(cfg.seed_in)
    for line_no, reason in seed_report.rejections:
        log.error("seed line %d: %s", line_no, reason)
    if not seed_report.pool:
        log.error("seed pool is empty after validation")
        return EXIT_FATAL
    pool, rounds = advloop.run_rounds(
        cfg.loop,
        _make_generator(cfg.generator),
        _make_discriminator(cfg.discriminator),
        seed_report.pool,
        criteria,
    )
    advloop.dump_pool(pool, cfg.pool_out)
    _write_json([row.to_dict() for row in rounds], cfg.advgen_stats_out)
    log.info(
        "advgen: %d seed items, %d after %d rounds", len(seed_report.pool), len(pool), len(rounds)
    )
    round_errors = sum(1 for row in rounds if row.error)
    failures = len(seed_report.rejections) + round_errors
    return EXIT_RECORD_FAILURES if failures else EXIT_OK


def cmd_export(cfg: PipelineConfig, stage: str) -> int:
    if stage == "code":
        if not Path(cfg.annotated_out).exists():
            log.error("annotated dataset %s does not exist; run trace first", cfg.annotated_out)
            return EXIT_FATAL
        annotated = load_annotated(cfg.annotated_out)
        stdin_by_id = {}
        if Path(cfg.corpus_in).exists():
            snippets, _ = load_snippets(cfg.corpus_in)
            stdin_by_id = {s.id: s.stdin for s in snippets}
        count = export.export_code_stage(annotated, stdin_by_id, cfg.export_code_out)
        log.info("export code: %d records -> %s", count, cfg.export_code_out)
    else:
        if not Path(cfg.pool_out).exists():
            log.error("pool dataset %s does not exist; run advgen first", cfg.pool_out)
            return EXIT_FATAL
        seed_report = advloop.load_seed(cfg.pool_out)
        count = export.export_fncall_stage(seed_report.pool, cfg.export_fncall_out)
        log.info("export fncall: %d records -> %s", count, cfg.export_fncall_out)
    export.write_manifest(cfg.export_code_out, cfg.export_fncall_out, cfg.manifest_out)
    return EXIT_OK


def cmd_stats(cfg: PipelineConfig, outdir: str) -> int:
    out = Path(outdir)
    trace_stats = None
    advgen_rows = None
    if Path(cfg.trace_stats_out).exists():
        trace_stats = json.loads(Path(cfg.trace_stats_out).read_text(encoding="utf-8"))
    if Path(cfg.advgen_stats_out).exists():
        advgen_rows = json.loads(Path(cfg.advgen_stats_out).read_text(encoding="utf-8"))
    if trace_stats is None and advgen_rows is None:
        log.error(
            "no stats found at %s or %s", cfg.trace_stats_out, cfg.advgen_stats_out
        )
        return EXIT_FATAL
    out.mkdir(parents=True, exist_ok=True)
    report.write_summary_tsv(trace_stats, advgen_rows, out / "summary.tsv")
    written = [out / "summary.tsv"]
    if trace_stats is not None:
        written += report.render_trace_figures(trace_stats, out)
    if advgen_rows is not None:
        written += report.render_advgen_figures(advgen_rows, out)
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corpusmill",
        description="Execution-feedback code corpora and adversarial function-calling data.",
    )
    parser.add_argument("--config", help="path to the JSON config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate a snippet corpus")
    p_ingest.add_argument("--input", dest="corpus_in")
    p_ingest.add_argument("--output", dest="ingest_out")

    p_trace = sub.add_parser("trace", help="run the execution-feedback pipeline")
    p_trace.add_argument("--input", dest="corpus_in")
    p_trace.add_argument("--output", dest="annotated_out")
    p_trace.add_argument("--stats", dest="trace_stats_out")
    p_trace.add_argument("--mode", choices=("line", "prefix", "suffix"))
    p_trace.add_argument("--workers", type=int)

    p_adv = sub.add_parser("advgen", help="run the adversarial refinement loop")
    p_adv.add_argument("--seed", dest="seed_in")
    p_adv.add_argument("--output", dest="pool_out")
    p_adv.add_argument("--stats", dest="advgen_stats_out")
    p_adv.add_argument("--rounds", dest="loop_rounds", type=int)
    p_adv.add_argument("--batch", dest="loop_batch", type=int)
    p_adv.add_argument("--target-pool-size", dest="loop_target_pool_size", type=int)

    p_export = sub.add_parser("export", help="write fine-tuning datasets")
    p_export.add_argument("--stage", choices=("code", "fncall"), required=True)
    p_export.add_argument("--input", dest="export_in")
    p_export.add_argument("--output", dest="export_out")
    p_export.add_argument("--manifest", dest="manifest_out")

    p_stats = sub.add_parser("stats", help="summarize stats and render figures")
    p_stats.add_argument("--trace-stats", dest="trace_stats_out")
    p_stats.add_argument("--advgen-stats", dest="advgen_stats_out")
    p_stats.add_argument("--outdir", default="report")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config)
        overrides = {
            key: getattr(args, key)
            for key in (
                "corpus_in",
                "annotated_out",
                "trace_stats_out",
                "mode",
                "workers",
                "seed_in",
                "pool_out",
                "advgen_stats_out",
                "manifest_out",
                "loop_rounds",
                "loop_batch",
                "loop_target_pool_size",
            )
            if hasattr(args, key)
        }
        if getattr(args, "export_out", None):
            key = "export_code_out" if args.stage == "code" else "export_fncall_out"
            overrides[key] = args.export_out
        if getattr(args, "export_in", None):
            key = "annotated_out" if args.stage == "code" else "pool_out"
            overrides[key] = args.export_in
        cfg = apply_overrides(cfg, **overrides)

        if args.command == "ingest":
            return cmd_ingest(cfg, args.ingest_out)
        if args.command == "trace":
            return cmd_trace(cfg)
        if args.command == "advgen":
            return cmd_advgen(cfg)
        if args.command == "export":
            return cmd_export(cfg, args.stage)
        if args.command == "stats":
            return cmd_stats(cfg, args.outdir)
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigError, ToolchainError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
