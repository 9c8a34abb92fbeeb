"""Command-line entry point: ingestion, scoring, survey analytics, correlation.

Every scoring/analysis run writes a manifest (JSON next to the output)
recording the command line, config digests, scorer model ids, seeds, and
input file digests, so that cache-backed runs are byte-reproducible.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from . import __version__, affinity, ingest, ngram, stats, style, survey
from .scorers import GenerationConfig, Scorer, ScorerConfigError, ScorerError, load_scorer

log = logging.getLogger(__name__)

SCORER_DIR_ENV = "DTMETRICS_SCORER_DIR"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SCORER = 2


# --------------------------------------------------------------------------
# run manifest
# --------------------------------------------------------------------------

def _timestamp_utc() -> str:
    # SOURCE_DATE_EPOCH pins the manifest timestamp for reproducible runs
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = int(epoch) if epoch else int(time.time())
    return datetime.fromtimestamp(moment, tz=timezone.utc).isoformat()


def _file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(
    out_path: str | Path,
    argv: Sequence[str],
    inputs: Iterable[str | Path] = (),
    configs: Iterable[str | Path] = (),
    model_ids: Mapping[str, str] | None = None,
    seeds: Mapping[str, int] | None = None,
) -> Path:
    manifest = {
        "tool": "dtmetrics",
        "tool_version": __version__,
        "timestamp_utc": _timestamp_utc(),
        "command_line": list(argv),
        "input_digests": {str(p): _file_digest(p) for p in inputs},
        "config_digests": {str(p): _file_digest(p) for p in configs},
        "scorer_model_ids": dict(model_ids or {}),
        "seeds": dict(seeds or {}),
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------

def _resolve_scorer_config(path: str) -> Path:
    p = Path(path)
    if p.is_file():
        return p
    env_dir = os.environ.get(SCORER_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / path
        if candidate.is_file():
            return candidate
    raise ScorerConfigError(f"scorer config not found: {path}")


def _load_scorer_arg(path: str, allow_network: bool) -> tuple[Scorer, Path]:
    resolved = _resolve_scorer_config(path)
    return load_scorer(resolved, allow_network=allow_network), resolved


def _map_jobs(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _gen_config(args: argparse.Namespace) -> GenerationConfig:
    return GenerationConfig(
        max_tokens=args.max_tokens,
        n_samples=args.n_samples,
        temperature=args.temperature,
        seed=args.seed,
    )


def _write_csv(path: str | Path, comments: Sequence[str], header: Sequence[str],
               rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float) -> str:
    return repr(float(value))


def load_columns_csv(path: str | Path) -> tuple[str, dict[str, dict[str, float]]]:
    """Read a CSV into {column_label: {id: value}} keyed by its id column.

    Comment lines starting with '#' are skipped; non-numeric cells are
    ignored per column.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(lines)
    if not reader.fieldnames:
        raise ValueError(f"{path}: empty CSV")
    id_column = None
    for candidate in ("abstract_id", "id", "doc_id"):
        if candidate in reader.fieldnames:
            id_column = candidate
            break
    if id_column is None:
        raise ValueError(f"{path}: no id column (expected one of abstract_id/id/doc_id)")
    columns: dict[str, dict[str, float]] = {
        name: {} for name in reader.fieldnames if name != id_column
    }
    for row in reader:
        key = row[id_column]
        for name, cell in row.items():
            if name == id_column or cell is None:
                continue
            try:
                columns[name][key] = float(cell)
            except ValueError:
                continue
    return id_column, {name: col for name, col in columns.items() if col}


RR_COMMENT = "R_R: fraction of the body's trigram self-information recovered by abstract-conditioned generations (1 = fully recovered)"
RA_COMMENT = "R_A: mean best sentence-match score (direction=doc iterates body sentences against the abstract)"
SA_COMMENT = "C: higher = more probable under the general model than the tuned one (more layperson-appropriate); natural log"


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace, argv: Sequence[str]) -> int:
    exclusions = ingest.read_exclusions(args.exclude) if args.exclude else set()
    pairs = ingest.ingest_tree(args.root, exclusions=exclusions, jobs=args.jobs)
    n = ingest.write_pairs_jsonl(pairs, args.out)
    log.info("wrote %d pairs to %s", n, args.out)
    return EXIT_OK


def cmd_ngram_build(args: argparse.Namespace, argv: Sequence[str]) -> int:
    pairs = ingest.load_pairs_jsonl(args.pairs)
    texts = [p.body_text if args.field == "body" else p.abstract_text for p in pairs]
    table = ngram.build_trigram_table(texts, alpha=args.alpha)
    table.save(args.out)
    log.info("trigram table: %d distinct trigrams, %d total", table.vocab_trigrams, table.total)
    return EXIT_OK


def _dump_generations(scores, gen_dir: str | Path) -> None:
    out = Path(gen_dir)
    out.mkdir(parents=True, exist_ok=True)
    for score in scores:
        (out / f"{score.doc_id}.gen.txt").write_text(
            score.generated_text + "\n", encoding="utf-8"
        )


def cmd_score_rr(args: argparse.Namespace, argv: Sequence[str]) -> int:
    pairs = ingest.load_pairs_jsonl(args.pairs)
    table = ngram.TrigramTable.load(args.table)
    scorer, config_path = _load_scorer_arg(args.scorer, args.allow_network)
    gen_cfg = _gen_config(args)
    scores = _map_jobs(lambda p: ngram.score_rr(p, table, scorer, gen_cfg), pairs, args.jobs)
    if args.gen_dir:
        _dump_generations(scores, args.gen_dir)
    _write_csv(
        args.out,
        [RR_COMMENT],
        ["id", "R_R", "model", "n_samples", "seed"],
        [[s.doc_id, _fmt(s.value), s.model_id, s.n_samples, s.seed] for s in scores],
    )
    write_manifest(args.out, argv, inputs=[args.pairs, args.table], configs=[config_path],
                   model_ids={"generator": scorer.model_id}, seeds={"generation": gen_cfg.seed})
    return EXIT_OK


def _export_curves(score: affinity.AffinityScore, curves_dir: Path) -> None:
    curves_dir.mkdir(parents=True, exist_ok=True)
    affinity.write_curve_csv(score.curve, curves_dir / f"{score.doc_id}.curve.csv")
    affinity.write_curve_summary(score, curves_dir / f"{score.doc_id}.curve.json")


def cmd_score_ra(args: argparse.Namespace, argv: Sequence[str]) -> int:
    pairs = ingest.load_pairs_jsonl(args.pairs)
    scorer, config_path = _load_scorer_arg(args.scorer, args.allow_network)
    direction = affinity.Direction(args.direction)
    scores = _map_jobs(lambda p: affinity.score_ra(p, scorer, direction), pairs, args.jobs)
    if args.curves:
        for score in scores:
            _export_curves(score, Path(args.curves))
    _write_csv(
        args.out,
        [RA_COMMENT],
        ["id", "R_A", "direction", "model"],
        [[s.doc_id, _fmt(s.value), s.direction.value, s.model_id] for s in scores],
    )
    write_manifest(args.out, argv, inputs=[args.pairs], configs=[config_path],
                   model_ids={"embedder": scorer.model_id})
    return EXIT_OK


def cmd_score_sa(args: argparse.Namespace, argv: Sequence[str]) -> int:
    pairs = ingest.load_pairs_jsonl(args.pairs)
    scorer_a, config_a = _load_scorer_arg(args.scorer_a, args.allow_network)
    scorer_b, config_b = _load_scorer_arg(args.scorer_b, args.allow_network)
    scores = _map_jobs(lambda p: style.score_sa(p, scorer_a, scorer_b), pairs, args.jobs)
    _write_csv(
        args.out,
        [SA_COMMENT],
        ["id", "C", "C_per_token", "n_tokens", "model_a", "model_b"],
        [[s.doc_id, _fmt(s.value), _fmt(s.per_token), s.n_tokens, s.model_a, s.model_v]
         for s in scores],
    )
    write_manifest(args.out, argv, inputs=[args.pairs], configs=[config_a, config_b],
                   model_ids={"tuned": scorer_a.model_id, "general": scorer_b.model_id})
    return EXIT_OK


@dataclass(frozen=True)
class MetricRecord:
    """Per-document metric values with their scoring provenance."""

    doc_id: str
    rr: float
    ra: float
    c: float
    c_per_token: float
    n_tokens: int
    model_gen: str
    model_emb: str
    model_a: str
    model_b: str


def cmd_score_all(args: argparse.Namespace, argv: Sequence[str]) -> int:
    pairs = ingest.load_pairs_jsonl(args.pairs)
    table = ngram.TrigramTable.load(args.table)
    gen_scorer, cfg_gen = _load_scorer_arg(args.scorer_gen, args.allow_network)
    emb_scorer, cfg_emb = _load_scorer_arg(args.scorer_emb, args.allow_network)
    scorer_a, cfg_a = _load_scorer_arg(args.scorer_a, args.allow_network)
    scorer_b, cfg_b = _load_scorer_arg(args.scorer_b, args.allow_network)
    direction = affinity.Direction(args.direction)
    gen_cfg = _gen_config(args)

    def one(pair) -> tuple[MetricRecord, affinity.AffinityScore, ngram.RecoveryScore]:
        rr = ngram.score_rr(pair, table, gen_scorer, gen_cfg)
        ra = affinity.score_ra(pair, emb_scorer, direction)
        sa = style.score_sa(pair, scorer_a, scorer_b)
        record = MetricRecord(
            doc_id=pair.id, rr=rr.value, ra=ra.value, c=sa.value,
            c_per_token=sa.per_token, n_tokens=sa.n_tokens,
            model_gen=rr.model_id, model_emb=ra.model_id,
            model_a=sa.model_a, model_b=sa.model_v,
        )
        return record, ra, rr

    results = _map_jobs(one, pairs, args.jobs)
    if args.curves:
        for _, ra_score, _rr in results:
            _export_curves(ra_score, Path(args.curves))
    if args.gen_dir:
        _dump_generations([rr for _, _, rr in results], args.gen_dir)
    _write_csv(
        args.out,
        [RR_COMMENT, RA_COMMENT, SA_COMMENT],
        ["id", "R_R", "R_A", "C", "C_per_token", "n_tokens",
         "model_gen", "model_emb", "model_a", "model_b"],
        [[m.doc_id, _fmt(m.rr), _fmt(m.ra), _fmt(m.c), _fmt(m.c_per_token), m.n_tokens,
          m.model_gen, m.model_emb, m.model_a, m.model_b]
         for m, _, _ in results],
    )
    write_manifest(
        args.out, argv,
        inputs=[args.pairs, args.table],
        configs=[cfg_gen, cfg_emb, cfg_a, cfg_b],
        model_ids={
            "generator": gen_scorer.model_id,
            "embedder": emb_scorer.model_id,
            "tuned": scorer_a.model_id,
            "general": scorer_b.model_id,
        },
        seeds={"generation": gen_cfg.seed},
    )
    return EXIT_OK


def cmd_survey_aggregate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    records = survey.load_responses(args.responses, args.schema)
    role = survey.Role(args.role)
    if role is survey.Role.CROWD:
        records = [
            survey.normalize_polarity(r) if r.role is survey.Role.CROWD else r
            for r in records
        ]
    expected = {r.abstract_id for r in records}
    aggregates = survey.aggregate(records, role, expected_ids=expected)
    if not aggregates:
        raise ValueError(f"no {role.value} records in {args.responses}")
    survey.write_aggregates_csv(aggregates, args.out)
    return EXIT_OK


def cmd_survey_irr(args: argparse.Namespace, argv: Sequence[str]) -> int:
    records = survey.load_responses(args.responses, args.schema)
    reports = survey.interrater_report(records, min_overlap=args.min_overlap)
    survey.write_irr_csv(reports, args.out)
    return EXIT_OK


def cmd_survey_gen_retention(args: argparse.Namespace, argv: Sequence[str]) -> int:
    pairs = ingest.load_pairs_jsonl(args.pairs)
    if len(pairs) < 2:
        raise ValueError("need at least 2 pairs to build a distractor pool")
    questions = {}
    for pair in pairs:
        pool = [p for p in pairs if p.id != pair.id]
        questions[pair.id] = survey.generate_retention_questions(
            pair, pool, k=args.k, seed=args.seed
        )
    survey.write_questions_csv(questions, args.out)
    write_manifest(args.out, argv, inputs=[args.pairs], seeds={"retention": args.seed})
    return EXIT_OK


def cmd_analyze_correlate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    _, x_columns = load_columns_csv(args.x)
    _, y_columns = load_columns_csv(args.y)
    table = stats.pairwise_table(x_columns, y_columns, min_n=args.min_n)
    _write_csv(
        args.out,
        ["PCC with two-tailed p at n-2 degrees of freedom"],
        ["x_label", "y_label", "r", "t", "p", "n"],
        [[xl, yl, _fmt(res.r), _fmt(res.t_stat), _fmt(res.p_two_tailed), res.n]
         for xl, yl, res in table],
    )
    write_manifest(args.out, argv, inputs=[args.x, args.y])
    return EXIT_OK


def _load_keyword_groups(path: str | Path) -> dict[str, set[str]]:
    """Keyword -> set of abstract ids, from a CSV with id and keywords columns."""
    groups: dict[str, set[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(lines)
    fields = reader.fieldnames or []
    id_col = "abstract_id" if "abstract_id" in fields else "id"
    if id_col not in fields or "keywords" not in fields:
        raise ValueError(f"{path}: expected columns abstract_id/id and keywords")
    for row in reader:
        for keyword in row["keywords"].split():
            groups.setdefault(keyword, set()).add(row[id_col])
    return groups


def cmd_analyze_ttest(args: argparse.Namespace, argv: Sequence[str]) -> int:
    groups = _load_keyword_groups(args.groups)
    _, value_columns = load_columns_csv(args.values)
    eligible = sorted(kw for kw, ids in groups.items() if len(ids) >= args.min_group)
    rows = []
    for variable in sorted(value_columns):
        column = value_columns[variable]
        for i, kw1 in enumerate(eligible):
            for kw2 in eligible[i + 1 :]:
                a = [column[x] for x in sorted(groups[kw1]) if x in column]
                b = [column[x] for x in sorted(groups[kw2]) if x in column]
                if len(a) < 2 or len(b) < 2:
                    log.warning("(%s, %s) on %s: too few values; skipped", kw1, kw2, variable)
                    continue
                try:
                    t, df, p = stats.welch_t(a, b)
                except ValueError as exc:
                    log.warning("(%s, %s) on %s: %s; skipped", kw1, kw2, variable, exc)
                    continue
                rows.append([variable, kw1, kw2, _fmt(t), _fmt(df), _fmt(p), len(a), len(b)])
    _write_csv(
        args.out,
        ["Welch's unequal-variance t test (two-tailed); t > 0 means keyword_1 mean exceeds keyword_2"],
        ["variable", "keyword_1", "keyword_2", "t", "df", "p", "n1", "n2"],
        rows,
    )
    write_manifest(args.out, argv, inputs=[args.groups, args.values])
    return EXIT_OK


def cmd_curve_export(args: argparse.Namespace, argv: Sequence[str]) -> int:
    pairs = ingest.load_pairs_jsonl(args.pairs)
    scorer, config_path = _load_scorer_arg(args.scorer, args.allow_network)
    direction = affinity.Direction(args.direction)
    scores = _map_jobs(lambda p: affinity.score_ra(p, scorer, direction), pairs, args.jobs)
    for score in scores:
        _export_curves(score, Path(args.out))
    write_manifest(Path(args.out) / "curves", argv, inputs=[args.pairs], configs=[config_path],
                   model_ids={"embedder": scorer.model_id})
    return EXIT_OK


def cmd_curve_plot(args: argparse.Namespace, argv: Sequence[str]) -> int:
    curves_dir = Path(args.curves)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_files = sorted(curves_dir.glob("*.curve.csv"))
    if not curve_files:
        raise ValueError(f"no *.curve.csv files under {curves_dir}")
    for path in curve_files:
        curve = affinity.read_curve_csv(path)
        affinity.plot_curve_svg(curve, out_dir / f"{curve.doc_id}.svg")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_gen_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-tokens", type=int, default=1024)
    parser.add_argument("--n-samples", type=int, default=4)
    parser.add_argument("--temperature", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--gen-dir", help="directory for per-document generated text (audit)")


def _add_common_scoring_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--allow-network", action="store_true",
                        help="permit cache backends to fall back to http scorers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtmetrics",
        description="Objective transparency metrics over (abstract, document) pairs",
    )
    parser.add_argument("--version", action="version", version=f"dtmetrics {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="convert a LaTeX manuscript tree to pairs JSONL")
    p.add_argument("--root", required=True)
    p.add_argument("--exclude")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("ngram", help="trigram table commands")
    ngram_sub = p.add_subparsers(dest="subcommand", required=True)
    pb = ngram_sub.add_parser("build")
    pb.add_argument("--pairs", required=True)
    pb.add_argument("--field", choices=["body", "abstract"], default="body")
    pb.add_argument("--alpha", type=float, default=1.0)
    pb.add_argument("--out", required=True)
    pb.set_defaults(fn=cmd_ngram_build)

    p = sub.add_parser("score", help="compute metrics over a pairs file")
    score_sub = p.add_subparsers(dest="subcommand", required=True)

    prr = score_sub.add_parser("rr")
    prr.add_argument("--pairs", required=True)
    prr.add_argument("--table", required=True)
    prr.add_argument("--scorer", required=True)
    prr.add_argument("--out", required=True)
    _add_gen_args(prr)
    _add_common_scoring_args(prr)
    prr.set_defaults(fn=cmd_score_rr)

    pra = score_sub.add_parser("ra")
    pra.add_argument("--pairs", required=True)
    pra.add_argument("--scorer", required=True)
    pra.add_argument("--direction", choices=[d.value for d in affinity.Direction],
                     default=affinity.Direction.DOC_OVER_ABSTRACT.value)
    pra.add_argument("--curves")
    pra.add_argument("--out", required=True)
    _add_common_scoring_args(pra)
    pra.set_defaults(fn=cmd_score_ra)

    psa = score_sub.add_parser("sa")
    psa.add_argument("--pairs", required=True)
    psa.add_argument("--scorer-a", required=True, help="tuned-model scorer config")
    psa.add_argument("--scorer-b", required=True, help="general-model scorer config")
    psa.add_argument("--out", required=True)
    _add_common_scoring_args(psa)
    psa.set_defaults(fn=cmd_score_sa)

    pall = score_sub.add_parser("all")
    pall.add_argument("--pairs", required=True)
    pall.add_argument("--table", required=True)
    pall.add_argument("--scorer-gen", required=True)
    pall.add_argument("--scorer-emb", required=True)
    pall.add_argument("--scorer-a", required=True)
    pall.add_argument("--scorer-b", required=True)
    pall.add_argument("--direction", choices=[d.value for d in affinity.Direction],
                      default=affinity.Direction.DOC_OVER_ABSTRACT.value)
    pall.add_argument("--curves")
    pall.add_argument("--out", required=True)
    _add_gen_args(pall)
    _add_common_scoring_args(pall)
    pall.set_defaults(fn=cmd_score_all)

    p = sub.add_parser("survey", help="survey encoding and aggregation")
    survey_sub = p.add_subparsers(dest="subcommand", required=True)
    pagg = survey_sub.add_parser("aggregate")
    pagg.add_argument("--responses", required=True)
    pagg.add_argument("--schema")
    pagg.add_argument("--role", choices=["crowd", "expert"], required=True)
    pagg.add_argument("--out", required=True)
    pagg.set_defaults(fn=cmd_survey_aggregate)

    pirr = survey_sub.add_parser("irr")
    pirr.add_argument("--responses", required=True)
    pirr.add_argument("--schema")
    pirr.add_argument("--min-overlap", type=int, default=10)
    pirr.add_argument("--out", required=True)
    pirr.set_defaults(fn=cmd_survey_irr)

    pret = survey_sub.add_parser("gen-retention")
    pret.add_argument("--pairs", required=True)
    pret.add_argument("--k", type=int, default=5)
    pret.add_argument("--seed", type=int, default=0)
    pret.add_argument("--out", required=True)
    pret.set_defaults(fn=cmd_survey_gen_retention)

    p = sub.add_parser("analyze", help="correlation and significance analysis")
    analyze_sub = p.add_subparsers(dest="subcommand", required=True)
    pcor = analyze_sub.add_parser("correlate")
    pcor.add_argument("--x", required=True)
    pcor.add_argument("--y", required=True)
    pcor.add_argument("--min-n", type=int, default=3)
    pcor.add_argument("--out", required=True)
    pcor.set_defaults(fn=cmd_analyze_correlate)

    ptt = analyze_sub.add_parser("ttest")
    ptt.add_argument("--groups", required=True)
    ptt.add_argument("--values", required=True)
    ptt.add_argument("--min-group", type=int, default=5,
                     help="keyword must appear in at least this many abstracts")
    ptt.add_argument("--out", required=True)
    ptt.set_defaults(fn=cmd_analyze_ttest)

    p = sub.add_parser("curve", help="affinity curve export and plotting")
    curve_sub = p.add_subparsers(dest="subcommand", required=True)
    pexp = curve_sub.add_parser("export")
    pexp.add_argument("--pairs", required=True)
    pexp.add_argument("--scorer", required=True)
    pexp.add_argument("--direction", choices=[d.value for d in affinity.Direction],
                      default=affinity.Direction.DOC_OVER_ABSTRACT.value)
    pexp.add_argument("--out", required=True)
    _add_common_scoring_args(pexp)
    pexp.set_defaults(fn=cmd_curve_export)

    pplot = curve_sub.add_parser("plot")
    pplot.add_argument("--curves", required=True)
    pplot.add_argument("--out", required=True)
    pplot.set_defaults(fn=cmd_curve_plot)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return EXIT_INPUT
    try:
        return args.fn(args, argv)
    except ScorerConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ScorerError as exc:
        print(f"scorer error: {exc}", file=sys.stderr)
        return EXIT_SCORER
    except (ingest.IngestError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_entry() -> None:
    sys.exit(main())
