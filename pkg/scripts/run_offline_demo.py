#!/usr/bin/env python3
"""End-to-end offline demo of the whole pipeline on a synthetic corpus.

Builds a small LaTeX tree, ingests it, trains the trigram table, scores all
three metrics with deterministic stub scorers behind a cache, synthesizes a
crowd survey whose opinions lean on the style metric, aggregates it, and
prints the metric/opinion correlation table. Everything runs offline and is
byte-reproducible; artifacts land in the chosen work directory.
"""

import argparse
import csv
import json
import os
import random
import statistics
import sys
from pathlib import Path

from dtmetrics.cli import load_columns_csv, main as cli

MANUSCRIPTS = {
    "demo01_news": (
        "The reader digests news articles for busy people. It highlights what changed since yesterday.",
        "The reader digests news articles for busy people every morning. It highlights what changed "
        "since yesterday using sentence comparison. A ranking stage orders stories by reader interest. "
        "Sources are linked next to every claim.",
    ),
    "demo02_search": (
        "A search engine answers medical questions with cited passages. Doctors audit every answer.",
        "A search engine answers medical questions with cited passages from curated journals. Doctors "
        "audit every answer through a review queue. The index refreshes nightly. Latency stays under "
        "a second for common queries.",
    ),
    "demo03_tutor": (
        "Our tutor teaches vocabulary through tiny daily games. Learners keep streaks to stay motivated.",
        "Our tutor teaches vocabulary through tiny daily games on a phone. Learners keep streaks to "
        "stay motivated across weeks. Difficulty adapts after every round. Progress reports go to an "
        "optional mentor.",
    ),
    "demo04_translate": (
        "The booth translates conversations between nine languages in real time. Captions appear as you speak.",
        "The booth translates conversations between nine languages in real time using a streaming "
        "decoder. Captions appear as you speak with under a second of delay. Speaker turns are "
        "detected automatically. Transcripts can be exported afterwards.",
    ),
    "demo05_brief": (
        "An assistant compresses long reports into one page of plain language. Numbers keep links to their sources.",
        "An assistant compresses long reports into one page of plain language for managers. Numbers "
        "keep links to their sources so claims can be checked. Tables summarize the key figures. A "
        "glossary explains unavoidable jargon.",
    ),
}

CROWD_KEYS = ["task_underst", "task_fair", "func_underst", "func_fair", "func_trust", "data_trust"]


def build_tree(root: Path) -> None:
    for name, (abstract, body) in MANUSCRIPTS.items():
        d = root / name
        d.mkdir(parents=True, exist_ok=True)
        (d / "main.tex").write_text(
            "\\documentclass{article}\n\\begin{document}\n"
            f"\\begin{{abstract}}\n{abstract}\n\\end{{abstract}}\n"
            f"{body}\n\\end{{document}}\n",
            encoding="utf-8",
        )


def write_scorer_configs(cfg_dir: Path) -> dict[str, Path]:
    cfg_dir.mkdir(parents=True, exist_ok=True)
    out = {}
    for name, model in [("gen", "stub-gen"), ("emb", "stub-emb"),
                        ("lm-a", "stub-academic"), ("lm-b", "stub-general")]:
        (cfg_dir / f"{name}.cfg").write_text(f"backend = stub\nmodel_id = {model}\n")
        cached = cfg_dir / f"{name}-cached.cfg"
        cached.write_text(
            f"backend = cache\nmodel_id = {model}\npath = store\nfallback = {name}.cfg\n"
        )
        out[name] = cached
    return out


def synthesize_crowd_responses(metrics_csv: Path, out_csv: Path, seed: int = 7) -> None:
    """Fake a 10-worker survey whose opinions lean on the style metric."""
    _, columns = load_columns_csv(metrics_csv)
    c_values = columns["C"]
    mu = statistics.fmean(c_values.values())
    sd = statistics.pstdev(c_values.values()) or 1.0
    rng = random.Random(seed)
    schema = {
        "role": "crowd",
        "likert_columns": {k: k for k in CROWD_KEYS},
        "retention_columns": [[f"q{i}", f"q{i}_truth"] for i in range(1, 6)],
    }
    out_csv.with_suffix(".schema.json").write_text(json.dumps(schema, indent=2))
    with open(out_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["abstract_id", "rater_id"] + CROWD_KEYS
        for i in range(1, 6):
            header += [f"q{i}", f"q{i}_truth"]
        writer.writerow(header)
        for doc_id in sorted(c_values):
            z = (c_values[doc_id] - mu) / sd
            for worker in range(10):
                row = [doc_id, f"w{worker:02d}"]
                for key in CROWD_KEYS:
                    lean = 1.2 * z if key.endswith("underst") else 0.3 * z
                    value = round(3 + lean + rng.gauss(0, 0.8))
                    row.append(max(1, min(5, value)))
                for _ in range(5):
                    truth = rng.random() < 0.5
                    answered = truth if rng.random() < 0.8 else not truth
                    row += [str(answered).lower(), str(truth).lower()]
                writer.writerow(row)


def run(workdir: Path) -> int:
    os.environ.setdefault("SOURCE_DATE_EPOCH", "1700000000")
    tree = workdir / "corpus"
    build_tree(tree)
    pairs = workdir / "pairs.jsonl"
    table = workdir / "tbl.tri"
    metrics = workdir / "metrics.csv"
    curves = workdir / "curves"
    cfgs = write_scorer_configs(workdir / "scorers")

    steps = [
        ["ingest", "--root", str(tree), "--out", str(pairs)],
        ["ngram", "build", "--pairs", str(pairs), "--field", "body", "--out", str(table)],
        ["score", "all", "--pairs", str(pairs), "--table", str(table),
         "--scorer-gen", str(cfgs["gen"]), "--scorer-emb", str(cfgs["emb"]),
         "--scorer-a", str(cfgs["lm-a"]), "--scorer-b", str(cfgs["lm-b"]),
         "--curves", str(curves), "--out", str(metrics),
         "--max-tokens", "64", "--seed", "11"],
        ["survey", "gen-retention", "--pairs", str(pairs), "--k", "5", "--seed", "3",
         "--out", str(workdir / "questions.csv")],
    ]
    for argv in steps:
        print("$ dtmetrics", " ".join(argv))
        code = cli(argv)
        if code != 0:
            return code

    responses = workdir / "responses.csv"
    synthesize_crowd_responses(metrics, responses)
    tail = [
        ["survey", "aggregate", "--responses", str(responses), "--role", "crowd",
         "--out", str(workdir / "crowd_agg.csv")],
        ["analyze", "correlate", "--x", str(metrics), "--y", str(workdir / "crowd_agg.csv"),
         "--out", str(workdir / "correlations.csv")],
        ["curve", "plot", "--curves", str(curves), "--out", str(workdir / "figures")],
    ]
    for argv in tail:
        print("$ dtmetrics", " ".join(argv))
        code = cli(argv)
        if code != 0:
            return code

    print("\nmetric columns vs crowd aggregates (r, p, n):")
    with open(workdir / "correlations.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(l for l in fh if not l.startswith("#")):
            if row["y_label"].startswith("mean_"):
                print(f"  {row['x_label']:>12} ~ {row['y_label']:<20} "
                      f"r={float(row['r']):+.3f}  p={float(row['p']):.4f}  n={row['n']}")
    print(f"\nartifacts under {workdir}/ (metrics.csv, curves/, figures/, correlations.csv)")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="demo_run", type=Path)
    args = parser.parse_args()
    args.workdir.mkdir(parents=True, exist_ok=True)
    sys.exit(run(args.workdir))
