"""Encoding and aggregation of expert and crowd ratings of system descriptions.

Expert raters score each abstract on three transparency dimensions; crowd
raters answer six five-point opinion prompts plus five phrase-retention
questions. Records are aggregated per abstract into means, population
variances, and retention accuracy, ready for correlation analysis.
"""

from __future__ import annotations

import csv
import json
import logging
import random
import statistics
from dataclasses import dataclass, replace
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import stats
from .affinity import split_sentences
from .ingest import DocumentPair

log = logging.getLogger(__name__)


class Role(Enum):
    EXPERT = "expert"
    CROWD = "crowd"


EXPERT_KEYS = frozenset({"task_transp", "function_transp", "data_transp"})
CROWD_KEYS = frozenset(
    {"task_underst", "task_fair", "func_underst", "func_fair", "func_trust", "data_trust"}
)
# the one negatively-phrased prompt; its scale is reversed so that higher
# always means a more favorable opinion
REVERSED_KEYS = frozenset({"func_fair"})
N_RETENTION = 5


def reverse_scale(value: int) -> int:
    """Map a 1..5 Likert value onto the reversed scale (5 -> 1, ..., 1 -> 5)."""
    return 6 - value


@dataclass(frozen=True)
class RetentionAnswer:
    question_id: str
    answered_present: bool
    truth_present: bool


@dataclass(frozen=True)
class ResponseRecord:
    """One rater's answers for one abstract."""

    abstract_id: str
    rater_id: str
    role: Role
    likert: Mapping[str, int]
    retention: tuple[RetentionAnswer, ...] = ()
    locale: str | None = None
    polarity_normalized: bool = False

    def __post_init__(self):
        for key, value in self.likert.items():
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise ValueError(f"{self.abstract_id}/{self.rater_id}: likert {key}={value!r}")
        keys = frozenset(self.likert)
        if self.role is Role.EXPERT:
            if keys != EXPERT_KEYS:
                raise ValueError(f"expert record must carry exactly {sorted(EXPERT_KEYS)}")
            if self.retention:
                raise ValueError("expert records carry no retention answers")
        else:
            if keys != CROWD_KEYS:
                raise ValueError(f"crowd record must carry exactly {sorted(CROWD_KEYS)}")
            if len(self.retention) != N_RETENTION:
                raise ValueError(f"crowd record must carry {N_RETENTION} retention answers")


def normalize_polarity(record: ResponseRecord) -> ResponseRecord:
    """Reverse the negatively-phrased prompt's scale; apply exactly once."""
    if record.role is not Role.CROWD:
        raise ValueError("polarity normalization applies to crowd records")
    if record.polarity_normalized:
        raise ValueError(f"{record.abstract_id}/{record.rater_id}: polarity already normalized")
    likert = dict(record.likert)
    for key in REVERSED_KEYS:
        likert[key] = reverse_scale(likert[key])
    return replace(record, likert=likert, polarity_normalized=True)


@dataclass(frozen=True)
class AbstractAggregate:
    abstract_id: str
    means: Mapping[str, float]
    variances: Mapping[str, float]
    retention_accuracy: float | None
    n_raters: int


def aggregate(
    records: Iterable[ResponseRecord],
    role: Role,
    expected_ids: Iterable[str] | None = None,
) -> list[AbstractAggregate]:
    """Per-abstract means and population variances for one rater role.

    Crowd records must be polarity-normalized first. Abstracts from
    expected_ids without any record for the role are omitted with a warning.
    """
    selected = [r for r in records if r.role is role]
    if role is Role.CROWD:
        for r in selected:
            if not r.polarity_normalized:
                raise ValueError(f"{r.abstract_id}/{r.rater_id}: crowd record not polarity-normalized")
    by_abstract: dict[str, list[ResponseRecord]] = {}
    for r in selected:
        by_abstract.setdefault(r.abstract_id, []).append(r)

    if expected_ids is not None:
        for missing in sorted(set(expected_ids) - set(by_abstract)):
            log.warning("abstract %s has no %s records; omitted", missing, role.value)

    keys = sorted(EXPERT_KEYS if role is Role.EXPERT else CROWD_KEYS)
    out = []
    for abstract_id in sorted(by_abstract):
        group = by_abstract[abstract_id]
        means = {}
        variances = {}
        for key in keys:
            values = [r.likert[key] for r in group]
            means[key] = statistics.fmean(values)
            variances[key] = statistics.pvariance(values)
        answers = [a for r in group for a in r.retention]
        accuracy = None
        if answers:
            accuracy = sum(a.answered_present == a.truth_present for a in answers) / len(answers)
        out.append(
            AbstractAggregate(
                abstract_id=abstract_id,
                means=means,
                variances=variances,
                retention_accuracy=accuracy,
                n_raters=len(group),
            )
        )
    return out


# --------------------------------------------------------------------------
# inter-rater reliability
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PairCorrelation:
    rater_a: str
    rater_b: str
    r: float
    p: float
    n: int


@dataclass(frozen=True)
class KeyReliability:
    key: str
    mean_abstract_variance: float
    mean_pairwise_pcc: float
    p: float
    n_abstracts: int
    n_raters: int
    pairs: tuple[PairCorrelation, ...]


def interrater_report(
    records: Iterable[ResponseRecord], min_overlap: int = 10
) -> list[KeyReliability]:
    """Per-key agreement among expert raters.

    Reports the mean within-abstract variance and the mean pairwise Pearson
    correlation across abstracts, with the p-value of that mean correlation
    at n = number of abstracts. Incomplete panels fall back to pairwise
    deletion; pairs overlapping on fewer than min_overlap abstracts are
    dropped with a warning.
    """
    experts = [r for r in records if r.role is Role.EXPERT]
    raters = sorted({r.rater_id for r in experts})
    if len(raters) < 2:
        raise ValueError("inter-rater report needs at least 2 raters")
    abstracts = sorted({r.abstract_id for r in experts})
    ratings: dict[tuple[str, str], Mapping[str, int]] = {
        (r.rater_id, r.abstract_id): r.likert for r in experts
    }
    complete = all((rater, abstract) in ratings for rater in raters for abstract in abstracts)
    if not complete:
        log.warning("incomplete expert panel; using pairwise deletion (min overlap %d)", min_overlap)

    out = []
    for key in sorted(EXPERT_KEYS):
        per_abstract_var = []
        for abstract in abstracts:
            values = [ratings[(rater, abstract)][key] for rater in raters if (rater, abstract) in ratings]
            if values:
                per_abstract_var.append(statistics.pvariance(values))
        pairs = []
        for ra, rb in combinations(raters, 2):
            shared = [a for a in abstracts if (ra, a) in ratings and (rb, a) in ratings]
            if not complete and len(shared) < min_overlap:
                log.warning("rater pair (%s, %s) overlaps on %d abstracts; dropped", ra, rb, len(shared))
                continue
            xs = [float(ratings[(ra, a)][key]) for a in shared]
            ys = [float(ratings[(rb, a)][key]) for a in shared]
            try:
                result = stats.pearson(stats.PairedSeries(ra, rb, xs, ys))
            except ValueError as exc:
                log.warning("rater pair (%s, %s) on %s: %s", ra, rb, key, exc)
                continue
            pairs.append(PairCorrelation(ra, rb, result.r, result.p_two_tailed, result.n))
        if not pairs:
            raise ValueError(f"no usable rater pairs for key {key}")
        mean_r = statistics.fmean(p.r for p in pairs)
        out.append(
            KeyReliability(
                key=key,
                mean_abstract_variance=statistics.fmean(per_abstract_var),
                mean_pairwise_pcc=mean_r,
                p=stats.correlation_p(mean_r, len(abstracts)),
                n_abstracts=len(abstracts),
                n_raters=len(raters),
                pairs=tuple(pairs),
            )
        )
    return out


# --------------------------------------------------------------------------
# retention question generation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RetentionQuestion:
    question_id: str
    phrase: str
    truth_present: bool


def generate_retention_questions(
    target: DocumentPair,
    pool: Sequence[DocumentPair],
    k: int = N_RETENTION,
    seed: int = 0,
) -> list[RetentionQuestion]:
    """Sample k present/absent phrases for a retention quiz about target.

    Each phrase comes from the target's abstract with probability one half
    (truth_present = True), otherwise from a pool abstract. Deterministic
    for a fixed seed.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if not pool:
        raise ValueError("empty pool")
    if any(p.id == target.id for p in pool):
        raise ValueError("pool must exclude the target")
    target_sentences = split_sentences(target.abstract_text)
    if not target_sentences:
        raise ValueError(f"{target.id}: no abstract sentences")
    rng = random.Random(seed)
    questions = []
    for idx in range(k):
        present = rng.random() < 0.5
        if present:
            phrase = rng.choice(target_sentences)
        else:
            other = rng.choice(pool)
            phrase = rng.choice(split_sentences(other.abstract_text))
        questions.append(
            RetentionQuestion(
                question_id=f"{target.id}-q{idx + 1}",
                phrase=phrase,
                truth_present=present,
            )
        )
    return questions


# --------------------------------------------------------------------------
# file formats
# --------------------------------------------------------------------------

_TRUE_VALUES = frozenset({"1", "true", "t", "yes", "y"})
_FALSE_VALUES = frozenset({"0", "false", "f", "no", "n"})


def _parse_bool(raw: str, context: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUE_VALUES:
        return True
    if value in _FALSE_VALUES:
        return False
    raise ValueError(f"{context}: cannot parse boolean {raw!r}")


def default_schema_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".schema.json")


def load_responses(csv_path: str | Path, schema_path: str | Path | None = None) -> list[ResponseRecord]:
    """Read response records from a CSV plus its sidecar schema JSON.

    The schema declares the role, the id/rater columns, the likert prompt
    columns, and (for crowd data) the paired answer/truth retention columns.
    """
    csv_path = Path(csv_path)
    schema_path = Path(schema_path) if schema_path else default_schema_path(csv_path)
    if not schema_path.is_file():
        raise FileNotFoundError(f"response schema not found: {schema_path}")
    schema = json.loads(schema_path.read_text(encoding="utf-8"))
    role = Role(schema["role"])
    abstract_col = schema.get("abstract_column", "abstract_id")
    rater_col = schema.get("rater_column", "rater_id")
    locale_col = schema.get("locale_column")
    likert_cols: Mapping[str, str] = schema["likert_columns"]
    retention_cols: Sequence[Sequence[str]] = schema.get("retention_columns", [])

    records = []
    with open(csv_path, encoding="utf-8", newline="") as fh:
        for rownum, row in enumerate(csv.DictReader(fh), 2):
            context = f"{csv_path}:{rownum}"
            likert = {key: int(row[col]) for key, col in likert_cols.items()}
            retention = tuple(
                RetentionAnswer(
                    question_id=ans_col,
                    answered_present=_parse_bool(row[ans_col], context),
                    truth_present=_parse_bool(row[truth_col], context),
                )
                for ans_col, truth_col in retention_cols
            )
            records.append(
                ResponseRecord(
                    abstract_id=row[abstract_col],
                    rater_id=row[rater_col],
                    role=role,
                    likert=likert,
                    retention=retention,
                    locale=row.get(locale_col) if locale_col else None,
                )
            )
    return records


def write_aggregates_csv(aggregates: Sequence[AbstractAggregate], path: str | Path) -> None:
    if not aggregates:
        raise ValueError("nothing to write")
    keys = sorted(aggregates[0].means)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# variance convention: population (divide by N)\n")
        fh.write("# likert polarity: higher = more favorable (reversed prompts already flipped)\n")
        writer = csv.writer(fh, lineterminator="\n")
        header = ["abstract_id", "n_raters"]
        header += [f"mean_{k}" for k in keys] + [f"var_{k}" for k in keys]
        header.append("retention_accuracy")
        writer.writerow(header)
        for agg in aggregates:
            row = [agg.abstract_id, agg.n_raters]
            row += [repr(agg.means[k]) for k in keys]
            row += [repr(agg.variances[k]) for k in keys]
            row.append("" if agg.retention_accuracy is None else repr(agg.retention_accuracy))
            writer.writerow(row)


def write_irr_csv(reports: Sequence[KeyReliability], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# variance convention: population (divide by N)\n")
        fh.write("# p: two-tailed p of the mean pairwise PCC at n = n_abstracts\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "mean_abstract_variance", "mean_pairwise_pcc", "p", "n_abstracts", "n_raters"])
        for rep in reports:
            writer.writerow([
                rep.key,
                repr(rep.mean_abstract_variance),
                repr(rep.mean_pairwise_pcc),
                repr(rep.p),
                rep.n_abstracts,
                rep.n_raters,
            ])
    pairs_path = path.with_suffix(".pairs.csv")
    with open(pairs_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "rater_a", "rater_b", "r", "p", "n"])
        for rep in reports:
            for pair in rep.pairs:
                writer.writerow([rep.key, pair.rater_a, pair.rater_b, repr(pair.r), repr(pair.p), pair.n])


def write_questions_csv(
    questions_by_abstract: Mapping[str, Sequence[RetentionQuestion]], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["abstract_id", "question_id", "phrase", "truth_present"])
        for abstract_id in sorted(questions_by_abstract):
            for q in questions_by_abstract[abstract_id]:
                writer.writerow([abstract_id, q.question_id, q.phrase, str(q.truth_present).lower()])
