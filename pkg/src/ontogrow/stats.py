"""Confusion-matrix metrics and the Wilcoxon signed-rank comparison used to
contrast the insertion methods, plus the batch experiment driver.

Zero-denominator metrics are reported as None ("undefined"), never coerced
to 0, so averages over reports cannot be silently distorted. Normality is
not assumed anywhere; the signed-rank test is the only hypothesis test.
"""
from __future__ import annotations

import copy
import csv
import io
import math
from dataclasses import dataclass, field

from .errors import EmptyMatrixError
from .ontology import Ontology
from .tree import build_tree

RELIABLE_MIN_N = 10  # below this the normal approximation is not trusted
EXACT_P_MAX_N = 20  # up to here the p-value comes from the exact null distribution


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    precision: float | None
    mcc: float | None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "precision": self.precision,
            "mcc": self.mcc,
        }


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy (TP+TN)/total, sensitivity TP/(TP+FN), specificity
    TN/(TN+FP), precision TP/(TP+FP) and the Matthews correlation
    coefficient. A metric with a zero denominator is None."""
    if cm.total == 0:
        raise EmptyMatrixError("cannot compute metrics on an empty matrix")
    mcc_den = math.sqrt(
        (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    )
    return MetricsReport(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        sensitivity=_ratio(cm.tp, cm.tp + cm.fn),
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        precision=_ratio(cm.tp, cm.tp + cm.fp),
        mcc=(cm.tp * cm.tn - cm.fp * cm.fn) / mcc_den if mcc_den else None,
    )


@dataclass(frozen=True)
class WilcoxonResult:
    w: float
    z: float | None
    p: float | None
    n_effective: int
    reliable: bool

    def to_dict(self) -> dict:
        return {
            "w": self.w,
            "z": self.z,
            "p": self.p,
            "n_effective": self.n_effective,
            "reliable": self.reliable,
        }


def _average_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _exact_two_sided_p(ranks: list[float], w: float) -> float:
    """P(min of the signed-rank sums <= w) under the exact null.

    The null distribution of the positive-rank sum is built by dynamic
    programming over the (doubled, hence integral) ranks; equivalent to
    enumerating all sign assignments.
    """
    doubled = [round(2 * r) for r in ranks]
    total = sum(doubled)
    dist = [0] * (total + 1)
    dist[0] = 1
    for r in doubled:
        for s in range(total - r, -1, -1):
            if dist[s]:
                dist[s + r] += dist[s]
    threshold = 2 * w + 1e-9
    hits = sum(
        count
        for s, count in enumerate(dist)
        if min(s, total - s) <= threshold
    )
    return hits / (1 << len(ranks))


def wilcoxon_signed_rank(a: list[float], b: list[float]) -> WilcoxonResult:
    """Paired two-sided Wilcoxon signed-rank test.

    Zero differences (ties between the samples) are removed before ranking;
    equal absolute differences share their average rank. W is the smaller
    of the positive- and negative-rank sums (the classical table
    convention); z is its normal standardization with the usual rank-tie
    variance adjustment, signed so that swapping the samples negates it.

    For small samples (n_effective <= 20) the normal approximation is too
    coarse, so p comes from the exact null distribution of the rank sums;
    beyond that the two-sided normal tail is used. With fewer than 10
    effective pairs the result is flagged unreliable; with none, z and p
    are undefined.
    """
    if len(a) != len(b):
        raise ValueError(f"sample length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("samples must be nonempty")
    diffs = [x - y for x, y in zip(a, b) if x != y]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(w=0.0, z=None, p=None, n_effective=0, reliable=False)
    ranks = _average_ranks([abs(d) for d in diffs])
    w_plus = sum(r for d, r in zip(diffs, ranks) if d > 0)
    w_minus = sum(r for d, r in zip(diffs, ranks) if d < 0)
    w = min(w_plus, w_minus)
    mu = n * (n + 1) / 4
    counts: dict[float, int] = {}
    for d in diffs:
        counts[abs(d)] = counts.get(abs(d), 0) + 1
    tie_term = sum((t**3 - t) / 48 for t in counts.values())
    sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24 - tie_term)
    z = (w_plus - mu) / sigma
    if n <= EXACT_P_MAX_N:
        p = _exact_two_sided_p(ranks, w)
    else:
        p = min(1.0, math.erfc(abs(z) / math.sqrt(2)))
    return WilcoxonResult(
        w=w,
        z=z,
        p=p,
        n_effective=n,
        reliable=n >= RELIABLE_MIN_N,
    )


# ---- insertion experiment driver ----

METHODS = (1, 2, 3, 4)


@dataclass
class StepRecord:
    noun: str
    target_parent: str
    entity_type: str
    steps_by_method: dict[int, float] = field(default_factory=dict)
    inserted_by_method: dict[int, int] = field(default_factory=dict)
    fallback_used: dict[int, bool] = field(default_factory=dict)

    def cohort(self) -> str:
        return "other" if self.entity_type == "OTHER" else "mapped"


@dataclass
class InsertionEvalReport:
    records: list[StepRecord]
    averages: dict[str, dict[int, float]]
    wilcoxon: dict[str, dict[tuple[int, int], WilcoxonResult]]


def run_insertion_eval(
    nouns: list[tuple[str, str, str]],
    onto: Ontology,
    scripts: dict,
    nlu,
) -> InsertionEvalReport:
    """Insert every noun with each of the four methods, counting steps.

    The ontology is reset to the pristine fixture before every
    (noun, method) run, so runs are independent. Method 3 stores steps per
    inserted concept; the others store raw steps. Pairwise signed-rank
    tests are computed separately for the OTHER-typed and the mapped-typed
    cohorts.
    """
    from .insertion import OracleUser, run_with_oracle  # local import: cycle

    definitions = scripts.get("definitions", {})
    sentences = scripts.get("sentences", {})
    records = []
    for noun, target, entity_type in nouns:
        record = StepRecord(noun=noun, target_parent=target, entity_type=entity_type)
        for method in METHODS:
            pristine = copy.deepcopy(onto)
            tree = build_tree(pristine)
            oracle = OracleUser(
                target_parent=target,
                definitions={k: list(v) for k, v in definitions.items()},
                sentences=dict(sentences),
            )
            run = run_with_oracle(
                noun, method, oracle, pristine, tree, nlu, entity_type=entity_type
            )
            record.steps_by_method[method] = run.steps_per_inserted
            record.inserted_by_method[method] = len(run.inserted)
            record.fallback_used[method] = run.fallback_used
        records.append(record)

    averages: dict[str, dict[int, float]] = {}
    tests: dict[str, dict[tuple[int, int], WilcoxonResult]] = {}
    for cohort in ("other", "mapped"):
        cohort_records = [r for r in records if r.cohort() == cohort]
        if not cohort_records:
            continue
        averages[cohort] = {
            m: sum(r.steps_by_method[m] for r in cohort_records) / len(cohort_records)
            for m in METHODS
        }
        tests[cohort] = {}
        for i, m_a in enumerate(METHODS):
            for m_b in METHODS[i + 1 :]:
                tests[cohort][(m_a, m_b)] = wilcoxon_signed_rank(
                    [r.steps_by_method[m_a] for r in cohort_records],
                    [r.steps_by_method[m_b] for r in cohort_records],
                )
    return InsertionEvalReport(records=records, averages=averages, wilcoxon=tests)


def step_table_csv(records: list[StepRecord]) -> str:
    """Delimited step-table export: one row per noun, method columns last,
    method 3's inserted count in its own column."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(
        [
            "noun",
            "target_parent",
            "entity_type",
            "m1",
            "m2",
            "m3",
            "m3_inserted",
            "m4",
            "m2_fallback",
            "m3_fallback",
            "m4_fallback",
        ]
    )
    for r in records:
        writer.writerow(
            [
                r.noun,
                r.target_parent,
                r.entity_type,
                _fmt(r.steps_by_method[1]),
                _fmt(r.steps_by_method[2]),
                _fmt(r.steps_by_method[3]),
                r.inserted_by_method[3],
                _fmt(r.steps_by_method[4]),
                int(r.fallback_used[2]),
                int(r.fallback_used[3]),
                int(r.fallback_used[4]),
            ]
        )
    return out.getvalue()


def wilcoxon_table_csv(report: InsertionEvalReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["cohort", "pair", "w", "z", "p", "n_effective", "reliable"])
    for cohort, tests in report.wilcoxon.items():
        for (m_a, m_b), res in tests.items():
            writer.writerow(
                [
                    cohort,
                    f"m{m_a}-m{m_b}",
                    _fmt(res.w),
                    "" if res.z is None else f"{res.z:.4f}",
                    "" if res.p is None else f"{res.p:.6f}",
                    res.n_effective,
                    int(res.reliable),
                ]
            )
    return out.getvalue()


def _fmt(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.3f}"
