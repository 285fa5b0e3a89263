"""Confusion accounting and evaluation statistics per high-risk region.

Counts use the domain's own vocabulary: ``chd`` (correct high-risk
detections), ``hll`` (high-risk labelled low), ``llh`` (low-risk labelled
high) and ``cld`` (correct low-risk detections), plus ``failed`` for
segments the pipeline could not evaluate.

    accuracy  = (chd + cld) / total        (failed segments count as wrong
                                            when total includes them)
    recall    = chd / (chd + hll)
    precision = chd / (chd + llh)
    f1        = chd / (chd + 0.5 * (hll + llh))

Cohen's kappa uses the standard two-rater formulation over the evaluated
segments: p0 is the observed agreement, p_hr and p_lr the products of the
system and truth marginals for each class, p_e their sum, and
kappa = (p0 - p_e) / (1 - p_e).

Zero-denominator metrics come back as 0.0 with a flag on the report row
rather than aborting a whole batch.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .classify import RiskConfig, SegmentFailure, TackleAssessment
from .errors import TackleRiskError
from .model import GroundTruthLabel, RiskLabel


class MissingLabel(TackleRiskError):
    """An evaluated segment has no row in the ground-truth labels."""


class ZeroTotal(TackleRiskError):
    """Accuracy requested over a total of zero segments."""


class EmptyEvaluation(TackleRiskError):
    """Kappa requested over zero evaluated segments."""


@dataclass(frozen=True)
class ConfusionCounts:
    chd: int = 0
    hll: int = 0
    llh: int = 0
    cld: int = 0
    failed: int = 0

    def __post_init__(self):
        for name in ("chd", "hll", "llh", "cld", "failed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def evaluated(self) -> int:
        return self.chd + self.hll + self.llh + self.cld


def tally(assessments: list[TackleAssessment | SegmentFailure],
          truth: list[GroundTruthLabel], pct: float) -> ConfusionCounts:
    """Count (truth, predicted) pairs at one region pct; failures aside."""
    by_id = {gt.segment_id: gt.label for gt in truth}
    chd = hll = llh = cld = failed = 0
    for a in assessments:
        if isinstance(a, SegmentFailure):
            failed += 1
            continue
        if a.segment_id not in by_id:
            raise MissingLabel(f"no ground-truth label for segment {a.segment_id!r}")
        if pct not in a.labels:
            raise ValueError(f"segment {a.segment_id!r} was not classified at pct {pct}")
        actual = by_id[a.segment_id]
        predicted = a.labels[pct]
        if actual is RiskLabel.HIGH:
            if predicted is RiskLabel.HIGH:
                chd += 1
            else:
                hll += 1
        else:
            if predicted is RiskLabel.HIGH:
                llh += 1
            else:
                cld += 1
    return ConfusionCounts(chd=chd, hll=hll, llh=llh, cld=cld, failed=failed)


def accuracy(c: ConfusionCounts, total: int) -> float:
    """Correct detections over ``total`` segments.

    ``total`` may exclude the failed segments (the evaluated-only figure) or
    include them (failures then count as incorrect); it can never be smaller
    than the evaluated count itself.
    """
    if total == 0:
        raise ZeroTotal("accuracy over zero segments is undefined")
    if total < c.evaluated:
        raise ValueError(f"total {total} is below the evaluated count "
                         f"({c.evaluated})")
    return (c.chd + c.cld) / total


def recall(c: ConfusionCounts) -> float:
    den = c.chd + c.hll
    return c.chd / den if den else 0.0


def precision(c: ConfusionCounts) -> float:
    den = c.chd + c.llh
    return c.chd / den if den else 0.0


def f1(c: ConfusionCounts) -> float:
    den = c.chd + 0.5 * (c.hll + c.llh)
    return c.chd / den if den else 0.0


def cohens_kappa(c: ConfusionCounts) -> dict[str, float]:
    """Agreement probabilities and kappa over the evaluated segments."""
    n = c.evaluated
    if n == 0:
        raise EmptyEvaluation("kappa over zero evaluated segments is undefined")
    p0 = (c.chd + c.cld) / n
    p_hr = ((c.chd + c.llh) / n) * ((c.chd + c.hll) / n)
    p_lr = ((c.hll + c.cld) / n) * ((c.llh + c.cld) / n)
    p_e = p_hr + p_lr
    if p_e == 1.0:
        kappa = 1.0 if p0 == 1.0 else 0.0
    else:
        kappa = (p0 - p_e) / (1.0 - p_e)
    return {"p0": p0, "p_hr": p_hr, "p_lr": p_lr, "p_e": p_e, "kappa": kappa}


@dataclass(frozen=True)
class PctMetrics:
    pct: float
    counts: ConfusionCounts
    accuracy_evaluated: float
    accuracy_total: float
    recall: float
    precision: float
    f1: float
    p0: float
    p_hr: float
    p_lr: float
    p_e: float
    kappa: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricsReport:
    n_total: int
    n_evaluated: int
    n_failed: int
    per_pct: tuple[PctMetrics, ...] = field(default_factory=tuple)


def report(assessments: list[TackleAssessment | SegmentFailure],
           truth: list[GroundTruthLabel], cfg: RiskConfig,
           n_total: int) -> MetricsReport:
    """Full per-pct metrics table in one pass."""
    rows: list[PctMetrics] = []
    n_evaluated = n_failed = 0
    for pct in cfg.region_pcts:
        c = tally(assessments, truth, pct)
        n_evaluated, n_failed = c.evaluated, c.failed
        flags: list[str] = []
        acc_total = accuracy(c, n_total)  # ZeroTotal propagates
        if c.evaluated:
            acc_eval = accuracy(c, c.evaluated)
            kap = cohens_kappa(c)
        else:
            acc_eval = 0.0
            kap = {"p0": 0.0, "p_hr": 0.0, "p_lr": 0.0, "p_e": 0.0, "kappa": 0.0}
            flags.append("empty_evaluation")
        if c.chd + c.hll == 0:
            flags.append("recall_zero_denominator")
        if c.chd + c.llh == 0:
            flags.append("precision_zero_denominator")
        rows.append(PctMetrics(
            pct=pct, counts=c,
            accuracy_evaluated=acc_eval, accuracy_total=acc_total,
            recall=recall(c), precision=precision(c), f1=f1(c),
            p0=kap["p0"], p_hr=kap["p_hr"], p_lr=kap["p_lr"],
            p_e=kap["p_e"], kappa=kap["kappa"],
            flags=tuple(flags),
        ))
    return MetricsReport(n_total=n_total, n_evaluated=n_evaluated,
                         n_failed=n_failed, per_pct=tuple(rows))


def report_to_csv(r: MetricsReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["pct", "chd", "hll", "llh", "cld", "failed",
                     "acc_eval", "acc_total", "recall", "precision", "f1",
                     "p0", "p_e", "kappa"])
    for row in r.per_pct:
        c = row.counts
        writer.writerow([
            row.pct, c.chd, c.hll, c.llh, c.cld, c.failed,
            f"{row.accuracy_evaluated:.6f}", f"{row.accuracy_total:.6f}",
            f"{row.recall:.6f}", f"{row.precision:.6f}", f"{row.f1:.6f}",
            f"{row.p0:.6f}", f"{row.p_e:.6f}", f"{row.kappa:.6f}",
        ])
    return out.getvalue()


def report_to_dict(r: MetricsReport) -> dict:
    return {
        "n_total": r.n_total,
        "n_evaluated": r.n_evaluated,
        "n_failed": r.n_failed,
        "per_pct": [
            {
                "pct": row.pct,
                "counts": {"chd": row.counts.chd, "hll": row.counts.hll,
                           "llh": row.counts.llh, "cld": row.counts.cld,
                           "failed": row.counts.failed},
                "accuracy_evaluated": row.accuracy_evaluated,
                "accuracy_total": row.accuracy_total,
                "recall": row.recall,
                "precision": row.precision,
                "f1": row.f1,
                "p0": row.p0,
                "p_hr": row.p_hr,
                "p_lr": row.p_lr,
                "p_e": row.p_e,
                "kappa": row.kappa,
                "flags": list(row.flags),
            }
            for row in r.per_pct
        ],
    }


def report_to_json(r: MetricsReport) -> str:
    return json.dumps(report_to_dict(r), indent=2)
