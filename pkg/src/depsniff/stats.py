"""Corpus-level aggregation of per-project smell findings.

All stored ratios and percentages are exact :class:`~fractions.Fraction`
values; rounding happens only when rendering (:func:`render_percent`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Iterable, Sequence

from depsniff.classify import CONSTRAINT_SMELLS, Smell
from depsniff.errors import EmptyCorpus, ZeroDependencies
from depsniff.history import TimelinePoint, month_range
from depsniff.scanner import SmellFinding

ALL_SMELLS = tuple(Smell)
PER_DEPENDENCY = (Smell.S1, Smell.S2, Smell.S3, Smell.S4, Smell.S6)

COOCCURRENCE_ROWS = (
    ("exists", "pinned"),
    ("exists", "unpinned"),
    ("missing", "unpinned"),
    ("missing", "pinned"),
)


@dataclass
class ProjectSummary:
    project: str
    dep_count: int
    findings: list[SmellFinding]
    distinct_smells: frozenset[Smell]
    ratios: dict[Smell, Fraction]
    counts: dict[Smell, int] = field(default_factory=dict)

    @property
    def lockfile_present(self) -> bool:
        return Smell.S5 not in self.distinct_smells

    @property
    def has_pinned(self) -> bool:
        return self.counts.get(Smell.S1, 0) > 0

    @property
    def has_unpinned(self) -> bool:
        return self.dep_count - self.counts.get(Smell.S1, 0) > 0

    def ratio(self, smell: Smell) -> Fraction:
        """The smell ratio; raises :class:`ZeroDependencies` when undefined."""
        try:
            return self.ratios[smell]
        except KeyError:
            raise ZeroDependencies(f"{self.project}: no dependencies to normalise {smell.value}") from None


def project_smell_summary(project: str, dep_count: int, findings: Iterable[SmellFinding]) -> ProjectSummary:
    """Counts, distinct smells and normalised ratios for one project.

    S1-S4 and S6 are divided by the dependency count; S7 by the dependency
    count plus the number of missing packages; S5 is either 0 or 1.
    Per-dependency ratios are left out when ``dep_count`` is zero.
    """
    findings = list(findings)
    counts = {s: 0 for s in ALL_SMELLS}
    for f in findings:
        counts[f.smell] += 1
    ratios: dict[Smell, Fraction] = {Smell.S5: Fraction(min(counts[Smell.S5], 1))}
    if dep_count > 0:
        for smell in PER_DEPENDENCY:
            ratios[smell] = Fraction(counts[smell], dep_count)
    if dep_count + counts[Smell.S7] > 0:
        ratios[Smell.S7] = Fraction(counts[Smell.S7], dep_count + counts[Smell.S7])
    distinct = frozenset(s for s, n in counts.items() if n)
    return ProjectSummary(project, dep_count, findings, distinct, ratios, counts)


def _require(summaries: Sequence[ProjectSummary]) -> None:
    if not summaries:
        raise EmptyCorpus("no projects to aggregate")


def prevalence_table(summaries: Sequence[ProjectSummary]) -> dict[Smell, tuple[int, Fraction]]:
    _require(summaries)
    total = len(summaries)
    table = {}
    for smell in ALL_SMELLS:
        count = sum(1 for s in summaries if smell in s.distinct_smells)
        table[smell] = (count, Fraction(count, total))
    return table


def prevalence_from_findings(findings_by_project: dict[str, Iterable[SmellFinding]]) -> dict[Smell, int]:
    """Prevalence counts straight from raw findings (consistency check path)."""
    counts = {s: 0 for s in ALL_SMELLS}
    for findings in findings_by_project.values():
        for smell in {f.smell for f in findings}:
            counts[smell] += 1
    return counts


def cooccurrence_lock_pinned(summaries: Sequence[ProjectSummary]) -> dict[tuple[str, str], int]:
    """Projects per (lockfile exists/missing, contains pinned/unpinned dep).

    A project with both pinned and unpinned dependencies counts in two rows.
    """
    _require(summaries)
    table = {row: 0 for row in COOCCURRENCE_ROWS}
    for s in summaries:
        lock = "exists" if s.lockfile_present else "missing"
        if s.has_pinned:
            table[(lock, "pinned")] += 1
        if s.has_unpinned:
            table[(lock, "unpinned")] += 1
    return table


def distinct_smell_histogram(summaries: Sequence[ProjectSummary]) -> dict[int, int]:
    _require(summaries)
    hist = {k: 0 for k in range(len(ALL_SMELLS) + 1)}
    for s in summaries:
        hist[len(s.distinct_smells)] += 1
    return hist


def ratio_distributions(summaries: Sequence[ProjectSummary]) -> dict[Smell, list[Fraction]]:
    """Per smell, the sorted ratios of every project where the ratio is defined.

    Zero ratios are kept; drop them to get the infected-projects-only view.
    """
    return {
        smell: sorted(s.ratios[smell] for s in summaries if smell in s.ratios)
        for smell in PER_DEPENDENCY + (Smell.S7,)
    }


@dataclass
class ProjectTimeline:
    project: str
    start_month: str
    end_month: str
    points: list[TimelinePoint]


def accumulation_series(timelines: Sequence[ProjectTimeline],
                        smells: Sequence[Smell] = CONSTRAINT_SMELLS) -> dict[Smell, list[tuple[str, Fraction]]]:
    """Mean accumulation per month over the projects whose history has begun.

    A project's accumulation carries forward past its last bucket and is
    zero for smells it never touched.
    """
    if not timelines:
        raise EmptyCorpus("no project timelines")
    first = min(t.start_month for t in timelines)
    last = max([t.end_month for t in timelines] + [p.month for t in timelines for p in t.points])
    months = month_range(first, last)
    series: dict[Smell, list[tuple[str, Fraction]]] = {}
    for smell in smells:
        per_project = []
        for t in timelines:
            by_month = {p.month: p.accumulation for p in t.points if p.smell is smell}
            per_project.append((t.start_month, by_month))
        values = []
        carried = [0] * len(per_project)
        for month in months:
            total, active = 0, 0
            for idx, (start, by_month) in enumerate(per_project):
                if month in by_month:
                    carried[idx] = by_month[month]
                if start <= month:
                    active += 1
                    total += carried[idx]
            values.append((month, Fraction(total, active)))
        series[smell] = values
    return series


@dataclass
class CorpusSummary:
    project_count: int
    prevalence: dict[Smell, tuple[int, Fraction]]
    distinct_histogram: dict[int, int]
    cooccurrence: dict[tuple[str, str], int]
    ratio_distributions: dict[Smell, list[Fraction]]


def summarize_corpus(summaries: Sequence[ProjectSummary]) -> CorpusSummary:
    return CorpusSummary(
        project_count=len(summaries),
        prevalence=prevalence_table(summaries),
        distinct_histogram=distinct_smell_histogram(summaries),
        cooccurrence=cooccurrence_lock_pinned(summaries),
        ratio_distributions=ratio_distributions(summaries),
    )


def render_percent(value: Fraction, places: int = 1) -> str:
    """Render a fraction in [0, 1] as a percentage string, half-up rounded."""
    exact = Decimal(value.numerator * 100) / Decimal(value.denominator)
    return str(exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def render_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"
