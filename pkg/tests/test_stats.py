from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from depsniff.classify import Smell
from depsniff.errors import EmptyCorpus, ZeroDependencies
from depsniff.history import TimelinePoint
from depsniff.scanner import SmellFinding
from depsniff.stats import (
    ProjectTimeline,
    accumulation_series,
    cooccurrence_lock_pinned,
    distinct_smell_histogram,
    prevalence_from_findings,
    prevalence_table,
    project_smell_summary,
    ratio_distributions,
    render_percent,
)


def findings(**counts: int) -> list[SmellFinding]:
    out = []
    for name, n in counts.items():
        smell = Smell(name)
        for i in range(n):
            out.append(SmellFinding(smell, None if smell is Smell.S5 else f"{name.lower()}-{i}"))
    return out


def summary(name: str, deps: int, **counts: int):
    return project_smell_summary(name, deps, findings(**counts))


class TestProjectSummary:
    def test_pinned_ratio(self) -> None:
        assert summary("p", 20, S1=5).ratio(Smell.S1) == Fraction(1, 4)

    def test_missing_ratio_uses_declared_plus_missing(self) -> None:
        assert summary("p", 15, S7=5).ratio(Smell.S7) == Fraction(1, 4)

    def test_lockfile_ratio_is_binary(self) -> None:
        assert summary("p", 3, S5=1).ratio(Smell.S5) == 1
        assert summary("p", 3).ratio(Smell.S5) == 0

    def test_distinct(self) -> None:
        assert summary("p", 4, S1=2, S5=1, S6=3).distinct_smells == {Smell.S1, Smell.S5, Smell.S6}

    def test_zero_dependencies(self) -> None:
        s = summary("p", 0, S5=1)
        with pytest.raises(ZeroDependencies):
            s.ratio(Smell.S1)

    @given(st.integers(1, 30), st.data())
    def test_ratios_bounded(self, deps: int, data) -> None:
        counts = {s: data.draw(st.integers(0, deps)) for s in ("S1", "S6")}
        counts["S7"] = data.draw(st.integers(0, 10))
        s = summary("p", deps, **counts)
        assert all(0 <= r <= 1 for r in s.ratios.values())


class TestCorpus:
    @pytest.fixture
    def corpus(self):
        return [
            summary("a", 10, S1=3, S5=1),
            summary("b", 5, S1=1),
            summary("c", 4, S6=2, S7=1),
            summary("d", 8),
            summary("e", 2, S1=2, S5=1),
        ]

    def test_prevalence(self, corpus) -> None:
        table = prevalence_table(corpus)
        assert table[Smell.S1] == (3, Fraction(3, 5))
        assert table[Smell.S5] == (2, Fraction(2, 5))
        assert table[Smell.S4] == (0, 0)

    def test_prevalence_two_paths(self, corpus) -> None:
        raw = prevalence_from_findings({s.project: s.findings for s in corpus})
        assert raw == {smell: n for smell, (n, _) in prevalence_table(corpus).items()}

    def test_histogram(self, corpus) -> None:
        hist = distinct_smell_histogram(corpus)
        assert hist == {0: 1, 1: 1, 2: 3, 3: 0, 4: 0, 5: 0, 6: 0, 7: 0}
        assert sum(hist.values()) == len(corpus)

    def test_cooccurrence(self, corpus) -> None:
        assert cooccurrence_lock_pinned(corpus) == {
            ("exists", "pinned"): 1,
            ("exists", "unpinned"): 3,
            ("missing", "unpinned"): 1,
            ("missing", "pinned"): 2,
        }

    @pytest.mark.parametrize(
        "project, rows",
        [
            (summary("mixed", 2, S1=1), {("exists", "pinned"), ("exists", "unpinned")}),
            (summary("all-pinned", 2, S1=2), {("exists", "pinned")}),
            (summary("free", 2, S5=1), {("missing", "unpinned")}),
        ],
    )
    def test_cooccurrence_rows(self, project, rows) -> None:
        table = cooccurrence_lock_pinned([project])
        assert {k for k, v in table.items() if v} == rows

    def test_smell_free_project_only_touches_bucket_zero(self, corpus) -> None:
        before_hist = distinct_smell_histogram(corpus)
        before_prev = prevalence_table(corpus)
        grown = corpus + [summary("clean", 3)]
        after_hist = distinct_smell_histogram(grown)
        assert after_hist[0] == before_hist[0] + 1
        assert all(after_hist[k] == before_hist[k] for k in range(1, 8))
        after_prev = prevalence_table(grown)
        assert all(after_prev[s][0] == before_prev[s][0] for s in Smell)

    def test_ratio_distributions_sorted(self, corpus) -> None:
        dist = ratio_distributions(corpus)
        assert dist[Smell.S1] == sorted([Fraction(3, 10), Fraction(1, 5), 0, 0, 1])
        assert dist[Smell.S7] == sorted([0, 0, Fraction(1, 5), 0, 0])

    def test_empty_corpus(self) -> None:
        with pytest.raises(EmptyCorpus):
            prevalence_table([])


def timeline(project: str, start: str, values: dict[str, int], smell: Smell = Smell.S1) -> ProjectTimeline:
    points = [TimelinePoint(smell, m, 0, 0, v) for m, v in sorted(values.items())]
    end = max([start, *values])
    return ProjectTimeline(project, start, end, points)


class TestAccumulation:
    def test_mean_of_active(self) -> None:
        series = accumulation_series([timeline("a", "2020-01", {"2020-01": 4}),
                                      timeline("b", "2020-01", {"2020-01": 2})], [Smell.S1])
        assert series[Smell.S1] == [("2020-01", Fraction(3))]

    def test_late_project_excluded_from_denominator(self) -> None:
        series = accumulation_series([timeline("a", "2020-01", {"2020-01": 4, "2020-03": 6}),
                                      timeline("b", "2020-03", {"2020-03": 2})], [Smell.S1])
        assert series[Smell.S1] == [("2020-01", 4), ("2020-02", 4), ("2020-03", 4)]

    def test_single_project_identity(self) -> None:
        values = {"2020-01": 1, "2020-02": 3, "2020-03": 2}
        series = accumulation_series([timeline("a", "2020-01", values)], [Smell.S1])
        assert series[Smell.S1] == [(m, Fraction(v)) for m, v in values.items()]

    def test_empty(self) -> None:
        with pytest.raises(EmptyCorpus):
            accumulation_series([])


@pytest.mark.parametrize(
    "value, text",
    [(Fraction(1, 3), "33.3"), (Fraction(1, 8), "12.5"), (Fraction(1, 16), "6.3"),
     (Fraction(2, 3), "66.7"), (Fraction(0), "0.0"), (Fraction(1), "100.0")],
)
def test_render_percent_half_up(value: Fraction, text: str) -> None:
    assert render_percent(value) == text
