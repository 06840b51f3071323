"""Report assembly and serialization for scan, history and corpus runs.

Outputs are deterministic: findings and diagnostics are sorted, JSON keys
are sorted, and no wall-clock time is recorded unless ``timestamped`` is
set.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from depsniff.classify import CONSTRAINT_SMELLS, Smell
from depsniff.errors import DepsniffError, EmptyCorpus
from depsniff.history import HistoryResult, mine_history
from depsniff.imports import DEFAULT_BUILTINS, DEFAULT_EXTENSIONS, load_builtins
from depsniff.scanner import ProjectScan, SmellFinding, analyze_project
from depsniff.stats import (
    COOCCURRENCE_ROWS,
    ProjectSummary,
    ProjectTimeline,
    accumulation_series,
    project_smell_summary,
    render_fraction,
    render_percent,
    summarize_corpus,
)

SCHEMA_VERSION = "1"
ALL_SMELLS = frozenset(Smell)
FORMATS = ("json", "csv", "text")
CSV_COLUMNS = ("smell", "dependency", "constraint", "evidence")


@dataclass
class ScanConfig:
    root: Path
    format: str = "json"
    smell_filter: frozenset[Smell] = ALL_SMELLS
    fail_on: frozenset[Smell] = frozenset()
    include_dev: bool = False
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    ignore: tuple[str, ...] = ()
    builtins_path: Path | None = None
    timestamped: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        self.root = Path(self.root)
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if not self.fail_on <= self.smell_filter:
            extra = ", ".join(sorted(s.value for s in self.fail_on - self.smell_filter))
            raise ValueError(f"--fail-on smells not covered by --smells: {extra}")

    def builtins(self) -> frozenset[str]:
        path = self.builtins_path or os.environ.get("DEPSNIFF_BUILTINS")
        return load_builtins(path) if path else DEFAULT_BUILTINS


@dataclass
class ProjectReport:
    project: str
    findings: list[SmellFinding]
    summary: ProjectSummary
    diagnostics: list[str]
    smell_filter: frozenset[Smell] = ALL_SMELLS
    schema_version: str = SCHEMA_VERSION
    generated_at: str | None = None
    scan: ProjectScan | None = field(default=None, repr=False, compare=False)

    @property
    def found_smells(self) -> frozenset[Smell]:
        return frozenset(f.smell for f in self.findings)


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _project_name(scan: ProjectScan) -> str:
    return scan.manifest.name or scan.root.resolve().name


def report_from_scan(scan: ProjectScan, smell_filter: frozenset[Smell] = ALL_SMELLS,
                     timestamped: bool = False) -> ProjectReport:
    findings = [f for f in scan.findings if f.smell in smell_filter]
    findings.sort(key=SmellFinding.sort_key)
    summary = project_smell_summary(_project_name(scan), scan.dep_count, findings)
    return ProjectReport(
        project=_project_name(scan),
        findings=findings,
        summary=summary,
        diagnostics=sorted(set(scan.diagnostics)),
        smell_filter=smell_filter,
        generated_at=utc_timestamp() if timestamped else None,
        scan=scan,
    )


def run_scan(config: ScanConfig) -> ProjectReport:
    """Scan one project; raises ManifestMissing/ManifestMalformed/OSError."""
    scan = analyze_project(
        config.root,
        extensions=config.extensions,
        ignore=config.ignore,
        builtins=config.builtins(),
        include_dev=config.include_dev,
        jobs=config.jobs,
    )
    return report_from_scan(scan, config.smell_filter, config.timestamped)


def badge_status(report: ProjectReport) -> str:
    return "infected" if any(f.smell in report.smell_filter for f in report.findings) else "clean"


def exit_code(report_smells: frozenset[Smell], fail_on: frozenset[Smell]) -> int:
    return 2 if report_smells & fail_on else 0


# ---------------------------------------------------------------------------
# dict builders
# ---------------------------------------------------------------------------


def _ratio_entry(value: Fraction) -> dict:
    return {"fraction": render_fraction(value), "percent": render_percent(value)}


def summary_to_dict(summary: ProjectSummary, smell_filter: frozenset[Smell] = ALL_SMELLS) -> dict:
    smells = [s for s in Smell if s in smell_filter]
    return {
        "dependencies": summary.dep_count,
        "counts": {s.value: summary.counts.get(s, 0) for s in smells},
        "distinct_smells": sorted(s.value for s in summary.distinct_smells),
        "ratios": {s.value: _ratio_entry(summary.ratios[s]) for s in smells if s in summary.ratios},
    }


def report_to_dict(report: ProjectReport) -> dict:
    doc = {
        "schema_version": report.schema_version,
        "project": report.project,
        "smells": sorted(s.value for s in report.smell_filter),
        "findings": [f.to_dict() for f in report.findings],
        "summary": summary_to_dict(report.summary, report.smell_filter),
        "badge": badge_status(report),
        "diagnostics": report.diagnostics,
    }
    if report.generated_at:
        doc["generated_at"] = report.generated_at
    return doc


def dump_json(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


def _dump_csv(header: Sequence[str], rows: Sequence[Sequence[object]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue().encode("utf-8")


def _table(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[str(h) for h in header]] + [["-" if v is None else str(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def emit_report(report: ProjectReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return dump_json(report_to_dict(report))
    rows = [(f.smell.value, f.dependency, f.constraint, f.evidence) for f in report.findings]
    if fmt == "csv":
        return _dump_csv(CSV_COLUMNS, rows)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    out = [f"project: {report.project}"]
    if report.generated_at:
        out.append(f"generated: {report.generated_at}")
    out.append(f"dependencies: {report.summary.dep_count}")
    out.append(f"status: {badge_status(report)}")
    out.append("")
    out.append(_table(CSV_COLUMNS, rows) if rows else "no dependency smells found")
    if report.diagnostics:
        out.append("")
        out.append("diagnostics:")
        out.extend(f"  {d}" for d in report.diagnostics)
    return ("\n".join(out) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# history
# ---------------------------------------------------------------------------


def run_history(root: Path, since: date | None = None, until: date | None = None,
                smells: frozenset[Smell] = ALL_SMELLS) -> HistoryResult:
    wanted = [s for s in CONSTRAINT_SMELLS if s in smells]
    return mine_history(root, since, until, wanted)


def history_to_dict(result: HistoryResult, project: str, smells: frozenset[Smell] = ALL_SMELLS,
                    generated_at: str | None = None) -> dict:
    wanted = [s for s in CONSTRAINT_SMELLS if s in smells]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "project": project,
        "revisions": len(result.revisions),
        "totals": {s.value: {"introduced": i, "fixed": f} for s, (i, f) in result.totals(wanted).items()},
        "timeline": [p.to_dict() for p in result.timeline],
        "transitions": [t.to_dict() for t in result.transitions],
        "diagnostics": result.diagnostics,
    }
    if generated_at:
        doc["generated_at"] = generated_at
    return doc


def emit_history(doc: dict, fmt: str = "json") -> bytes:
    header = ("smell", "month", "introduced", "fixed", "accumulation")
    rows = [[p[k] for k in header] for p in doc["timeline"]]
    if fmt == "json":
        return dump_json(doc)
    if fmt == "csv":
        return _dump_csv(header, rows)
    totals = [(s, t["introduced"], t["fixed"]) for s, t in doc["totals"].items()]
    out = [f"project: {doc['project']}", f"revisions: {doc['revisions']}", "",
           _table(("smell", "introduced", "fixed"), totals), ""]
    out.append(_table(header, rows) if rows else "no smell transitions in range")
    if doc["diagnostics"]:
        out += ["", "diagnostics:"] + [f"  {d}" for d in doc["diagnostics"]]
    return ("\n".join(out) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


@dataclass
class CorpusResult:
    reports: list[ProjectReport]
    diagnostics: list[str]
    timelines: list[ProjectTimeline] = field(default_factory=list)
    history_totals: dict[Smell, tuple[int, int]] = field(default_factory=dict)


def _scan_one(directory: Path, config: ScanConfig) -> ProjectReport | str:
    try:
        scan = analyze_project(directory, extensions=config.extensions, ignore=config.ignore,
                               builtins=config.builtins(), include_dev=config.include_dev)
    except (DepsniffError, OSError) as exc:
        return f"{directory.name}: skipped ({exc})"
    if scan.dep_count == 0:
        return f"{directory.name}: skipped (no runtime dependencies)"
    report = report_from_scan(scan, config.smell_filter)
    report.project = directory.name
    report.summary.project = directory.name
    return report


def run_corpus(config: ScanConfig, with_history: bool = False) -> CorpusResult:
    """Scan every immediate subdirectory of ``config.root`` holding a package.json."""
    root = config.root
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    diagnostics = []
    candidates = []
    for entry in sorted(root.iterdir()):
        if not entry.is_dir() or entry.name.startswith("."):
            continue
        if (entry / "package.json").is_file():
            candidates.append(entry)
        else:
            diagnostics.append(f"{entry.name}: skipped (no package.json)")
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(lambda d: _scan_one(d, config), candidates))
    else:
        outcomes = [_scan_one(d, config) for d in candidates]
    reports = []
    for outcome in outcomes:
        if isinstance(outcome, str):
            diagnostics.append(outcome)
        else:
            reports.append(outcome)
    if not reports:
        raise EmptyCorpus(f"{root}: no analysable projects")
    result = CorpusResult(reports, diagnostics)
    if with_history:
        _mine_corpus(result, candidates, config)
    result.diagnostics.sort()
    return result


def _mine_corpus(result: CorpusResult, directories: list[Path], config: ScanConfig) -> None:
    names = {r.project for r in result.reports}
    totals = {s: [0, 0] for s in CONSTRAINT_SMELLS if s in config.smell_filter}
    for directory in directories:
        if directory.name not in names:
            continue
        try:
            mined = run_history(directory, smells=config.smell_filter)
        except DepsniffError as exc:
            result.diagnostics.append(f"{directory.name}: history skipped ({exc})")
            continue
        if mined.start_month is None:
            result.diagnostics.append(f"{directory.name}: history skipped (no package.json history)")
            continue
        result.timelines.append(ProjectTimeline(directory.name, mined.start_month, mined.end_month, mined.timeline))
        for smell, (intro, fixed) in mined.totals(list(totals)).items():
            totals[smell][0] += intro
            totals[smell][1] += fixed
    result.history_totals = {s: (v[0], v[1]) for s, v in totals.items()}


def corpus_to_dict(result: CorpusResult, smell_filter: frozenset[Smell] = ALL_SMELLS,
                   generated_at: str | None = None) -> dict:
    summaries = [r.summary for r in result.reports]
    corpus = summarize_corpus(summaries)
    smells = [s for s in Smell if s in smell_filter]
    total = corpus.project_count
    doc = {
        "schema_version": SCHEMA_VERSION,
        "project_count": total,
        "projects": [
            {
                "project": r.project,
                "findings": [[f.smell.value, f.dependency] for f in r.findings],
                **summary_to_dict(r.summary, smell_filter),
            }
            for r in sorted(result.reports, key=lambda r: r.project)
        ],
        "prevalence": {
            s.value: {"projects": n, **_ratio_entry(frac)}
            for s, (n, frac) in corpus.prevalence.items() if s in smell_filter
        },
        "distinct_histogram": {
            str(k): {"projects": n, "percent": render_percent(Fraction(n, total))}
            for k, n in corpus.distinct_histogram.items()
        },
        "cooccurrence": [
            {"lockfile": lock, "contains": kind, "projects": corpus.cooccurrence[(lock, kind)],
             "percent": render_percent(Fraction(corpus.cooccurrence[(lock, kind)], total))}
            for lock, kind in COOCCURRENCE_ROWS
        ],
        "ratio_distributions": {
            s.value: [render_fraction(v) for v in values]
            for s, values in corpus.ratio_distributions.items() if s in smells
        },
        "diagnostics": result.diagnostics,
    }
    if result.timelines:
        series = accumulation_series(result.timelines, [s for s in CONSTRAINT_SMELLS if s in smell_filter])
        doc["history"] = {
            "projects": len(result.timelines),
            "totals": {s.value: {"introduced": i, "fixed": f} for s, (i, f) in result.history_totals.items()},
            "accumulation": {
                s.value: [{"month": m, "value": render_fraction(v), "mean": f"{float(v):.4f}"} for m, v in points]
                for s, points in series.items()
            },
        }
    if generated_at:
        doc["generated_at"] = generated_at
    return doc


def emit_corpus(doc: dict, fmt: str = "json") -> bytes:
    if fmt == "json":
        return dump_json(doc)
    smells = list(doc["prevalence"])
    header = ["project", "dependencies", *smells]
    rows = [[p["project"], p["dependencies"], *(p["counts"][s] for s in smells)] for p in doc["projects"]]
    if fmt == "csv":
        return _dump_csv(header, rows)
    prevalence = [(s, v["projects"], v["percent"] + "%") for s, v in doc["prevalence"].items()]
    hist = [(k, v["projects"], v["percent"] + "%") for k, v in doc["distinct_histogram"].items()]
    cooc = [(c["lockfile"], c["contains"], c["projects"], c["percent"] + "%") for c in doc["cooccurrence"]]
    out = [
        f"projects: {doc['project_count']}", "",
        _table(("smell", "projects", "percent"), prevalence), "",
        _table(("distinct smells", "projects", "percent"), hist), "",
        _table(("package-lock", "contains", "projects", "percent"), cooc), "",
        _table(header, rows),
    ]
    if doc["diagnostics"]:
        out += ["", "diagnostics:"] + [f"  {d}" for d in doc["diagnostics"]]
    return ("\n".join(out) + "\n").encode("utf-8")
