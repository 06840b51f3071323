"""Mining package.json history for smell introductions and fixes.

Revisions are the first-parent commits of ``HEAD`` that touch
``package.json``.  Consecutive revisions are diffed by dependency name;
only constraints that change while the dependency persists can introduce
or fix a smell.  Removals never count as fixes.
"""

from __future__ import annotations

import enum
import logging
import os
import subprocess
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from depsniff.classify import CONSTRAINT_SMELLS, Smell, classify_constraint
from depsniff.errors import ManifestMalformed, NotARepository, RevisionReadError
from depsniff.scanner import parse_manifest_text

log = logging.getLogger(__name__)

MANIFEST = "package.json"


class GitRepository:
    """The two version-control queries the miner needs, via the git CLI."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        if not self.path.is_dir():
            raise NotARepository(f"{self.path}: not a directory")
        proc = self._git("rev-parse", "--is-inside-work-tree", check=False)
        if proc.returncode != 0 or proc.stdout.strip() != b"true":
            raise NotARepository(f"{self.path}: not a git work tree")

    def _git(self, *args: str, check: bool = True) -> subprocess.CompletedProcess:
        proc = subprocess.run(
            ["git", "-C", str(self.path), *args],
            capture_output=True,
            env={**os.environ, "LC_ALL": "C"},
        )
        if check and proc.returncode != 0:
            raise subprocess.CalledProcessError(proc.returncode, args, proc.stdout, proc.stderr)
        return proc

    def has_commits(self) -> bool:
        return self._git("rev-parse", "--verify", "-q", "HEAD", check=False).returncode == 0

    def commits_touching(self, path: str) -> list[tuple[str, datetime, str]]:
        """(commit, author date UTC, message) on the first-parent chain, oldest first."""
        if not self.has_commits():
            return []
        out = self._git(
            "log", "--first-parent", "--reverse", "-z",
            "--format=%H%x1f%at%x1f%B", "HEAD", "--", path,
        ).stdout.decode("utf-8", errors="replace")
        commits = []
        for entry in out.split("\0"):
            entry = entry.strip("\n")
            if not entry:
                continue
            sha, stamp, message = entry.split("\x1f", 2)
            commits.append((sha, datetime.fromtimestamp(int(stamp), tz=timezone.utc), message.strip()))
        return commits

    def read_file(self, commit: str, path: str) -> bytes | None:
        """File content at ``commit``; None if the path does not exist there."""
        proc = self._git("cat-file", "-e", f"{commit}:./{path}", check=False)
        if proc.returncode != 0:
            return None
        proc = self._git("show", f"{commit}:./{path}", check=False)
        if proc.returncode != 0:
            raise RevisionReadError(commit, proc.stderr.decode("utf-8", errors="replace").strip())
        return proc.stdout


@dataclass(frozen=True)
class ManifestRevision:
    commit_id: str
    author_date: datetime
    message: str
    runtime_deps: dict[str, str] = field(hash=False)


class DeltaKind(str, enum.Enum):
    ADDED = "Added"
    REMOVED = "Removed"
    MODIFIED = "Modified"


@dataclass(frozen=True)
class DependencyDelta:
    name: str
    kind: DeltaKind
    before: str | None
    after: str | None
    commit_id: str
    author_date: datetime


class SmellEvent(str, enum.Enum):
    INTRODUCED = "Introduced"
    FIXED = "Fixed"


@dataclass(frozen=True)
class SmellTransition:
    delta: DependencyDelta
    event: SmellEvent
    smell: Smell

    def to_dict(self) -> dict:
        return {
            "commit": self.delta.commit_id,
            "date": self.delta.author_date.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "dependency": self.delta.name,
            "before": self.delta.before,
            "after": self.delta.after,
            "event": self.event.value,
            "smell": self.smell.value,
        }


@dataclass(frozen=True)
class TimelinePoint:
    smell: Smell
    month: str  # YYYY-MM, UTC
    introduced: int
    fixed: int
    accumulation: int

    def to_dict(self) -> dict:
        return {
            "smell": self.smell.value,
            "month": self.month,
            "introduced": self.introduced,
            "fixed": self.fixed,
            "accumulation": self.accumulation,
        }


def _in_window(when: datetime, since: date | None, until: date | None) -> bool:
    day = when.astimezone(timezone.utc).date()
    return (since is None or day >= since) and (until is None or day <= until)


def list_manifest_commits(repo: str | Path | GitRepository, since: date | None = None,
                          until: date | None = None,
                          diagnostics: list[str] | None = None) -> list[ManifestRevision]:
    git = repo if isinstance(repo, GitRepository) else GitRepository(repo)
    revisions = []
    for sha, when, message in git.commits_touching(MANIFEST):
        if not _in_window(when, since, until):
            continue
        raw = git.read_file(sha, MANIFEST)
        if raw is None:
            _note(diagnostics, f"{sha[:12]}: package.json deleted, revision skipped")
            continue
        try:
            manifest = parse_manifest_text(raw.decode("utf-8-sig", errors="replace"), MANIFEST)
        except ManifestMalformed as exc:
            _note(diagnostics, f"{sha[:12]}: malformed package.json ({exc.reason}), revision skipped")
            continue
        revisions.append(ManifestRevision(sha, when, message, dict(manifest.runtime_deps)))
    return revisions


def _note(diagnostics: list[str] | None, message: str) -> None:
    log.info(message)
    if diagnostics is not None:
        diagnostics.append(message)


def diff_dependencies(before: ManifestRevision | None, after: ManifestRevision) -> list[DependencyDelta]:
    old = before.runtime_deps if before is not None else {}
    new = after.runtime_deps
    deltas = []
    for name in sorted(set(old) | set(new)):
        if name not in new:
            kind = DeltaKind.REMOVED
        elif name not in old:
            kind = DeltaKind.ADDED
        elif old[name] != new[name]:
            kind = DeltaKind.MODIFIED
        else:
            continue
        deltas.append(DependencyDelta(name, kind, old.get(name), new.get(name), after.commit_id, after.author_date))
    return deltas


def classify_transition(delta: DependencyDelta) -> list[SmellTransition]:
    if delta.kind is not DeltaKind.MODIFIED:
        return []
    cb = classify_constraint(delta.before)
    ca = classify_constraint(delta.after)
    if cb.kind is ca.kind:
        return []
    events = []
    if cb.smell is not None:
        events.append(SmellTransition(delta, SmellEvent.FIXED, cb.smell))
    if ca.smell is not None:
        events.append(SmellTransition(delta, SmellEvent.INTRODUCED, ca.smell))
    return events


def month_of(when: datetime) -> str:
    return when.astimezone(timezone.utc).strftime("%Y-%m")


def _next_month(month: str) -> str:
    year, mon = int(month[:4]), int(month[5:])
    return f"{year + mon // 12:04d}-{mon % 12 + 1:02d}"


def month_range(first: str, last: str) -> list[str]:
    months = []
    current = first
    while current <= last:
        months.append(current)
        current = _next_month(current)
    return months


def build_timeline(transitions: Iterable[SmellTransition], bucketing: str = "month",
                   start: str | None = None, end: str | None = None) -> list[TimelinePoint]:
    """Monthly introduced/fixed counts and running accumulation per smell.

    Only smells with at least one event get a series.  Every series spans
    the same months: from the earlier of ``start`` and the first event to
    the later of ``end`` and the last event, gaps filled with zeros.
    """
    if bucketing != "month":
        raise ValueError(f"unsupported bucketing {bucketing!r}")
    counts: dict[tuple[Smell, str], list[int]] = {}
    for t in transitions:
        slot = counts.setdefault((t.smell, month_of(t.delta.author_date)), [0, 0])
        slot[0 if t.event is SmellEvent.INTRODUCED else 1] += 1
    if not counts:
        return []
    months = sorted({m for _, m in counts} | {m for m in (start, end) if m})
    points = []
    for smell in sorted({s for s, _ in counts}, key=lambda s: s.value):
        accumulation = 0
        for month in month_range(months[0], months[-1]):
            intro, fixed = counts.get((smell, month), (0, 0))
            accumulation += intro - fixed
            points.append(TimelinePoint(smell, month, intro, fixed, accumulation))
    return points


@dataclass
class HistoryResult:
    revisions: list[ManifestRevision]
    deltas: list[DependencyDelta]
    transitions: list[SmellTransition]
    timeline: list[TimelinePoint]
    diagnostics: list[str]

    @property
    def start_month(self) -> str | None:
        return month_of(self.revisions[0].author_date) if self.revisions else None

    @property
    def end_month(self) -> str | None:
        return month_of(self.revisions[-1].author_date) if self.revisions else None

    def totals(self, smells: Sequence[Smell] = CONSTRAINT_SMELLS) -> dict[Smell, tuple[int, int]]:
        out = {s: [0, 0] for s in smells}
        for t in self.transitions:
            if t.smell in out:
                out[t.smell][0 if t.event is SmellEvent.INTRODUCED else 1] += 1
        return {s: (v[0], v[1]) for s, v in out.items()}


def mine_history(repo: str | Path, since: date | None = None, until: date | None = None,
                 smells: Iterable[Smell] = CONSTRAINT_SMELLS) -> HistoryResult:
    """Revisions, deltas, transitions and monthly timeline for one repository.

    Deltas are taken between consecutive revisions of the whole history and
    then restricted to the [since, until] window, so the first change inside
    the window is still diffed against its true predecessor.
    """
    wanted = set(smells)
    diagnostics: list[str] = []
    git = GitRepository(repo)
    revisions = list_manifest_commits(git, diagnostics=diagnostics)
    if not revisions:
        diagnostics.append("no package.json history found")

    deltas: list[DependencyDelta] = []
    previous = None
    for revision in revisions:
        if _in_window(revision.author_date, since, until):
            deltas.extend(diff_dependencies(previous, revision))
        previous = revision
    transitions = [t for d in deltas for t in classify_transition(d) if t.smell in wanted]
    window = [r for r in revisions if _in_window(r.author_date, since, until)]
    start = month_of(window[0].author_date) if window else None
    end = month_of(window[-1].author_date) if window else None
    timeline = build_timeline(transitions, start=start, end=end)
    return HistoryResult(window, deltas, transitions, timeline, sorted(diagnostics))
