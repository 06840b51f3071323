"""Constraint classification (smells S1-S4).

Every constraint string maps to exactly one :class:`ConstraintKind`.  Pure
notational cases (wildcards, URLs, local paths, dist-tags, exact versions)
are routed lexically; everything else is parsed as a range and compared,
as a set of versions on the evaluation grid, against the caret range of its
lowest admitted version.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from depsniff.errors import EmptyRange, ParseError
from depsniff.semver import (
    Comparator,
    RangeExpr,
    SemanticVersion,
    evaluation_grid,
    parse_range,
    parse_version,
    satisfies,
)


class Smell(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    S5 = "S5"
    S6 = "S6"
    S7 = "S7"

    @property
    def title(self) -> str:
        return SMELL_TITLES[self]

    def __str__(self) -> str:
        return self.value


SMELL_TITLES = {
    Smell.S1: "Pinned dependency",
    Smell.S2: "URL dependency",
    Smell.S3: "Restrictive constraint",
    Smell.S4: "Permissive constraint",
    Smell.S5: "No package-lock",
    Smell.S6: "Unused dependency",
    Smell.S7: "Missing dependency",
}

CONSTRAINT_SMELLS = (Smell.S1, Smell.S2, Smell.S3, Smell.S4)


class ConstraintKind(str, enum.Enum):
    PINNED = "Pinned"
    URL = "Url"
    RESTRICTIVE = "Restrictive"
    PERMISSIVE = "Permissive"
    COMPLIANT = "Compliant"
    LOCAL_PATH = "LocalPath"
    DIST_TAG = "DistTag"
    UNPARSEABLE = "Unparseable"

    @property
    def smell(self) -> Smell | None:
        return _KIND_SMELL.get(self)

    def __str__(self) -> str:
        return self.value


_KIND_SMELL = {
    ConstraintKind.PINNED: Smell.S1,
    ConstraintKind.URL: Smell.S2,
    ConstraintKind.RESTRICTIVE: Smell.S3,
    ConstraintKind.PERMISSIVE: Smell.S4,
}


@dataclass(frozen=True)
class ConstraintClass:
    kind: ConstraintKind
    detail: str | None = None

    @property
    def smell(self) -> Smell | None:
        return self.kind.smell


class SetRelation(str, enum.Enum):
    EQUAL = "Equal"
    STRICT_SUBSET = "StrictSubset"
    STRICT_SUPERSET = "StrictSuperset"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class CaretBaseline:
    anchor: SemanticVersion
    range: RangeExpr


def caret_range(anchor: SemanticVersion) -> RangeExpr:
    """``^anchor`` including the 0.x special cases."""
    if anchor.major > 0:
        upper = SemanticVersion(anchor.major + 1, 0, 0)
    elif anchor.minor > 0:
        upper = SemanticVersion(0, anchor.minor + 1, 0)
    else:
        upper = SemanticVersion(0, 0, anchor.patch + 1)
    low = SemanticVersion(anchor.major, anchor.minor, anchor.patch, anchor.prerelease)
    return RangeExpr(((Comparator(">=", low), Comparator("<", upper)),), f"^{low}")


def caret_baseline(r: RangeExpr) -> CaretBaseline:
    for v in evaluation_grid(r):
        if satisfies(v, r):
            return CaretBaseline(v, caret_range(v))
    raise EmptyRange(f"no grid version satisfies {str(r)!r}")


def compare_to_baseline(r: RangeExpr, b: CaretBaseline) -> SetRelation:
    grid = evaluation_grid(r, b.range)
    ours = {v for v in grid if satisfies(v, r)}
    if not ours:
        raise EmptyRange(f"no grid version satisfies {str(r)!r}")
    base = {v for v in grid if satisfies(v, b.range)}
    if ours == base:
        return SetRelation.EQUAL
    if ours < base:
        return SetRelation.STRICT_SUBSET
    if ours > base:
        return SetRelation.STRICT_SUPERSET
    return SetRelation.INCOMPARABLE


def _classify_range(r: RangeExpr) -> ConstraintClass:
    baseline = caret_baseline(r)
    relation = compare_to_baseline(r, baseline)
    if relation is SetRelation.EQUAL:
        return ConstraintClass(ConstraintKind.COMPLIANT)
    if relation is SetRelation.STRICT_SUPERSET:
        return ConstraintClass(ConstraintKind.PERMISSIVE)
    grid = evaluation_grid(r, baseline.range)
    admitted = [v for v in grid if satisfies(v, r)]
    if relation is SetRelation.STRICT_SUBSET:
        if len(admitted) == 1:
            return ConstraintClass(ConstraintKind.PINNED, "range admits a single version")
        return ConstraintClass(ConstraintKind.RESTRICTIVE)
    if any(v.major > baseline.anchor.major for v in admitted):
        return ConstraintClass(ConstraintKind.PERMISSIVE, "incomparable with caret baseline; admits a higher major")
    return ConstraintClass(ConstraintKind.RESTRICTIVE, "incomparable with caret baseline")


# ---------------------------------------------------------------------------
# lexical routing
# ---------------------------------------------------------------------------

_URL_PREFIXES = (
    "git+", "git:", "github:", "gitlab:", "bitbucket:", "gist:", "http:", "https:",
)
_LOCAL_PREFIXES = ("file:", "link:", "workspace:", "./", "../", "/", "~/")
_GITHUB_SHORTHAND = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*/[A-Za-z0-9._-]+(?:#.*)?$")
_TAG_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9._-]*$")


def _url_detail(text: str) -> str:
    if "://" in text:
        scheme = text.split("://", 1)[0]
    elif _GITHUB_SHORTHAND.match(text):
        scheme = "github-shorthand"
    else:
        scheme = text.split(":", 1)[0]
    detail = f"scheme={scheme}"
    if "#" in text:
        detail += f" ref={text.split('#', 1)[1]}"
    return detail


def classify_constraint(text: str) -> ConstraintClass:
    """Classify a raw manifest constraint.  Never raises."""
    stripped = text.strip()
    if stripped in ("", "*", "x", "X"):
        return ConstraintClass(ConstraintKind.PERMISSIVE, "wildcard")
    lowered = stripped.lower()
    if lowered.startswith(_LOCAL_PREFIXES):
        return ConstraintClass(ConstraintKind.LOCAL_PATH, stripped.split(":", 1)[0] if ":" in stripped else "path")
    if "://" in stripped or lowered.startswith(_URL_PREFIXES) or _GITHUB_SHORTHAND.match(stripped):
        return ConstraintClass(ConstraintKind.URL, _url_detail(stripped))
    try:
        rng = parse_range(stripped)
    except ParseError as exc:
        if _TAG_NAME.match(stripped):
            return ConstraintClass(ConstraintKind.DIST_TAG, stripped)
        return ConstraintClass(ConstraintKind.UNPARSEABLE, exc.reason)
    try:
        parse_version(stripped)
    except ParseError:
        pass
    else:
        return ConstraintClass(ConstraintKind.PINNED)
    try:
        return _classify_range(rng)
    except EmptyRange:
        return ConstraintClass(ConstraintKind.UNPARSEABLE, "range admits no version")
