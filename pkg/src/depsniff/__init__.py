"""depsniff: dependency-smell detection and evolution mining for npm projects."""

from __future__ import annotations

__version__ = "0.1.0"

from depsniff.classify import ConstraintKind, Smell, classify_constraint
from depsniff.scanner import SmellFinding, analyze_project
from depsniff.semver import SemanticVersion, parse_range, parse_version, satisfies

__all__ = [
    "ConstraintKind",
    "SemanticVersion",
    "Smell",
    "SmellFinding",
    "analyze_project",
    "classify_constraint",
    "parse_range",
    "parse_version",
    "satisfies",
]
