"""npm-flavoured semantic versions and version ranges.

Versions follow SemVer 2.0 (``major.minor.patch[-prerelease][+build]``).
Ranges accept the npm notations: comparators, caret, tilde, x-ranges,
hyphen ranges and ``||`` disjunctions.  Every sugar form is desugared into
plain :class:`Comparator` objects at parse time, so evaluation only ever
deals with ``=, >, >=, <, <=``.
"""

from __future__ import annotations

import enum
import operator
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from depsniff.errors import ParseError

__all__ = [
    "Comparator",
    "Ordering",
    "RangeExpr",
    "SemanticVersion",
    "compare_versions",
    "evaluation_grid",
    "parse_range",
    "parse_version",
    "satisfies",
]

_IDENT_CHARS = frozenset("0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ-")
_WILDCARDS = frozenset("xX*")


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _prerelease_key(ids: Sequence[str]) -> tuple:
    # numeric identifiers sort before alphanumeric ones
    return tuple((0, int(i), "") if i.isdigit() else (1, 0, i) for i in ids)


@dataclass(frozen=True)
class SemanticVersion:
    """A parsed version.

    Equality compares every field, build metadata included, so that
    ``parse_version(str(v)) == v`` holds.  The ordering operators use SemVer
    precedence and ignore build metadata.
    """

    major: int
    minor: int
    patch: int
    prerelease: tuple[str, ...] = ()
    build: tuple[str, ...] = ()

    @cached_property
    def key(self) -> tuple:
        if self.prerelease:
            return (self.major, self.minor, self.patch, 0, _prerelease_key(self.prerelease))
        return (self.major, self.minor, self.patch, 1, ())

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.major, self.minor, self.patch)

    def __str__(self) -> str:
        text = f"{self.major}.{self.minor}.{self.patch}"
        if self.prerelease:
            text += "-" + ".".join(self.prerelease)
        if self.build:
            text += "+" + ".".join(self.build)
        return text

    def __lt__(self, other: SemanticVersion) -> bool:
        return self.key < other.key

    def __le__(self, other: SemanticVersion) -> bool:
        return self.key <= other.key

    def __gt__(self, other: SemanticVersion) -> bool:
        return self.key > other.key

    def __ge__(self, other: SemanticVersion) -> bool:
        return self.key >= other.key

    def release(self) -> SemanticVersion:
        """The same numeric triple without prerelease or build."""
        return SemanticVersion(self.major, self.minor, self.patch)


def compare_versions(a: SemanticVersion, b: SemanticVersion) -> Ordering:
    ka, kb = a.key, b.key
    if ka < kb:
        return Ordering.LESS
    if ka > kb:
        return Ordering.GREATER
    return Ordering.EQUAL


# ---------------------------------------------------------------------------
# version scanning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Partial:
    """A possibly incomplete version as written inside a range (None = wildcard)."""

    major: int | None
    minor: int | None
    patch: int | None
    prerelease: tuple[str, ...] = ()
    build: tuple[str, ...] = ()

    def full(self) -> SemanticVersion:
        return SemanticVersion(self.major or 0, self.minor or 0, self.patch or 0, self.prerelease, self.build)


def _scan_number(text: str, pos: int, allow_wildcard: bool) -> tuple[int | None, int]:
    if pos < len(text) and allow_wildcard and text[pos] in _WILDCARDS:
        return None, pos + 1
    end = pos
    while end < len(text) and "0" <= text[end] <= "9":
        end += 1
    if end == pos:
        raise ParseError(text, pos, "expected a numeric version component")
    digits = text[pos:end]
    if len(digits) > 1 and digits[0] == "0":
        raise ParseError(text, pos, "numeric component has a leading zero")
    return int(digits), end


def _scan_identifiers(text: str, pos: int, numeric_rule: bool) -> tuple[tuple[str, ...], int]:
    ids = []
    while True:
        end = pos
        while end < len(text) and text[end] in _IDENT_CHARS:
            end += 1
        ident = text[pos:end]
        if not ident:
            raise ParseError(text, pos, "empty identifier")
        if numeric_rule and ident.isdigit() and len(ident) > 1 and ident[0] == "0":
            raise ParseError(text, pos, "numeric identifier has a leading zero")
        ids.append(ident)
        if end < len(text) and text[end] == ".":
            pos = end + 1
            continue
        return tuple(ids), end


def _scan_partial(text: str, pos: int, allow_partial: bool) -> tuple[_Partial, int]:
    """Scan a (possibly partial) version starting at ``pos``.

    Stops at whitespace or end of text; anything else is an error.  Inside
    ranges, npm tolerates any run of ``v``/``=`` before the version.
    """
    if allow_partial:
        while pos < len(text) and text[pos] in "=v":
            pos += 1
    parts: list[int | None] = []
    major, pos = _scan_number(text, pos, allow_partial)
    parts.append(major)
    for _ in range(2):
        if pos < len(text) and text[pos] == ".":
            value, pos = _scan_number(text, pos + 1, allow_partial)
            parts.append(value)
        elif allow_partial:
            parts.append(None)
        else:
            raise ParseError(text, pos, "expected three numeric components")
    prerelease: tuple[str, ...] = ()
    build: tuple[str, ...] = ()
    if pos < len(text) and text[pos] == "-":
        if None in parts:
            raise ParseError(text, pos, "prerelease on a partial version")
        prerelease, pos = _scan_identifiers(text, pos + 1, numeric_rule=True)
    if pos < len(text) and text[pos] == "+":
        if None in parts:
            raise ParseError(text, pos, "build metadata on a partial version")
        build, pos = _scan_identifiers(text, pos + 1, numeric_rule=False)
    if pos < len(text) and not text[pos].isspace():
        raise ParseError(text, pos, f"unexpected character {text[pos]!r}")
    # anything after a wildcard is a wildcard too (npm: "1.x.3" == "1.x")
    if parts[0] is None:
        parts = [None, None, None]
    elif parts[1] is None:
        parts[2] = None
    return _Partial(parts[0], parts[1], parts[2], prerelease, build), pos


def parse_version(text: str) -> SemanticVersion:
    """Parse an exact version; a leading ``=`` and/or ``v`` is tolerated."""
    text = text.strip()
    if not text:
        raise ParseError(text, 0, "empty version")
    start = 1 if text[0] == "=" else 0
    if text[start:start + 1] == "v":
        start += 1
    partial, end = _scan_partial(text, start, allow_partial=False)
    if end != len(text):
        raise ParseError(text, end, "trailing characters after version")
    return partial.full()


# ---------------------------------------------------------------------------
# comparators and ranges
# ---------------------------------------------------------------------------

_OPS = {
    "=": operator.eq,
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
}


@dataclass(frozen=True)
class Comparator:
    operator: str
    version: SemanticVersion

    def __post_init__(self) -> None:
        if self.operator not in _OPS:
            raise ValueError(f"unknown comparator operator {self.operator!r}")

    def matches(self, v: SemanticVersion) -> bool:
        """Plain precedence test, without the prerelease gating rule."""
        return _OPS[self.operator](v.key, self.version.key)

    def __str__(self) -> str:
        op = "" if self.operator == "=" else self.operator
        return f"{op}{self.version}"


_ZERO = SemanticVersion(0, 0, 0)
_ANY = (Comparator(">=", _ZERO),)
_NONE = (Comparator("<", _ZERO),)


@dataclass(frozen=True)
class RangeExpr:
    """Disjunction (``clauses``) of conjunctions of comparators."""

    clauses: tuple[tuple[Comparator, ...], ...]
    source_text: str = ""

    def __post_init__(self) -> None:
        if not self.clauses or not all(self.clauses):
            raise ValueError("a range needs at least one non-empty clause")

    def __str__(self) -> str:
        return " || ".join(" ".join(str(c) for c in clause) for clause in self.clauses)

    def comparators(self) -> Iterable[Comparator]:
        for clause in self.clauses:
            yield from clause


def _clause_satisfied(v: SemanticVersion, clause: Sequence[Comparator]) -> bool:
    for comp in clause:
        if not comp.matches(v):
            return False
    if v.prerelease:
        # npm gating: a prerelease only matches when the clause names a
        # prerelease on the very same triple
        return any(c.version.prerelease and c.version.triple == v.triple for c in clause)
    return True


def satisfies(v: SemanticVersion, r: RangeExpr) -> bool:
    return any(_clause_satisfied(v, clause) for clause in r.clauses)


def _v(major: int, minor: int, patch: int, prerelease: tuple[str, ...] = ()) -> SemanticVersion:
    return SemanticVersion(major, minor, patch, prerelease)


def _desugar_caret(p: _Partial) -> tuple[Comparator, ...]:
    M, m, pt = p.major, p.minor, p.patch
    if M is None:
        return _ANY
    if m is None:
        return (Comparator(">=", _v(M, 0, 0)), Comparator("<", _v(M + 1, 0, 0)))
    if pt is None:
        upper = _v(M, m + 1, 0) if M == 0 else _v(M + 1, 0, 0)
        return (Comparator(">=", _v(M, m, 0)), Comparator("<", upper))
    low = _v(M, m, pt, p.prerelease)
    if M > 0:
        upper = _v(M + 1, 0, 0)
    elif m > 0:
        upper = _v(0, m + 1, 0)
    else:
        upper = _v(0, 0, pt + 1)
    return (Comparator(">=", low), Comparator("<", upper))


def _desugar_tilde(p: _Partial) -> tuple[Comparator, ...]:
    M, m, pt = p.major, p.minor, p.patch
    if M is None:
        return _ANY
    if m is None:
        return (Comparator(">=", _v(M, 0, 0)), Comparator("<", _v(M + 1, 0, 0)))
    low = _v(M, m, pt or 0, p.prerelease)
    return (Comparator(">=", low), Comparator("<", _v(M, m + 1, 0)))


def _desugar_xrange(op: str, p: _Partial) -> tuple[Comparator, ...]:
    M, m, pt = p.major, p.minor, p.patch
    if pt is not None:
        return (Comparator(op or "=", p.full()),)
    if M is None:
        return _NONE if op in (">", "<") else _ANY
    if op in ("", "="):
        if m is None:
            return (Comparator(">=", _v(M, 0, 0)), Comparator("<", _v(M + 1, 0, 0)))
        return (Comparator(">=", _v(M, m, 0)), Comparator("<", _v(M, m + 1, 0)))
    if op == ">":
        return (Comparator(">=", _v(M + 1, 0, 0) if m is None else _v(M, m + 1, 0)),)
    if op == "<=":
        return (Comparator("<", _v(M + 1, 0, 0) if m is None else _v(M, m + 1, 0)),)
    # ">=" and "<" just fill the missing components with zeros
    return (Comparator(op, _v(M, m or 0, 0)),)


def _desugar_hyphen(low: _Partial, high: _Partial) -> tuple[Comparator, ...]:
    comps: list[Comparator] = []
    if low.major is not None:
        comps.append(Comparator(">=", low.full()))
    if high.major is not None:
        if high.minor is None:
            comps.append(Comparator("<", _v(high.major + 1, 0, 0)))
        elif high.patch is None:
            comps.append(Comparator("<", _v(high.major, high.minor + 1, 0)))
        else:
            comps.append(Comparator("<=", high.full()))
    return tuple(comps) or _ANY


_HYPHEN = re.compile(r"^(\S+)\s+-\s+(\S+)$")
_OPERATORS = ("~>", ">=", "<=", "~", "^", ">", "<", "=")


def _parse_clause(text: str, start: int, end: int) -> tuple[Comparator, ...]:
    segment = text[start:end]
    body = segment.strip()
    if not body:
        return _ANY
    offset = start + segment.index(body)
    stop = offset + len(body)
    bounded = text[:stop]
    hyphen = _HYPHEN.match(body)
    if hyphen:
        low, _ = _scan_partial(bounded, offset, allow_partial=True)
        high, _ = _scan_partial(bounded, offset + hyphen.start(2), allow_partial=True)
        return _desugar_hyphen(low, high)

    comps: list[Comparator] = []
    pos = offset
    while pos < stop:
        if text[pos].isspace():
            pos += 1
            continue
        op = next((o for o in _OPERATORS if text.startswith(o, pos)), "")
        pos += len(op)
        while pos < stop and text[pos].isspace():
            pos += 1
        if pos >= stop:
            raise ParseError(text, pos, f"operator {op!r} without a version")
        partial, pos = _scan_partial(bounded, pos, allow_partial=True)
        if op in ("~", "~>"):
            comps.extend(_desugar_tilde(partial))
        elif op == "^":
            comps.extend(_desugar_caret(partial))
        else:
            comps.extend(_desugar_xrange(op, partial))
    return tuple(comps)


def parse_range(text: str) -> RangeExpr:
    """Parse an npm range and desugar it into comparator clauses.

    >>> str(parse_range("~2.1.3"))
    '>=2.1.3 <2.2.0'
    >>> str(parse_range("1.2.3 - 1.4.0 || 2.x"))
    '>=1.2.3 <=1.4.0 || >=2.0.0 <3.0.0'
    """
    clauses = []
    start = 0
    while True:
        end = text.find("||", start)
        if end == -1:
            clauses.append(_parse_clause(text, start, len(text)))
            break
        clauses.append(_parse_clause(text, start, end))
        start = end + 2
    return RangeExpr(tuple(clauses), text)


# ---------------------------------------------------------------------------
# evaluation grid
# ---------------------------------------------------------------------------

_BASE_NUMERALS = (0, 1, 2, 3)


@lru_cache(maxsize=512)
def _grid(numerals: frozenset[int], prereleases: frozenset[SemanticVersion]) -> tuple[SemanticVersion, ...]:
    nums = sorted(numerals)
    versions = [SemanticVersion(a, b, c) for a in nums for b in nums for c in nums]
    versions.extend(prereleases)
    versions.sort(key=lambda v: v.key)
    return tuple(versions)


def evaluation_grid(*ranges: RangeExpr) -> tuple[SemanticVersion, ...]:
    """The finite version grid on which set-level questions are answered.

    The Cartesian cube over ``{0,1,2,3}`` plus every numeral used by the
    ranges' comparators and its neighbours, in each of major/minor/patch.
    Prerelease versions appear only when a comparator names one.
    """
    numerals = set(_BASE_NUMERALS)
    prereleases = set()
    for r in ranges:
        for comp in r.comparators():
            v = comp.version
            for n in v.triple:
                numerals.update((n, n + 1))
                if n > 0:
                    numerals.add(n - 1)
            if v.prerelease:
                prereleases.add(SemanticVersion(v.major, v.minor, v.patch, v.prerelease))
    return _grid(frozenset(numerals), frozenset(prereleases))
