"""Exception hierarchy shared by all depsniff modules."""

from __future__ import annotations


class DepsniffError(Exception):
    """Base class for every error raised deliberately by depsniff."""


class ParseError(DepsniffError, ValueError):
    def __init__(self, text: str, position: int, reason: str) -> None:
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"cannot parse {text!r} at position {position}: {reason}")


class EmptyRange(DepsniffError, ValueError):
    """No version on the evaluation grid satisfies the range."""


class ManifestMissing(DepsniffError, FileNotFoundError):
    pass


class ManifestMalformed(DepsniffError, ValueError):
    def __init__(self, path, position: int, reason: str) -> None:
        self.path = path
        self.position = position
        self.reason = reason
        super().__init__(f"{path}: malformed manifest at position {position}: {reason}")


class NotARepository(DepsniffError):
    pass


class RevisionReadError(DepsniffError):
    def __init__(self, commit_id: str, reason: str = "") -> None:
        self.commit_id = commit_id
        super().__init__(f"cannot read revision {commit_id}" + (f": {reason}" if reason else ""))


class ZeroDependencies(DepsniffError, ZeroDivisionError):
    """A per-dependency ratio was requested for a project without dependencies."""


class EmptyCorpus(DepsniffError, ValueError):
    pass
