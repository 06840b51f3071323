"""Single-project analysis: manifest, lockfile, imports, S1-S7 findings."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from depsniff.classify import ConstraintClass, ConstraintKind, Smell, classify_constraint
from depsniff.errors import ManifestMalformed, ManifestMissing
from depsniff.imports import (
    DEFAULT_BUILTINS,
    DEFAULT_EXTENSIONS,
    ImportRecord,
    extract_imports,
    resolve_specifier,
)

LOCKFILES = ("package-lock.json", "npm-shrinkwrap.json", "yarn.lock")


@dataclass
class Manifest:
    path: Path
    name: str | None = None
    runtime_deps: dict[str, str] = field(default_factory=dict)
    dev_deps: dict[str, str] = field(default_factory=dict)
    optional_deps: dict[str, str] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def declared(self) -> set[str]:
        return set(self.runtime_deps) | set(self.dev_deps) | set(self.optional_deps)


@dataclass(frozen=True)
class SmellFinding:
    smell: Smell
    dependency: str | None = None
    constraint: str | None = None
    evidence: str = ""

    def sort_key(self) -> tuple:
        return (self.smell.value, self.dependency or "", self.evidence)

    def to_dict(self) -> dict:
        return {
            "smell": self.smell.value,
            "dependency": self.dependency,
            "constraint": self.constraint,
            "evidence": self.evidence,
        }


_SECTIONS = {
    "dependencies": "runtime_deps",
    "devDependencies": "dev_deps",
    "optionalDependencies": "optional_deps",
}


def _pairs_hook(diagnostics: list[str]):
    def hook(pairs):
        obj = {}
        for key, value in pairs:
            if key in obj:
                diagnostics.append(f"package.json: duplicate key {key!r}, last occurrence wins")
            obj[key] = value
        return obj
    return hook


def parse_manifest_text(text: str, path: Path | str = "package.json") -> Manifest:
    """Parse package.json content into a :class:`Manifest`."""
    diagnostics: list[str] = []
    try:
        data = json.loads(text, object_pairs_hook=_pairs_hook(diagnostics))
    except json.JSONDecodeError as exc:
        raise ManifestMalformed(path, exc.pos, exc.msg) from None
    if not isinstance(data, dict):
        raise ManifestMalformed(path, 0, "top-level value is not an object")
    manifest = Manifest(Path(path), diagnostics=diagnostics)
    name = data.get("name")
    manifest.name = name if isinstance(name, str) else None
    for section, attr in _SECTIONS.items():
        block = data.get(section)
        if block is None:
            continue
        if not isinstance(block, dict):
            diagnostics.append(f"package.json: {section} is not an object, ignored")
            continue
        deps = getattr(manifest, attr)
        for dep, constraint in block.items():
            if not isinstance(constraint, str):
                diagnostics.append(f"package.json: {section}[{dep!r}] is not a string, ignored")
                continue
            deps[dep] = constraint
    return manifest


def load_manifest(root: str | os.PathLike) -> Manifest:
    path = Path(root) / "package.json"
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise ManifestMissing(f"{path}: no package.json") from None
    except IsADirectoryError:
        raise ManifestMissing(f"{path}: is a directory") from None
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ManifestMalformed(path, exc.start, "not valid UTF-8") from None
    return parse_manifest_text(text, path)


def has_lockfile(root: str | os.PathLike) -> bool:
    names = set(os.listdir(root))  # raises OSError on unreadable directories
    return any(name in names and Path(root, name).is_file() for name in LOCKFILES)


def detect_lockfile_smell(root: str | os.PathLike) -> SmellFinding | None:
    if has_lockfile(root):
        return None
    return SmellFinding(Smell.S5, evidence="no " + ", ".join(LOCKFILES) + " in project root")


def compute_unused_missing(manifest: Manifest, imports: Iterable[ImportRecord],
                           builtins: frozenset[str] = DEFAULT_BUILTINS,
                           include_dev: bool = False) -> tuple[set[str], set[str]]:
    """Declared-but-unimported and imported-but-undeclared package names.

    Dev and optional declarations silence S7 but are never S6 candidates,
    unless ``include_dev`` puts dev dependencies in the runtime set.
    """
    used = {name for rec in imports if (name := resolve_specifier(rec.specifier, builtins))}
    candidates = set(manifest.runtime_deps)
    if include_dev:
        candidates |= set(manifest.dev_deps)
    unused = candidates - used
    missing = used - manifest.declared()
    return unused, missing


@dataclass
class ProjectScan:
    """Everything learned about one project tree."""

    root: Path
    manifest: Manifest
    lockfile_present: bool
    classes: dict[str, ConstraintClass]
    imports: list[ImportRecord]
    unused: set[str]
    missing: set[str]
    findings: list[SmellFinding]
    diagnostics: list[str]

    @property
    def dep_count(self) -> int:
        return len(self.classes)


def analysed_deps(manifest: Manifest, include_dev: bool = False) -> dict[str, str]:
    deps = dict(manifest.runtime_deps)
    if include_dev:
        for name, constraint in manifest.dev_deps.items():
            deps.setdefault(name, constraint)
    return deps


def constraint_findings(deps: dict[str, str]) -> tuple[dict[str, ConstraintClass], list[SmellFinding], list[str]]:
    classes: dict[str, ConstraintClass] = {}
    findings: list[SmellFinding] = []
    diagnostics: list[str] = []
    for name, constraint in deps.items():
        cls = classify_constraint(constraint)
        classes[name] = cls
        if cls.smell is not None:
            evidence = f"dependencies[{name}] is {cls.kind.value}"
            if cls.detail:
                evidence += f" ({cls.detail})"
            findings.append(SmellFinding(cls.smell, name, constraint, evidence))
        elif cls.kind is ConstraintKind.UNPARSEABLE:
            diagnostics.append(f"package.json: unparseable constraint {constraint!r} for {name} ({cls.detail})")
        elif cls.kind is ConstraintKind.DIST_TAG:
            diagnostics.append(f"package.json: {name} uses dist-tag {constraint!r}")
    return classes, findings, diagnostics


def analyze_project(root: str | os.PathLike, *, extensions: Iterable[str] = DEFAULT_EXTENSIONS,
                    ignore: Iterable[str] = (), builtins: frozenset[str] = DEFAULT_BUILTINS,
                    include_dev: bool = False, jobs: int = 1) -> ProjectScan:
    root = Path(root)
    manifest = load_manifest(root)
    diagnostics = list(manifest.diagnostics)

    classes, findings, diags = constraint_findings(analysed_deps(manifest, include_dev))
    diagnostics.extend(diags)

    lock = detect_lockfile_smell(root)
    if lock is not None:
        findings.append(lock)

    imports = extract_imports(root, extensions, ignore, jobs=jobs, diagnostics=diagnostics)
    unused, missing = compute_unused_missing(manifest, imports, builtins, include_dev)
    for name in unused:
        findings.append(SmellFinding(Smell.S6, name, analysed_deps(manifest, include_dev)[name],
                                     "declared in dependencies but never imported"))
    sites: dict[str, list[ImportRecord]] = {}
    for rec in imports:
        pkg = resolve_specifier(rec.specifier, builtins)
        if pkg in missing:
            sites.setdefault(pkg, []).append(rec)
    for name in missing:
        first, *rest = sites[name]
        evidence = f"{first.file}:{first.line}"
        if rest:
            evidence += f" (+{len(rest)} more)"
        findings.append(SmellFinding(Smell.S7, name, None, evidence))

    findings.sort(key=SmellFinding.sort_key)
    return ProjectScan(root, manifest, lock is None, classes, imports, unused, missing,
                       findings, sorted(set(diagnostics)))
