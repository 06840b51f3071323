from __future__ import annotations

import os
from pathlib import Path

import pytest

from builders import write_project
from depsniff.classify import Smell
from depsniff.errors import ManifestMalformed, ManifestMissing
from depsniff.imports import ImportForm, ImportRecord
from depsniff.scanner import (
    Manifest,
    analyze_project,
    compute_unused_missing,
    detect_lockfile_smell,
    load_manifest,
    parse_manifest_text,
)


class TestManifest:
    def test_direct_read(self, tmp_path: Path) -> None:
        write_project(tmp_path, {"dependencies": {"a": "^1.0.0"}})
        assert load_manifest(tmp_path).runtime_deps == {"a": "^1.0.0"}

    def test_absent_sections(self, tmp_path: Path) -> None:
        write_project(tmp_path, {"name": "x"})
        m = load_manifest(tmp_path)
        assert (m.name, m.runtime_deps, m.dev_deps, m.optional_deps) == ("x", {}, {}, {})

    def test_duplicate_key_last_wins(self) -> None:
        m = parse_manifest_text('{"dependencies": {"a": "1.0.0", "a": "^2.0.0"}}')
        assert m.runtime_deps == {"a": "^2.0.0"}
        assert m.diagnostics == ["package.json: duplicate key 'a', last occurrence wins"]

    def test_sections_and_scoped_names(self) -> None:
        m = parse_manifest_text(
            '{"dependencies": {"@scope/a": "1.0.0"}, "devDependencies": {"jest": "^29"},'
            ' "optionalDependencies": {"fsevents": "*"}}'
        )
        assert list(m.runtime_deps) == ["@scope/a"]
        assert m.dev_deps == {"jest": "^29"}
        assert m.optional_deps == {"fsevents": "*"}

    def test_non_string_constraint_ignored(self) -> None:
        m = parse_manifest_text('{"dependencies": {"a": 1, "b": "^1.0.0"}}')
        assert m.runtime_deps == {"b": "^1.0.0"}
        assert len(m.diagnostics) == 1

    def test_missing(self, tmp_path: Path) -> None:
        with pytest.raises(ManifestMissing):
            load_manifest(tmp_path)

    @pytest.mark.parametrize("text", ['{"dependencies": ', "[1, 2]", "not json"])
    def test_malformed(self, tmp_path: Path, text: str) -> None:
        write_project(tmp_path, text)
        with pytest.raises(ManifestMalformed) as info:
            load_manifest(tmp_path)
        assert info.value.position >= 0

    def test_bom_tolerated(self, tmp_path: Path) -> None:
        (tmp_path / "package.json").write_bytes(b'\xef\xbb\xbf{"dependencies": {"a": "1.0.0"}}')
        assert load_manifest(tmp_path).runtime_deps == {"a": "1.0.0"}


class TestLockfile:
    @pytest.mark.parametrize("name", ["package-lock.json", "npm-shrinkwrap.json", "yarn.lock"])
    def test_any_lockfile_suppresses(self, tmp_path: Path, name: str) -> None:
        (tmp_path / name).write_text("")
        assert detect_lockfile_smell(tmp_path) is None

    def test_none_present(self, tmp_path: Path) -> None:
        finding = detect_lockfile_smell(tmp_path)
        assert finding.smell is Smell.S5
        assert finding.dependency is None

    def test_subdirectory_lockfile_does_not_count(self, tmp_path: Path) -> None:
        (tmp_path / "sub").mkdir()
        (tmp_path / "sub" / "package-lock.json").write_text("{}")
        assert detect_lockfile_smell(tmp_path).smell is Smell.S5

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
    def test_unreadable_directory(self, tmp_path: Path) -> None:
        locked = tmp_path / "locked"
        locked.mkdir(mode=0)
        try:
            with pytest.raises(OSError):
                detect_lockfile_smell(locked)
        finally:
            locked.chmod(0o755)


def _records(*specifiers: str) -> list[ImportRecord]:
    return [ImportRecord("i.js", n + 1, s, ImportForm.REQUIRE_CALL) for n, s in enumerate(specifiers)]


@pytest.mark.parametrize(
    "declared, imported, unused, missing",
    [
        ({"express": "^4", "lodash": "^4"}, ["express"], {"lodash"}, set()),
        ({"express": "^4"}, ["express", "left-pad"], set(), {"left-pad"}),
        ({}, ["fs"], set(), set()),
        ({}, ["node:fs", "./local"], set(), set()),
        ({"@s/a": "1.0.0"}, ["@s/a/deep/file"], set(), set()),
    ],
)
def test_unused_missing(declared: dict, imported: list, unused: set, missing: set) -> None:
    manifest = Manifest(Path("package.json"), runtime_deps=declared)
    assert compute_unused_missing(manifest, _records(*imported)) == (unused, missing)


def test_dev_declarations_suppress_missing_only() -> None:
    manifest = Manifest(Path("package.json"), runtime_deps={"a": "^1"}, dev_deps={"jest": "^29", "b": "^1"})
    unused, missing = compute_unused_missing(manifest, _records("jest"))
    assert unused == {"a"}
    assert missing == set()
    unused, _ = compute_unused_missing(manifest, _records("jest"), include_dev=True)
    assert unused == {"a", "b"}


class TestAnalyzeProject:
    def test_seeded_pinned_and_no_lock(self, tmp_path: Path) -> None:
        write_project(
            tmp_path,
            {"dependencies": {"a": "1.0.0", "b": "2.3.4", "c": "^1.0.0"}},
            {"index.js": "require('a'); require('b'); require('c');"},
        )
        scan = analyze_project(tmp_path)
        assert [(f.smell, f.dependency) for f in scan.findings] == [
            (Smell.S1, "a"), (Smell.S1, "b"), (Smell.S5, None),
        ]

    def test_all_smells(self, tmp_path: Path) -> None:
        write_project(
            tmp_path,
            {"dependencies": {"pin": "1.0.0", "gitdep": "github:u/r", "tight": "~1.2.3",
                              "loose": ">=1.0.0", "idle": "^1.0.0"}},
            {"src/a.js": "require('pin'); require('gitdep'); require('tight'); require('loose');\n"
                         "import x from 'ghost';\nimport y from 'ghost/sub';"},
        )
        scan = analyze_project(tmp_path)
        got = [(f.smell.value, f.dependency, f.evidence) for f in scan.findings]
        assert got == [
            ("S1", "pin", "dependencies[pin] is Pinned"),
            ("S2", "gitdep", "dependencies[gitdep] is Url (scheme=github)"),
            ("S3", "tight", "dependencies[tight] is Restrictive"),
            ("S4", "loose", "dependencies[loose] is Permissive"),
            ("S5", None, "no package-lock.json, npm-shrinkwrap.json, yarn.lock in project root"),
            ("S6", "idle", "declared in dependencies but never imported"),
            ("S7", "ghost", "src/a.js:2 (+1 more)"),
        ]

    def test_invariants(self, tmp_path: Path) -> None:
        write_project(
            tmp_path,
            {"dependencies": {"a": "1.0.0", "b": "~1.0.0", "c": "*"}},
            {"x.js": "require('a'); require('d'); require('fs')"},
            lockfile="yarn.lock",
        )
        scan = analyze_project(tmp_path)
        assert not scan.unused & scan.missing
        assert scan.unused <= set(scan.manifest.runtime_deps)
        per_dep = [f.dependency for f in scan.findings if f.smell in (Smell.S1, Smell.S2, Smell.S3, Smell.S4)]
        assert len(per_dep) == len(set(per_dep))
        assert all(f.dependency for f in scan.findings if f.smell is not Smell.S5)

    def test_idempotent(self, tmp_path: Path) -> None:
        write_project(tmp_path, {"dependencies": {"a": "1.0.0"}}, {"x.js": "require('b')"})
        assert analyze_project(tmp_path).findings == analyze_project(tmp_path, jobs=3).findings

    def test_unparseable_and_tag_become_diagnostics(self, tmp_path: Path) -> None:
        write_project(tmp_path, {"dependencies": {"t": "latest", "u": ">=1, <2"}},
                      {"x.js": "require('t'); require('u')"}, lockfile="package-lock.json")
        scan = analyze_project(tmp_path)
        assert scan.findings == []
        assert len(scan.diagnostics) == 2

    def test_include_dev(self, tmp_path: Path) -> None:
        write_project(tmp_path, {"dependencies": {"a": "^1.0.0"}, "devDependencies": {"jest": "29.0.0"}},
                      {"x.js": "require('a')"}, lockfile="package-lock.json")
        assert analyze_project(tmp_path).findings == []
        smells = [(f.smell, f.dependency) for f in analyze_project(tmp_path, include_dev=True).findings]
        assert smells == [(Smell.S1, "jest"), (Smell.S6, "jest")]
