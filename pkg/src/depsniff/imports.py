"""Lexical extraction of module specifiers from JavaScript sources.

A small tokenizer strips comments, strings, template literals and regular
expression literals so that only real ``require``/``import``/``export``
sites are reported.  No AST is built; the matcher looks at short token
windows around the keywords.
"""

from __future__ import annotations

import enum
import fnmatch
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

DEFAULT_EXTENSIONS = (".js", ".jsx", ".mjs", ".cjs")
SKIPPED_DIRS = frozenset({"node_modules"})


class ImportForm(str, enum.Enum):
    REQUIRE_CALL = "require-call"
    STATIC_IMPORT = "static-import"
    DYNAMIC_IMPORT = "dynamic-import"
    EXPORT_FROM = "export-from"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class ImportRecord:
    file: str
    line: int
    specifier: str
    form: ImportForm


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------


class Token(NamedTuple):
    kind: str  # name | string | template | number | regex | punct
    value: str
    line: int


_REGEX_AFTER_NAMES = frozenset({
    "return", "typeof", "instanceof", "in", "of", "new", "delete", "void",
    "throw", "case", "do", "else", "yield", "await",
})
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "v": "\v", "0": "\0"}


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def _regex_allowed(prev: Token | None) -> bool:
    if prev is None:
        return True
    if prev.kind == "punct":
        return prev.value not in ")]}"
    if prev.kind == "name":
        return prev.value in _REGEX_AFTER_NAMES
    return False


def tokenize(source: str) -> list[Token]:
    """Split JavaScript source into significant tokens (comments dropped).

    Template literals with substitutions yield a ``template`` token followed
    by the tokens of each embedded expression.  A template without
    substitutions is reported as a plain ``string`` token.
    """
    tokens: list[Token] = []
    i, n, line = 0, len(source), 1
    depth = 0
    template_depths: list[int] = []

    def scan_template(i: int, line: int, resumed: bool) -> tuple[int, int]:
        # i points just after the opening backtick (or the closing brace of
        # a substitution); returns position after the template chunk
        start_line = line
        chars: list[str] = []
        while i < n:
            ch = source[i]
            if ch == "\\" and i + 1 < n:
                chars.append(source[i + 1])
                line += source[i + 1] == "\n"
                i += 2
                continue
            if ch == "`":
                tokens.append(Token("template" if resumed else "string", "".join(chars), start_line))
                return i + 1, line
            if ch == "$" and source.startswith("${", i):
                tokens.append(Token("template", "".join(chars), start_line))
                template_depths.append(depth)
                return i + 2, line
            if ch == "\n":
                line += 1
            chars.append(ch)
            i += 1
        tokens.append(Token("template", "".join(chars), start_line))
        return i, line

    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch.isspace():
            i += 1
        elif source.startswith("//", i):
            end = source.find("\n", i)
            i = n if end == -1 else end
        elif source.startswith("/*", i):
            end = source.find("*/", i + 2)
            end = n if end == -1 else end + 2
            line += source.count("\n", i, end)
            i = end
        elif ch in "'\"":
            start_line = line
            chars = []
            i += 1
            while i < n and source[i] != ch and source[i] != "\n":
                if source[i] == "\\" and i + 1 < n:
                    nxt = source[i + 1]
                    if nxt == "\n":
                        line += 1
                    else:
                        chars.append(_ESCAPES.get(nxt, nxt))
                    i += 2
                    continue
                chars.append(source[i])
                i += 1
            i += 1
            tokens.append(Token("string", "".join(chars), start_line))
        elif ch == "`":
            i, line = scan_template(i + 1, line, resumed=False)
        elif ch == "}" and template_depths and template_depths[-1] == depth:
            template_depths.pop()
            i, line = scan_template(i + 1, line, resumed=True)
        elif ch == "/" and _regex_allowed(tokens[-1] if tokens else None):
            start, start_line = i, line
            i += 1
            in_class = False
            while i < n and source[i] != "\n":
                c = source[i]
                if c == "\\":
                    i += 2
                    continue
                if c == "[":
                    in_class = True
                elif c == "]":
                    in_class = False
                elif c == "/" and not in_class:
                    i += 1
                    break
                i += 1
            while i < n and _is_name_char(source[i]):
                i += 1
            tokens.append(Token("regex", source[start:i], start_line))
        elif _is_name_char(ch) and not ch.isdigit():
            start = i
            while i < n and _is_name_char(source[i]):
                i += 1
            tokens.append(Token("name", source[start:i], line))
        elif ch.isdigit():
            start = i
            while i < n and (_is_name_char(source[i]) or source[i] == "."):
                i += 1
            tokens.append(Token("number", source[start:i], line))
        else:
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
            tokens.append(Token("punct", ch, line))
            i += 1
    return tokens


# ---------------------------------------------------------------------------
# specifier matching
# ---------------------------------------------------------------------------


def _is(tok: Token | None, kind: str, value: str | None = None) -> bool:
    return tok is not None and tok.kind == kind and (value is None or tok.value == value)


def _find_from_clause(tokens: list[Token], j: int) -> Token | None:
    """Find ``from "<spec>"`` ending an import/export clause that starts at j."""
    depth = 0
    limit = min(len(tokens), j + 1000)
    while j < limit:
        tok = tokens[j]
        if _is(tok, "punct", "{"):
            depth += 1
        elif _is(tok, "punct", "}"):
            depth -= 1
            if depth < 0:
                return None
        elif depth == 0:
            if _is(tok, "name", "from") and j + 1 < len(tokens) and tokens[j + 1].kind == "string":
                return tokens[j + 1]
            if tok.kind in ("string", "template") or (tok.kind == "punct" and tok.value in ";=()"):
                return None
        j += 1
    return None


def scan_source(source: str, file: str) -> tuple[list[ImportRecord], list[str]]:
    """Extract import records from one file's text."""
    tokens = tokenize(source)
    records: list[ImportRecord] = []
    diagnostics: list[str] = []
    get = lambda k: tokens[k] if 0 <= k < len(tokens) else None  # noqa: E731

    for i, tok in enumerate(tokens):
        if tok.kind != "name" or tok.value not in ("require", "import", "export"):
            continue
        prev = get(i - 1)
        if _is(prev, "punct", ".") or _is(prev, "name", "function"):
            continue
        nxt = get(i + 1)
        if tok.value == "require" or (tok.value == "import" and _is(nxt, "punct", "(")):
            if not _is(nxt, "punct", "("):
                continue
            form = ImportForm.REQUIRE_CALL if tok.value == "require" else ImportForm.DYNAMIC_IMPORT
            arg, after = get(i + 2), get(i + 3)
            if _is(arg, "string") and (_is(after, "punct", ")") or _is(after, "punct", ",")):
                records.append(ImportRecord(file, arg.line, arg.value, form))
            else:
                diagnostics.append(f"{file}:{tok.line}: dynamic specifier in {tok.value}()")
        elif tok.value == "import":
            if _is(nxt, "punct", "."):
                continue  # import.meta
            if _is(nxt, "string"):
                records.append(ImportRecord(file, nxt.line, nxt.value, ImportForm.STATIC_IMPORT))
                continue
            spec = _find_from_clause(tokens, i + 1)
            if spec is not None:
                records.append(ImportRecord(file, spec.line, spec.value, ImportForm.STATIC_IMPORT))
        else:
            start = i + 1
            if _is(nxt, "name", "type"):
                start += 1
            head = get(start)
            if not (_is(head, "punct", "*") or _is(head, "punct", "{")):
                continue
            spec = _find_from_clause(tokens, start)
            if spec is not None:
                records.append(ImportRecord(file, spec.line, spec.value, ImportForm.EXPORT_FROM))
    return records, diagnostics


# ---------------------------------------------------------------------------
# tree walking
# ---------------------------------------------------------------------------


def _ignored(rel: str, patterns: Iterable[str]) -> bool:
    name = rel.rsplit("/", 1)[-1]
    return any(fnmatch.fnmatchcase(rel, p) or fnmatch.fnmatchcase(name, p) for p in patterns)


def iter_source_files(root: Path, extensions: Iterable[str] = DEFAULT_EXTENSIONS,
                      ignore: Iterable[str] = ()) -> list[str]:
    """Relative POSIX paths of candidate source files, sorted."""
    exts = tuple(extensions)
    ignore = tuple(ignore)
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        rel_dir = Path(dirpath).relative_to(root).as_posix()
        rel_dir = "" if rel_dir == "." else rel_dir + "/"
        dirnames[:] = sorted(
            d for d in dirnames
            if d not in SKIPPED_DIRS and not d.startswith(".") and not _ignored(rel_dir + d, ignore)
        )
        for name in filenames:
            rel = rel_dir + name
            if name.endswith(exts) and not _ignored(rel, ignore):
                found.append(rel)
    return sorted(found)


def _scan_file(root: Path, rel: str) -> tuple[list[ImportRecord], list[str]]:
    try:
        raw = (root / rel).read_bytes()
    except OSError as exc:
        return [], [f"{rel}: unreadable file skipped ({exc.strerror or exc})"]
    if b"\0" in raw:
        return [], [f"{rel}: binary file skipped"]
    return scan_source(raw.decode("utf-8", errors="replace"), rel)


def extract_imports(root: str | os.PathLike, extensions: Iterable[str] = DEFAULT_EXTENSIONS,
                    ignore: Iterable[str] = (), jobs: int = 1,
                    diagnostics: list[str] | None = None) -> list[ImportRecord]:
    """Collect every literal import specifier under ``root``.

    Diagnostics (dynamic specifiers, skipped files) are appended to
    ``diagnostics`` when a list is given.  The result is sorted, so it does
    not depend on ``jobs``.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    files = iter_source_files(root, extensions, ignore)
    if jobs > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda rel: _scan_file(root, rel), files))
    else:
        results = [_scan_file(root, rel) for rel in files]
    records: list[ImportRecord] = []
    for recs, diags in results:
        records.extend(recs)
        if diagnostics is not None:
            diagnostics.extend(diags)
    records.sort()
    return records


# ---------------------------------------------------------------------------
# specifier resolution
# ---------------------------------------------------------------------------


def load_builtins(path: str | os.PathLike | None = None) -> frozenset[str]:
    """Read a built-in module list (one name per line, ``#`` comments)."""
    if path is None:
        text = resources.files("depsniff").joinpath("data/builtins.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    names = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            names.add(line)
    return frozenset(names)


DEFAULT_BUILTINS = load_builtins()


def resolve_specifier(specifier: str, builtins: frozenset[str] = DEFAULT_BUILTINS) -> str | None:
    """Map an import specifier to the package it loads, if any.

    >>> resolve_specifier("lodash/fp")
    'lodash'
    >>> resolve_specifier("@babel/core/lib/x")
    '@babel/core'
    >>> resolve_specifier("node:fs") is None
    True
    """
    spec = specifier.strip()
    if not spec or spec.startswith((".", "/", "#")) or ":" in spec or "\\" in spec:
        return None
    parts = spec.split("/")
    if spec.startswith("@"):
        if len(parts) < 2 or len(parts[0]) < 2 or not parts[1]:
            return None
        return f"{parts[0]}/{parts[1]}"
    if spec in builtins or parts[0] in builtins:
        return None
    return parts[0]
