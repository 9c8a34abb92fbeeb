"""LaTeX manuscript trees to normalized (abstract, body) plaintext pairs.

The pipeline per manuscript is: collate multi-file sources into one LaTeX
string, split out the abstract and the document body, convert each span to
unicode plaintext, and whitespace/case-normalize the result. Conversion is
best effort: it never raises on malformed LaTeX, it degrades to a crude
strip with a logged warning.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

log = logging.getLogger(__name__)

# Placeholder tokens keep citations/refs/math/URLs from polluting the
# trigram vocabulary while still marking that something was disclosed there.
CITATION_TOKEN = "\u27e8cit\u27e9"
REFERENCE_TOKEN = "\u27e8ref\u27e9"
EQUATION_TOKEN = "\u27e8eqn\u27e9"
URL_TOKEN = "\u27e8url\u27e9"


class IngestError(Exception):
    """Base error for corpus ingestion failures."""


class CyclicIncludeError(IngestError):
    """Raised when the \\input/\\insert graph of a manuscript has a cycle."""


class MissingDocumentError(IngestError):
    """Raised when a collated source has no document environment."""


@dataclass(frozen=True)
class RawManuscript:
    """One manuscript: a map of relative path -> LaTeX source, plus its root file."""

    id: str
    files: Mapping[str, str]
    main_file: str

    def __post_init__(self):
        if not self.files:
            raise IngestError(f"{self.id}: manuscript has no files")
        if self.main_file not in self.files:
            raise IngestError(f"{self.id}: main file {self.main_file!r} not among files")


@dataclass(frozen=True)
class DocumentPair:
    """A short description (abstract) and the full document it summarizes.

    Both texts are normalized: lowercase, single-space separated, no
    tab/newline characters, and non-empty.
    """

    id: str
    abstract_text: str
    body_text: str
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name, text in (("abstract_text", self.abstract_text), ("body_text", self.body_text)):
            if not text:
                raise IngestError(f"{self.id}: {name} is empty")
            if text != normalize(text):
                raise IngestError(f"{self.id}: {name} is not normalized")


# --------------------------------------------------------------------------
# collation
# --------------------------------------------------------------------------

_INCLUDE_RE = re.compile(r"\\(?:input|insert)\s*\{([^}]*)\}")


def strip_comments(tex: str) -> str:
    """Remove unescaped %-comments (the newline itself is kept)."""
    out = []
    i, n = 0, len(tex)
    while i < n:
        c = tex[i]
        if c == "\\" and i + 1 < n:
            out.append(tex[i : i + 2])
            i += 2
        elif c == "%":
            j = tex.find("\n", i)
            i = n if j < 0 else j
        else:
            out.append(c)
            i += 1
    return "".join(out)


def collate_manuscript(m: RawManuscript) -> str:
    """Inline every \\input{...}/\\insert{...} recursively, starting at main_file.

    Comments are stripped before resolution so commented-out includes are
    ignored. Unresolvable includes become the empty string with a warning;
    a cyclic include graph raises CyclicIncludeError naming the cycle.
    """

    def resolve(name: str) -> str | None:
        for candidate in (name, name + ".tex"):
            if candidate in m.files:
                return candidate
        return None

    def render(path: str, stack: tuple[str, ...]) -> str:
        if path in stack:
            cycle = " -> ".join(stack[stack.index(path) :] + (path,))
            raise CyclicIncludeError(f"{m.id}: cyclic include graph: {cycle}")
        text = strip_comments(m.files[path])

        def repl(match: re.Match) -> str:
            target = resolve(match.group(1).strip())
            if target is None:
                log.warning("%s: unresolved include %r in %s", m.id, match.group(1), path)
                return ""
            return render(target, stack + (path,))

        return _INCLUDE_RE.sub(repl, text)

    return render(m.main_file, ())


# --------------------------------------------------------------------------
# abstract / body split
# --------------------------------------------------------------------------

def _match_group(tex: str, i: int) -> int | None:
    """Index one past the brace group opening at tex[i] == '{', or None."""
    depth = 0
    n = len(tex)
    while i < n:
        c = tex[i]
        if c == "\\":
            i += 2
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return None


def split_abstract_body(tex: str) -> tuple[str, str]:
    """Split collated LaTeX into (abstract LaTeX, body LaTeX).

    The body is the document-environment content with the abstract span
    removed. Supports both the abstract environment and the \\abstract{...}
    command form. A missing abstract yields ("", body) with a warning.
    """
    mdoc = re.search(r"\\begin\{document\}", tex)
    mend = re.search(r"\\end\{document\}", tex)
    if not mdoc or not mend or mend.start() < mdoc.end():
        raise MissingDocumentError("no document environment")
    doc_start, doc_end = mdoc.end(), mend.start()

    span = None
    abstract = ""
    menv = re.search(r"\\begin\{abstract\}(.*?)\\end\{abstract\}", tex, re.S)
    if menv:
        abstract = menv.group(1)
        span = menv.span()
    else:
        mcmd = re.search(r"\\abstract\s*\{", tex)
        if mcmd:
            end = _match_group(tex, mcmd.end() - 1)
            if end is not None:
                abstract = tex[mcmd.end() : end - 1]
                span = (mcmd.start(), end)

    if span is None:
        log.warning("no abstract environment found")
        return "", tex[doc_start:doc_end]

    cut0, cut1 = max(span[0], doc_start), min(span[1], doc_end)
    if cut0 < cut1:
        body = tex[doc_start:cut0] + tex[cut1:doc_end]
    else:
        body = tex[doc_start:doc_end]
    return abstract, body


# --------------------------------------------------------------------------
# LaTeX -> unicode text
# --------------------------------------------------------------------------

# \X escapes protected through the pipeline as private-use sentinels.
_ESCAPE_SENTINELS = {
    "\\%": "\ue000",
    "\\$": "\ue001",
    "\\&": "\ue002",
    "\\#": "\ue003",
    "\\_": "\ue004",
    "\\{": "\ue005",
    "\\}": "\ue006",
}
_SENTINEL_CHARS = {s: e[1] for e, s in _ESCAPE_SENTINELS.items()}

_DISPLAY_ENVS = (
    "equation",
    "align",
    "alignat",
    "flalign",
    "gather",
    "multline",
    "eqnarray",
    "displaymath",
)
_DISPLAY_ENV_RE = re.compile(
    r"\\begin\{(" + "|".join(_DISPLAY_ENVS) + r")\*?\}.*?\\end\{\1\*?\}", re.S
)

# combining mark per accent command
_ACCENTS = {
    "`": "\u0300",
    "'": "\u0301",
    "^": "\u0302",
    "~": "\u0303",
    '"': "\u0308",
    "=": "\u0304",
    ".": "\u0307",
    "u": "\u0306",
    "v": "\u030c",
    "H": "\u030b",
    "r": "\u030a",
    "c": "\u0327",
    "k": "\u0328",
    "b": "\u0331",
    "d": "\u0323",
}
_SYM_ACCENT_RE = re.compile(r"\\([`'^~\"=.])\s*(?:\{\s*\\?([a-zA-Z])\s*\}|\\?([a-zA-Z]))")
_LTR_ACCENT_RE = re.compile(r"\\([uvHrckbd])(?![a-zA-Z])(?:\s*\{\s*\\?([a-zA-Z])\s*\}|\s+\\?([a-zA-Z]))")

_NAMED_SYMBOLS = {
    "ss": "\u00df",
    "ae": "\u00e6",
    "AE": "\u00c6",
    "oe": "\u0153",
    "OE": "\u0152",
    "aa": "\u00e5",
    "AA": "\u00c5",
    "o": "\u00f8",
    "O": "\u00d8",
    "l": "\u0142",
    "L": "\u0141",
    "i": "i",
    "j": "j",
    "ldots": "...",
    "dots": "...",
    "dag": "\u2020",
    "S": "\u00a7",
    "P": "\u00b6",
    "copyright": "\u00a9",
}
_NAMED_SYMBOL_RE = re.compile(
    r"\\(" + "|".join(sorted(_NAMED_SYMBOLS, key=len, reverse=True)) + r")(?![a-zA-Z])\s*(?:\{\})?"
)

# commands whose braced arguments are metadata, not prose
_DROP_WITH_ARGS = {
    "label": 1,
    "includegraphics": 1,
    "bibliography": 1,
    "bibliographystyle": 1,
    "usepackage": 1,
    "documentclass": 1,
    "RequirePackage": 1,
    "vspace": 1,
    "hspace": 1,
    "setlength": 2,
    "addtolength": 2,
    "setcounter": 2,
    "graphicspath": 1,
    "pagestyle": 1,
    "thispagestyle": 1,
    "bibitem": 1,
    "hypersetup": 1,
    "definecolor": 3,
    "numberwithin": 2,
    "newtheorem": 2,
    "cmidrule": 1,
    "input": 1,
    "insert": 1,
    "vskip": 0,
    "hskip": 0,
}
_DEFINITION_COMMANDS = ("newcommand", "renewcommand", "providecommand", "DeclareMathOperator", "newenvironment", "renewenvironment", "def")

# environments whose \begin takes mandatory brace groups we must swallow
_ENV_ARG_GROUPS = {
    "tabular": 1,
    "tabularx": 2,
    "tabulary": 2,
    "array": 1,
    "minipage": 1,
    "wrapfigure": 2,
    "multicols": 1,
    "list": 2,
}

_URL_CMD_RE = re.compile(r"\\url\s*\{([^}]*)\}")
_HREF_RE = re.compile(r"\\href\s*\{[^}]*\}\s*\{([^}]*)\}")
_BARE_URL_RE = re.compile(r"https?://[^\s{}]+")
_CITE_RE = re.compile(r"\\[Cc]ite[a-zA-Z]*\*?\s*(?:\[[^\]]*\]\s*)*\{[^}]*\}")
_REF_RE = re.compile(r"\\(?:ref|autoref|eqref|pageref|cref|Cref|vref|nameref)\*?\s*\{[^}]*\}")
_GENERIC_CMD_RE = re.compile(r"\\[a-zA-Z]+\*?")
_MATH_CMD_RE = re.compile(r"\\[a-zA-Z]+\*?|\\\\")


def _strip_math_commands(math: str) -> str:
    # inline math keeps its literal characters, minus backslash commands
    return _MATH_CMD_RE.sub(" ", math)


def _skip_optional_args(text: str, i: int) -> int:
    while i < len(text) and text[i] == "[":
        j = text.find("]", i)
        if j < 0:
            return i
        i = j + 1
        while i < len(text) and text[i] in " \t":
            i += 1
    return i


def _drop_command_args(text: str) -> str:
    """Remove drop-listed commands together with their argument groups."""
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        m = re.match(r"\\([a-zA-Z]+)\*?", text[i:])
        if not m:
            out.append(c)
            i += 1
            continue
        name = m.group(1)
        j = i + m.end()
        if name in _DEFINITION_COMMANDS:
            k = _skip_optional_args(text, _skip_ws(text, j))
            # command being (re)defined: {\cmd} or \cmd
            k = _skip_ws(text, k)
            if k < n and text[k] == "{":
                end = _match_group(text, k)
                k = end if end is not None else k + 1
            elif k + 1 < n and text[k] == "\\":
                k += 2
                while k < n and text[k].isalpha():
                    k += 1
            k = _skip_optional_args(text, _skip_ws(text, k))
            bodies = 2 if name.endswith("environment") else 1
            for _ in range(bodies):
                k = _skip_ws(text, k)
                if k < n and text[k] == "{":
                    end = _match_group(text, k)
                    if end is None:
                        break
                    k = end
            i = k
            continue
        if name in _DROP_WITH_ARGS:
            k = _skip_optional_args(text, _skip_ws(text, j))
            for _ in range(_DROP_WITH_ARGS[name]):
                k = _skip_ws(text, k)
                if k < n and text[k] == "{":
                    end = _match_group(text, k)
                    if end is None:
                        break
                    k = end
            out.append(" ")
            i = k
            continue
        out.append(text[i:j])
        i = j
    return "".join(out)


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\n\r":
        i += 1
    return i


def _strip_environment_tags(text: str) -> str:
    out = []
    i, n = 0, len(text)
    begin_re = re.compile(r"\\(begin|end)\s*\{([a-zA-Z*]+)\}")
    while i < n:
        if text[i] != "\\":
            out.append(text[i])
            i += 1
            continue
        m = begin_re.match(text, i)
        if not m:
            out.append(text[i])
            i += 1
            continue
        j = m.end()
        if m.group(1) == "begin":
            env = m.group(2).rstrip("*")
            j = _skip_optional_args(text, _skip_ws(text, j))
            for _ in range(_ENV_ARG_GROUPS.get(env, 0)):
                j = _skip_ws(text, j)
                if j < n and text[j] == "{":
                    end = _match_group(text, j)
                    if end is None:
                        break
                    j = end
        out.append(" ")
        i = j
    return "".join(out)


def _apply_accents(text: str) -> str:
    def sym_repl(m: re.Match) -> str:
        base = m.group(2) or m.group(3)
        return unicodedata.normalize("NFC", base + _ACCENTS[m.group(1)])

    text = _SYM_ACCENT_RE.sub(sym_repl, text)
    text = _LTR_ACCENT_RE.sub(sym_repl, text)
    return text


def _convert(tex: str) -> str:
    text = strip_comments(tex)
    for esc, sentinel in _ESCAPE_SENTINELS.items():
        text = text.replace(esc, sentinel)

    # math: display forms become a placeholder, inline math keeps its chars
    text = _DISPLAY_ENV_RE.sub(f" {EQUATION_TOKEN} ", text)
    text = re.sub(r"\$\$.*?\$\$", f" {EQUATION_TOKEN} ", text, flags=re.S)
    text = re.sub(r"\\\[.*?\\\]", f" {EQUATION_TOKEN} ", text, flags=re.S)
    text = re.sub(r"\$([^$]*)\$", lambda m: _strip_math_commands(m.group(1)), text, flags=re.S)
    text = re.sub(r"\\\((.*?)\\\)", lambda m: _strip_math_commands(m.group(1)), text, flags=re.S)

    text = _HREF_RE.sub(r"\1", text)
    text = _URL_CMD_RE.sub(f" {URL_TOKEN} ", text)
    text = _BARE_URL_RE.sub(URL_TOKEN, text)
    text = _CITE_RE.sub(CITATION_TOKEN, text)
    text = _REF_RE.sub(REFERENCE_TOKEN, text)

    text = _apply_accents(text)
    text = _NAMED_SYMBOL_RE.sub(lambda m: _NAMED_SYMBOLS[m.group(1)], text)

    text = _drop_command_args(text)
    text = _strip_environment_tags(text)
    text = _GENERIC_CMD_RE.sub(" ", text)

    text = re.sub(r"\\\\(\[[^\]]*\])?", " ", text)
    text = re.sub(r"\\[,;:! ]", " ", text)
    text = text.replace("\\", "")
    text = text.replace("~", " ")
    text = text.replace("``", '"').replace("''", '"').replace("`", "'")
    text = re.sub(r"-{2,}", "-", text)
    text = re.sub(r"[{}&$]", " ", text)
    # brace stripping leaves stray spaces around punctuation; tidy them
    text = re.sub(r"[ \t]+([.,;:!?)\]])", r"\1", text)
    text = re.sub(r"([(\[])[ \t]+", r"\1", text)

    for sentinel, char in _SENTINEL_CHARS.items():
        text = text.replace(sentinel, char)
    return unicodedata.normalize("NFC", text)


def latex_to_plaintext(tex: str) -> str:
    """Convert LaTeX source to unicode plaintext.

    Formatting commands are stripped (their argument text is kept), accents
    become their unicode characters, citations/refs/URLs/display math become
    placeholder tokens, and inline math keeps its literal characters. Never
    raises: malformed input degrades to a crude strip with a warning.
    """
    try:
        return _convert(tex)
    except Exception:  # pragma: no cover - defensive fallback
        log.warning("LaTeX conversion failed, falling back to crude strip", exc_info=True)
        crude = re.sub(r"\\[a-zA-Z]+\*?", " ", tex)
        return re.sub(r"[{}\\$%&#_^~]", " ", crude)


def _fold_uppercase_symbol(ch: str) -> str:
    # math-alphanumeric and similar letterlike symbols have no lowercase
    # mapping; fold the compatibility form, drop the handful that resist
    folded = unicodedata.normalize("NFKC", ch).lower()
    if len(folded) == 1 and not folded.isupper():
        return folded
    return ""


def normalize(text: str) -> str:
    """Lowercase and collapse all whitespace runs to single spaces."""
    # U+0130 is the one codepoint whose lower() expands; fold it by hand so
    # normalization never grows the text.
    text = text.replace("\u0130", "i").lower()
    if any(c.isupper() for c in text):
        text = "".join(_fold_uppercase_symbol(c) if c.isupper() else c for c in text)
    return " ".join(text.split())


# --------------------------------------------------------------------------
# tree ingestion
# --------------------------------------------------------------------------

def _read_text(path: Path) -> str:
    data = path.read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        log.warning("%s: not valid UTF-8, falling back to Latin-1", path)
        return data.decode("latin-1")


def _find_main(manuscript_id: str, files: Mapping[str, str]) -> str:
    candidates = [name for name, text in files.items() if "\\begin{document}" in text]
    if not candidates:
        raise IngestError(f"{manuscript_id}: no file contains a document environment")
    if len(candidates) > 1:
        preferred = [c for c in candidates if Path(c).name == "main.tex"]
        chosen = preferred[0] if preferred else sorted(candidates)[0]
        log.warning("%s: multiple document roots %s, using %s", manuscript_id, sorted(candidates), chosen)
        return chosen
    return candidates[0]


def load_manuscript(dirpath: Path) -> RawManuscript:
    files = {
        p.relative_to(dirpath).as_posix(): _read_text(p)
        for p in sorted(dirpath.rglob("*.tex"))
    }
    if not files:
        raise IngestError(f"{dirpath.name}: no .tex files")
    return RawManuscript(id=dirpath.name, files=files, main_file=_find_main(dirpath.name, files))


def _load_meta(dirpath: Path) -> dict[str, str]:
    meta_path = dirpath / "meta.json"
    if not meta_path.is_file():
        return {}
    try:
        raw = json.loads(meta_path.read_text(encoding="utf-8"))
        return {str(k): str(v) for k, v in raw.items()}
    except (json.JSONDecodeError, AttributeError):
        log.warning("%s: unreadable meta.json ignored", dirpath.name)
        return {}


def process_manuscript(m: RawManuscript, meta: Mapping[str, str] | None = None) -> DocumentPair:
    tex = collate_manuscript(m)
    abstract_tex, body_tex = split_abstract_body(tex)
    abstract = normalize(latex_to_plaintext(abstract_tex))
    body = normalize(latex_to_plaintext(body_tex))
    return DocumentPair(id=m.id, abstract_text=abstract, body_text=body, meta=dict(meta or {}))


def ingest_tree(
    root: str | Path,
    exclusions: Iterable[str] = (),
    jobs: int = 1,
) -> Iterator[DocumentPair]:
    """Yield a DocumentPair per manuscript subdirectory of root, in sorted id order.

    Manuscripts named in `exclusions` are skipped. Per-manuscript failures
    are logged and skipped; they never abort the stream.
    """
    root = Path(root)
    if not root.is_dir():
        raise IngestError(f"not a readable directory: {root}")
    excluded = set(exclusions)
    dirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    work = [p for p in dirs if p.name not in excluded]
    for p in dirs:
        if p.name in excluded:
            log.info("excluding manuscript %s", p.name)

    def one(dirpath: Path) -> DocumentPair | None:
        try:
            return process_manuscript(load_manuscript(dirpath), _load_meta(dirpath))
        except IngestError as exc:
            log.warning("skipping manuscript %s: %s", dirpath.name, exc)
            return None

    if jobs <= 1:
        results: Iterable[DocumentPair | None] = map(one, work)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, work))
    for pair in results:
        if pair is not None:
            yield pair


def read_exclusions(path: str | Path) -> set[str]:
    out = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.add(line)
    return out


def write_pairs_jsonl(pairs: Iterable[DocumentPair], path: str | Path) -> int:
    """Write pairs as UTF-8 JSONL; returns the number of records written."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            record = {
                "id": pair.id,
                "abstract": pair.abstract_text,
                "body": pair.body_text,
                "meta": dict(sorted(pair.meta.items())),
            }
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
            n += 1
    return n


def load_pairs_jsonl(path: str | Path) -> list[DocumentPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            pairs.append(
                DocumentPair(
                    id=rec["id"],
                    abstract_text=rec["abstract"],
                    body_text=rec["body"],
                    meta=rec.get("meta", {}),
                )
            )
    return pairs
