"""Lecture corpus ingestion, tokenization, statistics, and vocabulary extraction.

Lectures are plain-text files, one per lecture, with slides separated by a
form-feed character (0x0C) or a line consisting of exactly ``---``. An
optional JSON-lines manifest carries per-lecture metadata:
``{"id": ..., "path": ..., "domain": ..., "course": ..., "taxonomy_label": ...}``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

log = logging.getLogger("prereqchain.corpus")

DOMAIN_TAGS = ("NLP", "ML", "AI", "DL", "IR", "other")

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_NUMERIC_RE = re.compile(r"^[0-9]+$")
# leading enumeration/bullet clutter on slide headers: "3.", "(ii)", "1)", "-", "*"
_HEADER_PREFIX_RE = re.compile(
    r"^\s*(?:[\divxlc]+[.)]|\(\s*[\divxlc]+\s*\)|[#*•‣●\-])\s*",
    re.IGNORECASE,
)


@dataclass
class TokenizeConfig:
    min_token_len: int = 1
    drop_numeric: bool = True


@dataclass
class Document:
    id: str
    source_path: str
    domain_tag: str
    slide_texts: list[str]
    tokens: list[str]
    taxonomy_label: str | None = None
    course: str | None = None


@dataclass
class DocumentSet:
    documents: list[Document]
    provenance: str  # lecturebank | tutorialbank | combined | synthetic
    skipped: list[str] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)


@dataclass
class Vocabulary:
    terms: list[tuple[str, str]]  # (phrase, origin); origin in {taxonomy, prereq_topics, headers}

    def phrases(self) -> set[str]:
        return {p for p, _ in self.terms}


def tokenize(text: str, rules: TokenizeConfig | None = None) -> list[str]:
    """Casefold, split on non-alphanumerics, drop pure-number tokens."""
    rules = rules or TokenizeConfig()
    out = []
    for tok in _TOKEN_RE.findall(text.casefold()):
        if len(tok) < rules.min_token_len:
            continue
        if rules.drop_numeric and _NUMERIC_RE.match(tok):
            continue
        out.append(tok)
    return out


def split_slides(text: str) -> list[str]:
    """Split lecture text into slides on form-feed or a bare ``---`` line."""
    pages = []
    for chunk in text.split("\x0c"):
        current: list[str] = []
        for line in chunk.splitlines():
            if line.strip() == "---":
                pages.append("\n".join(current))
                current = []
            else:
                current.append(line)
        pages.append("\n".join(current))
    return [p for p in pages if p.strip()]


def _read_lecture(path: Path, doc_id: str, domain: str, course: str | None,
                  taxonomy_label: str | None, rules: TokenizeConfig) -> Document:
    text = path.read_text(encoding="utf-8")
    slides = split_slides(text)
    tokens = tokenize("\n".join(slides), rules)
    return Document(id=doc_id, source_path=str(path), domain_tag=domain,
                    slide_texts=slides, tokens=tokens,
                    taxonomy_label=taxonomy_label, course=course)


def _domain_from_path(path: Path, root: Path) -> str:
    for part in path.relative_to(root).parts[:-1]:
        if part.upper() in DOMAIN_TAGS[:-1]:
            return part.upper()
    return "other"


def ingest_documents(source: str | Path, provenance: str = "lecturebank",
                     rules: TokenizeConfig | None = None) -> DocumentSet:
    """Build a DocumentSet from a manifest file or a directory of .txt lectures.

    A directory containing ``manifest.jsonl`` is read through the manifest;
    otherwise every ``*.txt`` under it becomes one lecture, with the domain
    taken from a path component when it names a known domain. Unreadable
    files are skipped with a warning and recorded in ``skipped``.
    """
    rules = rules or TokenizeConfig()
    source = Path(source)
    docs: list[Document] = []
    skipped: list[str] = []

    if source.is_file() and source.suffix == ".jsonl":
        manifest, root = source, source.parent
    elif source.is_dir() and (source / "manifest.jsonl").exists():
        manifest, root = source / "manifest.jsonl", source
    elif source.is_dir():
        manifest, root = None, source
    else:
        raise FileNotFoundError(f"corpus source {source} does not exist")

    if manifest is not None:
        for line_no, line in enumerate(manifest.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            entry = json.loads(line)
            path = root / entry["path"]
            try:
                docs.append(_read_lecture(
                    path, str(entry.get("id", entry["path"])),
                    entry.get("domain", "other"), entry.get("course"),
                    entry.get("taxonomy_label"), rules))
            except OSError as exc:
                log.warning("skipping %s (line %d): %s", path, line_no, exc)
                skipped.append(str(path))
    else:
        for path in sorted(root.rglob("*.txt")):
            try:
                docs.append(_read_lecture(
                    path, str(path.relative_to(root).with_suffix("")),
                    _domain_from_path(path, root), None, None, rules))
            except OSError as exc:
                log.warning("skipping %s: %s", path, exc)
                skipped.append(str(path))

    if not docs:
        raise ValueError(f"no readable lectures found under {source}")
    return DocumentSet(documents=docs, provenance=provenance, skipped=skipped)


def save_document_set(docset: DocumentSet, path: str | Path) -> None:
    """Write an ingested corpus to one JSON artifact."""
    payload = {
        "provenance": docset.provenance,
        "skipped": docset.skipped,
        "documents": [asdict(doc) for doc in docset.documents],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_document_set(path: str | Path) -> DocumentSet:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    docs = [Document(**entry) for entry in payload["documents"]]
    return DocumentSet(documents=docs, provenance=payload["provenance"],
                       skipped=payload.get("skipped", []))


def corpus_stats(docset: DocumentSet) -> list[dict]:
    """Per-domain rows plus an Overall row: courses, lectures, slides,
    tokens, tokens/lecture, tokens/slide."""
    if not docset.documents:
        raise ValueError("empty document set")
    domains: dict[str, list[Document]] = {}
    for doc in docset.documents:
        domains.setdefault(doc.domain_tag, []).append(doc)

    def row(name: str, docs: list[Document]) -> dict:
        courses = {d.course for d in docs if d.course}
        n_slides = sum(len(d.slide_texts) for d in docs)
        n_tokens = sum(len(d.tokens) for d in docs)
        return {
            "domain": name,
            "courses": len(courses),
            "lectures": len(docs),
            "slides": n_slides,
            "tokens": n_tokens,
            "tokens_per_lecture": n_tokens / len(docs),
            "tokens_per_slide": n_tokens / n_slides if n_slides else 0.0,
        }

    rows = [row(name, docs) for name, docs in sorted(domains.items())]
    rows.append(row("Overall", docset.documents))
    return rows


def clean_header(line: str, max_words: int = 8) -> str | None:
    """Normalize one slide header; None when it should be dropped."""
    header = _HEADER_PREFIX_RE.sub("", line.strip())
    header = re.sub(r"\s+", " ", header).strip().casefold()
    header = header.strip(" .:;,")
    if not header or _NUMERIC_RE.match(header.replace(" ", "")):
        return None
    if len(header.split()) > max_words:
        return None
    return header


def extract_vocabulary(docset: DocumentSet, taxonomy: list[str],
                       prereq_topics: list[str], max_header_words: int = 8) -> Vocabulary:
    """Union of taxonomy topics, prerequisite topics, and filtered slide
    headers (header = first non-empty line of each slide)."""
    terms: list[tuple[str, str]] = []
    seen: set[str] = set()

    def add(phrase: str, origin: str):
        key = phrase.casefold().strip()
        if key and key not in seen:
            seen.add(key)
            terms.append((key, origin))

    for phrase in taxonomy:
        add(phrase, "taxonomy")
    for phrase in prereq_topics:
        add(phrase, "prereq_topics")
    for doc in docset.documents:
        for slide in doc.slide_texts:
            for line in slide.splitlines():
                if line.strip():
                    header = clean_header(line, max_header_words)
                    if header:
                        add(header, "headers")
                    break
    return Vocabulary(terms=terms)
