"""Tokenizing, noun filtering, lemmatizing and synonym expansion from a lexicon file.

Lexicon format (UTF-8, ``#`` comments)::

    [LEMMAS]
    team<TAB>teams
    [NOUNS]
    team
    [SYNONYMS]
    team<TAB>squad,group
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import ConfigurationError, FormatError

NOUN_SUFFIXES = ("tion", "ment", "ness", "ity", "ism", "ware")
ENV_LEXICON = "LVQ_LEXICON"

_WORD = re.compile(r"[^\W\d_]+")
_VOWELS = set("aeiou")


def tokenize(text: str) -> list[str]:
    """Lowercased runs of letters, at least two characters long."""
    return [w for w in (m.group().lower() for m in _WORD.finditer(text)) if len(w) >= 2]


@dataclass(frozen=True)
class Lexicon:
    lemma_map: Mapping[str, str]
    noun_set: frozenset
    synonym_map: Mapping[str, frozenset]

    def knows(self, word: str) -> bool:
        return word in self.lemma_map or word in self.noun_set or word in self.synonym_map

    def lemma(self, word: str) -> str:
        """Lexicon lookup, falling back to suffix rules applied to a fixed point."""
        word = word.lower()
        seen = set()
        while word not in seen:
            seen.add(word)
            if word in self.lemma_map:
                return self.lemma_map[word]
            stem = self._strip(word)
            if stem == word:
                return word
            word = stem
        return word

    def _strip(self, w):
        if len(w) <= 3:
            return w
        if w.endswith("ies") and len(w) > 4:
            return w[:-3] + "y"
        if w.endswith(("sses", "shes", "ches", "xes", "zes")):
            return w[:-2]
        if w.endswith("s") and not w.endswith(("ss", "us", "is")):
            return w[:-1]
        for suffix in ("ing", "ed"):
            if w.endswith(suffix):
                stem = w[: -len(suffix)]
                if len(stem) < 3 or not (set(stem) & _VOWELS):
                    return w
                if self.knows(stem):
                    return stem
                if self.knows(stem + "e"):
                    return stem + "e"
                if len(stem) >= 4 and stem[-1] == stem[-2] and stem[-1] not in "lsz" \
                        and stem[-1] not in _VOWELS:
                    return stem[:-1]
                if len(stem) <= 4 and stem[-1] not in _VOWELS and stem[-2] in _VOWELS \
                        and stem[-3] not in _VOWELS and stem[-1] not in "wxy":
                    return stem + "e"
                return stem
        return w

    def is_noun(self, word: str) -> bool:
        lemma = self.lemma(word)
        if lemma in self.noun_set:
            return True
        if self.knows(word) or self.knows(lemma):
            return False
        return word.endswith(NOUN_SUFFIXES)


def parse_lexicon(text: str) -> Lexicon:
    lemma_map: dict = {}
    nouns: set = set()
    synonyms: dict = {}
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().upper()
            if section not in ("LEMMAS", "NOUNS", "SYNONYMS"):
                raise FormatError(f"unknown lexicon section {section!r}", line=number)
            continue
        if section is None:
            raise FormatError("entry before any section header", line=number)
        head, _, rest = (p.strip() for p in line.replace("\t", " ", 1).partition(" "))
        head = head.lower()
        items = [w.strip().lower() for w in rest.split(",") if w.strip()]
        if section == "LEMMAS":
            lemma_map.setdefault(head, head)
            for w in items:
                if lemma_map.get(w, head) != head:
                    raise FormatError(f"{w!r} mapped to two lemmas", line=number)
                lemma_map[w] = head
        elif section == "NOUNS":
            if items:
                raise FormatError("NOUNS entries take one lemma per line", line=number)
            nouns.add(head)
        else:
            synonyms.setdefault(head, set()).update(items)

    for word, lemma in lemma_map.items():
        if lemma_map.get(lemma, lemma) != lemma:
            raise FormatError(f"lemma {lemma!r} of {word!r} is itself inflected")
    for term in nouns | set(synonyms) | {s for v in synonyms.values() for s in v}:
        if lemma_map.get(term, term) != term:
            raise FormatError(f"{term!r} is used as a lemma but maps to {lemma_map[term]!r}")
    closed: dict = {}
    for head, items in synonyms.items():
        for s in items:
            if s == head:
                continue
            closed.setdefault(head, set()).add(s)
            closed.setdefault(s, set()).add(head)
    for head, items in closed.items():
        for s in items:
            if head not in closed.get(s, ()):
                raise FormatError(f"synonym closure failed for {head!r}/{s!r}")
    return Lexicon(MappingProxyType(dict(lemma_map)), frozenset(nouns),
                   MappingProxyType({k: frozenset(v) for k, v in closed.items()}))


def load_lexicon(path=None) -> Lexicon:
    """Load a lexicon file; default is $LVQ_LEXICON, then the bundled English list."""
    path = path or os.environ.get(ENV_LEXICON)
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read lexicon {path}: {exc}") from None
    else:
        text = resources.files("lvq").joinpath("data/lexicon.txt").read_text(encoding="utf-8")
    return parse_lexicon(text)


def _need(lexicon):
    if lexicon is None:
        raise ConfigurationError("no lexicon loaded")
    return lexicon


def nouns(words: Iterable[str], lexicon: Lexicon) -> list[str]:
    lexicon = _need(lexicon)
    return [w for w in words if lexicon.is_noun(w)]


def lemmatize(words: Iterable[str], lexicon: Lexicon) -> frozenset:
    lexicon = _need(lexicon)
    return frozenset(lexicon.lemma(w) for w in words if w)


def synonyms(words: Iterable[str], lexicon: Lexicon) -> frozenset:
    """Lemmas of the inputs plus every listed synonym of those lemmas."""
    lexicon = _need(lexicon)
    out = set()
    for lemma in lemmatize(words, lexicon):
        out.add(lemma)
        out.update(lexicon.synonym_map.get(lemma, ()))
    return frozenset(out)


def important_statement_terms(important, lexicon: Lexicon) -> frozenset:
    """LEM(N(lines) | SYN(N(lines))) over every selected line of every slide.

    ``important`` is one ImportantText or an iterable of them.
    """
    lexicon = _need(lexicon)
    if hasattr(important, "lines"):
        important = [important]
    found = []
    for imp in important:
        for text, _ in imp.lines:
            found.extend(nouns(tokenize(text), lexicon))
    return lemmatize(set(found) | synonyms(found, lexicon), lexicon)
