"""Inflectional lexicon: surface forms mapped to tag/lemma/frequency triples.

The lexicon answers three questions for the annotation stages: which
morphosyntactic tags a form may take (:meth:`Lexicon.allowed_tags`), which
lemma belongs to a (form, tag) pair (:meth:`Lexicon.lookup_lemma`), and
whether a form is a listed member of a closed word class
(:meth:`Lexicon.in_closed_class`).  Closed classes are recognized through a
per-language table of tag prefixes following the MULTEXT-East convention of
encoding the coarse part of speech in the first characters of the tag.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass
from pathlib import Path

from .errors import LexiconError

# First-character (or two-character, for conjunction subtypes) tag prefixes
# of the closed classes.  Languages with diverging tagsets can pass their own
# table to the Lexicon constructor.
DEFAULT_CLOSED_CLASS_PREFIXES: dict[str, str] = {
    "pronoun": "P",
    "determiner": "D",
    "adposition": "S",
    "particle": "Q",
    "coordinating-conjunction": "Cc",
    "subordinating-conjunction": "Cs",
}


@dataclass(frozen=True)
class LexiconEntry:
    xpos: str
    lemma: str
    frequency: int


class Lexicon:
    def __init__(self, prefix_table: dict[str, str] | None = None):
        self._index: dict[str, dict[tuple[str, str], int]] = {}
        self.prefix_table = dict(
            DEFAULT_CLOSED_CLASS_PREFIXES if prefix_table is None else prefix_table
        )
        self._closed_index: dict[str, set[str]] = {c: set() for c in self.prefix_table}

    def __len__(self) -> int:
        return sum(len(v) for v in self._index.values())

    @property
    def form_count(self) -> int:
        return len(self._index)

    def add(self, form: str, lemma: str, xpos: str, frequency: int = 1) -> None:
        """Insert a triple; duplicate triples accumulate their frequencies."""
        slot = self._index.setdefault(form, {})
        key = (xpos, lemma)
        slot[key] = slot.get(key, 0) + frequency
        for category, prefix in self.prefix_table.items():
            if xpos.startswith(prefix):
                self._closed_index[category].add(form)

    def _slot(self, form: str) -> dict[tuple[str, str], int]:
        if form in self._index:
            return self._index[form]
        return self._index.get(form.lower(), {})

    def entries(self, form: str) -> list[LexiconEntry]:
        """Entries for a form, exact match preferred over lowercased."""
        return [
            LexiconEntry(xpos, lemma, freq)
            for (xpos, lemma), freq in sorted(self._slot(form).items())
        ]

    def allowed_tags(self, form: str) -> set[str]:
        return {xpos for xpos, _ in self._slot(form)}

    def lookup_lemma(self, form: str, xpos: str) -> str | None:
        """Lemma for (form, xpos): highest frequency wins, ties go to the
        lexicographically smallest lemma.  Absent exactly when
        :meth:`allowed_tags` does not contain ``xpos``."""
        candidates = [
            (freq, lemma)
            for (tag, lemma), freq in self._slot(form).items()
            if tag == xpos
        ]
        if not candidates:
            return None
        best_freq = max(f for f, _ in candidates)
        return min(lemma for freq, lemma in candidates if freq == best_freq)

    def most_frequent_tag(self, form: str) -> str | None:
        tags = [(freq, xpos) for (xpos, _), freq in self._slot(form).items()]
        if not tags:
            return None
        best_freq = max(f for f, _ in tags)
        return min(x for f, x in tags if f == best_freq)

    def in_closed_class(self, category: str, form: str) -> bool:
        members = self._closed_index.get(category, set())
        return form in members or form.lower() in members

    def closed_class_forms(self, category: str) -> set[str]:
        return set(self._closed_index.get(category, set()))

    # serialization into model archives

    def to_rows(self) -> list[list]:
        return [
            [form, lemma, xpos, freq]
            for form, slot in sorted(self._index.items())
            for (xpos, lemma), freq in sorted(slot.items())
        ]

    @classmethod
    def from_rows(
        cls, rows: list[list], prefix_table: dict[str, str] | None = None
    ) -> Lexicon:
        lex = cls(prefix_table)
        for form, lemma, xpos, freq in rows:
            lex.add(form, lemma, xpos, freq)
        return lex


def load_lexicon(source: str | Path, prefix_table: dict[str, str] | None = None) -> Lexicon:
    """Load a lexicon from a TSV file (``form<TAB>lemma<TAB>xpos[<TAB>freq]``).

    Gzip-compressed files are detected by their magic bytes.  Rows with fewer
    than three columns, or an unreadable frequency, raise
    :class:`~slavpipe.errors.LexiconError` naming the offending line.
    """
    path = Path(source)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc}") from exc
    if blob[:2] == b"\x1f\x8b":
        try:
            blob = gzip.decompress(blob)
        except OSError as exc:
            raise LexiconError(f"{path}: bad gzip data: {exc}") from exc
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LexiconError(f"{path}: not valid UTF-8: {exc}") from exc
    return read_lexicon(io.StringIO(text), name=str(path), prefix_table=prefix_table)


def read_lexicon(
    stream: io.TextIOBase,
    name: str = "<lexicon>",
    prefix_table: dict[str, str] | None = None,
) -> Lexicon:
    lex = Lexicon(prefix_table)
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) < 3:
            raise LexiconError(
                f"{name}: line {lineno}: expected at least 3 tab-separated "
                f"columns, found {len(cols)}"
            )
        if len(cols) > 4:
            raise LexiconError(
                f"{name}: line {lineno}: expected at most 4 columns, found {len(cols)}"
            )
        form, lemma, xpos = cols[0], cols[1], cols[2]
        frequency = 1
        if len(cols) == 4:
            try:
                frequency = int(cols[3])
            except ValueError:
                raise LexiconError(
                    f"{name}: line {lineno}: frequency {cols[3]!r} is not an integer"
                ) from None
        lex.add(form, lemma, xpos, frequency)
    return lex
