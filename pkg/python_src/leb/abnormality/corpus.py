"""Data structures and methods for representing labeled sentence corpora.

A corpus file is UTF-8 text with LF line endings and one record per line in the format
`label<TAB>text`. Labels are the ASCII digits `0` (normal) and `1` (abnormal). Every sentence is
one document.

Cleaning removes markup tags, emoji and redundant whitespace. The emoji definition is the list of
code point ranges in `EMOJI_RANGES`; a zero width joiner is only removed when it glues two emoji
together so that ZWJ sequences inside Bengali words survive.

"""
from dataclasses import dataclass
from enum import IntEnum
import hashlib
import logging
import math
from pathlib import Path
import re
from typing import Iterable, Iterator, Self
import unicodedata

import numpy as np


logger = logging.getLogger(__name__)


class Label(IntEnum):
    NORMAL = 0
    ABNORMAL = 1


EMOJI_RANGES: tuple[tuple[int, int], ...] = (
    (0x00231A, 0x00231B),  # watch, hourglass
    (0x0023E9, 0x0023F3),  # media control symbols
    (0x0023F8, 0x0023FA),
    (0x0020E3, 0x0020E3),  # combining enclosing keycap
    (0x002600, 0x0026FF),  # Miscellaneous Symbols
    (0x002700, 0x0027BF),  # Dingbats
    (0x002B00, 0x002BFF),  # Miscellaneous Symbols and Arrows
    (0x00FE0E, 0x00FE0F),  # text / emoji presentation selectors
    (0x01F000, 0x01F02F),  # Mahjong Tiles
    (0x01F0A0, 0x01F0FF),  # Playing Cards
    (0x01F100, 0x01F1FF),  # Enclosed Alphanumeric Supplement, regional indicators
    (0x01F200, 0x01F2FF),  # Enclosed Ideographic Supplement
    (0x01F300, 0x01F5FF),  # Miscellaneous Symbols and Pictographs
    (0x01F600, 0x01F64F),  # Emoticons
    (0x01F680, 0x01F6FF),  # Transport and Map Symbols
    (0x01F780, 0x01F7FF),  # Geometric Shapes Extended
    (0x01F800, 0x01F8FF),  # Supplemental Arrows-C
    (0x01F900, 0x01F9FF),  # Supplemental Symbols and Pictographs
    (0x01FA00, 0x01FA6F),  # Chess Symbols
    (0x01FA70, 0x01FAFF),  # Symbols and Pictographs Extended-A
    (0x0E0020, 0x0E007F),  # tag characters used by subdivision flags
)
"""Code point ranges (inclusive) that `clean_text` treats as emoji."""

ZWJ = "\u200d"

_EMOJI_CLASS = "[" + "".join(f"\\U{lo:08x}-\\U{hi:08x}" for lo, hi in EMOJI_RANGES) + "]"
_EMOJI_RE = re.compile(f"{_EMOJI_CLASS}(?:{ZWJ}{_EMOJI_CLASS})*")
_TAG_RE = re.compile(r"<[^<>]*>")
_WHITESPACE_RE = re.compile(r"\s+")


class CorpusError(Exception):
    """Raised when a corpus file or a corpus cannot be used for classification."""


def clean_text(raw: str) -> str:
    """Removes markup tags, emoji and redundant whitespace from a sentence.

    The result is in Unicode canonical composed form (NFC). The function is total and idempotent;
    it returns an empty string if nothing but noise remains.

    Parameters
    ----------
    raw : str
        The raw sentence.

    Returns
    -------
    str
        The cleaned sentence.

    """
    text = raw
    # Removing one tag may expose another one, e.g. "<<b>i>"
    while True:
        stripped = _TAG_RE.sub("", text)
        if stripped == text:
            break
        text = stripped

    text = _EMOJI_RE.sub("", text)
    text = _WHITESPACE_RE.sub(" ", text).strip()

    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Document:
    """One labeled sentence.

    Attributes
    ----------
    id : int
        Ordinal index of the record in its source file.
    text : str
        The cleaned sentence.
    label : int
        0 for normal, 1 for abnormal.

    """

    id: int
    text: str
    label: int

    def __post_init__(self):
        if self.label not in (Label.NORMAL, Label.ABNORMAL):
            raise ValueError(f"Document labels must be 0 or 1. Actual label: {self.label}")
        if not self.text:
            raise ValueError(f"Document {self.id} is empty.")


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of labeled documents.

    Attributes
    ----------
    documents : tuple[Document, ...]
        The documents, in file order. Their ids are 0..n-1.
    source : str
        Where the corpus came from, usually a file path.

    """

    documents: tuple[Document, ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        for position, doc in enumerate(self.documents):
            if doc.id != position:
                raise ValueError(
                    f"Document ids must be 0..n-1 without gaps. Document at position {position} "
                    f"has id {doc.id}"
                )

    def __len__(self):
        return len(self.documents)

    def __getitem__(self, idx: int) -> Document:
        return self.documents[idx]

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @classmethod
    def from_records(cls, records: Iterable[tuple[int, str]], source: str = "") -> Self:
        """Builds a corpus from (label, raw text) pairs, cleaning each text."""
        documents = []
        for i, (label, raw) in enumerate(records):
            documents.append(Document(id=i, text=clean_text(raw), label=int(label)))
        return cls(tuple(documents), source=source)

    @property
    def labels(self) -> np.ndarray:
        return np.array([doc.label for doc in self.documents], dtype=np.int64)

    def label_counts(self) -> tuple[int, int]:
        """Returns the number of normal and abnormal documents."""
        n_abnormal = int(np.sum(self.labels == Label.ABNORMAL))
        return len(self) - n_abnormal, n_abnormal

    def check_both_classes(self) -> None:
        """Raises a CorpusError unless both labels occur in the corpus."""
        if len(self) == 0 or 0 in self.label_counts():
            raise CorpusError("corpus must contain both classes")

    def subset(self, ids: Iterable[int]) -> list[Document]:
        """Returns the documents with the given ids in ascending id order."""
        return [self.documents[i] for i in sorted(ids)]

    def to_tsv(self) -> str:
        return "".join(f"{doc.label}\t{doc.text}\n" for doc in self.documents)

    def fingerprint(self) -> str:
        """SHA-256 hex digest of the cleaned corpus in its file format."""
        return hashlib.sha256(self.to_tsv().encode("utf-8")).hexdigest()

    def save(self, file_path: Path) -> None:
        """Save the cleaned corpus in the `label<TAB>text` format.

        Parameters
        ----------
        file_path : Path
            The path to save the corpus to.

        """
        with Path(file_path).open("w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_tsv())


def load_corpus(file_path: Path) -> Corpus:
    """Load and clean a labeled corpus file.

    Parameters
    ----------
    file_path : Path
        The path to a UTF-8 file with one `label<TAB>text` record per line.

    Returns
    -------
    Corpus
        The cleaned corpus in file order.

    Raises
    ------
    CorpusError
        If the file is empty, a line is malformed, a label is not 0 or 1, or a document is empty
        after cleaning. Line numbers start at 1.

    """
    file_path = Path(file_path)
    try:
        with file_path.open("r", encoding="utf-8", newline="") as f:
            content = f.read()
    except UnicodeDecodeError as err:
        raise CorpusError(f"{file_path} is not valid UTF-8: {err}") from err

    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusError("empty corpus")

    documents = []
    for line_num, line in enumerate(lines, start=1):
        line = line.removesuffix("\r")
        label_str, sep, raw = line.partition("\t")
        if not sep:
            raise CorpusError(f"missing tab at line {line_num}")
        if label_str not in ("0", "1"):
            raise CorpusError(f"invalid label at line {line_num}")

        text = clean_text(raw)
        if not text:
            raise CorpusError(f"empty document at line {line_num}")

        documents.append(Document(id=len(documents), text=text, label=int(label_str)))

    corpus = Corpus(tuple(documents), source=str(file_path))
    n_normal, n_abnormal = corpus.label_counts()
    logger.info(
        "Loaded %d documents from %s (%d normal, %d abnormal).",
        len(corpus),
        file_path,
        n_normal,
        n_abnormal,
    )

    return corpus


@dataclass(frozen=True)
class Split:
    """A partition of corpus ids into a training and a test side.

    Attributes
    ----------
    train_ids : frozenset[int]
        Ids of the training documents.
    test_ids : frozenset[int]
        Ids of the test documents.
    seed : int
        The seed of the PCG64 generator that produced the split.
    train_fraction : float
        The requested share of training documents.

    """

    train_ids: frozenset[int]
    test_ids: frozenset[int]
    seed: int
    train_fraction: float

    def __post_init__(self):
        if self.train_ids & self.test_ids:
            raise ValueError("The train and test ids of a split must be disjoint.")


def num_train(n: int, train_fraction: float) -> int:
    """round(train_fraction * n) with halves rounded up."""
    return int(math.floor(train_fraction * n + 0.5))


def split_corpus(
    corpus: Corpus, train_fraction: float = 0.7, seed: int = 42, stratify: bool = False
) -> Split:
    """Randomly split a corpus into a training and a test side.

    The ids are shuffled by a `numpy.random.Generator` backed by the PCG64 bit generator, which is
    stable across platforms and numpy versions, and the first `round(train_fraction * n)` ids
    become the training side.

    Parameters
    ----------
    corpus : Corpus
        The corpus to split.
    train_fraction : float
        The share of training documents, strictly between 0 and 1.
    seed : int
        A non-negative seed for the shuffle.
    stratify : bool
        If True, shuffle each class separately and allocate training slots per class by largest
        remainder so that both sides keep the class ratio. The total training size is unchanged.

    Returns
    -------
    Split
        The split.

    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"The train fraction must lie in (0, 1). Actual value: {train_fraction}")
    if len(corpus) == 0:
        raise CorpusError("empty corpus")
    if seed < 0:
        raise ValueError(f"The seed must be non-negative. Actual value: {seed}")

    n = len(corpus)
    n_train = num_train(n, train_fraction)
    rng = np.random.Generator(np.random.PCG64(seed))

    if not stratify:
        order = rng.permutation(n)
        train = order[:n_train]
        test = order[n_train:]
    else:
        labels = corpus.labels
        classes = [np.flatnonzero(labels == c) for c in (Label.NORMAL, Label.ABNORMAL)]
        quotas = [train_fraction * len(members) for members in classes]
        alloc = [int(math.floor(q)) for q in quotas]
        # Hand out the remaining slots by largest fractional part, lower label first on ties
        remainders = sorted(range(len(classes)), key=lambda c: (-(quotas[c] - alloc[c]), c))
        for c in remainders[: n_train - sum(alloc)]:
            alloc[c] += 1

        train, test = [], []
        for members, k in zip(classes, alloc):
            shuffled = rng.permutation(members)
            train.extend(shuffled[:k])
            test.extend(shuffled[k:])

    return Split(
        train_ids=frozenset(int(i) for i in train),
        test_ids=frozenset(int(i) for i in test),
        seed=seed,
        train_fraction=train_fraction,
    )
