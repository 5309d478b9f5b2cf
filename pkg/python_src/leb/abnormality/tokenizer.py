"""Word tokenization for cleaned Bengali and mixed-script sentences.

The text is segmented into extended grapheme clusters first. A cluster separates tokens if its
base character is whitespace or one of the `SEPARATORS`; a token is a maximal run of the other
clusters. Combining marks, vowel signs, viramas, nuktas and joiners always belong to the cluster
of their base character, so a token boundary never falls inside a cluster. A mark that follows a
separator goes with the separator.

"""
from itertools import groupby
import string
import unicodedata

import regex


TokenSeq = tuple[str, ...]

DANDA = "।"
DOUBLE_DANDA = "॥"

SEPARATORS: frozenset[str] = frozenset(
    string.punctuation
    + DANDA
    + DOUBLE_DANDA
    + "‘’“”"  # curly quotes
    + "–—…"  # en dash, em dash, ellipsis
    + "«»¡¿"  # guillemets, inverted marks
)
"""Punctuation that separates tokens in addition to Unicode whitespace."""

_CLUSTER_RE = regex.compile(r"\X")
_LATIN_RE = regex.compile(r"\p{Latin}+")


def _is_separator(cluster: str) -> bool:
    base = cluster[0]
    if base.isspace() or base in SEPARATORS:
        return True
    # A cluster without a base character can only start the text; it is dropped
    return unicodedata.category(base) in ("Mn", "Mc", "Me", "Cf")


def _fold_latin(token: str) -> str:
    return _LATIN_RE.sub(lambda m: m.group().lower(), token)


def tokenize(text: str) -> TokenSeq:
    """Splits a cleaned sentence into word tokens.

    Latin letters are lowercased. Every other script passes through unchanged, as do digits and
    the non-Latin part of mixed-script tokens. No stemming and no stop-word removal take place.

    Parameters
    ----------
    text : str
        A sentence cleaned with `leb.abnormality.corpus.clean_text`.

    Returns
    -------
    TokenSeq
        The tokens in order of appearance. Empty input gives an empty tuple.

    """
    clusters = _CLUSTER_RE.findall(text)
    return tuple(
        _fold_latin("".join(run))
        for separator, run in groupby(clusters, key=_is_separator)
        if not separator
    )
