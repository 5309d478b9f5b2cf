"""Simulation of a labeled Bengali abnormality corpus."""
from typing import Optional

import numpy as np
from numpy.random import PCG64, Generator

from leb.abnormality.corpus import Corpus, Label


# Words that mostly occur in everyday, normal sentences
NORMAL_WORDS = (
    "বাজারে",
    "গেলাম",
    "ভালো",
    "বই",
    "পড়ছি",
    "বন্ধুদের",
    "সাথে",
    "খেলা",
    "দেখলাম",
    "সকালে",
    "চা",
    "খেয়েছি",
    "পরিবার",
    "আনন্দ",
    "গান",
    "শুনছি",
    "স্কুলে",
    "পড়াশোনা",
    "রান্না",
    "বাগানে",
    "ফুল",
    "ফুটেছে",
    "বেড়াতে",
    "উৎসব",
    "হাসি",
    "সুন্দর",
    "আকাশ",
    "বৃষ্টি",
    "ছুটি",
    "মজা",
)

# Words that mostly occur in sentences expressing an abnormal state of mind
ABNORMAL_WORDS = (
    "মরে",
    "যেতে",
    "আত্মহত্যা",
    "ভালোবাসে",
    "একা",
    "কষ্ট",
    "হতাশ",
    "শেষ",
    "দেব",
    "ঘৃণা",
    "রাগ",
    "মারব",
    "ভয়",
    "অন্ধকার",
    "ঘুম",
    "কান্না",
    "বাঁচতে",
    "ইচ্ছে",
    "নেই",
    "যন্ত্রণা",
    "অসহ্য",
    "মূল্যহীন",
    "বিষণ্ণ",
    "পালাতে",
    "চিৎকার",
    "ধ্বংস",
    "অভিশাপ",
    "শূন্য",
    "ক্লান্ত",
    "ব্যর্থ",
)

SHARED_WORDS = (
    "আমি",
    "আজ",
    "খুব",
    "মনে",
    "হচ্ছে",
    "সব",
    "জীবন",
    "মানুষ",
    "আর",
    "কেন",
    "আমার",
    "তুমি",
    "কাল",
    "রাতে",
    "করছি",
)

LATIN_WORDS = ("ok", "life", "bro", "lol", "why", "feeling", "really", "today")

DECORATIONS = ("।", "!", "?", " 😊", " 😢", " <br>", "...", "")

# Probability that a token is drawn from the own class, the other class, the shared and the
# Latin-script pool
POOL_PROBS = (0.5, 0.1, 0.3, 0.1)

MIN_TOKENS = 4
MAX_TOKENS = 10


def _sentence(label: int, rng: Generator) -> str:
    own, other = (
        (NORMAL_WORDS, ABNORMAL_WORDS) if label == Label.NORMAL else (ABNORMAL_WORDS, NORMAL_WORDS)
    )
    pools = (own, other, SHARED_WORDS, LATIN_WORDS)

    num_tokens = int(rng.integers(MIN_TOKENS, MAX_TOKENS + 1))
    choices = rng.choice(len(pools), size=num_tokens, p=POOL_PROBS)
    words = [pools[c][int(rng.integers(len(pools[c])))] for c in choices]

    return " ".join(words) + DECORATIONS[int(rng.integers(len(DECORATIONS)))]


def corpus_simulation(
    num_sentences: int = 2000,
    abnormal_fraction: float = 0.407,
    seed: Optional[int] = 42,
) -> Corpus:
    """Generate a synthetic labeled corpus.

    Sentences are bags of words drawn from two class-specific Bengali word pools that partially
    overlap through a shared pool and a small Latin-script pool. Some sentences end in a danda,
    an emoji or an HTML tag so that the cleaning step has something to do. The default abnormal
    fraction is 814 / 2000.

    Parameters
    ----------
    num_sentences : int
        The number of sentences.
    abnormal_fraction : float
        The share of abnormal sentences, rounded to the nearest count.
    seed : Optional[int]
        Seed of the PCG64 generator.

    Returns
    -------
    Corpus
        The cleaned corpus.

    """
    if num_sentences < 2:
        raise ValueError(f"At least 2 sentences are required. Actual: {num_sentences}")
    if not 0 < abnormal_fraction < 1:
        raise ValueError(f"abnormal_fraction must lie in (0, 1). Actual: {abnormal_fraction}")

    rng = Generator(PCG64(seed))

    num_abnormal = min(max(round(abnormal_fraction * num_sentences), 1), num_sentences - 1)
    labels = np.zeros(num_sentences, dtype=np.int64)
    labels[:num_abnormal] = Label.ABNORMAL
    labels = rng.permutation(labels)

    records = [(int(label), _sentence(int(label), rng)) for label in labels]

    return Corpus.from_records(records, source="simulation")


if __name__ == "__main__":
    import sys

    corpus_simulation().save(sys.argv[1] if len(sys.argv) > 1 else "simulated_corpus.tsv")
