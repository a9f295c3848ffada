"""Stop word list handling.

The repo ships a versioned English stop list; callers may substitute their
own file (one word per line, UTF-8).
"""

from importlib import resources
from pathlib import Path


def load_stopwords(path=None) -> frozenset:
    """Read a stop list file; with no path, the packaged default."""
    if path is None:
        text = resources.files("ontotopics.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


DEFAULT_STOPWORDS = load_stopwords()
