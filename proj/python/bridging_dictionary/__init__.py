from ._bridging import (
    Index,
    Lexicon,
    analyze,
    cluster,
    embed,
    log_odds_z,
    ngrams,
    normalize,
    project_2d,
    tokenize,
)

__all__ = [
    "Index",
    "Lexicon",
    "analyze",
    "cluster",
    "embed",
    "log_odds_z",
    "ngrams",
    "normalize",
    "project_2d",
    "tokenize",
]
