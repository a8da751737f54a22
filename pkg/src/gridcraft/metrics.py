"""Builder-track scores, normalized Hamming distance, BLEU and keyword P/R.

Builder scores over N evaluation episodes: the reward score is the mean
episode return, the success score the fraction of episodes that ended
with the structure completed, and the completion rate the mean of
(1 - rho) where rho is the normalized Hamming distance between built and
target structures.

Text metrics are corpus-level by default. Tokenization is fixed

    lowercase, then split on everything outside [a-z0-9]

so scores are reproducible bit-for-bit across implementations.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources

from .errors import EmptyCorpus, EmptyInput, ValidationError
from .matching import build_score_table
from .voxel import VoxelGrid

# ---------------------------------------------------------------------------
# builder track

def reward_score(returns) -> float:
    """Mean episode return, S_r."""
    returns = list(returns)
    if not returns:
        raise EmptyInput("reward_score needs at least one episode")
    return float(sum(returns) / len(returns))


def success_score(successes) -> float:
    """Fraction of completely solved episodes, S_s."""
    successes = list(successes)
    if not successes:
        raise EmptyInput("success_score needs at least one episode")
    return float(sum(1 for s in successes if s) / len(successes))


def completion_rate(rhos) -> float:
    """Mean of (1 - rho), S_c."""
    rhos = list(rhos)
    if not rhos:
        raise EmptyInput("completion_rate needs at least one episode")
    for r in rhos:
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"rho {r} outside [0, 1]")
    return float(sum(1.0 - r for r in rhos) / len(rhos))


def normalized_hamming(built: VoxelGrid, target: VoxelGrid) -> float:
    """Normalized Hamming distance rho in [0, 1] under the best alignment.

    The built grid is aligned to the target with the placement that
    maximizes the match count and, among those, maximizes the occupancy
    overlap (which minimizes the disagreement count; this keeps rho
    symmetric in its arguments). With M matches and O overlapping
    occupied cells at that placement, the disagreeing cells number
    D = nonair(built) + nonair(target) - O - M over a union of
    U = nonair(built) + nonair(target) - O occupied cells, and
    rho = D / U. Two empty grids have rho = 0; an empty build against a
    non-empty target has rho = 1.
    """
    n_built = built.nonair()
    n_target = target.nonair()
    if n_built == 0 and n_target == 0:
        return 0.0
    match = build_score_table(built.cells, target.cells, color_sensitive=True)
    overlap = build_score_table(built.cells, target.cells, color_sensitive=False)
    score = int(match.max())
    best_overlap = int(overlap[match == score].max())
    union = n_built + n_target - best_overlap
    return float(union - score) / float(union)


@dataclass(frozen=True)
class BuilderScores:
    s_r: float
    s_s: float
    s_c: float
    n: int

    def as_dict(self) -> dict:
        return {"S_r": self.s_r, "S_s": self.s_s, "S_c": self.s_c, "N": self.n}


def builder_scores(returns, successes, rhos) -> BuilderScores:
    returns, successes, rhos = list(returns), list(successes), list(rhos)
    if not (len(returns) == len(successes) == len(rhos)):
        raise ValueError("score inputs must cover the same episodes")
    return BuilderScores(
        s_r=reward_score(returns),
        s_s=success_score(successes),
        s_c=completion_rate(rhos),
        n=len(returns),
    )


# ---------------------------------------------------------------------------
# tokenization / lexicon

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on whitespace and punctuation."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class KeywordLexicon:
    colors: frozenset[str]
    spatial: frozenset[str]
    dialog: frozenset[str]

    def __post_init__(self):
        for name, words in self.categories().items():
            if not words:
                raise ValidationError(f"lexicon category {name!r} is empty")
        if self.colors & self.spatial or self.colors & self.dialog or self.spatial & self.dialog:
            raise ValidationError("lexicon categories must be disjoint")

    def categories(self) -> dict[str, frozenset[str]]:
        return {"colors": self.colors, "spatial": self.spatial, "dialog": self.dialog}

    def words(self, category: str) -> frozenset[str]:
        if category == "all":
            return self.colors | self.spatial | self.dialog
        try:
            return self.categories()[category]
        except KeyError:
            raise ValueError(f"unknown keyword category {category!r}") from None

    @classmethod
    def from_dict(cls, data: dict) -> "KeywordLexicon":
        norm = {k: frozenset(w.lower() for w in data[k]) for k in ("colors", "spatial", "dialog")}
        return cls(**norm)

    @classmethod
    def from_file(cls, path) -> "KeywordLexicon":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def default(cls) -> "KeywordLexicon":
        data = json.loads(resources.files("gridcraft").joinpath("data/lexicon.json").read_text())
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# BLEU

def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _as_token_lists(corpus) -> list[list[str]]:
    out = []
    for entry in corpus:
        if isinstance(entry, str):
            out.append(tokenize(entry))
        else:
            out.append([str(t) for t in entry])
    return out


def bleu(candidates, references, n: int = 4, sentence_level: bool = False) -> float:
    """Corpus BLEU-n: clipped n-gram precision with a brevity penalty.

    ``candidates`` and ``references`` are equal-length lists of sentences
    (strings, tokenized with :func:`tokenize`, or pre-tokenized lists).
    Per pair, candidate n-gram counts are clipped by the reference counts;
    precisions use uniform 1/n weights for orders 1..n. With
    ``sentence_level=True`` the mean of per-pair BLEU is returned instead
    of the pooled corpus score.
    """
    if not 1 <= n <= 4:
        raise ValueError("n must be in 1..4")
    cands = _as_token_lists(candidates)
    refs = _as_token_lists(references)
    if len(cands) != len(refs):
        raise ValueError("candidate and reference lists must pair up")
    if not cands:
        raise EmptyCorpus("bleu needs at least one sentence pair")
    if sentence_level:
        return sum(bleu([c], [r], n) for c, r in zip(cands, refs)) / len(cands)

    clipped = [0] * n
    totals = [0] * n
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(cands, refs):
        cand_len += len(cand)
        ref_len += len(ref)
        for order in range(1, n + 1):
            counts = _ngram_counts(cand, order)
            if not counts:
                continue
            ref_counts = _ngram_counts(ref, order)
            totals[order - 1] += sum(counts.values())
            clipped[order - 1] += sum(min(c, ref_counts[g]) for g, c in counts.items())
    if cand_len == 0:
        return 0.0
    if any(t == 0 or c == 0 for c, t in zip(clipped, totals)):
        return 0.0
    log_sum = sum(math.log(c / t) for c, t in zip(clipped, totals)) / n
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_sum)


def bleu_scores(candidates, references, sentence_level: bool = False) -> tuple[float, float, float, float]:
    """BLEU-1 through BLEU-4."""
    return tuple(bleu(candidates, references, n, sentence_level) for n in range(1, 5))


# ---------------------------------------------------------------------------
# keyword precision / recall

@dataclass(frozen=True)
class KeywordPR:
    precision: float
    recall: float
    precision_defined: bool   # False when no keyword occurred in the candidates
    recall_defined: bool      # False when no keyword occurred in the references

    def as_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "precision_defined": self.precision_defined,
                "recall_defined": self.recall_defined}


def keyword_pr(candidates, references, lexicon: KeywordLexicon | None = None,
               category: str = "all") -> KeywordPR:
    """Corpus precision/recall of category keywords, clipped per pair.

    Matched keyword occurrences are candidate counts clipped by reference
    counts, summed over the corpus. Precision divides by keyword tokens in
    the candidates, recall by keyword tokens in the references; a zero
    denominator reports 0.0 with the corresponding defined-flag false.
    """
    lexicon = lexicon or KeywordLexicon.default()
    words = lexicon.words(category)
    cands = _as_token_lists(candidates)
    refs = _as_token_lists(references)
    if len(cands) != len(refs):
        raise ValueError("candidate and reference lists must pair up")
    if not cands:
        raise EmptyCorpus("keyword_pr needs at least one sentence pair")
    matched = 0
    cand_total = 0
    ref_total = 0
    for cand, ref in zip(cands, refs):
        cand_kw = Counter(t for t in cand if t in words)
        ref_kw = Counter(t for t in ref if t in words)
        cand_total += sum(cand_kw.values())
        ref_total += sum(ref_kw.values())
        matched += sum(min(c, ref_kw[w]) for w, c in cand_kw.items())
    precision = matched / cand_total if cand_total else 0.0
    recall = matched / ref_total if ref_total else 0.0
    return KeywordPR(precision, recall, cand_total > 0, ref_total > 0)


def architect_report(candidates, references, lexicon: KeywordLexicon | None = None,
                     sentence_level: bool = False) -> dict:
    """The architect-track score table: BLEU-1..4 plus the keyword P/R grid."""
    lexicon = lexicon or KeywordLexicon.default()
    b1, b2, b3, b4 = bleu_scores(candidates, references, sentence_level)
    report = {"bleu": {"bleu_1": b1, "bleu_2": b2, "bleu_3": b3, "bleu_4": b4},
              "keywords": {}}
    for category in ("all", "colors", "spatial", "dialog"):
        report["keywords"][category] = keyword_pr(candidates, references, lexicon, category).as_dict()
    return report
