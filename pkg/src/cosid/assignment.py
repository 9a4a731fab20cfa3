"""Joint speaker-pair and segment-labeling search.

Segment scores against every enrolled model are memoized once in a
table; the search then only does table lookups. Because segments are
scored independently, the best labeling for a fixed model pair is the
per-segment argmax, which collapses the exponential labeling search to a
linear pass. The literal enumeration over pairs x labelings is kept as
brute_force_search, used to cross-check the fast path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gmm import SpeakerSet, sequence_log_likelihood


@dataclass(frozen=True)
class ScoreTable:
    scores: np.ndarray  # (N segments, S speakers) log-likelihoods
    segment_frame_counts: np.ndarray  # (N,) observation counts per segment

    def __post_init__(self):
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("non-finite score table entry")
        if self.scores.ndim != 2 or len(self.segment_frame_counts) != self.scores.shape[0]:
            raise ValueError("inconsistent table shape")

    @property
    def n_segments(self) -> int:
        return self.scores.shape[0]

    @property
    def n_speakers(self) -> int:
        return self.scores.shape[1]


@dataclass(frozen=True)
class AssignmentResult:
    speaker_i: int  # index into the table's speaker axis, < speaker_ii
    speaker_ii: int
    labeling: tuple  # 0 assigns a segment to speaker_i, 1 to speaker_ii
    total_log_score: float


def build_score_table(speakers: SpeakerSet, segment_observations) -> ScoreTable:
    """Score every segment under every enrolled model, once each."""
    if len(segment_observations) < 1:
        raise ValueError("need at least one segment")
    if len(speakers) < 2:
        raise ValueError("need at least two enrolled speakers")
    n, s = len(segment_observations), len(speakers)
    scores = np.empty((n, s))
    counts = np.empty(n, dtype=int)
    for i, obs in enumerate(segment_observations):
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        if obs.shape[0] == 0:
            raise ValueError(f"segment {i} has an empty observation sequence")
        counts[i] = obs.shape[0]
        for j in range(s):
            scores[i, j] = sequence_log_likelihood(speakers[j], obs)
    return ScoreTable(scores=scores, segment_frame_counts=counts)


def labeling_score(table: ScoreTable, s1: int, s2: int, labeling) -> float:
    """Total log score of a labeling, accumulated in segment order so that
    identical labelings always reproduce the identical float."""
    total = 0.0
    for i, y in enumerate(labeling):
        total += table.scores[i, s2] if y else table.scores[i, s1]
    return total


def best_labeling_for_pair(table: ScoreTable, s1: int, s2: int):
    """Optimal labeling for a fixed model pair: per-segment argmax (ties
    label 0). Returns (labeling, score)."""
    if s1 == s2:
        raise ValueError("speaker indices must differ")
    labeling = tuple(
        0 if table.scores[i, s1] >= table.scores[i, s2] else 1
        for i in range(table.n_segments)
    )
    return labeling, labeling_score(table, s1, s2, labeling)


def exhaustive_pair_search(table: ScoreTable) -> AssignmentResult:
    """Best (pair, labeling) over all unordered speaker pairs.

    Pairs are visited in lexicographic order and only a strictly better
    score displaces the incumbent, so score ties resolve to the smallest
    pair; within a pair the per-segment tie rule already favors fewer 1s.
    """
    if table.n_speakers < 2:
        raise ValueError("need at least two speakers")
    best = None
    for s1 in range(table.n_speakers):
        for s2 in range(s1 + 1, table.n_speakers):
            labeling, score = best_labeling_for_pair(table, s1, s2)
            if best is None or score > best.total_log_score:
                best = AssignmentResult(
                    speaker_i=s1, speaker_ii=s2, labeling=labeling,
                    total_log_score=score,
                )
    return best


def brute_force_search(table: ScoreTable, max_segments: int = 20) -> AssignmentResult:
    """Literal enumeration of every pair with every binary labeling.

    Exponential in the segment count, hence the guard; exists to
    cross-check exhaustive_pair_search, which must match it bit-exactly.
    """
    n = table.n_segments
    if n > max_segments:
        raise ValueError(f"{n} segments would enumerate 2^{n} labelings")
    if table.n_speakers < 2:
        raise ValueError("need at least two speakers")
    n_labelings = 1 << n
    indices = np.arange(n_labelings)
    best = None
    for s1 in range(table.n_speakers):
        for s2 in range(s1 + 1, table.n_speakers):
            # accumulate in segment order: per-labeling rounding then
            # matches labeling_score exactly
            totals = np.zeros(n_labelings)
            for i in range(n):
                chosen = np.where((indices >> i) & 1, table.scores[i, s2],
                                  table.scores[i, s1])
                totals += chosen
            idx = int(np.argmax(totals))  # first max: fewest 1s among ties
            score = float(totals[idx])
            if best is None or score > best.total_log_score:
                labeling = tuple((idx >> i) & 1 for i in range(n))
                best = AssignmentResult(
                    speaker_i=s1, speaker_ii=s2, labeling=labeling,
                    total_log_score=score,
                )
    return best


def assignment_accuracy(predicted, truth, weights=None) -> float:
    """Percent agreement between two binary labelings, weighted per
    segment and maximized over the global label swap (only the partition
    is meaningful, not which name each side got)."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.size == 0:
        raise ValueError("labelings must be nonempty and of equal length")
    w = np.ones(predicted.size) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != predicted.shape:
        raise ValueError("weights length mismatch")
    agree = float(np.sum(w * (predicted == truth)))
    total = float(np.sum(w))
    return 100.0 * max(agree, total - agree) / total
