"""Report quality scoring: METEOR, Likert grade aggregation, weighted final.

The METEOR here is the classic two-stage variant (exact then stemmed
unigram matching, optional user-supplied synonym table), harmonic
precision/recall mean weighted toward recall, and a fragmentation penalty
driven by the number of contiguous aligned chunks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .agent import DiagnosisReport
from .exceptions import ValidationError

AMATEUR = "amateur"
EXPERT = "expert"
ROLES = (AMATEUR, EXPERT)

# Final score weights: amateur mean, expert mean, 5x the normalized METEOR.
WEIGHT_AMATEUR = 0.2
WEIGHT_EXPERT = 0.6
WEIGHT_METEOR = 0.2


@dataclass(frozen=True)
class Grade:
    rater_id: str
    role: str
    score: int

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"role must be one of {ROLES}, got {self.role!r}")
        if not isinstance(self.score, int) or isinstance(self.score, bool):
            raise ValidationError(f"score must be an integer, got {self.score!r}")
        if not 1 <= self.score <= 5:
            raise ValidationError(f"score must be in [1,5], got {self.score}")


@dataclass
class GradeSheet:
    grades: list[Grade]
    meteor: float

    def __post_init__(self):
        if not 0.0 <= self.meteor <= 1.0:
            raise ValidationError(f"meteor must be in [0,1], got {self.meteor}")


@dataclass
class MeteorParams:
    fmean_precision_weight: float = 9.0
    penalty_gamma: float = 0.5
    penalty_power: float = 3.0
    enable_stemming: bool = True
    synonym_table: dict[str, set[str]] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("fmean_precision_weight", "penalty_gamma", "penalty_power"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, keep digits."""
    return re.findall(r"[a-z0-9]+", text.lower())


def stem(word: str) -> str:
    """Small deterministic suffix stripper.

    Rules, applied top to bottom (a rule fires at most once, stems never
    shrink below 3 characters): sses->ss, ies->y, s-> (not ss/us),
    then ing->, ed->, ly->, then a trailing e is dropped from stems of 5+.
    """
    w = word
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies") and len(w) > 3:
        w = w[:-3] + "y"
    elif w.endswith("s") and not w.endswith(("ss", "us")) and len(w) > 3:
        w = w[:-1]
    for suffix in ("ing", "ed", "ly"):
        if w.endswith(suffix) and len(w) - len(suffix) >= 3:
            w = w[: -len(suffix)]
            break
    if w.endswith("e") and len(w) >= 5:
        w = w[:-1]
    return w


def _chunk_count(pairs: list[tuple[int, int]]) -> int:
    if not pairs:
        return 0
    pairs = sorted(pairs)
    chunks = 1
    for (i1, j1), (i2, j2) in zip(pairs, pairs[1:]):
        if not (i2 == i1 + 1 and j2 == j1 + 1):
            chunks += 1
    return chunks


def _max_matching(free_h, free_r, adjacency) -> dict[int, int]:
    """Kuhn's augmenting-path maximum bipartite matching (deterministic)."""
    match_r: dict[int, int] = {}

    def try_assign(i, visited):
        for j in adjacency.get(i, ()):
            if j in visited:
                continue
            visited.add(j)
            if j not in match_r or try_assign(match_r[j], visited):
                match_r[j] = i
                return True
        return False

    for i in free_h:
        try_assign(i, set())
    return {i: j for j, i in match_r.items()}


def _align(hyp: list[str], ref: list[str], params: MeteorParams):
    """Stage-wise alignment: maximize matches per stage, then reduce chunks."""

    def exact_rel(h, r):
        return h == r

    def stem_rel(h, r):
        return stem(h) == stem(r)

    table = params.synonym_table

    def syn_rel(h, r):
        return r in table.get(h, ()) or h in table.get(r, ())

    relations = [exact_rel]
    if params.enable_stemming:
        relations.append(stem_rel)
    if table:
        relations.append(syn_rel)

    match_of: dict[int, int] = {}
    used_r: set[int] = set()
    for rel in relations:
        free_h = [i for i in range(len(hyp)) if i not in match_of]
        free_r = [j for j in range(len(ref)) if j not in used_r]
        adjacency = {
            i: [j for j in free_r if rel(hyp[i], ref[j])] for i in free_h
        }
        stage = _max_matching(free_h, free_r, adjacency)
        match_of.update(stage)
        used_r.update(stage.values())

    def valid(i, j):
        return any(rel(hyp[i], ref[j]) for rel in relations)

    # Bounded swap passes: trade partners when that joins runs together.
    for _ in range(2):
        pairs = sorted(match_of.items())
        improved = False
        for a in range(len(pairs)):
            for b in range(a + 1, len(pairs)):
                (i1, j1), (i2, j2) = pairs[a], pairs[b]
                if not (valid(i1, j2) and valid(i2, j1)):
                    continue
                before = _chunk_count(pairs)
                swapped = list(pairs)
                swapped[a], swapped[b] = (i1, j2), (i2, j1)
                if _chunk_count(swapped) < before:
                    pairs = sorted(swapped)
                    improved = True
        if improved:
            match_of = dict(pairs)
        else:
            break
    return sorted(match_of.items())


def meteor(
    hypothesis: str, reference: str, params: MeteorParams | None = None
) -> float:
    """Unigram-alignment score in [0,1]; 1 is textual identity up to penalty."""
    params = params or MeteorParams()
    hyp = tokenize(hypothesis)
    ref = tokenize(reference)
    if not hyp and not ref:
        return 1.0
    if not hyp or not ref:
        return 0.0

    pairs = _align(hyp, ref, params)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(hyp)
    recall = m / len(ref)
    w = params.fmean_precision_weight
    fmean = (1.0 + w) * precision * recall / (recall + w * precision)
    chunks = _chunk_count(pairs)
    penalty = params.penalty_gamma * (chunks / m) ** params.penalty_power
    return fmean * (1.0 - penalty)


# ---------------------------------------------------------------------------
# Likert aggregation and the weighted final score
# ---------------------------------------------------------------------------

def aggregate_likert(grades: list[Grade]) -> tuple[float, float]:
    """Arithmetic mean per rater role; both roles must be represented."""
    by_role: dict[str, list[int]] = {role: [] for role in ROLES}
    for g in grades:
        by_role[g.role].append(g.score)
    for role in ROLES:
        if not by_role[role]:
            raise ValidationError(f"no grades for role {role!r}")
    return (
        sum(by_role[AMATEUR]) / len(by_role[AMATEUR]),
        sum(by_role[EXPERT]) / len(by_role[EXPERT]),
    )


def final_score(s_amateur: float, s_expert: float, meteor_value: float) -> float:
    for name, value in (("s_amateur", s_amateur), ("s_expert", s_expert)):
        if not 1.0 <= value <= 5.0:
            raise ValidationError(f"{name} must be in [1,5], got {value}")
    if not 0.0 <= meteor_value <= 1.0:
        raise ValidationError(f"meteor must be in [0,1], got {meteor_value}")
    return (
        WEIGHT_AMATEUR * s_amateur
        + WEIGHT_EXPERT * s_expert
        + WEIGHT_METEOR * 5.0 * meteor_value
    )


def final_display(value: float) -> str:
    return f"{value:.2f}"


def report_text_for_scoring(report: DiagnosisReport) -> str:
    """Concatenated section bodies, headers excluded."""
    return " ".join(
        [report.preliminary_diagnosis, report.justification, report.follow_up]
    )


def score_case(
    report: DiagnosisReport,
    reference: str,
    grades: list[Grade],
    params: MeteorParams | None = None,
) -> tuple[GradeSheet, float]:
    if not reference.strip():
        raise ValidationError("reference text must be non-empty")
    if not grades:
        raise ValidationError("no grades supplied (protocol incomplete)")
    m = meteor(report_text_for_scoring(report), reference, params)
    s_amateur, s_expert = aggregate_likert(grades)
    sheet = GradeSheet(grades=list(grades), meteor=m)
    return sheet, final_score(s_amateur, s_expert, m)
