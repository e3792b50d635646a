"""Multi-round Delphi studies: expert rankings or ratings per round,
Kendall's W concordance with tie correction, the consensus gate, and
inter-round stability tracking.

Round computation is pure; DelphiStudy serializes its own mutations, so a
single study supports one writer and many concurrent readers.
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .framework import level_to_score

CONSENSUS_THRESHOLD = 0.7
STABILITY_BOUND = 1
SOFT_ROUND_LIMIT = 3


@dataclass(frozen=True)
class ExpertSubmission:
    """One expert's input for one round: either a strict ranking
    (permutation of 1..n) or level ratings 1..5, which are converted to
    rankings by descending level with mid-rank ties."""

    expert_id: str
    round: int
    rankings: Mapping[str, int] | None = None
    ratings: Mapping[str, int] | None = None

    def __post_init__(self):
        if self.round < 1:
            raise ValidationError(f"round must be ≥ 1, got {self.round}")
        if (self.rankings is None) == (self.ratings is None):
            raise ValidationError(
                f"expert '{self.expert_id}' must submit exactly one of rankings or ratings"
            )
        if self.rankings is not None:
            n = len(self.rankings)
            if sorted(self.rankings.values()) != list(range(1, n + 1)):
                raise ValidationError(
                    f"rankings from expert '{self.expert_id}' must be a permutation of 1..{n}"
                )
        if self.ratings is not None:
            for item, level in self.ratings.items():
                level_to_score(level, criterion=item)

    @property
    def items(self) -> frozenset[str]:
        source = self.rankings if self.rankings is not None else self.ratings
        return frozenset(source)

    def effective_ranks(self) -> dict[str, float]:
        """Ranks used for concordance; mid-ranks for tied rating levels."""
        if self.rankings is not None:
            return {item: float(rank) for item, rank in self.rankings.items()}
        ordered = sorted(self.ratings.items(), key=lambda kv: (-kv[1], kv[0]))
        ranks: dict[str, float] = {}
        position = 1
        while position <= len(ordered):
            end = position
            while end < len(ordered) and ordered[end][1] == ordered[position - 1][1]:
                end += 1
            mid = (position + end) / 2.0
            for idx in range(position - 1, end):
                ranks[ordered[idx][0]] = mid
            position = end + 1
        return ranks


@dataclass(frozen=True)
class ConcordanceResult:
    w: float
    n_items: int
    n_experts: int
    tie_corrected: bool
    consensus_reached: bool
    threshold: float = CONSENSUS_THRESHOLD

    def to_json_dict(self) -> dict:
        return {
            "w": self.w,
            "n_items": self.n_items,
            "n_experts": self.n_experts,
            "tie_corrected": self.tie_corrected,
            "consensus_reached": self.consensus_reached,
            "threshold": self.threshold,
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "ConcordanceResult":
        return cls(
            w=doc["w"],
            n_items=doc["n_items"],
            n_experts=doc["n_experts"],
            tie_corrected=doc["tie_corrected"],
            consensus_reached=doc["consensus_reached"],
            threshold=doc.get("threshold", CONSENSUS_THRESHOLD),
        )


@dataclass(frozen=True)
class RoundStability:
    round_a: int
    round_b: int
    mean_rank_shift: float
    max_rank_shift: int
    stable: bool
    bound: int = STABILITY_BOUND

    def to_json_dict(self) -> dict:
        return {
            "round_a": self.round_a,
            "round_b": self.round_b,
            "mean_rank_shift": self.mean_rank_shift,
            "max_rank_shift": self.max_rank_shift,
            "stable": self.stable,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class RoundSummary:
    round: int
    concordance: ConcordanceResult
    aggregate_ranking: tuple[str, ...]
    mean_ranks: Mapping[str, float]
    further_round_required: bool
    warnings: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "round": self.round,
            "concordance": self.concordance.to_json_dict(),
            "aggregate_ranking": list(self.aggregate_ranking),
            "mean_ranks": {k: v for k, v in sorted(self.mean_ranks.items())},
            "further_round_required": self.further_round_required,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "RoundSummary":
        return cls(
            round=doc["round"],
            concordance=ConcordanceResult.from_json_dict(doc["concordance"]),
            aggregate_ranking=tuple(doc["aggregate_ranking"]),
            mean_ranks=dict(doc["mean_ranks"]),
            further_round_required=doc["further_round_required"],
            warnings=tuple(doc.get("warnings", ())),
        )


def kendalls_w(
    submissions: Sequence[ExpertSubmission],
    threshold: float = CONSENSUS_THRESHOLD,
) -> ConcordanceResult:
    """Tie-corrected Kendall coefficient of concordance.

    W = 12S / (m²(n³−n) − m·ΣT) with S the sum of squared deviations of the
    item rank sums from their mean, m experts, n items, and ΣT the
    tie-correction sum Σ(t³−t) over every expert's tie groups. A panel with
    no discrimination at all (everyone ties everything) gets W = 0.
    """
    if len(submissions) < 2:
        raise ValidationError("Kendall's W needs at least 2 experts")
    items = submissions[0].items
    if len(items) < 2:
        raise ValidationError("Kendall's W needs at least 2 items")
    for sub in submissions[1:]:
        if sub.items != items:
            raise ValidationError(
                f"expert '{sub.expert_id}' ranked a different item set than "
                f"expert '{submissions[0].expert_id}'"
            )

    m = len(submissions)
    n = len(items)
    ordered_items = sorted(items)

    rank_rows = [sub.effective_ranks() for sub in submissions]
    rank_sums = {item: sum(row[item] for row in rank_rows) for item in ordered_items}
    mean_sum = sum(rank_sums.values()) / n
    s = sum((total - mean_sum) ** 2 for total in rank_sums.values())

    tie_sum = 0.0
    tie_corrected = False
    for row in rank_rows:
        counts: dict[float, int] = {}
        for rank in row.values():
            counts[rank] = counts.get(rank, 0) + 1
        for count in counts.values():
            if count > 1:
                tie_corrected = True
                tie_sum += count**3 - count

    denominator = m * m * (n**3 - n) - m * tie_sum
    w = 0.0 if denominator <= 0 else 12.0 * s / denominator
    w = min(max(w, 0.0), 1.0)
    return ConcordanceResult(
        w=w,
        n_items=n,
        n_experts=m,
        tie_corrected=tie_corrected,
        consensus_reached=w >= threshold,
        threshold=threshold,
    )


def aggregate_ranking(submissions: Sequence[ExpertSubmission]) -> tuple[tuple[str, ...], dict[str, float]]:
    """Items ordered by ascending mean rank, ties broken by item id."""
    rank_rows = [sub.effective_ranks() for sub in submissions]
    items = sorted(submissions[0].items)
    mean_ranks = {
        item: sum(row[item] for row in rank_rows) / len(rank_rows) for item in items
    }
    ordering = tuple(sorted(items, key=lambda item: (mean_ranks[item], item)))
    return ordering, mean_ranks


def stability(
    summary_a: RoundSummary,
    summary_b: RoundSummary,
    bound: int = STABILITY_BOUND,
) -> RoundStability:
    """Rank shifts between two rounds' aggregate rankings."""
    items_a = set(summary_a.aggregate_ranking)
    items_b = set(summary_b.aggregate_ranking)
    if items_a != items_b:
        raise ValidationError(
            f"rounds {summary_a.round} and {summary_b.round} rank different item sets"
        )
    pos_a = {item: idx + 1 for idx, item in enumerate(summary_a.aggregate_ranking)}
    pos_b = {item: idx + 1 for idx, item in enumerate(summary_b.aggregate_ranking)}
    shifts = [abs(pos_a[item] - pos_b[item]) for item in items_a]
    max_shift = max(shifts)
    return RoundStability(
        round_a=summary_a.round,
        round_b=summary_b.round,
        mean_rank_shift=sum(shifts) / len(shifts),
        max_rank_shift=max_shift,
        stable=max_shift <= bound,
        bound=bound,
    )


class DelphiStudy:
    """Accumulates rounds for one study; thread-safe single writer."""

    def __init__(
        self,
        study_id: str,
        threshold: float = CONSENSUS_THRESHOLD,
        stability_bound: int = STABILITY_BOUND,
        soft_round_limit: int = SOFT_ROUND_LIMIT,
    ):
        self.study_id = study_id
        self.threshold = threshold
        self.stability_bound = stability_bound
        self.soft_round_limit = soft_round_limit
        self.rounds: list[RoundSummary] = []
        self._lock = threading.Lock()

    @classmethod
    def from_summaries(
        cls,
        study_id: str,
        summaries: Iterable[RoundSummary],
        threshold: float = CONSENSUS_THRESHOLD,
        stability_bound: int = STABILITY_BOUND,
    ) -> "DelphiStudy":
        """Rehydrate a study from persisted round summaries."""
        study = cls(study_id, threshold=threshold, stability_bound=stability_bound)
        study.rounds.extend(summaries)
        return study

    def run_round(
        self,
        submissions: Sequence[ExpertSubmission],
        round_number: int | None = None,
    ) -> RoundSummary:
        """Compute and persist the next round.

        Rejects duplicate experts by name, requires every submission to
        carry the named round, and warns (rather than refusing) past the
        typical three-round ceiling.
        """
        with self._lock:
            expected = len(self.rounds) + 1
            number = expected if round_number is None else round_number
            if number != expected:
                raise ValidationError(
                    f"study '{self.study_id}' expects round {expected}, got {number}"
                )
            seen: set[str] = set()
            for sub in submissions:
                if sub.round != number:
                    raise ValidationError(
                        f"submission from expert '{sub.expert_id}' is for round "
                        f"{sub.round}, not round {number}"
                    )
                if sub.expert_id in seen:
                    raise ValidationError(
                        f"duplicate submission from expert '{sub.expert_id}' in round {number}"
                    )
                seen.add(sub.expert_id)

            concordance = kendalls_w(submissions, threshold=self.threshold)
            ordering, mean_ranks = aggregate_ranking(submissions)
            warnings: tuple[str, ...] = ()
            if number > self.soft_round_limit:
                warnings = (
                    f"round {number} exceeds the typical {self.soft_round_limit}-round ceiling",
                )
            summary = RoundSummary(
                round=number,
                concordance=concordance,
                aggregate_ranking=ordering,
                mean_ranks=mean_ranks,
                further_round_required=not concordance.consensus_reached,
                warnings=warnings,
            )
            self.rounds.append(summary)
            return summary

    def stability_between(self, round_a: int, round_b: int) -> RoundStability:
        return stability(
            self._summary(round_a), self._summary(round_b), bound=self.stability_bound
        )

    def stability_chain(self) -> list[RoundStability]:
        return [
            stability(a, b, bound=self.stability_bound)
            for a, b in zip(self.rounds, self.rounds[1:])
        ]

    def _summary(self, round_number: int) -> RoundSummary:
        for summary in self.rounds:
            if summary.round == round_number:
                return summary
        raise ValidationError(f"study '{self.study_id}' has no round {round_number}")


def parse_submissions_csv(
    text: str, round_number: int, kind: str = "ranks"
) -> list[ExpertSubmission]:
    """Parse (expert_id, item_id, value) rows into one round's submissions.

    kind="ranks" treats values as rank positions; kind="ratings" treats them
    as levels 1..5 to be converted by the mid-rank rule.
    """
    if kind not in ("ranks", "ratings"):
        raise ValidationError(f"kind must be 'ranks' or 'ratings', got {kind!r}")
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise ValidationError("submissions CSV is empty")
    start = 0
    first = [c.strip().lower() for c in rows[0]]
    if first[:2] == ["expert_id", "item_id"]:
        start = 1
    per_expert: dict[str, dict[str, int]] = {}
    for row in rows[start:]:
        if len(row) < 3:
            raise ValidationError(f"submission row needs expert_id,item_id,value: {row!r}")
        expert, item, value = row[0].strip(), row[1].strip(), row[2].strip()
        try:
            numeric = int(value)
        except ValueError:
            raise ValidationError(f"submission value must be an integer, got {value!r}") from None
        per_expert.setdefault(expert, {})
        if item in per_expert[expert]:
            raise ValidationError(f"expert '{expert}' submitted item '{item}' twice")
        per_expert[expert][item] = numeric
    out = []
    for expert, values in sorted(per_expert.items()):
        if kind == "ranks":
            out.append(ExpertSubmission(expert_id=expert, round=round_number, rankings=values))
        else:
            out.append(ExpertSubmission(expert_id=expert, round=round_number, ratings=values))
    return out
