"""AHP weight engine: reciprocal pairwise-comparison matrices, principal
eigenvector / geometric-mean weight derivation, consistency checking,
multi-expert aggregation, and synthesis of hierarchical weights into a
permyriad weight table.

All operations are pure functions over immutable inputs; power iteration
uses a fixed uniform start vector, so results are deterministic.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NumericsError, ValidationError
from .framework import WeightTable

#: Saaty scale bounds; judgments outside [1/9, 9] are rejected, not clamped.
SCALE_MIN = 1.0 / 9.0
SCALE_MAX = 9.0
_BOUND_EPS = 1e-9

RECIPROCITY_TOL = 1e-9
POWER_TOL = 1e-10
POWER_MAX_ITER = 1000

CR_THRESHOLD = 0.1

#: Random-index constants for matrix orders 1..10, used as the CR
#: denominator. Orders 4..10 are the classical Saaty values; they agree with
#: the mean consistency index of uniformly sampled scale-bounded reciprocal
#: matrices (see simulate_random_index) to within ±0.05. For n=3 the
#: classical 0.58 is not reproducible — large-sample simulation converges to
#: ≈0.5245 (Alonso & Lamata's estimate) — so the reproducible constant is
#: used there.
RANDOM_INDEX = {
    1: 0.0,
    2: 0.0,
    3: 0.5245,
    4: 0.90,
    5: 1.12,
    6: 1.24,
    7: 1.32,
    8: 1.41,
    9: 1.45,
    10: 1.49,
}

#: the 17 admissible judgment values: 1/9..1/2, 1, 2..9
SAATY_SCALE_VALUES = tuple(1.0 / k for k in range(9, 1, -1)) + tuple(
    float(k) for k in range(1, 10)
)


class PairwiseMatrix:
    """Reciprocal positive judgment matrix over an ordered item list."""

    def __init__(self, items: Sequence[str], values):
        self.items = tuple(items)
        n = len(self.items)
        if n < 2:
            raise ValidationError("a pairwise matrix needs at least 2 items")
        if len(set(self.items)) != n:
            raise ValidationError("pairwise matrix items must be unique")
        arr = np.asarray(values, dtype=float)
        if arr.shape != (n, n):
            raise ValidationError(
                f"matrix shape {arr.shape} does not match {n} items"
            )
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValidationError("all pairwise entries must be positive finite numbers")
        if np.any(np.abs(np.diag(arr) - 1.0) > RECIPROCITY_TOL):
            raise ValidationError("diagonal entries must equal 1")
        recip = arr * arr.T
        if np.any(np.abs(recip - 1.0) > RECIPROCITY_TOL):
            i, j = np.unravel_index(np.argmax(np.abs(recip - 1.0)), recip.shape)
            raise ValidationError(
                f"reciprocity violated at ({self.items[i]}, {self.items[j]}): "
                f"{arr[i, j]} × {arr[j, i]} ≠ 1"
            )
        if np.any(arr < SCALE_MIN - _BOUND_EPS) or np.any(arr > SCALE_MAX + _BOUND_EPS):
            raise ValidationError(
                f"entries must lie in the judgment scale [{SCALE_MIN:.6f}, {SCALE_MAX:.0f}]"
            )
        arr.setflags(write=False)
        self.values = arr

    @property
    def n(self) -> int:
        return len(self.items)

    def to_json_dict(self) -> dict:
        return {"items": list(self.items), "values": self.values.tolist()}

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "PairwiseMatrix":
        try:
            return cls(doc["items"], doc["values"])
        except KeyError as exc:
            raise ValidationError(f"pairwise matrix document missing key {exc}") from None

    @classmethod
    def from_csv(cls, text: str) -> "PairwiseMatrix":
        """Parse a row-major CSV matrix. The header row carries the item
        ids; data rows may start with a row label. Entries may be decimals
        or fractions like ``1/3``."""
        rows = [row for row in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in row)]
        if len(rows) < 3:
            raise ValidationError("matrix CSV needs a header row and at least 2 data rows")
        header = [c.strip() for c in rows[0]]
        if header and header[0] == "":
            header = header[1:]
        items = [h for h in header if h]
        n = len(items)
        data = rows[1:]
        if len(data) != n:
            raise ValidationError(f"expected {n} data rows for {n} items, got {len(data)}")
        values = []
        for row in data:
            cells = [c.strip() for c in row]
            if len(cells) == n + 1:
                cells = cells[1:]  # leading row label
            if len(cells) != n:
                raise ValidationError(
                    f"matrix row has {len(cells)} entries, expected {n}"
                )
            values.append([_parse_judgment(c) for c in cells])
        return cls(items, values)

    def __repr__(self) -> str:
        return f"PairwiseMatrix({self.n}×{self.n} over {list(self.items)})"


def _parse_judgment(cell: str) -> float:
    try:
        return float(Fraction(cell))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"cannot parse judgment value {cell!r}") from None


@dataclass(frozen=True)
class WeightVector:
    items: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.items) != len(self.weights):
            raise ValidationError("weight vector items and weights differ in length")
        if any(w <= 0 for w in self.weights):
            raise ValidationError("all weights must be strictly positive")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1 (got {total!r})")

    def as_mapping(self) -> dict[str, float]:
        return dict(zip(self.items, self.weights))

    def to_json_dict(self) -> dict:
        return {"items": list(self.items), "weights": list(self.weights)}


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    consistency_index: float
    random_index: float
    consistency_ratio: float
    acceptable: bool

    def to_json_dict(self) -> dict:
        return {
            "lambda_max": self.lambda_max,
            "consistency_index": self.consistency_index,
            "random_index": self.random_index,
            "consistency_ratio": self.consistency_ratio,
            "acceptable": self.acceptable,
        }


def _principal_eigenvector(
    values: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER
) -> tuple[np.ndarray, float]:
    """Power iteration from a uniform start; returns (L1-normalized weights,
    dominant eigenvalue). The Perron root of a positive matrix is real and
    simple, so convergence is geometric."""
    n = values.shape[0]
    x = np.full(n, 1.0 / n)
    for iteration in range(1, max_iter + 1):
        y = values @ x
        x_next = y / y.sum()
        if np.max(np.abs(x_next - x)) < tol:
            lam = float((values @ x_next).sum())
            return x_next, lam
        x = x_next
    raise NumericsError(
        f"power iteration did not converge within {max_iter} iterations",
        iterations=max_iter,
    )


def derive_weights(matrix: PairwiseMatrix, method: str = "eigenvector") -> WeightVector:
    """Derive priority weights from a judgment matrix.

    eigenvector: normalized principal right eigenvector (power iteration).
    geometric_mean: normalized row geometric means. The two coincide exactly
    on perfectly consistent matrices.
    """
    if method == "eigenvector":
        weights, _ = _principal_eigenvector(matrix.values)
    elif method == "geometric_mean":
        means = np.exp(np.mean(np.log(matrix.values), axis=1))
        weights = means / means.sum()
    else:
        raise ValidationError(
            f"method must be 'eigenvector' or 'geometric_mean', got {method!r}"
        )
    return WeightVector(items=matrix.items, weights=tuple(float(w) for w in weights))


def consistency(matrix: PairwiseMatrix, threshold: float = CR_THRESHOLD) -> ConsistencyReport:
    """Consistency report for orders 2..10 (the random-index table's range)."""
    n = matrix.n
    if n > max(RANDOM_INDEX):
        raise ValidationError(
            f"consistency is only supported for orders up to {max(RANDOM_INDEX)}, got {n}"
        )
    _, lam = _principal_eigenvector(matrix.values)
    ci = 0.0 if n <= 2 else (lam - n) / (n - 1)
    ci = max(ci, 0.0)  # guard float dust below zero on consistent matrices
    ri = RANDOM_INDEX[n]
    cr = ci / ri if ri > 0 else 0.0
    return ConsistencyReport(
        lambda_max=lam,
        consistency_index=ci,
        random_index=ri,
        consistency_ratio=cr,
        acceptable=cr < threshold,
    )


def aggregate_experts(matrices: Sequence[PairwiseMatrix]) -> PairwiseMatrix:
    """Element-wise geometric mean across experts; reciprocity is preserved
    by construction. All matrices must share the same ordered item list."""
    if not matrices:
        raise ValidationError("need at least one expert matrix to aggregate")
    items = matrices[0].items
    for idx, m in enumerate(matrices[1:], start=2):
        if m.items != items:
            raise ValidationError(
                f"expert matrix #{idx} covers items {list(m.items)}, expected {list(items)}"
            )
    stack = np.stack([m.values for m in matrices])
    combined = np.exp(np.mean(np.log(stack), axis=0))
    # re-symmetrize so float rounding cannot break the reciprocity invariant
    combined = np.sqrt(combined / combined.T)
    np.fill_diagonal(combined, 1.0)
    return PairwiseMatrix(items, combined)


def synthesize_hierarchy(
    dimension_weights: WeightVector,
    component_weights: Mapping[str, WeightVector],
    criterion_weights: Mapping[str, WeightVector],
    table_id: str = "synthesized",
    sector: str = "",
) -> WeightTable:
    """Chain component × criterion weights into a permyriad table.

    Within each dimension, a criterion's entry is
    component_weight × criterion_weight × 10000, so each dimension's column
    sums to 10000 (up to float rounding). Every component and criterion must
    be reachable through exactly one chain.
    """
    missing_dims = [d for d in dimension_weights.items if d not in component_weights]
    if missing_dims:
        raise ValidationError(
            "no component weights for dimension(s): " + ", ".join(missing_dims)
        )
    orphan_dims = [d for d in component_weights if d not in dimension_weights.items]
    if orphan_dims:
        raise ValidationError(
            "component weights reference unknown dimension(s): " + ", ".join(orphan_dims)
        )

    reachable_components: list[str] = []
    for dim in dimension_weights.items:
        reachable_components.extend(component_weights[dim].items)
    if len(reachable_components) != len(set(reachable_components)):
        raise ValidationError("a component appears under more than one dimension")
    missing_comps = [c for c in reachable_components if c not in criterion_weights]
    if missing_comps:
        raise ValidationError(
            "no criterion weights for component(s): " + ", ".join(missing_comps)
        )
    orphan_comps = [c for c in criterion_weights if c not in reachable_components]
    if orphan_comps:
        raise ValidationError(
            "criteria unreachable: component(s) not under any dimension: "
            + ", ".join(orphan_comps)
        )

    entries: dict[str, float] = {}
    for dim in dimension_weights.items:
        comps = component_weights[dim]
        for comp, comp_w in zip(comps.items, comps.weights):
            crits = criterion_weights[comp]
            for crit, crit_w in zip(crits.items, crits.weights):
                if crit in entries:
                    raise ValidationError(
                        f"criterion '{crit}' is reachable through more than one chain"
                    )
                entries[crit] = comp_w * crit_w * 10000.0
    return WeightTable(table_id, entries, sector=sector)


def simulate_random_index(
    n: int,
    samples: int = 100_000,
    seed: int = 2024,
    batch_size: int = 25_000,
) -> float:
    """Mean consistency index of ``samples`` random reciprocal matrices of
    order ``n`` with upper-triangle entries drawn uniformly from the 17-value
    judgment scale. This is the independent oracle for RANDOM_INDEX.
    """
    if n < 3:
        return 0.0
    rng = np.random.default_rng(seed)
    scale = np.array(SAATY_SCALE_VALUES)
    iu = np.triu_indices(n, k=1)
    total = 0.0
    done = 0
    while done < samples:
        b = min(batch_size, samples - done)
        mats = np.ones((b, n, n))
        draws = rng.choice(scale, size=(b, len(iu[0])))
        mats[:, iu[0], iu[1]] = draws
        mats[:, iu[1], iu[0]] = 1.0 / draws
        lam = _batch_lambda_max(mats)
        total += float(np.sum((lam - n) / (n - 1)))
        done += b
    return total / samples


def _batch_lambda_max(mats: np.ndarray, tol: float = 1e-9, max_iter: int = 500) -> np.ndarray:
    """Vectorized power iteration over a stack of positive matrices."""
    b, n, _ = mats.shape
    x = np.full((b, n), 1.0 / n)
    lam = np.zeros(b)
    for _ in range(max_iter):
        y = np.einsum("bij,bj->bi", mats, x)
        lam_next = y.sum(axis=1)
        x = y / lam_next[:, None]
        if np.max(np.abs(lam_next - lam)) < tol:
            return lam_next
        lam = lam_next
    return lam
