"""Independent oracles shared by the test suite and the acceptance gate.

These deliberately re-derive results from first principles (raw JSON data,
direct formula evaluation, dense eigendecomposition) and share no code with
the engine paths they check.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parents[1] / "src" / "temai" / "data"


def load_raw(name: str) -> dict:
    return json.loads((DATA / name).read_text(encoding="utf-8"))


def naive_stage_values(ratings: dict, weights_doc: dict, framework_doc: dict) -> dict:
    """Direct-summation scoring over the raw JSON documents."""
    comp_dim = {c["id"]: c["dimension"] for c in framework_doc["components"]}
    crit_dim = {c["id"]: comp_dim[c["component"]] for c in framework_doc["criteria"]}
    sums = {"capability": 0.0, "adoption": 0.0, "utility": 0.0}
    for criterion, level in ratings.items():
        weight = float(weights_doc["entries"][criterion])
        sums[crit_dim[criterion]] += (20 * level) * weight / 10000.0
    return {
        "capability_score": sums["capability"],
        "adoption_rate": sums["adoption"] / 100.0,
        "utility_rate": sums["utility"] / 100.0,
    }


def brute_force_w(rank_rows: list[dict[str, float]]) -> float:
    """Direct evaluation of the tie-corrected concordance formula."""
    items = sorted(rank_rows[0])
    m, n = len(rank_rows), len(items)
    sums = [sum(row[item] for row in rank_rows) for item in items]
    mean = sum(sums) / n
    s = sum((x - mean) ** 2 for x in sums)
    t_total = 0.0
    for row in rank_rows:
        seen: dict[float, int] = {}
        for value in row.values():
            seen[value] = seen.get(value, 0) + 1
        t_total += sum(t**3 - t for t in seen.values() if t > 1)
    denom = m * m * (n**3 - n) - m * t_total
    return 0.0 if denom <= 0 else 12.0 * s / denom


def eig_principal(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Principal eigenpair via dense eigendecomposition."""
    eigenvalues, eigenvectors = np.linalg.eig(values)
    idx = int(np.argmax(eigenvalues.real))
    vec = np.abs(eigenvectors[:, idx].real)
    return vec / vec.sum(), float(eigenvalues[idx].real)
