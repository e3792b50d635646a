"""Regenerate the bundled case-study assessments.

Levels the case studies state outright are taken from temai.reference;
the rest are recovered by fit_levels_to_targets against the benchmark
stage values and shipped with their fit residuals. Run from the repo root:

    python3 scripts/refit_fixtures.py [--check]

--check verifies the committed fixtures match without rewriting them.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from temai import reference
from temai.fixtures import load_framework, load_weight_table
from temai.framework import AssessmentRecord, dumps_canonical
from temai.pipeline import fit_levels_to_targets, run_pipeline

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "temai" / "data"

TARGETS = {
    "retail": {
        "capability_score": reference.RETAIL.capability_score,
        "adoption_rate": reference.RETAIL.adoption_rate,
        "utility_rate": reference.RETAIL.utility_rate,
    },
    "pv": {
        "capability_score": reference.PV.capability_score,
        "adoption_rate": reference.PV.adoption_rate,
        "utility_rate": reference.PV.utility_rate,
    },
}

ASSESSMENT_IDS = {"retail": "retail-baseline", "pv": "pv-baseline"}
WEIGHT_TABLES = {"retail": "store", "pv": "pv"}
CREATED_AT = {"retail": "2025-03-01T00:00:00Z", "pv": "2025-03-01T00:00:00Z"}


def displays_match(case: str, levels: dict) -> bool:
    """The bundled fixtures must reproduce the benchmark chain at display
    precision (2 decimals), not merely within tolerance, so every published
    headline number renders verbatim."""
    ref = reference.CASES[case]
    weights = load_weight_table(WEIGHT_TABLES[case])
    scores = run_pipeline(levels, weights, "reported")
    checks = [
        (scores.capability_score, ref.capability_score),
        (scores.adoption_rate * 100, ref.adoption_rate * 100),
        (scores.effective_capability, ref.effective_capability),
        (scores.utility_rate * 100, ref.utility_rate * 100),
        (scores.final_value_reported, ref.final_value_reported),
        (scores.final_value_appendix, ref.final_value_appendix),
    ]
    return all(f"{got:.2f}" == f"{want:.2f}" for got, want in checks)


def build_assessment(case: str) -> AssessmentRecord:
    framework = load_framework()
    weights = load_weight_table(WEIGHT_TABLES[case])
    stated = reference.STATED_LEVELS[case]

    fit = fit_levels_to_targets(stated, TARGETS[case], weights, framework)
    if not fit.candidates:
        raise SystemExit(
            f"{case}: no level assignment reaches the benchmark targets "
            f"(nearest residual {fit.nearest.residual:.4f})"
        )
    best = next(
        (c for c in fit.candidates if displays_match(case, dict(c.levels))),
        fit.candidates[0],
    )
    print(
        f"{case}: {len(fit.candidates)} candidate(s) within tolerance out of "
        f"{fit.searched} searched; using residual {best.residual:.6f} "
        f"(display match: {displays_match(case, dict(best.levels))})"
    )

    provenance = {c: "paper_stated" for c in stated}
    provenance.update({c: "oracle_fitted" for c in best.levels if c not in stated})

    residuals = {
        key: abs(value - TARGETS[case][key]) * (1.0 if key == "capability_score" else 100.0)
        for key, value in best.stage_values.items()
    }

    return AssessmentRecord(
        assessment_id=ASSESSMENT_IDS[case],
        framework_id=framework.framework_id,
        weight_table=WEIGHT_TABLES[case],
        ratings=best.levels,
        provenance=provenance,
        created_at=CREATED_AT[case],
        fit_residuals=residuals,
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--check", action="store_true", help="verify committed fixtures only")
    args = parser.parse_args()

    status = 0
    for case in ("retail", "pv"):
        record = build_assessment(case)
        payload = dumps_canonical(record.to_json_dict())
        target = DATA_DIR / f"assessment_{case}.json"
        if args.check:
            current = target.read_text(encoding="utf-8") if target.exists() else ""
            if json.loads(current or "{}") != json.loads(payload):
                print(f"{case}: committed fixture is stale")
                status = 1
            else:
                print(f"{case}: committed fixture matches")
        else:
            target.write_text(payload, encoding="utf-8")
            print(f"wrote {target}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
