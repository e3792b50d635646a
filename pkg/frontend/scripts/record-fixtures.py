"""Record API responses used by the frontend contract tests.

Runs the real service in-process and writes each response verbatim to
frontend/tests/fixtures/. Re-run after any engine change:

    python3 frontend/scripts/record-fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO_ROOT / "src"))

from fastapi.testclient import TestClient

from temai.api import ApiConfig, create_app

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    app = create_app(ApiConfig(data_dir=tempfile.mkdtemp()))
    recorded: dict[str, object] = {}
    with TestClient(app) as client:
        recorded["framework"] = client.get("/frameworks/temai").json()
        recorded["assessment_retail"] = client.get("/assessments/retail-baseline").json()
        recorded["pipeline_retail_reported"] = client.post(
            "/assessments/retail-baseline/pipeline?mode=reported"
        ).json()
        recorded["pipeline_retail_appendix"] = client.post(
            "/assessments/retail-baseline/pipeline?mode=appendix"
        ).json()
        recorded["pipeline_pv_reported"] = client.post(
            "/assessments/pv-baseline/pipeline?mode=reported"
        ).json()
        recorded["whatif_scene_transfer"] = client.post(
            "/assessments/retail-baseline/whatif",
            json={
                "interventions": [{"criterion": "scene_transfer_difficulty", "level": 4}],
                "mode": "reported",
            },
        ).json()
        recorded["whatif_stacked"] = client.post(
            "/assessments/retail-baseline/whatif",
            json={
                "interventions": [
                    {"criterion": "scene_transfer_difficulty", "level": 4},
                    {"criterion": "change_management_capability", "level": 4},
                ],
                "mode": "reported",
            },
        ).json()

        # consensus round (identical rankings) then a dissenting round
        agree = {
            "submissions": [
                {"expert_id": "e1", "rankings": {"a": 1, "b": 2, "c": 3, "d": 4}},
                {"expert_id": "e2", "rankings": {"a": 1, "b": 2, "c": 3, "d": 4}},
                {"expert_id": "e3", "rankings": {"a": 1, "b": 2, "c": 3, "d": 4}},
            ]
        }
        disgree_rankings = [
            {"expert_id": "e1", "rankings": {"a": 1, "b": 2, "c": 3, "d": 4}},
            {"expert_id": "e2", "rankings": {"a": 1, "b": 3, "c": 2, "d": 4}},
            {"expert_id": "e3", "rankings": {"a": 2, "b": 1, "c": 4, "d": 3}},
        ]
        recorded["round_consensus"] = client.post("/studies/demo/rounds", json=agree).json()
        recorded["round_below_gate"] = client.post(
            "/studies/demo/rounds", json={"submissions": disgree_rankings}
        ).json()
        recorded["rounds_listing"] = client.get("/studies/demo/rounds").json()

        recorded["quadrant_80_20"] = client.get(
            "/quadrant", params={"regulatory": 80, "support": 20}
        ).json()
        recorded["error_unknown_criterion"] = client.post(
            "/assessments/retail-baseline/whatif",
            json={"interventions": [{"criterion": "warp_drive", "level": 4}], "mode": "reported"},
        ).json()

    for name, payload in recorded.items():
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {path.relative_to(REPO_ROOT)}")


if __name__ == "__main__":
    main()
