"""Secondary acceptance: an end-to-end human round through the service
and the web UI layer.

The server half drives the exact endpoints the UI calls; the client half
(over-cap submit blocking, segmentation preview parity) lives in the
frontend vitest suite, which this test runs when node is available.

Run: ``pytest tests/test_acceptance_secondary.py -v -s``
"""

import json
import shutil
import subprocess
from pathlib import Path

from fastapi.testclient import TestClient

from rankarena.service import create_app

from conftest import REFERENCE_WEIGHTS

FRONTEND = Path(__file__).parent.parent / "frontend"


def check(criterion, description, failures):
    status = "PASS" if not failures else "FAIL"
    print(f"\n[{status}] criterion {criterion:2d}: {description}")
    assert not failures, f"criterion {criterion}: " + "; ".join(str(f) for f in failures)


def config():
    return {
        "query": {"id": "q-live", "text": "coral reef"},
        "players": [
            {"id": "human-a", "strategy": "human"},
            {"id": "human-b", "strategy": "human"},
            {"id": "anchor", "strategy": "static", "initial_text": "Coral reef stays. Water is calm."},
            {"id": "replay", "strategy": "planted", "replays": ["Palm note one.", "Palm note two."]},
            {
                "id": "machine",
                "strategy": "bot",
                "initial_text": "Dune grass path. Shell on the shore.",
                "model": {"weights": dict(REFERENCE_WEIGHTS)},
            },
        ],
        "rounds": 2,
        "engine": {"kind": "lm_dirichlet", "mu": 200},
        "seed": 5,
        "max_terms": 150,
    }


def test_criterion_14_end_to_end_human_round(tmp_path):
    failures = []
    ui_dir = FRONTEND / "dist"
    app = create_app(data_dir=tmp_path / "data", ui_dir=ui_dir if ui_dir.is_dir() else None)
    responses = []
    with TestClient(app) as client:
        created = client.post("/competitions", json=config()).json()
        responses.append(json.dumps(created))
        comp_id = created["competition_id"]
        tokens = created["human_tokens"]
        admin = created["admin_token"]
        if set(tokens) != {"human-a", "human-b"}:
            failures.append(f"expected 2 human tokens, got {sorted(tokens)}")

        text_a = "Coral reef coral reef counts here. My own words follow on."
        resp = client.post(
            f"/competitions/{comp_id}/submissions",
            json={"token": tokens["human-a"], "text": text_a},
        )
        responses.append(resp.text)
        if resp.status_code != 200:
            failures.append(f"submission rejected: {resp.text}")

        over_cap = client.post(
            f"/competitions/{comp_id}/submissions",
            json={"token": tokens["human-b"], "text": "word " * 151},
        )
        responses.append(over_cap.text)
        if over_cap.status_code != 422 or "length cap exceeded" not in over_cap.text:
            failures.append(f"over-cap not blocked server-side: {over_cap.status_code}")

        resp = client.post(
            f"/competitions/{comp_id}/submissions",
            json={"token": tokens["human-b"], "text": "Reef walk notes. Short and plain."},
        )
        responses.append(resp.text)

        advanced = client.post(f"/competitions/{comp_id}/advance", json={"admin_token": admin})
        responses.append(advanced.text)
        if advanced.status_code != 200:
            failures.append(f"advance failed: {advanced.text}")

        view = client.get(f"/competitions/{comp_id}/ranking", params={"token": tokens["human-a"]})
        responses.append(view.text)
        standings = view.json()["standings"]
        docs = [s["document"] for s in standings]
        if text_a not in docs:
            failures.append("submitted text does not appear verbatim in the ranking")
        mine = [s for s in standings if s["is_you"]]
        if len(mine) != 1 or mine[0]["document"] != text_a:
            failures.append("is_you flag does not point at the submitted document")

        responses.append(client.get(f"/competitions/{comp_id}").text)
        responses.append(
            client.get(f"/competitions/{comp_id}/report", params={"admin_token": admin}).text
        )

        if ui_dir.is_dir():
            ui_page = client.get("/ui/")
            if ui_page.status_code != 200 or "rankarena" not in ui_page.text:
                failures.append("static UI mount not serving the console")
            responses.append(ui_page.text)

    # Information hiding: no engine parameters or pair-model weights in
    # any response body or in the served UI bundle.
    forbidden = ["weights", '"mu"', "lm_dirichlet"] + [str(v) for v in REFERENCE_WEIGHTS.values()]
    for body in responses:
        for fragment in forbidden:
            if fragment in body:
                failures.append(f"{fragment!r} leaked in a response")
    if ui_dir.is_dir():
        for bundle in ui_dir.glob("*.js"):
            content = bundle.read_text(encoding="utf-8")
            for fragment in forbidden:
                if fragment in content:
                    failures.append(f"{fragment!r} present in UI bundle {bundle.name}")

    # Client-side blocking and preview parity: the frontend's own tests.
    npx = shutil.which("npx")
    if npx and (FRONTEND / "node_modules").is_dir():
        result = subprocess.run(
            [npx, "vitest", "run", "--reporter", "dot"],
            cwd=FRONTEND,
            capture_output=True,
            text=True,
            timeout=300,
        )
        if result.returncode != 0:
            failures.append(f"frontend vitest suite failed:\n{result.stdout}\n{result.stderr}")
    else:
        print("\n  (frontend vitest suite skipped: node or node_modules missing)")

    check(14, "end-to-end human round via service + web UI, with no weight leakage", failures)
