"""Drive a live competition through the HTTP service, as the web UI does.

Creates a competition with two human slots plus scripted players,
submits documents with the issued tokens, advances rounds with the
admin credential and reads the anonymized standings back.
"""

import tempfile

from fastapi.testclient import TestClient

from rankarena.service import create_app

config = {
    "query": {"id": "demo", "text": "hoof cracks"},
    "players": [
        {"id": "human-a", "strategy": "human"},
        {"id": "human-b", "strategy": "human"},
        {"id": "keeper", "strategy": "static",
         "initial_text": "Hoof cracks need a farrier. Trimming keeps hooves balanced."},
        {"id": "replay", "strategy": "planted",
         "replays": ["Pasture notes for spring.", "Pasture notes for spring. Hoof cracks heal slowly."]},
    ],
    "rounds": 2,
    "engine": {"kind": "lm_dirichlet", "mu": 500},
    "seed": 11,
    "max_terms": 150,
}

with tempfile.TemporaryDirectory() as data_dir:
    client = TestClient(create_app(data_dir=data_dir))

    created = client.post("/competitions", json=config).json()
    comp_id = created["competition_id"]
    tokens = created["human_tokens"]
    admin = created["admin_token"]
    print(f"competition {comp_id}: tokens issued for {sorted(tokens)}")

    client.post(f"/competitions/{comp_id}/submissions", json={
        "token": tokens["human-a"],
        "text": "Dry weather splits hooves. Hoof cracks spread without care.",
    })
    client.post(f"/competitions/{comp_id}/submissions", json={
        "token": tokens["human-b"],
        "text": "Our barn shares chores. Everyone grooms on weekends.",
    })

    over_cap = client.post(f"/competitions/{comp_id}/submissions", json={
        "token": tokens["human-b"], "text": "word " * 200,
    })
    print(f"over-cap submission rejected: HTTP {over_cap.status_code} "
          f"({over_cap.json()['detail']})")

    client.post(f"/competitions/{comp_id}/advance", json={"admin_token": admin})
    view = client.get(f"/competitions/{comp_id}/ranking",
                      params={"token": tokens["human-a"]}).json()
    print("\nround 1 standings (as human-a sees them):")
    for s in view["standings"]:
        you = "  <- you" if s["is_you"] else ""
        print(f"  {s['position']}. {s['author']}: {s['document'][:48]}...{you}")

    client.post(f"/competitions/{comp_id}/submissions", json={
        "token": tokens["human-a"],
        "text": "Dry weather splits hooves. Hoof cracks spread fast. Hoof cracks need care.",
    })
    client.post(f"/competitions/{comp_id}/advance",
                json={"admin_token": admin, "force": True})
    view = client.get(f"/competitions/{comp_id}/ranking",
                      params={"token": tokens["human-a"]}).json()
    print("\nround 2 promotions:")
    for m in view["metrics"]:
        if m["round"] == 2:
            print(f"  {m['author']}: rank {m['rank']}  raw {m['raw_promotion']}")

    report = client.get(f"/competitions/{comp_id}/report",
                        params={"admin_token": admin})
    print("\noperator report:\n")
    print(report.text)
