"""HTTP facade over the arena for live competitions with human players.

State is an append-only event log per competition (created / submitted /
advanced); the in-memory competition is a fold over that log, so a
restarted server reproduces identical rankings from identical
submissions. Author identities are replaced by stable pseudonyms and
neither the engine model nor any pair-model weights ever appear in a
response body.
"""

from __future__ import annotations

import json
import secrets
import threading
from pathlib import Path
from typing import Mapping

import numpy as np
from fastapi import FastAPI, HTTPException, Query as QueryParam
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .arena.competition import BatchResult, Competition, CompetitionConfig, CompetitionResult, SubmissionError
from .arena.reports import render_batch_report
from .text import tokenize

__all__ = ["create_app", "CompetitionHub"]


class SubmissionBody(BaseModel):
    token: str
    text: str


class AdvanceBody(BaseModel):
    admin_token: str
    force: bool = False


class _LiveCompetition:
    """One competition plus its access tokens and its event log."""

    def __init__(self, comp_id: str, config: CompetitionConfig, log_path: Path,
                 tokens: Mapping[str, str], admin_token: str):
        self.id = comp_id
        self.config = config
        self.log_path = log_path
        self.tokens = dict(tokens)  # token -> player_id
        self.admin_token = admin_token
        self.competition = Competition(config)
        self.lock = threading.Lock()
        rng = np.random.default_rng(config.seed)
        order = list(rng.permutation(len(config.players)))
        self.pseudonyms = {
            p.id: f"author-{order[i] + 1}" for i, p in enumerate(config.players)
        }

    def append_event(self, event: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def player_for_token(self, token: str) -> str:
        player = self.tokens.get(token)
        if player is None:
            raise HTTPException(status_code=401, detail="unknown or stale token")
        return player


class CompetitionHub:
    """All live competitions; replays persisted logs on startup."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.competitions: dict[str, _LiveCompetition] = {}
        for log_path in sorted(self.data_dir.glob("competition-*.jsonl")):
            self._replay(log_path)

    def _replay(self, log_path: Path) -> None:
        live = None
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                if event["type"] == "created":
                    live = _LiveCompetition(
                        comp_id=event["competition_id"],
                        config=CompetitionConfig.from_dict(event["config"]),
                        log_path=log_path,
                        tokens=event["tokens"],
                        admin_token=event["admin_token"],
                    )
                elif live is None:
                    raise ValueError(f"{log_path}: event before creation")
                elif event["type"] == "submitted":
                    live.competition.submit(event["player"], event["text"])
                elif event["type"] == "advanced":
                    live.competition.advance(force=event.get("force", False))
        if live is not None:
            self.competitions[live.id] = live

    def create(self, config_dict: Mapping) -> dict:
        try:
            config = CompetitionConfig.from_dict(config_dict)
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=f"invalid config: {exc}") from exc
        comp_id = f"c{len(self.competitions) + 1:04d}-{secrets.token_hex(4)}"
        tokens = {
            secrets.token_hex(16): p.id
            for p in config.players
            if p.strategy == "human"
        }
        admin_token = secrets.token_hex(16)
        live = _LiveCompetition(
            comp_id=comp_id,
            config=config,
            log_path=self.data_dir / f"competition-{comp_id}.jsonl",
            tokens=tokens,
            admin_token=admin_token,
        )
        live.append_event(
            {
                "type": "created",
                "competition_id": comp_id,
                "config": config.to_dict(),
                "tokens": tokens,
                "admin_token": admin_token,
            }
        )
        self.competitions[comp_id] = live
        return {
            "competition_id": comp_id,
            "human_tokens": {player: token for token, player in tokens.items()},
            "admin_token": admin_token,
        }

    def get(self, comp_id: str) -> _LiveCompetition:
        live = self.competitions.get(comp_id)
        if live is None:
            raise HTTPException(status_code=404, detail=f"no competition {comp_id!r}")
        return live


def _standings(live: _LiveCompetition, viewer: str | None) -> list[dict]:
    comp = live.competition
    ranking = comp.rankings[-1]
    by_doc = {doc_id: pid for pid, doc_id in comp.doc_ids_by_round[-1].items()}
    out = []
    for position, doc_id in enumerate(ranking.doc_ids, start=1):
        player = by_doc[doc_id]
        out.append(
            {
                "position": position,
                "author": live.pseudonyms[player],
                "document": comp.snapshots[doc_id].text,
                "passages": list(comp.snapshots[doc_id].passages),
                "is_you": player == viewer,
            }
        )
    return out


def _metric_series(live: _LiveCompetition, viewer: str | None) -> list[dict]:
    out = []
    for rm in live.competition.metrics:
        for pid, m in sorted(rm.per_player.items()):
            out.append(
                {
                    "round": rm.round_index,
                    "author": live.pseudonyms[pid],
                    "is_you": pid == viewer,
                    "rank": m.rank,
                    "raw_promotion": m.raw_promotion,
                    "scaled_promotion": m.scaled_promotion,
                }
            )
    return out


def create_app(data_dir: str | Path = "arena-data", ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="rankarena service", version="0.1.0")
    hub = CompetitionHub(data_dir)
    app.state.hub = hub

    @app.post("/competitions", status_code=201)
    def create_competition(config: dict):
        return hub.create(config)

    @app.get("/competitions/{comp_id}")
    def get_competition(comp_id: str):
        live = hub.get(comp_id)
        comp = live.competition
        with live.lock:
            return {
                "competition_id": live.id,
                "query": {"id": live.config.query.id, "text": live.config.query.text},
                "rounds_completed": comp.rounds_completed,
                "rounds_total": live.config.rounds,
                "finished": comp.finished,
                "term_cap": live.config.max_terms,
                "players": sorted(live.pseudonyms.values()),
                "awaiting": sorted(
                    live.pseudonyms[p] for p in comp.missing_humans()
                ),
            }

    @app.post("/competitions/{comp_id}/submissions")
    def submit_document(comp_id: str, body: SubmissionBody):
        live = hub.get(comp_id)
        player = live.player_for_token(body.token)
        with live.lock:
            if live.competition.finished:
                raise HTTPException(status_code=409, detail="competition is over")
            try:
                doc = live.competition.submit(player, body.text)
            except SubmissionError as exc:
                status = 422 if "cap" in str(exc) or "empty" in str(exc) else 409
                raise HTTPException(status_code=status, detail=str(exc)) from exc
            live.append_event({"type": "submitted", "player": player, "text": body.text})
            return {
                "accepted": True,
                "round": live.competition.rounds_completed + 1,
                "term_count": len(tokenize(body.text)),
                "passages": list(doc.passages),
            }

    @app.get("/competitions/{comp_id}/ranking")
    def get_ranking(comp_id: str, token: str = QueryParam()):
        live = hub.get(comp_id)
        viewer = live.player_for_token(token)
        with live.lock:
            comp = live.competition
            if not comp.rankings:
                raise HTTPException(status_code=404, detail="no completed rounds yet")
            return {
                "round_index": comp.rounds_completed,
                "finished": comp.finished,
                "standings": _standings(live, viewer),
                "metrics": _metric_series(live, viewer),
                "rounds": [
                    {
                        "round_index": r.round_index,
                        "positions": [
                            live.pseudonyms[
                                {d: p for p, d in comp.doc_ids_by_round[r.round_index - 1].items()}[doc_id]
                            ]
                            for doc_id in r.doc_ids
                        ],
                    }
                    for r in comp.rankings
                ],
            }

    @app.post("/competitions/{comp_id}/advance")
    def advance_round(comp_id: str, body: AdvanceBody):
        live = hub.get(comp_id)
        if body.admin_token != live.admin_token:
            raise HTTPException(status_code=403, detail="bad admin credential")
        with live.lock:
            comp = live.competition
            if comp.finished:
                raise HTTPException(status_code=409, detail="competition is over")
            try:
                ranking = comp.advance(force=body.force)
            except ValueError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            live.append_event({"type": "advanced", "force": body.force})
            by_doc = {d: p for p, d in comp.doc_ids_by_round[-1].items()}
            return {
                "round_index": ranking.round_index,
                "finished": comp.finished,
                "positions": [live.pseudonyms[by_doc[d]] for d in ranking.doc_ids],
            }

    @app.get("/competitions/{comp_id}/audits")
    def get_audits(comp_id: str, admin_token: str = QueryParam()):
        # Operator-only: the bot's decision records would hand competitors
        # a map of its strategy. Contains features and scores, never weights.
        live = hub.get(comp_id)
        if admin_token != live.admin_token:
            raise HTTPException(status_code=403, detail="bad admin credential")
        with live.lock:
            return {"audits": list(live.competition.audits)}

    @app.get("/competitions/{comp_id}/report", response_class=PlainTextResponse)
    def get_report(comp_id: str, admin_token: str = QueryParam()):
        live = hub.get(comp_id)
        if admin_token != live.admin_token:
            raise HTTPException(status_code=403, detail="bad admin credential")
        with live.lock:
            comp = live.competition
            if not comp.rankings:
                raise HTTPException(status_code=404, detail="no completed rounds yet")
            result = CompetitionResult(
                config=live.config,
                rankings=tuple(comp.rankings),
                metrics=tuple(comp.metrics),
                audits=tuple(comp.audits),
                documents=dict(comp.snapshots),
                doc_ids_by_round=tuple(comp.doc_ids_by_round),
            )
            return render_batch_report(BatchResult(results=(result,)))

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
