/**
 * Single-page console for one human competitor: join with a token, edit
 * and submit a document each round, watch the anonymized standings and
 * per-round metrics. Polls the service for round completion.
 */

import { ApiError, Client, CompetitionInfo, RankingView } from "./api.js";
import { draftStatus, metricsByRound, myTrajectory } from "./state.js";

const POLL_MS = 3000;

type Session = { client: Client; competitionId: string; token: string };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let session: Session | null = null;
let lastRound = -1;
let pollTimer: number | undefined;

function joinScreen(): void {
  const root = byId<HTMLDivElement>("app");
  root.replaceChildren();
  const card = el("div", "card");
  card.append(el("h1", undefined, "rankarena"));
  card.append(
    el("p", "muted", "Join a competition with the id and player token you were given."),
  );
  const compInput = el("input");
  compInput.placeholder = "competition id";
  const tokenInput = el("input");
  tokenInput.placeholder = "player token";
  const joinButton = el("button", undefined, "join");
  const error = el("p", "error");
  joinButton.addEventListener("click", async () => {
    const client = new Client("");
    try {
      await client.getCompetition(compInput.value.trim());
      session = {
        client,
        competitionId: compInput.value.trim(),
        token: tokenInput.value.trim(),
      };
      lastRound = -1;
      dashboard();
    } catch (err) {
      error.textContent = err instanceof Error ? err.message : String(err);
    }
  });
  card.append(compInput, tokenInput, joinButton, error);
  root.replaceChildren(card);
}

async function refresh(): Promise<void> {
  if (!session) return;
  const { client, competitionId, token } = session;
  const info = await client.getCompetition(competitionId);
  let view: RankingView | null = null;
  try {
    view = await client.getRanking(competitionId, token);
  } catch (err) {
    if (!(err instanceof ApiError) || err.status !== 404) throw err;
  }
  if (view && view.round_index !== lastRound) {
    lastRound = view.round_index;
  }
  render(info, view);
}

function render(info: CompetitionInfo, view: RankingView | null): void {
  const standingsBox = byId<HTMLDivElement>("standings");
  const metricsBox = byId<HTMLDivElement>("metrics");
  const statusBox = byId<HTMLDivElement>("status");

  statusBox.replaceChildren(
    el(
      "p",
      undefined,
      `query: "${info.query.text}" | round ${info.rounds_completed} of ${info.rounds_total}` +
        (info.finished ? " | finished" : "") +
        (info.awaiting.length ? ` | awaiting: ${info.awaiting.join(", ")}` : ""),
    ),
  );

  standingsBox.replaceChildren(el("h2", undefined, "current ranking"));
  if (!view) {
    standingsBox.append(el("p", "muted", "No completed rounds yet."));
  } else {
    for (const s of view.standings) {
      const row = el("div", s.is_you ? "standing you" : "standing");
      row.append(el("strong", undefined, `${s.position}. ${s.author}${s.is_you ? " (you)" : ""}`));
      const docView = el("details");
      docView.append(el("summary", undefined, s.document.slice(0, 90) + (s.document.length > 90 ? "..." : "")));
      const list = el("ol");
      for (const p of s.passages) list.append(el("li", undefined, p));
      docView.append(list);
      row.append(docView);
      standingsBox.append(row);
    }
  }

  metricsBox.replaceChildren(el("h2", undefined, "per-round metrics"));
  if (view) {
    const mine = myTrajectory(view);
    if (mine.length) {
      metricsBox.append(
        el(
          "p",
          undefined,
          "your trajectory: " +
            mine.map((t) => `r${t.round}: rank ${t.rank} (raw ${t.raw})`).join("  |  "),
        ),
      );
    }
    for (const table of metricsByRound(view)) {
      metricsBox.append(el("h3", undefined, `round ${table.round}`));
      const grid = el("table");
      const head = el("tr");
      for (const h of ["author", "rank", "raw promotion"]) head.append(el("th", undefined, h));
      grid.append(head);
      for (const r of table.rows) {
        const tr = el("tr", r.isYou ? "you" : undefined);
        tr.append(el("td", undefined, r.author + (r.isYou ? " (you)" : "")));
        tr.append(el("td", undefined, String(r.rank)));
        tr.append(el("td", undefined, r.raw));
        grid.append(tr);
      }
      metricsBox.append(grid);
    }
  }
}

function wireEditor(info: CompetitionInfo): void {
  const draft = byId<HTMLTextAreaElement>("draft");
  const counter = byId<HTMLSpanElement>("term-counter");
  const preview = byId<HTMLOListElement>("passage-preview");
  const submit = byId<HTMLButtonElement>("submit");
  const feedback = byId<HTMLParagraphElement>("editor-feedback");

  const update = () => {
    const status = draftStatus(draft.value, info.term_cap);
    counter.textContent = `${status.termCount} / ${status.cap} terms`;
    counter.className = status.overCap ? "error" : "muted";
    submit.disabled = !status.canSubmit;
    preview.replaceChildren(...status.preview.map((p) => el("li", undefined, p)));
  };
  draft.addEventListener("input", update);
  update();

  submit.addEventListener("click", async () => {
    if (!session) return;
    try {
      const echo = await session.client.submit(
        session.competitionId,
        session.token,
        draft.value,
      );
      feedback.className = "muted";
      feedback.textContent = `submitted for round ${echo.round} (${echo.term_count} terms, ${echo.passages.length} passages); resubmitting before the round closes replaces it`;
    } catch (err) {
      feedback.className = "error";
      feedback.textContent = err instanceof ApiError ? `rejected: ${err.message}` : String(err);
    }
  });

  const adminToken = byId<HTMLInputElement>("admin-token");
  const force = byId<HTMLInputElement>("force-advance");
  const advance = byId<HTMLButtonElement>("advance");
  const adminFeedback = byId<HTMLParagraphElement>("admin-feedback");
  advance.addEventListener("click", async () => {
    if (!session) return;
    try {
      await session.client.advance(session.competitionId, adminToken.value.trim(), force.checked);
      adminFeedback.className = "muted";
      adminFeedback.textContent = "round advanced";
      await refresh();
    } catch (err) {
      adminFeedback.className = "error";
      adminFeedback.textContent = err instanceof ApiError ? `refused: ${err.message}` : String(err);
    }
  });

  const auditsButton = byId<HTMLButtonElement>("fetch-audits");
  const auditsView = byId<HTMLPreElement>("audits-view");
  auditsButton.addEventListener("click", async () => {
    if (!session) return;
    try {
      const body = await session.client.audits(session.competitionId, adminToken.value.trim());
      auditsView.textContent = JSON.stringify(body.audits, null, 2);
    } catch (err) {
      auditsView.textContent = err instanceof ApiError ? `refused: ${err.message}` : String(err);
    }
  });
}

async function dashboard(): Promise<void> {
  if (!session) return;
  const root = byId<HTMLDivElement>("app");
  root.replaceChildren();
  const template = byId<HTMLTemplateElement>("dashboard-template");
  root.append(template.content.cloneNode(true));
  const info = await session.client.getCompetition(session.competitionId);
  wireEditor(info);
  await refresh();
  if (pollTimer !== undefined) window.clearInterval(pollTimer);
  pollTimer = window.setInterval(() => {
    refresh().catch(() => undefined);
  }, POLL_MS);
}

document.addEventListener("DOMContentLoaded", joinScreen);
