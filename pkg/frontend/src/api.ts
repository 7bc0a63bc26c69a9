/**
 * Thin typed client for the competition service. The UI consumes only
 * these documented endpoints; nothing here can see engine internals.
 */

export type CompetitionInfo = {
  competition_id: string;
  query: { id: string; text: string };
  rounds_completed: number;
  rounds_total: number;
  finished: boolean;
  term_cap: number;
  players: string[];
  awaiting: string[];
};

export type Standing = {
  position: number;
  author: string;
  document: string;
  passages: string[];
  is_you: boolean;
};

export type MetricRow = {
  round: number;
  author: string;
  is_you: boolean;
  rank: number;
  raw_promotion: number | null;
  scaled_promotion: number | null;
};

export type RankingView = {
  round_index: number;
  finished: boolean;
  standings: Standing[];
  metrics: MetricRow[];
  rounds: { round_index: number; positions: string[] }[];
};

export type SubmissionEcho = {
  accepted: boolean;
  round: number;
  term_count: number;
  passages: string[];
};

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class Client {
  constructor(private baseUrl: string = "") {}

  getCompetition(id: string): Promise<CompetitionInfo> {
    return request(`${this.baseUrl}/competitions/${encodeURIComponent(id)}`);
  }

  getRanking(id: string, token: string): Promise<RankingView> {
    const q = new URLSearchParams({ token });
    return request(`${this.baseUrl}/competitions/${encodeURIComponent(id)}/ranking?${q}`);
  }

  submit(id: string, token: string, text: string): Promise<SubmissionEcho> {
    return request(`${this.baseUrl}/competitions/${encodeURIComponent(id)}/submissions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ token, text }),
    });
  }

  advance(id: string, adminToken: string, force: boolean): Promise<unknown> {
    return request(`${this.baseUrl}/competitions/${encodeURIComponent(id)}/advance`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ admin_token: adminToken, force }),
    });
  }

  /** Operator-only: the bot's per-round decision records. */
  audits(id: string, adminToken: string): Promise<{ audits: unknown[] }> {
    const q = new URLSearchParams({ admin_token: adminToken });
    return request(`${this.baseUrl}/competitions/${encodeURIComponent(id)}/audits?${q}`);
  }
}
