// Payload shapes of the service API.

export type QueryClass = "K" | "D" | "T" | "G";
export type TierName = "VeryHigh" | "High" | "Medium" | "Low";

export interface Citation {
  source_file: string;
  page: number;
  chunk_index: number;
  similarity: number;
}

export interface Outcome {
  scores: Record<string, number>;
  tau: number;
  prediction_set: string[];
  tiers: Record<string, TierName>;
  ranking: [string, number][];
  ood: boolean;
  escalation: "expert-review" | "additional-tests" | null;
}

export interface TurnView {
  role: "user" | "system";
  text: string;
  class: QueryClass | null;
  ts: number;
  outcome: Outcome | null;
  citations: Citation[] | null;
}

export interface SessionSnapshot {
  session_id: string;
  turns: TurnView[];
  dialogue: unknown;
  phase: string;
  last_outcome: Outcome | null;
}

export interface TurnResponse {
  session_id: string;
  reply: string;
  query_class: QueryClass;
  target: string;
  phase: string;
  dialogue_state: string | null;
  outcome: Outcome | null;
  citations: Citation[];
  error: string | null;
}
