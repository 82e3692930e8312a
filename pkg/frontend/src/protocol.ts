import { z } from "zod";

export const PROTOCOL_VERSION = 1;
export const MASK_TOKEN = "[MASK]";

export const requestSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  quiz_id: z.string().min(1),
  text: z.string().min(1),
  k: z.number().int().positive(),
});

export const candidateSchema = z.object({
  t: z.string(),
  s: z.number(),
});

export const responseSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  quiz_id: z.string().min(1),
  candidates: z.array(candidateSchema),
  failed: z.boolean().optional(),
});

export const quizSchema = z.object({
  quiz_id: z.string().min(1),
  family: z.string(),
  template: z.string(),
  answer: z.string(),
  fqn: z.string(),
  level_index: z.number().int().nonnegative(),
  mask_kind: z.enum(["first", "last", "full"]),
  nl_context: z.string().optional(),
  meta: z.record(z.unknown()).default({}),
});

export type PredictionRequest = z.infer<typeof requestSchema>;
export type Candidate = z.infer<typeof candidateSchema>;
export type PredictionResponse = z.infer<typeof responseSchema>;
export type Quiz = z.infer<typeof quizSchema>;

export interface Predictor {
  predict(request: PredictionRequest): PredictionResponse | Promise<PredictionResponse>;
}

export function parseRequestLine(line: string): PredictionRequest {
  return requestSchema.parse(JSON.parse(line));
}

export function parseQuizLine(line: string): Quiz {
  return quizSchema.parse(JSON.parse(line));
}

export function encodeJsonLine(value: unknown): string {
  return `${JSON.stringify(value)}\n`;
}

export function splitJsonLines(buffer: string): { lines: string[]; rest: string } {
  const lines: string[] = [];
  let rest = buffer;
  while (true) {
    const newlineIndex = rest.indexOf("\n");
    if (newlineIndex < 0) break;
    const line = rest.slice(0, newlineIndex).trim();
    rest = rest.slice(newlineIndex + 1);
    if (line.length > 0) lines.push(line);
  }
  return { lines, rest };
}

/**
 * Order candidates the way the protocol requires: scores strictly
 * descending, ties broken by token surface. Duplicated surfaces keep only
 * their best score. Scores are then made strictly descending by an epsilon
 * nudge so downstream strict validation holds even after ties.
 */
export function normalizeCandidates(raw: Candidate[], k: number): Candidate[] {
  const best = new Map<string, number>();
  for (const { t, s } of raw) {
    const prev = best.get(t);
    if (prev === undefined || s > prev) best.set(t, s);
  }
  const sorted = [...best.entries()].sort((a, b) =>
    b[1] - a[1] || (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0)
  );
  const out: Candidate[] = [];
  let floor = Infinity;
  for (const [t, s] of sorted.slice(0, k)) {
    const score = s < floor ? s : floor - 1e-9;
    out.push({ t, s: score });
    floor = score;
  }
  return out;
}

export function assertWellOrdered(response: PredictionResponse): void {
  const cands = response.candidates;
  for (let i = 1; i < cands.length; i++) {
    const prev = cands[i - 1];
    const cur = cands[i];
    if (cur.s > prev.s || (cur.s === prev.s && cur.t <= prev.t)) {
      throw new Error(
        `${response.quiz_id}: candidates out of order at index ${i}`
      );
    }
  }
}

export function makeResponse(
  quizId: string,
  raw: Candidate[],
  k: number,
  failed = false
): PredictionResponse {
  const response: PredictionResponse = {
    v: PROTOCOL_VERSION,
    quiz_id: quizId,
    candidates: normalizeCandidates(raw, k),
  };
  if (failed) response.failed = true;
  assertWellOrdered(response);
  return responseSchema.parse(response);
}
