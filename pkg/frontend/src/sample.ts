import { PredictionRequest, PROTOCOL_VERSION, Quiz } from "./protocol.js";

/**
 * Quiz sampling for budgeted runs (prompted models are expensive). Uniform
 * draws without replacement; stratified allocates the budget evenly across
 * (family, mask_kind) strata, remainder to the largest strata, then draws
 * uniformly inside each stratum. Both are seeded and order-independent.
 */

export type SampleMode = "uniform" | "stratified";

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function drawWithout<T>(items: T[], n: number, rand: () => number): T[] {
  const pool = [...items];
  const out: T[] = [];
  while (out.length < n && pool.length > 0) {
    const index = Math.floor(rand() * pool.length);
    out.push(pool.splice(index, 1)[0]);
  }
  return out;
}

export function sampleQuizzes(
  quizzes: Quiz[],
  n: number,
  mode: SampleMode,
  seed: number
): Quiz[] {
  const ordered = [...quizzes].sort((a, b) => (a.quiz_id < b.quiz_id ? -1 : 1));
  if (n >= ordered.length) return ordered;
  const rand = mulberry32(seed);
  if (mode === "uniform") {
    return drawWithout(ordered, n, rand);
  }
  const strata = new Map<string, Quiz[]>();
  for (const quiz of ordered) {
    const key = `${quiz.family}${quiz.mask_kind}`;
    const bucket = strata.get(key) ?? [];
    bucket.push(quiz);
    strata.set(key, bucket);
  }
  const keys = [...strata.keys()].sort(
    (a, b) => strata.get(b)!.length - strata.get(a)!.length || (a < b ? -1 : 1)
  );
  const base = Math.floor(n / keys.length);
  let remainder = n - base * keys.length;
  const out: Quiz[] = [];
  for (const key of keys) {
    let quota = base + (remainder > 0 ? 1 : 0);
    if (remainder > 0) remainder--;
    quota = Math.min(quota, strata.get(key)!.length);
    out.push(...drawWithout(strata.get(key)!, quota, rand));
  }
  // strata smaller than their quota leave budget unused; top up uniformly
  if (out.length < n) {
    const chosen = new Set(out.map((q) => q.quiz_id));
    const rest = ordered.filter((q) => !chosen.has(q.quiz_id));
    out.push(...drawWithout(rest, n - out.length, rand));
  }
  return out;
}

export function requestsOf(quizzes: Quiz[], k: number): PredictionRequest[] {
  return quizzes.map((quiz) => ({
    v: PROTOCOL_VERSION,
    quiz_id: quiz.quiz_id,
    text: quiz.template,
    k,
  }));
}
