import {
  Candidate,
  PredictionRequest,
  PredictionResponse,
  Predictor,
  makeResponse,
} from "./protocol.js";

/**
 * Adapter for instruction-following chat models. The model sees a prompt
 * asking for one answer per numbered line; the reply is parsed back into a
 * ranked candidate list (rank 1 scores highest). Anything that does not look
 * like a numbered line is ignored, so chatty preambles are tolerated.
 */

export interface PromptModel {
  complete(prompt: string): string | Promise<string>;
}

export function buildPrompt(text: string, k: number): string {
  return [
    `Predict top-${k} answers of the [MASK] part of the following Python API`,
    "fully qualified name statement. Pay attention to the characters directly",
    "before and after [MASK]; the masked span is at least one character long.",
    `Print each of the ${k} answers on its own line as "<index>. <answer>".`,
    "",
    text,
  ].join("\n");
}

const NUMBERED_LINE = /^\s*(\d+)[.):]\s*(.+?)\s*$/;

export function parseReply(reply: string, k: number): Candidate[] {
  const out: Candidate[] = [];
  for (const line of reply.split("\n")) {
    const match = NUMBERED_LINE.exec(line);
    if (!match) continue;
    const rank = Number(match[1]);
    if (!Number.isInteger(rank) || rank < 1 || rank > k) continue;
    let token = match[2];
    // tolerate quoted or back-ticked answers
    token = token.replace(/^["'`]+/, "").replace(/["'`]+$/, "");
    if (token.length === 0) continue;
    out.push({ t: token, s: k - rank + 1 });
  }
  return out;
}

export class PromptedPredictor implements Predictor {
  constructor(private readonly model: PromptModel) {}

  async predict(request: PredictionRequest): Promise<PredictionResponse> {
    let reply: string;
    try {
      reply = await this.model.complete(buildPrompt(request.text, request.k));
    } catch {
      return makeResponse(request.quiz_id, [], request.k, true);
    }
    return makeResponse(request.quiz_id, parseReply(reply, request.k), request.k);
  }
}

/** Replays canned completions from a transcript keyed by prompt text. */
export class TranscriptModel implements PromptModel {
  constructor(private readonly replies: Map<string, string>) {}

  complete(prompt: string): string {
    const reply = this.replies.get(prompt);
    if (reply === undefined) {
      throw new Error("no transcript entry for prompt");
    }
    return reply;
  }
}
