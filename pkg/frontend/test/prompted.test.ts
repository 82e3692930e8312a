import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

import { PROTOCOL_VERSION } from "../src/protocol.js";
import {
  PromptedPredictor,
  TranscriptModel,
  buildPrompt,
  parseReply,
} from "../src/prompted.js";

const here = dirname(fileURLToPath(import.meta.url));
const transcriptPath = join(here, "..", "fixtures", "transcript.json");

interface TranscriptEntry {
  prompt: string;
  reply: string;
  quiz_id: string;
  answer: string;
  expected_rank: number;
}

describe("prompt construction", () => {
  it("mentions the mask, the budget and the statement", () => {
    const prompt = buildPrompt("numpy.[MASK](", 20);
    expect(prompt).toContain("top-20");
    expect(prompt).toContain("[MASK]");
    expect(prompt.endsWith("numpy.[MASK](")).toBe(true);
  });
});

describe("reply parsing", () => {
  it("reads numbered lines into ranked candidates", () => {
    const candidates = parseReply("1. linalg\n2. random\n3. fft", 20);
    expect(candidates.map((c) => c.t)).toEqual(["linalg", "random", "fft"]);
    expect(candidates[0].s).toBeGreaterThan(candidates[1].s);
  });

  it("ignores chatter and tolerates quotes and brackets", () => {
    const reply = [
      "Sure! Here are my answers:",
      "1) 'linalg'",
      "2: `random`",
      "not a numbered line",
      '3. "fft"',
    ].join("\n");
    expect(parseReply(reply, 20).map((c) => c.t)).toEqual([
      "linalg",
      "random",
      "fft",
    ]);
  });

  it("drops indices outside the requested budget", () => {
    expect(parseReply("0. nope\n21. nope\n5. ok", 20).map((c) => c.t)).toEqual([
      "ok",
    ]);
  });
});

describe("golden transcript", () => {
  const entries = JSON.parse(
    readFileSync(transcriptPath, "utf-8")
  ) as TranscriptEntry[];

  it("reproduces the expected rank for every canned completion", async () => {
    const model = new TranscriptModel(
      new Map(entries.map((e) => [e.prompt, e.reply]))
    );
    const predictor = new PromptedPredictor(model);
    for (const entry of entries) {
      const text = entry.prompt.split("\n").at(-1)!;
      const response = await predictor.predict({
        v: PROTOCOL_VERSION,
        quiz_id: entry.quiz_id,
        text,
        k: 20,
      });
      expect(response.quiz_id).toBe(entry.quiz_id);
      const rank =
        response.candidates.findIndex((c) => c.t === entry.answer) + 1;
      expect(rank).toBe(entry.expected_rank);
    }
  });

  it("flags prompts missing from the transcript as failed", async () => {
    const predictor = new PromptedPredictor(new TranscriptModel(new Map()));
    const response = await predictor.predict({
      v: PROTOCOL_VERSION,
      quiz_id: "q",
      text: "numpy.[MASK](",
      k: 20,
    });
    expect(response.failed).toBe(true);
    expect(response.candidates).toEqual([]);
  });
});
