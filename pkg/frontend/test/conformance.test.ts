import { readFileSync } from "node:fs";
import { PassThrough } from "node:stream";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import Ajv from "ajv";
import { describe, expect, it } from "vitest";

import { trainOnQuizzes } from "../src/fillmask.js";
import {
  PROTOCOL_VERSION,
  encodeJsonLine,
  responseSchema,
} from "../src/protocol.js";
import { serve, loadQuizFile } from "../src/server.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixtures = join(here, "..", "fixtures");

function goldenValidator(name: string) {
  const ajv = new Ajv({ allErrors: true });
  const schema = JSON.parse(
    readFileSync(join(fixtures, "golden", name), "utf-8")
  );
  return ajv.compile(schema);
}

async function runServer(requestLines: string[]): Promise<string[]> {
  const quizzes = loadQuizFile(join(fixtures, "quizzes.jsonl"));
  const predictor = trainOnQuizzes(quizzes, { epochs: 5 });
  const input = new PassThrough();
  const output = new PassThrough();
  const errors = new PassThrough();
  const done = serve(predictor, input, output, errors);
  for (const line of requestLines) input.write(line);
  input.end();
  await done;
  output.end();
  let collected = "";
  for await (const chunk of output) collected += chunk.toString();
  return collected.split("\n").filter((line) => line.trim().length > 0);
}

describe("protocol conformance", () => {
  it("answers 100 requests with golden-schema responses and exact quiz_id echo", async () => {
    const quizzes = loadQuizFile(join(fixtures, "quizzes.jsonl"));
    expect(quizzes).toHaveLength(50);
    const requests = [
      ...quizzes.map((q) => ({ v: PROTOCOL_VERSION, quiz_id: q.quiz_id, text: q.template, k: 10 })),
      ...quizzes.map((q) => ({ v: PROTOCOL_VERSION, quiz_id: `${q.quiz_id}#2`, text: q.template, k: 50 })),
    ];
    expect(requests).toHaveLength(100);

    const validateRequest = goldenValidator("request.schema.json");
    for (const request of requests) {
      expect(validateRequest(request), JSON.stringify(validateRequest.errors)).toBe(true);
    }

    const lines = await runServer(requests.map((r) => encodeJsonLine(r)));
    expect(lines).toHaveLength(100);

    const validateResponse = goldenValidator("response.schema.json");
    lines.forEach((line, i) => {
      const raw = JSON.parse(line);
      expect(validateResponse(raw), JSON.stringify(validateResponse.errors)).toBe(true);
      const response = responseSchema.parse(raw);
      expect(response.quiz_id).toBe(requests[i].quiz_id);
      expect(response.candidates.length).toBeLessThanOrEqual(requests[i].k);
      for (let c = 1; c < response.candidates.length; c++) {
        const prev = response.candidates[c - 1];
        const cur = response.candidates[c];
        expect(cur.s < prev.s || (cur.s === prev.s && cur.t > prev.t)).toBe(true);
      }
    });
  });

  it("drops malformed request lines without dying", async () => {
    const quizzes = loadQuizFile(join(fixtures, "quizzes.jsonl"));
    const good = encodeJsonLine({
      v: PROTOCOL_VERSION,
      quiz_id: quizzes[0].quiz_id,
      text: quizzes[0].template,
      k: 5,
    });
    const lines = await runServer(['{"v":2,"nope":true}\n', "not json\n", good]);
    expect(lines).toHaveLength(1);
    expect(JSON.parse(lines[0]).quiz_id).toBe(quizzes[0].quiz_id);
  });
});
