import { readFileSync } from "node:fs";

import { FillMaskModel, trainOnQuizzes } from "./fillmask.js";
import {
  Predictor,
  encodeJsonLine,
  makeResponse,
  parseQuizLine,
  parseRequestLine,
  splitJsonLines,
} from "./protocol.js";
import { PromptedPredictor, TranscriptModel } from "./prompted.js";
import { SampleMode, requestsOf, sampleQuizzes } from "./sample.js";

export interface FillMaskConfig {
  mode: "fillmask";
  train_quizzes: string;
  epochs?: number;
  seed?: number;
}

export interface PromptedConfig {
  mode: "prompted";
  transcript: string; // JSON array of {prompt, reply}
}

export type BridgeConfig = FillMaskConfig | PromptedConfig;

export function loadQuizFile(path: string) {
  return readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map(parseQuizLine);
}

export function buildPredictor(config: BridgeConfig): Predictor {
  if (config.mode === "fillmask") {
    const quizzes = loadQuizFile(config.train_quizzes);
    return trainOnQuizzes(quizzes, { epochs: config.epochs, seed: config.seed });
  }
  if (config.mode === "prompted") {
    const entries = JSON.parse(readFileSync(config.transcript, "utf-8")) as Array<{
      prompt: string;
      reply: string;
    }>;
    const model = new TranscriptModel(new Map(entries.map((e) => [e.prompt, e.reply])));
    return new PromptedPredictor(model);
  }
  throw new Error(`unknown bridge mode ${(config as { mode: string }).mode}`);
}

/** Serve the version-1 protocol over stdin/stdout until EOF. */
export async function serve(
  predictor: Predictor,
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
  errors: NodeJS.WritableStream = process.stderr
): Promise<void> {
  let buffer = "";
  const handleLine = async (line: string) => {
    let request;
    try {
      request = parseRequestLine(line);
    } catch (error) {
      errors.write(`bridge: dropping malformed request line: ${error}\n`);
      return;
    }
    try {
      output.write(encodeJsonLine(await predictor.predict(request)));
    } catch (error) {
      errors.write(`bridge: ${request.quiz_id}: ${error}\n`);
      output.write(encodeJsonLine(makeResponse(request.quiz_id, [], request.k, true)));
    }
  };
  for await (const chunk of input) {
    buffer += chunk.toString();
    const { lines, rest } = splitJsonLines(buffer);
    buffer = rest;
    for (const line of lines) await handleLine(line);
  }
  if (buffer.trim().length > 0) await handleLine(buffer);
}

function flag(argv: string[], name: string, fallback: string): string {
  const index = argv.indexOf(name);
  return index >= 0 && index + 1 < argv.length ? argv[index + 1] : fallback;
}

async function main(): Promise<void> {
  const argv = process.argv.slice(2);
  if (argv[0] === "requests") {
    // turn a quiz file into request JSONL, optionally sampling a budget
    const quizzes = loadQuizFile(argv[1]);
    const k = Number(flag(argv, "--k", "50"));
    const n = Number(flag(argv, "--n", String(quizzes.length)));
    const mode = flag(argv, "--sample", "uniform") as SampleMode;
    const seed = Number(flag(argv, "--seed", "0"));
    for (const request of requestsOf(sampleQuizzes(quizzes, n, mode, seed), k)) {
      process.stdout.write(encodeJsonLine(request));
    }
    return;
  }
  const configPath = argv[0] === "serve" ? argv[1] : argv[0];
  if (!configPath) {
    process.stderr.write(
      "usage: server.js [serve] <config.json> | requests <quizzes.jsonl> " +
        "[--k N] [--n N] [--sample uniform|stratified] [--seed S]\n"
    );
    process.exit(1);
  }
  const config = JSON.parse(readFileSync(configPath, "utf-8")) as BridgeConfig;
  await serve(buildPredictor(config), process.stdin, process.stdout);
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");

if (invokedDirectly) {
  main().catch((error) => {
    process.stderr.write(`bridge: fatal: ${error}\n`);
    process.exit(1);
  });
}
