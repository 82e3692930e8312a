import { execFileSync, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

const here = dirname(fileURLToPath(import.meta.url));
const root = join(here, "..");
const quizPath = join(root, "fixtures", "quizzes.jsonl");
const serverPath = join(root, "dist", "server.js");

function inkAvailable(): boolean {
  return spawnSync("ink", ["--version"]).status === 0;
}

describe("integration with the quiz toolchain", () => {
  it.skipIf(!inkAvailable())(
    "ink eval + ink score over the bridge server reach P@1 = 100",
    () => {
      execFileSync("npx", ["tsc", "-p", "tsconfig.json"], { cwd: root });
      const work = mkdtempSync(join(tmpdir(), "bridge-"));
      const configPath = join(work, "config.json");
      writeFileSync(
        configPath,
        JSON.stringify({ mode: "fillmask", train_quizzes: quizPath })
      );
      const journal = join(work, "journal.jsonl");
      execFileSync("ink", [
        "eval",
        "--quizzes", quizPath,
        "--predictor", `cmd:node ${serverPath} serve ${configPath}`,
        "--k", "50",
        "--out", journal,
      ]);
      const reportPath = join(work, "report.json");
      execFileSync("ink", [
        "score",
        "--journal", journal,
        "--quizzes", quizPath,
        "--out", reportPath,
      ]);
      const report = JSON.parse(readFileSync(reportPath, "utf-8"));
      const overall = report.rows.at(-1);
      expect(overall.family).toBe("all");
      expect(overall.p_at["1"]).toBe(100);
      expect(overall.p_at["50"]).toBe(100);
    },
    60_000
  );
});
