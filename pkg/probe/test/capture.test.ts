import { spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { captureTrace } from "../src/capture.js";
import { estimatePromptTokens, toyModelStream } from "../src/model.js";

function runCapture(outDir: string, rateHz = 20) {
  return captureTrace((_, maxNewTokens) => toyModelStream(maxNewTokens), {
    outDir,
    traceId: "e2e-000",
    modelName: "toy-scripted",
    workload: "0-shot",
    prompt: "write a short greeting function",
    inputTokenCount: estimatePromptTokens("write a short greeting function"),
    maxNewTokens: 64,
    rateHz,
    deviceIndex: 0,
    sourceKind: "synthetic",
  });
}

describe("end-to-end capture", () => {
  it("produces a trace the primary tool accepts and profiles", async () => {
    const outDir = mkdtempSync(join(tmpdir(), "probe-e2e-"));
    const result = await runCapture(outDir);
    expect(existsSync(result.manifestPath)).toBe(true);
    expect(result.tokens).toBeGreaterThan(0);
    expect(result.samples).toBeGreaterThan(1);

    const manifest = JSON.parse(readFileSync(result.manifestPath, "utf-8"));
    expect(manifest.format_version).toBe(1);
    expect(manifest.clock).toBe("node-hrtime");

    // the capture is only correct if the primary CLI takes it whole
    const reportDir = join(outDir, "reports");
    const profile = spawnSync(
      "wattlens",
      ["profile", result.manifestPath, "--out", reportDir],
      { encoding: "utf-8" },
    );
    expect(profile.stderr ?? "").not.toContain("CoverageError");
    expect(profile.status).toBe(0);

    const report = JSON.parse(
      readFileSync(join(reportDir, "e2e-000.report.json"), "utf-8"),
    );
    expect(report.output_tokens).toBe(result.tokens);
    expect(report.breakdown.total_j).toBeGreaterThan(0);
  }, 30_000);

  it("covers the token span with power samples", async () => {
    const outDir = mkdtempSync(join(tmpdir(), "probe-cov-"));
    const result = await runCapture(outDir, 40);
    const read = (name: string) =>
      readFileSync(join(outDir, name), "utf-8")
        .split("\n")
        .filter(Boolean)
        .map((l) => JSON.parse(l));
    const samples = read("e2e-000.samples.ndjson") as { t: number }[];
    const tokens = read("e2e-000.tokens.ndjson") as { t: number }[];
    const manifest = JSON.parse(
      readFileSync(join(outDir, "e2e-000.manifest.json"), "utf-8"),
    );
    expect(samples[0].t).toBeLessThanOrEqual(manifest.gen_start_t);
    expect(samples[samples.length - 1].t).toBeGreaterThanOrEqual(
      tokens[tokens.length - 1].t,
    );
    expect(result.overruns).toBeGreaterThanOrEqual(0);
  }, 30_000);
});
