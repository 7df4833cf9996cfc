#!/usr/bin/env node
/**
 * probe CLI
 *
 *   probe sample  --out power.ndjson [--rate 10] [--seconds 5] [--device 0] [--source auto]
 *   probe capture --out traces/ [--trace-id id] [--rate 10] [--max-new-tokens 64]
 *                 [--prompt "..."] [--device 0] [--source auto]
 *
 * `sample` runs the power sampler alone (SIGINT stops it cleanly);
 * `capture` records a full trace from the built-in toy model, ready for
 * `wattlens profile`.
 */

import { parseArgs } from "node:util";

import { captureTrace } from "./capture.js";
import { createMonotonicClock } from "./clock.js";
import { estimatePromptTokens, toyModelStream } from "./model.js";
import { resolvePowerSource } from "./power.js";
import { startPowerSampler } from "./sampler.js";

function usageError(message: string): never {
  console.error(message);
  process.exit(2);
}

function asSourceKind(value: string): "auto" | "nvidia" | "synthetic" {
  if (value === "auto" || value === "nvidia" || value === "synthetic") return value;
  usageError(`--source must be auto, nvidia, or synthetic (got ${value})`);
}

async function cmdSample(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      out: { type: "string" },
      rate: { type: "string", default: "10" },
      seconds: { type: "string" },
      device: { type: "string", default: "0" },
      source: { type: "string", default: "auto" },
    },
  });
  if (!values.out) usageError("sample: --out <file> is required");
  const rateHz = Number(values.rate);
  if (!Number.isFinite(rateHz) || rateHz <= 0) {
    usageError(`sample: --rate must be positive, got ${values.rate}`);
  }

  const clock = createMonotonicClock();
  const source = await resolvePowerSource(
    asSourceKind(values.source!),
    Number(values.device),
    () => clock.now(),
  );
  console.error(`sampling ${source.name} at ${rateHz} Hz -> ${values.out}`);
  const handle = startPowerSampler({
    rateHz,
    outPath: values.out,
    clock,
    source,
    durationS: values.seconds ? Number(values.seconds) : undefined,
    log: (m) => console.error(m),
  });
  process.once("SIGINT", () => {
    void handle.stop();
  });
  const stats = await handle.done;
  console.error(`wrote ${stats.samples} samples (${stats.overruns} overruns)`);
  return 0;
}

async function cmdCapture(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      out: { type: "string" },
      "trace-id": { type: "string", default: "capture-000" },
      rate: { type: "string", default: "10" },
      "max-new-tokens": { type: "string", default: "64" },
      prompt: { type: "string", default: "write a short greeting function" },
      device: { type: "string", default: "0" },
      source: { type: "string", default: "auto" },
      workload: { type: "string", default: "0-shot" },
    },
  });
  if (!values.out) usageError("capture: --out <dir> is required");
  const rateHz = Number(values.rate);
  if (!Number.isFinite(rateHz) || rateHz <= 0) {
    usageError(`capture: --rate must be positive, got ${values.rate}`);
  }

  const result = await captureTrace(
    (_, maxNewTokens) => toyModelStream(maxNewTokens),
    {
      outDir: values.out,
      traceId: values["trace-id"]!,
      modelName: "toy-scripted",
      workload: values.workload!,
      prompt: values.prompt!,
      inputTokenCount: estimatePromptTokens(values.prompt!),
      maxNewTokens: Number(values["max-new-tokens"]),
      rateHz,
      deviceIndex: Number(values.device),
      sourceKind: asSourceKind(values.source!),
      log: (m) => console.error(m),
    },
  );
  console.error(
    `captured ${result.tokens} tokens, ${result.samples} samples ` +
      `(${result.powerSource}) -> ${result.manifestPath}`,
  );
  console.log(result.manifestPath);
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    if (command === "sample") return await cmdSample(rest);
    if (command === "capture") return await cmdCapture(rest);
  } catch (err) {
    console.error(String(err));
    return 1;
  }
  usageError("usage: probe <sample|capture> [options]");
}

main().then((code) => process.exit(code));
