import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { setTimeout as sleep } from "node:timers/promises";

import { assertSameClock, createMonotonicClock } from "./clock.js";
import type { TokenStream } from "./model.js";
import { resolvePowerSource } from "./power.js";
import { startPowerSampler } from "./sampler.js";
import { TokenRecorder } from "./tokens.js";

export type CaptureOptions = {
  outDir: string;
  traceId: string;
  modelName: string;
  workload: string;
  prompt: string;
  inputTokenCount: number;
  maxNewTokens: number;
  rateHz: number;
  deviceIndex: number;
  sourceKind: "auto" | "nvidia" | "synthetic";
  log?: (message: string) => void;
};

export type CaptureResult = {
  manifestPath: string;
  tokens: number;
  samples: number;
  overruns: number;
  powerSource: string;
};

/**
 * Runs one generation while sampling power, as two concurrent writers
 * to separate append-only files; the only shared state is the clock
 * and the generation-start handoff. The sampler starts before the
 * prompt is handed over and stops one period after the last token so
 * the power stream always covers the token span.
 */
export async function captureTrace(
  generate: (prompt: string, maxNewTokens: number) => TokenStream,
  options: CaptureOptions,
): Promise<CaptureResult> {
  const { outDir, traceId, rateHz } = options;
  mkdirSync(outDir, { recursive: true });
  const samplesName = `${traceId}.samples.ndjson`;
  const tokensName = `${traceId}.tokens.ndjson`;

  const clock = createMonotonicClock();
  const source = await resolvePowerSource(options.sourceKind, options.deviceIndex, () =>
    clock.now(),
  );
  const recorder = new TokenRecorder(join(outDir, tokensName), clock);
  const sampler = startPowerSampler({
    rateHz,
    outPath: join(outDir, samplesName),
    clock,
    source,
    log: options.log,
  });
  // both writers must timestamp against the same clock instance
  assertSameClock(recorder.clock, sampler.clock);
  await sampler.started;

  // prompt handed to the model; prefill begins here
  const stream = generate(options.prompt, options.maxNewTokens);
  const genStartT = recorder.markGenerationStart();

  for await (const token of stream) {
    recorder.onToken(token.text, token.eos);
    if (token.eos || recorder.tokensEmitted >= options.maxNewTokens) break;
  }
  if (recorder.tokensEmitted === 0) {
    await sampler.stop();
    throw new Error("model produced no tokens; nothing to capture");
  }

  // let at least one more sample land past the last token
  await sleep((2 / rateHz) * 1000);
  const stats = await sampler.stop();

  const manifest = {
    format_version: 1,
    trace_id: traceId,
    model_name: options.modelName,
    workload: options.workload,
    input_token_count: options.inputTokenCount,
    gen_start_t: genStartT,
    max_new_tokens: options.maxNewTokens,
    samples_path: samplesName,
    tokens_path: tokensName,
    clock: clock.name,
  };
  const manifestPath = join(outDir, `${traceId}.manifest.json`);
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");

  return {
    manifestPath,
    tokens: recorder.tokensEmitted,
    samples: stats.samples,
    overruns: stats.overruns,
    powerSource: source.name,
  };
}
