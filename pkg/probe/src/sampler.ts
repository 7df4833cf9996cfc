import { setTimeout as sleep } from "node:timers/promises";

import type { MonotonicClock } from "./clock.js";
import { NdjsonWriter } from "./ndjson.js";
import type { PowerSource } from "./power.js";

export type SamplerHandle = {
  /** The clock every timestamp in the output file came from. */
  clock: MonotonicClock;
  /** Resolves once the first sample is on disk. */
  started: Promise<void>;
  /** Stops after the in-flight tick; the file ends on a complete line. */
  stop(): Promise<SamplerStats>;
  /** Resolves when the sampler exits on its own (duration reached). */
  done: Promise<SamplerStats>;
};

export type SamplerStats = {
  samples: number;
  overruns: number;
};

export type SamplerOptions = {
  rateHz: number;
  outPath: string;
  clock: MonotonicClock;
  source: PowerSource;
  /** Stop on its own after this many seconds; omit to run until stop(). */
  durationS?: number;
  log?: (message: string) => void;
};

/**
 * Samples power on a fixed grid anchored to the shared clock. Ticks
 * aim at origin + k/rate; when a read overshoots its slot the missed
 * slots are skipped and counted as overruns rather than bunched up.
 */
export function startPowerSampler(options: SamplerOptions): SamplerHandle {
  const { rateHz, outPath, clock, source, durationS, log } = options;
  if (!Number.isFinite(rateHz) || rateHz <= 0) {
    throw new RangeError(`rate must be a positive number of Hz, got ${rateHz}`);
  }
  const periodS = 1 / rateHz;
  const writer = new NdjsonWriter(outPath);
  const stats: SamplerStats = { samples: 0, overruns: 0 };

  let stopping = false;
  let startedResolve!: () => void;
  const started = new Promise<void>((resolve) => (startedResolve = resolve));

  const loop = (async () => {
    const origin = clock.now();
    let tick = 0;
    for (;;) {
      if (stopping) break;
      if (durationS !== undefined && tick * periodS >= durationS) break;

      const p = await source.read();
      const t = clock.now();
      writer.write({ t, p });
      stats.samples += 1;
      if (stats.samples === 1) startedResolve();

      tick += 1;
      let next = origin + tick * periodS;
      const now = clock.now();
      if (now > next + periodS) {
        const missed = Math.floor((now - next) / periodS);
        stats.overruns += missed;
        tick += missed;
        next = origin + tick * periodS;
        log?.(`sampling overrun: skipped ${missed} tick(s) at t=${now.toFixed(3)}s`);
      }
      const waitMs = Math.max(0, (next - clock.now()) * 1000);
      await sleep(waitMs);
    }
    startedResolve(); // no-op when already started; unblocks early stops
    return stats;
  })();

  return {
    clock,
    started,
    done: loop,
    async stop() {
      stopping = true;
      return loop;
    },
  };
}
