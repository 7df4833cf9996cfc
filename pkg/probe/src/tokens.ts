import type { MonotonicClock } from "./clock.js";
import { NdjsonWriter } from "./ndjson.js";

export type TokenRecord = {
  i: number;
  t: number;
  text: string | null;
  eos: boolean;
};

/**
 * Streamer hook: call markGenerationStart() right after the prompt is
 * handed to the model, then onToken() at the end of each token's
 * generation. Timestamps come from the capture's shared clock.
 */
export class TokenRecorder {
  private writer: NdjsonWriter;
  private index = 0;
  private genStartT: number | null = null;
  private lastT: number | null = null;

  constructor(readonly outPath: string, readonly clock: MonotonicClock) {
    this.writer = new NdjsonWriter(outPath);
  }

  markGenerationStart(): number {
    this.genStartT = this.clock.now();
    return this.genStartT;
  }

  onToken(text: string | null, eos = false): TokenRecord {
    if (this.genStartT === null) {
      throw new Error("markGenerationStart() must run before the first token");
    }
    let t = this.clock.now();
    // monotonic clocks can still repeat at ns granularity under load;
    // nudge forward so the stream stays strictly increasing
    const floor = Math.max(this.genStartT, this.lastT ?? -Infinity);
    if (t <= floor) t = floor + 1e-9;
    this.lastT = t;
    this.index += 1;
    const record: TokenRecord = { i: this.index, t, text, eos };
    this.writer.write(record);
    return record;
  }

  get generationStartT(): number | null {
    return this.genStartT;
  }

  get tokensEmitted(): number {
    return this.index;
  }

  get lastTokenT(): number | null {
    return this.lastT;
  }
}
