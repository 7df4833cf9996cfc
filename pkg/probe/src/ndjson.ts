import { appendFileSync, mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

/**
 * Append-only NDJSON writer with one synchronous write per record, so
 * the file always ends on a complete line even if the process stops
 * between ticks.
 */
export class NdjsonWriter {
  private count = 0;

  constructor(readonly path: string) {
    mkdirSync(dirname(path), { recursive: true });
    writeFileSync(path, "");
  }

  write(record: object): void {
    appendFileSync(this.path, JSON.stringify(record) + "\n");
    this.count += 1;
  }

  get lines(): number {
    return this.count;
  }
}
