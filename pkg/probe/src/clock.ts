/**
 * One shared monotonic clock per capture.
 *
 * Both writers (power sampler and token recorder) must read the same
 * clock instance, otherwise their timestamps cannot be aligned. The
 * manifest records the clock's name so downstream tools can refuse
 * mixed-clock merges.
 */

export class ClockMismatchError extends Error {}

export type MonotonicClock = {
  readonly name: string;
  /** Seconds since the clock's origin. */
  now(): number;
};

export function createMonotonicClock(name = "node-hrtime"): MonotonicClock {
  const origin = process.hrtime.bigint();
  return {
    name,
    now() {
      return Number(process.hrtime.bigint() - origin) / 1e9;
    },
  };
}

export function assertSameClock(a: MonotonicClock, b: MonotonicClock): void {
  if (a !== b) {
    throw new ClockMismatchError(
      `writers must share one clock instance (got "${a.name}" and "${b.name}")`,
    );
  }
}
