import { execFile } from "node:child_process";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

export class DeviceUnavailableError extends Error {}

export type PowerSource = {
  readonly name: string;
  /** Instantaneous power draw in watts. */
  read(): Promise<number>;
};

/**
 * Polls the vendor management interface through nvidia-smi. One query
 * per tick keeps the probe dependency-free; at 10 Hz the subprocess
 * cost is negligible next to the sample period.
 */
export class NvidiaSmiPowerSource implements PowerSource {
  readonly name: string;

  constructor(readonly deviceIndex = 0) {
    this.name = `nvidia-smi:${deviceIndex}`;
  }

  async read(): Promise<number> {
    let stdout: string;
    try {
      ({ stdout } = await execFileAsync("nvidia-smi", [
        "--query-gpu=power.draw",
        "--format=csv,noheader,nounits",
        "-i",
        String(this.deviceIndex),
      ]));
    } catch (err) {
      throw new DeviceUnavailableError(
        `nvidia-smi query failed for device ${this.deviceIndex}: ${err}`,
      );
    }
    const value = parseFloat(stdout.trim());
    if (!Number.isFinite(value) || value < 0) {
      throw new DeviceUnavailableError(
        `nvidia-smi returned no usable power reading: ${JSON.stringify(stdout)}`,
      );
    }
    return value;
  }

  static async available(deviceIndex = 0): Promise<boolean> {
    try {
      await new NvidiaSmiPowerSource(deviceIndex).read();
      return true;
    } catch {
      return false;
    }
  }
}

/**
 * Deterministic stand-in for machines without a GPU: a smooth power
 * curve over a clock, always nonnegative. Lets the capture path and its
 * consumers run end to end anywhere.
 */
export class SyntheticPowerSource implements PowerSource {
  readonly name = "synthetic";

  constructor(private readonly now: () => number, private readonly baseW = 120) {}

  async read(): Promise<number> {
    const t = this.now();
    const wave = 40 * Math.sin((2 * Math.PI * t) / 3) + 15 * Math.sin(2 * Math.PI * t);
    return Math.max(0, this.baseW + wave);
  }
}

export async function resolvePowerSource(
  kind: "auto" | "nvidia" | "synthetic",
  deviceIndex: number,
  now: () => number,
): Promise<PowerSource> {
  if (kind === "nvidia") return new NvidiaSmiPowerSource(deviceIndex);
  if (kind === "synthetic") return new SyntheticPowerSource(now);
  return (await NvidiaSmiPowerSource.available(deviceIndex))
    ? new NvidiaSmiPowerSource(deviceIndex)
    : new SyntheticPowerSource(now);
}
