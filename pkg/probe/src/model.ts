import { setTimeout as sleep } from "node:timers/promises";

export type StreamedToken = {
  text: string;
  eos: boolean;
};

export type TokenStream = AsyncGenerator<StreamedToken>;

/**
 * A tiny scripted "model" for end-to-end captures on machines without
 * an inference runtime: emits a fixed code snippet token by token with
 * deterministic per-token delays, then an end-of-sequence token.
 */
export async function* toyModelStream(
  maxNewTokens: number,
  tokenDelayMs = 25,
): TokenStream {
  const pieces = [
    "def ", "greet", "(name", "):\n",
    "    ", "return ", "f\"hi ", "{name}", "\"\n",
    "\n",
    "print", "(greet", "(\"watt\"", "))\n",
  ];
  let emitted = 0;
  for (const text of pieces) {
    if (emitted >= maxNewTokens) return;
    await sleep(tokenDelayMs + (emitted % 3) * 5);
    emitted += 1;
    const last = emitted === pieces.length;
    if (last && emitted < maxNewTokens) {
      yield { text, eos: true };
      return;
    }
    yield { text, eos: false };
  }
}

/** Crude prompt-size estimate recorded in the manifest. */
export function estimatePromptTokens(prompt: string): number {
  const words = prompt.trim().split(/\s+/).filter(Boolean.bind(null));
  return Math.max(1, words.length);
}
