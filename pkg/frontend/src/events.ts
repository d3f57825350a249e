/**
 * SSE subscription over fetch streaming.
 *
 * EventSource is unavailable under node and cannot set follow=false, so the
 * frames are parsed by hand. Each frame is `id: <seq>`, `event: agent`,
 * `data: <json>`, blank line. Reconnection resumes from the last seen seq.
 */

import type { AgentEvent } from "./types";

/** Parses complete SSE frames out of a text buffer; returns the leftover. */
export function parseFrames(
  buffer: string,
  onEvent: (event: AgentEvent) => void,
): string {
  const frames = buffer.split("\n\n");
  const leftover = frames.pop() ?? "";
  for (const frame of frames) {
    for (const line of frame.split("\n")) {
      if (line.startsWith("data: ")) {
        onEvent(JSON.parse(line.slice("data: ".length)) as AgentEvent);
      }
    }
  }
  return leftover;
}

export interface Subscription {
  close(): void;
  done: Promise<void>;
}

/**
 * Streams events from `url`, invoking `onEvent` per event in seq order.
 * The caller tracks `lastSeq` for resume; close() aborts the connection.
 */
export function subscribe(
  url: string,
  onEvent: (event: AgentEvent) => void,
): Subscription {
  const controller = new AbortController();
  const done = (async () => {
    const resp = await fetch(url, { signal: controller.signal });
    if (!resp.ok || !resp.body) {
      throw new Error(`event stream failed: ${resp.status}`);
    }
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { value, done: finished } = await reader.read();
      if (finished) break;
      buffer += decoder.decode(value, { stream: true });
      buffer = parseFrames(buffer, onEvent);
    }
  })().catch((err: unknown) => {
    if (!controller.signal.aborted) throw err;
  });
  return { close: () => controller.abort(), done };
}
