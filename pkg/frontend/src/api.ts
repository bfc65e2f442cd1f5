import { NdjsonBuffer } from "./ndjson.js";
import { DashboardStore } from "./store.js";
import {
  CommandAck,
  CommandRequest,
  Envelope,
  FeedResponse,
  Snapshot,
  isEnvelope,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorMessage(resp: Response): Promise<string> {
  try {
    const doc = (await resp.json()) as { error?: string };
    if (doc && typeof doc.error === "string") return doc.error;
  } catch {
    // fall through to the status line
  }
  return `HTTP ${resp.status}`;
}

/** Thin client for the three console-facing endpoints plus the snapshot. */
export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  async postCommand(cmd: CommandRequest): Promise<CommandAck> {
    const resp = await this.fetchImpl(this.url("/api/command"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ origin: "wifi", ...cmd }),
    });
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as CommandAck;
  }

  async fetchFeed(channelId: number, readKey?: string, results?: number): Promise<FeedResponse> {
    const query = new URLSearchParams();
    if (readKey) query.set("api_key", readKey);
    if (results !== undefined) query.set("results", String(results));
    const qs = query.toString();
    const resp = await this.fetchImpl(
      this.url(`/channels/${channelId}/feeds.json${qs ? "?" + qs : ""}`),
    );
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as FeedResponse;
  }

  async fetchSnapshot(): Promise<Snapshot> {
    const resp = await this.fetchImpl(this.url("/api/snapshot"));
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as Snapshot;
  }

  /** Yield envelopes from /api/events, starting after the given seq. */
  async *streamEvents(after: number, signal?: AbortSignal): AsyncGenerator<Envelope> {
    const resp = await this.fetchImpl(this.url(`/api/events?after=${after}`), { signal });
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    if (!resp.body) throw new ApiError(0, "no response body");

    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    const buf = new NdjsonBuffer();
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const doc of buf.push(decoder.decode(value, { stream: true }))) {
          if (isEnvelope(doc)) yield doc;
        }
      }
      for (const doc of buf.end()) {
        if (isEnvelope(doc)) yield doc;
      }
    } finally {
      reader.releaseLock();
    }
  }
}

export interface PumpOptions {
  signal?: AbortSignal;
  sleep?: (ms: number) => Promise<void>;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/**
 * Keep the store fed from the event stream until aborted.
 *
 * Resumes from the last applied seq on every (re)connect, so drops replay
 * nothing twice; backoff doubles per failed attempt and resets on progress.
 */
export async function pumpEvents(
  client: ApiClient,
  store: DashboardStore,
  opts: PumpOptions = {},
): Promise<void> {
  const sleep = opts.sleep ?? defaultSleep;
  const initial = opts.initialBackoffMs ?? 250;
  const max = opts.maxBackoffMs ?? 5000;
  let backoff = initial;

  while (!opts.signal?.aborted) {
    try {
      for await (const env of client.streamEvents(store.lastSeq, opts.signal)) {
        store.setOnline(true);
        store.apply(env);
        backoff = initial;
      }
    } catch {
      // connection refused, reset mid-stream, abort: fall through to retry
    }
    store.setOnline(false);
    if (opts.signal?.aborted) break;
    await sleep(backoff);
    backoff = Math.min(backoff * 2, max);
  }
  store.setOnline(false);
}
