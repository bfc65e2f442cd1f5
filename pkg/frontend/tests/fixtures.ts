import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { Envelope, FeedResponse, Snapshot, isEnvelope } from "../src/types.js";

function fixturePath(name: string): string {
  return fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));
}

/** The captured 60 s run: scripted intrusion alarm plus an RGB command. */
export function fixtureEvents(): Envelope[] {
  const lines = readFileSync(fixturePath("events.jsonl"), "utf-8").split("\n");
  const envelopes: Envelope[] = [];
  for (const line of lines) {
    if (!line.trim()) continue;
    const doc: unknown = JSON.parse(line);
    if (!isEnvelope(doc)) throw new Error(`fixture line is not an envelope: ${line}`);
    envelopes.push(doc);
  }
  return envelopes;
}

export function fixtureSnapshot(): Snapshot {
  return JSON.parse(readFileSync(fixturePath("snapshot.json"), "utf-8")) as Snapshot;
}

export function fixtureFeed(): FeedResponse {
  return JSON.parse(readFileSync(fixturePath("feed_ch1.json"), "utf-8")) as FeedResponse;
}
