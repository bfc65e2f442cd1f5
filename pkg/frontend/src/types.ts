/** Wire shapes shared by the event stream, command API, and feed API. */

export const SERVICES = [
  "parking",
  "irrigation",
  "intrusion",
  "door",
  "firegas",
  "lighting",
  "medicine",
  "iaq",
] as const;

export type ServiceId = (typeof SERVICES)[number];

export function isServiceId(value: unknown): value is ServiceId {
  return typeof value === "string" && (SERVICES as readonly string[]).includes(value);
}

/** One line of /api/events. The `type` field discriminates. */
export interface ReadingEnvelope {
  type: "reading";
  seq: number;
  t: number;
  device: string;
  kind: string;
  value: number | boolean;
}

export interface CommandEnvelope {
  type: "command";
  seq: number;
  t: number;
  service: string;
  action: string;
  params: Record<string, unknown>;
  origin: string;
}

export interface EffectEnvelope {
  type: "effect";
  seq: number;
  t: number;
  kind: string;
  target: string;
  payload: Record<string, unknown>;
}

export type Envelope = ReadingEnvelope | CommandEnvelope | EffectEnvelope;

export function isEnvelope(value: unknown): value is Envelope {
  if (typeof value !== "object" || value === null) return false;
  const v = value as Record<string, unknown>;
  if (typeof v.seq !== "number" || typeof v.t !== "number") return false;
  return v.type === "reading" || v.type === "command" || v.type === "effect";
}

/** Payload of a ui_event effect; one per service panel. */
export interface PanelPayload {
  event: string;
  state: Record<string, unknown>;
  alert: boolean;
}

export type PanelMap = Record<ServiceId, PanelPayload | null>;

export interface Toast {
  seq: number;
  service: string;
  text: string;
}

/** Body POSTed to /api/command. */
export interface CommandRequest {
  service: ServiceId;
  action: string;
  params?: Record<string, unknown>;
  origin?: string;
}

export interface CommandAck {
  accepted: boolean;
  origin: string;
  t: number;
}

/** /channels/<id>/feeds.json response. */
export interface FeedEntry {
  created_at: string;
  entry_id: number;
  [field: string]: unknown;
}

export interface FeedResponse {
  channel: Record<string, unknown> & { id: number; name: string };
  feeds: FeedEntry[];
}

/** Final run state, for convergence checks against /api/snapshot. */
export interface Snapshot {
  t: number;
  seq: number;
  finished: boolean;
  services: Record<string, PanelPayload | null>;
  actuators: Record<string, unknown>;
  links: Record<string, unknown>;
  channels: Record<string, number>;
}
