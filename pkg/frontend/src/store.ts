import {
  Envelope,
  PanelMap,
  PanelPayload,
  SERVICES,
  ServiceId,
  Toast,
  isServiceId,
} from "./types.js";

/** Structural equality over JSON-shaped values. */
export function deepEqual(a: unknown, b: unknown): boolean {
  if (a === b) return true;
  if (Array.isArray(a) && Array.isArray(b)) {
    return a.length === b.length && a.every((v, i) => deepEqual(v, b[i]));
  }
  if (
    typeof a === "object" && a !== null && !Array.isArray(a) &&
    typeof b === "object" && b !== null && !Array.isArray(b)
  ) {
    const ka = Object.keys(a as object);
    const kb = Object.keys(b as object);
    if (ka.length !== kb.length) return false;
    return ka.every((k) =>
      deepEqual((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k])
    );
  }
  return false;
}

/** True when every key of `want` is present in `state` with an equal value. */
export function subsetMatch(
  state: Record<string, unknown>,
  want: Record<string, unknown>,
): boolean {
  return Object.keys(want).every((k) => k in state && deepEqual(state[k], want[k]));
}

/** A command sent but not yet confirmed by a ui_event. */
export interface Pending {
  action: string;
  /** state keys a confirming ui_event must carry */
  match: Record<string, unknown>;
  sentAt: number;
}

/** Local, non-alert message (command failures and the like). */
export interface Notice {
  id: number;
  text: string;
}

function emptyPanels(): PanelMap {
  const panels = {} as PanelMap;
  for (const s of SERVICES) panels[s] = null;
  return panels;
}

/**
 * Client-side mirror of the run.
 *
 * Envelopes are applied in arrival order and deduplicated by seq, so a
 * reconnect that replays already-seen events is harmless. Panels hold the
 * latest ui_event payload per service - the same thing the server's snapshot
 * reports - and every alert-flagged ui_event appends exactly one toast.
 */
export class DashboardStore {
  readonly panels: PanelMap = emptyPanels();
  readonly toasts: Toast[] = [];
  readonly notices: Notice[] = [];
  lastSeq = 0;
  online = false;
  counts = { reading: 0, command: 0, effect: 0 };

  private pending = new Map<ServiceId, Pending>();
  private listeners = new Set<() => void>();
  private nextNoticeId = 1;

  subscribe(fn: () => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  setOnline(online: boolean): void {
    if (this.online === online) return;
    this.online = online;
    this.emit();
  }

  /** Apply one envelope; false when it was a duplicate (or stale) seq. */
  apply(env: Envelope): boolean {
    if (env.seq <= this.lastSeq) return false;
    this.lastSeq = env.seq;
    this.counts[env.type] += 1;

    if (env.type === "effect" && env.kind === "ui_event" && isServiceId(env.target)) {
      const payload = env.payload as unknown as PanelPayload;
      this.panels[env.target] = payload;
      if (payload.alert === true) {
        this.toasts.push({
          seq: env.seq,
          service: env.target,
          text: `${env.target}: ${payload.event}`,
        });
      }
      this.settlePending(env.target, payload);
    }
    this.emit();
    return true;
  }

  applyAll(envs: Iterable<Envelope>): number {
    let applied = 0;
    for (const env of envs) if (this.apply(env)) applied += 1;
    return applied;
  }

  /** Record an optimistic command awaiting its confirming ui_event. */
  notePending(service: ServiceId, action: string, match: Record<string, unknown>, sentAt: number): void {
    this.pending.set(service, { action, match, sentAt });
    this.emit();
  }

  pendingFor(service: ServiceId): Pending | undefined {
    return this.pending.get(service);
  }

  /** Withdraw an optimistic command (the POST itself was rejected). */
  clearPending(service: ServiceId): void {
    if (this.pending.delete(service)) this.emit();
  }

  private settlePending(service: ServiceId, payload: PanelPayload): void {
    const p = this.pending.get(service);
    if (!p) return;
    const state = (payload.state ?? {}) as Record<string, unknown>;
    if (subsetMatch(state, p.match)) this.pending.delete(service);
  }

  /** Roll back commands unconfirmed after `timeoutMs`; one notice each. */
  expirePending(now: number, timeoutMs: number): ServiceId[] {
    const expired: ServiceId[] = [];
    for (const [service, p] of this.pending) {
      if (now - p.sentAt >= timeoutMs) {
        this.pending.delete(service);
        this.notices.push({
          id: this.nextNoticeId++,
          text: `${service} ${p.action}: not confirmed, rolled back`,
        });
        expired.push(service);
      }
    }
    if (expired.length) this.emit();
    return expired;
  }

  addNotice(text: string): void {
    this.notices.push({ id: this.nextNoticeId++, text });
    this.emit();
  }
}
