import { ApiClient, ApiError, pumpEvents } from "./api.js";
import { ChartSeries } from "./charts.js";
import { confirmationMatch } from "./commands.js";
import { renderApp } from "./render.js";
import { DashboardStore } from "./store.js";
import { CommandRequest } from "./types.js";

const COMMAND_TIMEOUT_MS = 5000;
const CHART_REFRESH_MS = 5000;

/** The default telemetry channels and their read keys. */
const CHANNELS: Array<{ id: number; key: string; fields: number[] }> = [
  { id: 1, key: "RKEY1GARDEN", fields: [1, 2, 3, 4] },
  { id: 2, key: "RKEY2SAFETY", fields: [1, 2, 3, 4, 5] },
  { id: 3, key: "RKEY3AMBIENT", fields: [1, 2, 3, 4] },
  { id: 4, key: "RKEY4OCCUPANCY", fields: [1, 2, 3, 4, 5] },
];

function apiBase(): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  return fromQuery ?? location.origin;
}

function start(): void {
  const store = new DashboardStore();
  const client = new ApiClient(apiBase());
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const send = (cmd: CommandRequest): void => {
    // register the expectation before POSTing: the confirming event can
    // arrive on the stream before the 202 does
    store.notePending(cmd.service, cmd.action, confirmationMatch(cmd), Date.now());
    client.postCommand(cmd).catch((err: unknown) => {
      store.clearPending(cmd.service);
      const text = err instanceof ApiError ? err.message : "command failed";
      store.addNotice(`${cmd.service} ${cmd.action}: ${text}`);
    });
  };

  const app = renderApp(root, store, send);

  pumpEvents(client, store).catch(() => store.setOnline(false));

  setInterval(() => store.expirePending(Date.now(), COMMAND_TIMEOUT_MS), 1000);

  async function refreshCharts(): Promise<void> {
    for (const { id, key, fields } of CHANNELS) {
      try {
        const feed = await client.fetchFeed(id, key, 100);
        const series = fields.map((f) => ChartSeries.fromFeed(feed, f));
        const name = String(feed.channel.name ?? id);
        app.setChart(id, `Channel ${id} - ${name}`, series);
      } catch {
        // chart data is best-effort; the panel grid is the primary surface
      }
    }
  }
  refreshCharts();
  setInterval(refreshCharts, CHART_REFRESH_MS);
}

start();
