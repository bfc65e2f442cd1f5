import { ChartSeries } from "./charts.js";
import { DashboardStore, Pending } from "./store.js";
import { CommandRequest, PanelPayload, SERVICES, ServiceId } from "./types.js";

export type SendFn = (cmd: CommandRequest) => void;

const PANEL_TITLES: Record<ServiceId, string> = {
  parking: "Parking",
  irrigation: "Irrigation",
  intrusion: "Intrusion",
  door: "Door",
  firegas: "Fire / Gas",
  lighting: "Lighting",
  medicine: "Medicine",
  iaq: "Air Quality",
};

function h(
  tag: string,
  attrs: Record<string, string | boolean | ((ev: Event) => void)> = {},
  ...children: Array<Node | string>
): HTMLElement {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      el.addEventListener(key, value);
    } else if (typeof value === "boolean") {
      if (value) el.setAttribute(key, "");
      if (key === "disabled") (el as HTMLButtonElement).disabled = value;
    } else {
      el.setAttribute(key, value);
    }
  }
  el.append(...children);
  return el;
}

function badge(text: string, tone: "ok" | "warn" | "bad" | "dim" = "dim"): HTMLElement {
  return h("span", { class: `badge badge-${tone}` }, text);
}

function onOff(value: unknown): HTMLElement {
  return badge(value ? "on" : "off", value ? "ok" : "dim");
}

function num(value: unknown, digits = 1): string {
  const n = Number(value);
  return Number.isFinite(n) ? n.toFixed(digits) : "--";
}

function row(label: string, ...content: Array<Node | string>): HTMLElement {
  return h("div", { class: "row" }, h("span", { class: "row-label" }, label), ...content);
}

function waiting(): HTMLElement {
  return h("p", { class: "waiting" }, "waiting for first event...");
}

// -- per-service panel bodies ------------------------------------------------

function parkingBody(p: PanelPayload, send: SendFn): HTMLElement[] {
  const s = p.state;
  const slots = Array.isArray(s.slots) ? (s.slots as unknown[]) : [];
  const dots = slots.map((occupied, i) =>
    h("span", {
      class: `slot ${occupied ? "slot-occupied" : "slot-free"}`,
      title: `slot ${i + 1} ${occupied ? "occupied" : "free"}`,
    }),
  );
  return [
    row("slots", ...dots),
    row("free", String(s.free_count ?? "--")),
    row("gate", badge(String(s.gate ?? "--"), s.gate === "open" ? "ok" : "dim")),
    h("div", { class: "controls" },
      h("button", { click: () => send({ service: "parking", action: "arrival" }) }, "Arrival"),
    ),
  ];
}

function irrigationBody(p: PanelPayload): HTMLElement[] {
  const s = p.state;
  return [
    row("soil", `${num(s.soil_pct)} %`),
    row("tank", `${num(s.tank_pct)} %`),
    row("air", `${num(s.temp_C)} C / ${num(s.hum_pct)} %`),
    row("watering", onOff(s.watering_pump)),
    row("supply", onOff(s.supply_pump)),
    row("grow light", onOff(s.photo_leds)),
  ];
}

function intrusionBody(p: PanelPayload, send: SendFn): HTMLElement[] {
  const s = p.state;
  const out: HTMLElement[] = [];
  if (s.alarm_active) {
    out.push(h("div", { class: "alert-banner" }, "Intrusion alarm"));
  }
  out.push(
    row("armed", badge(s.armed ? "armed" : "disarmed", s.armed ? "ok" : "warn")),
    h("div", { class: "controls" },
      h("button", { click: () => send({ service: "intrusion", action: "arm" }) }, "Arm"),
      h("button", { click: () => send({ service: "intrusion", action: "disarm" }) }, "Disarm"),
    ),
  );
  return out;
}

function doorBody(p: PanelPayload, send: SendFn): HTMLElement[] {
  const s = p.state;
  const out: HTMLElement[] = [];
  if (s.locked_out) out.push(h("div", { class: "alert-banner" }, "Locked out"));
  out.push(
    row("door", badge(String(s.door ?? "--"), s.door === "open" ? "ok" : "dim")),
    row("failed tries", String(s.failed_attempts ?? 0)),
    h("div", { class: "controls" },
      h("button", { click: () => send({ service: "door", action: "open" }) }, "Open"),
      h("button", { click: () => send({ service: "door", action: "close" }) }, "Close"),
    ),
  );
  return out;
}

function firegasBody(p: PanelPayload): HTMLElement[] {
  const s = p.state;
  const out: HTMLElement[] = [];
  if (s.alarm_active) {
    out.push(h("div", { class: "alert-banner" }, "There is Danger, Not safe here"));
  }
  out.push(
    row("flame", badge(s.flame ? "FLAME" : "clear", s.flame ? "bad" : "ok")),
    row("gas", `${num(s.gas_ppm, 0)} ppm`),
    row("sprayer", onOff(s.sprayer)),
    row("window", badge(String(s.window ?? "--"), s.window === "open" ? "warn" : "dim")),
  );
  return out;
}

function rgbToHex(rgb: unknown): string {
  if (!Array.isArray(rgb) || rgb.length !== 3) return "#000000";
  return "#" + rgb.map((c) => Number(c).toString(16).padStart(2, "0")).join("");
}

export function hexToRgb(hex: string): [number, number, number] {
  const m = /^#?([0-9a-f]{6})$/i.exec(hex);
  if (!m || !m[1]) return [0, 0, 0];
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

function lightingBody(p: PanelPayload, send: SendFn, pending?: Pending): HTMLElement[] {
  const s = p.state;
  const lights = (s.lights ?? {}) as Record<string, unknown>;
  const zoneRows = Object.keys(lights).sort().map((zone) =>
    row(
      zone,
      onOff(lights[zone]),
      h("button", {
        click: () => send({
          service: "lighting",
          action: "set_light",
          params: { zone, on: !lights[zone] },
        }),
      }, "toggle"),
    ),
  );
  const swatch = h("span", {
    class: `swatch${pending ? " swatch-pending" : ""}`,
    style: `background:${rgbToHex(pending ? pending.match.rgb : s.rgb)}`,
    title: pending ? "pending confirmation" : "confirmed",
  });
  const picker = h("input", {
    type: "color",
    value: rgbToHex(s.rgb),
    change: (ev) => {
      const hex = (ev.target as HTMLInputElement).value;
      send({ service: "lighting", action: "set_rgb", params: { rgb: hexToRgb(hex) } });
    },
  });
  return [...zoneRows, row("rgb", swatch, picker)];
}

function medicineBody(p: PanelPayload, send: SendFn, pending?: Pending): HTMLElement[] {
  const s = p.state;
  const out: HTMLElement[] = [];
  if (s.escalated) out.push(h("div", { class: "alert-banner" }, "Dose escalated"));
  const select = h("select", {
    change: (ev) => {
      const mode = (ev.target as HTMLSelectElement).value;
      send({ service: "medicine", action: "set_mode", params: { mode } });
    },
  }) as HTMLSelectElement;
  for (const mode of ["off", "once", "twice", "thrice"]) {
    const opt = h("option", { value: mode }, mode) as HTMLOptionElement;
    opt.selected = mode === s.mode;
    select.append(opt);
  }
  out.push(
    row("mode", select, pending ? badge("pending", "warn") : ""),
    row("dose pending", badge(s.pending ? "yes" : "no", s.pending ? "warn" : "dim")),
    h("div", { class: "controls" },
      h("button", { click: () => send({ service: "medicine", action: "acknowledge" }) }, "Acknowledge"),
    ),
  );
  return out;
}

function iaqBody(p: PanelPayload): HTMLElement[] {
  const s = p.state;
  const level = String(s.level ?? "unknown");
  const tone = level === "good" ? "ok" : level === "medium" ? "warn" : "bad";
  const title = level.charAt(0).toUpperCase() + level.slice(1);
  return [
    h("div", { class: `level level-${level}` }, `Air Quality Level ${title}`),
    row("ppm", num(s.ppm, 0)),
    row("fan", onOff(s.fan)),
    row("purifier", onOff(s.purifier)),
    h("span", { class: `level-badge badge-${tone}` }),
  ];
}

function panelBody(service: ServiceId, p: PanelPayload, send: SendFn, pending?: Pending): HTMLElement[] {
  switch (service) {
    case "parking": return parkingBody(p, send);
    case "irrigation": return irrigationBody(p);
    case "intrusion": return intrusionBody(p, send);
    case "door": return doorBody(p, send);
    case "firegas": return firegasBody(p);
    case "lighting": return lightingBody(p, send, pending);
    case "medicine": return medicineBody(p, send, pending);
    case "iaq": return iaqBody(p);
  }
}

// -- charts -------------------------------------------------------------------

export function drawSeries(canvas: HTMLCanvasElement, series: ChartSeries[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const palette = ["#4da3ff", "#69d18c", "#ffb84d", "#ff6b81", "#b48cff", "#50e3c2", "#f2d24d", "#9aa7b3"];
  series.forEach((s, idx) => {
    const pts = s.points;
    if (pts.length < 2) return;
    const { min, max } = s.range();
    const t0 = pts[0]!.t;
    const t1 = pts[pts.length - 1]!.t;
    const spanT = t1 - t0 || 1;
    ctx.strokeStyle = palette[idx % palette.length]!;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    pts.forEach((pt, i) => {
      const x = ((pt.t - t0) / spanT) * (width - 8) + 4;
      const y = height - 4 - ((pt.value - min) / (max - min)) * (height - 8);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  });
}

// -- app ----------------------------------------------------------------------

export interface AppHandles {
  /** re-render everything from the store (also wired to store changes) */
  refresh(): void;
  /** update one channel chart from fresh series */
  setChart(channelId: number, title: string, series: ChartSeries[]): void;
}

export function renderApp(root: HTMLElement, store: DashboardStore, send: SendFn): AppHandles {
  root.textContent = "";
  const statusDot = h("span", { class: "dot" });
  const statusText = h("span", {}, "connecting");
  const offline = h("div", { class: "offline-banner" }, "Server unreachable - controls disabled");
  const panelsEl = h("div", { class: "panels" });
  const chartsEl = h("div", { class: "charts" });
  const toastsEl = h("div", { class: "toasts" });

  root.append(
    h("header", {},
      h("h1", {}, "Building Console"),
      h("div", { class: "status" }, statusDot, statusText),
    ),
    offline,
    panelsEl,
    chartsEl,
    toastsEl,
  );

  const chartFigures = new Map<number, { canvas: HTMLCanvasElement; caption: HTMLElement }>();
  const dismissed = new Set<number>();

  function refresh(): void {
    statusDot.className = `dot ${store.online ? "dot-on" : "dot-off"}`;
    statusText.textContent = store.online ? `live - ${store.lastSeq} events` : "offline";
    offline.style.display = store.online ? "none" : "block";

    panelsEl.textContent = "";
    for (const service of SERVICES) {
      const payload = store.panels[service];
      const pending = store.pendingFor(service);
      const article = h("article", { class: `panel panel-${service}` },
        h("h2", {}, PANEL_TITLES[service]),
        ...(payload ? panelBody(service, payload, send, pending) : [waiting()]),
      );
      if (!store.online) {
        for (const b of article.querySelectorAll("button, input, select")) {
          (b as HTMLButtonElement).disabled = true;
        }
      }
      panelsEl.append(article);
    }

    toastsEl.textContent = "";
    const visible = store.toasts.filter((t) => !dismissed.has(t.seq)).slice(-5);
    for (const toast of visible) {
      toastsEl.append(
        h("div", { class: "toast" },
          h("span", {}, toast.text),
          h("button", {
            class: "toast-x",
            click: () => {
              dismissed.add(toast.seq);
              refresh();
            },
          }, "x"),
        ),
      );
    }
    for (const notice of store.notices.slice(-2)) {
      toastsEl.append(h("div", { class: "toast toast-notice" }, notice.text));
    }
  }

  function setChart(channelId: number, title: string, series: ChartSeries[]): void {
    let fig = chartFigures.get(channelId);
    if (!fig) {
      const canvas = h("canvas", { width: "320", height: "96" }) as HTMLCanvasElement;
      const caption = h("figcaption", {});
      chartsEl.append(h("figure", { class: "chart" }, h("h3", {}, title), canvas, caption));
      fig = { canvas, caption };
      chartFigures.set(channelId, fig);
    }
    drawSeries(fig.canvas, series);
    fig.caption.textContent = series
      .map((s) => {
        const last = s.points[s.points.length - 1];
        return `${s.label}: ${last ? last.value.toFixed(1) : "--"}`;
      })
      .join("  ");
  }

  store.subscribe(refresh);
  refresh();
  return { refresh, setChart };
}
