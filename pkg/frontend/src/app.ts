// Console wiring: one websocket session per page, a fixed-rate input pump,
// and strictly server-authoritative rendering.

import { ClickSounder } from "./audio.js";
import { InputMapper } from "./input.js";
import { ConsoleRenderer } from "./render.js";
import {
  EventDoc,
  ReportDoc,
  decodeMessage,
  encodeFrame,
  encodeStart,
} from "./protocol.js";

const INPUT_INTERVAL_MS = 30; // ~33 Hz, above the 30 Hz floor

export interface ConsoleElements {
  canvas: HTMLCanvasElement;
  status: HTMLElement;
  events: HTMLElement;
  report: HTMLElement;
  scenarioSelect: HTMLSelectElement;
  connectButton: HTMLButtonElement;
}

export class ConsoleApp {
  readonly input = new InputMapper();
  readonly clicks = new ClickSounder();
  private renderer: ConsoleRenderer;
  private ws: WebSocket | null = null;
  private sessionId = "";
  private timer: number | null = null;
  private t0 = 0;
  private dragging = false;
  private lastPointer: [number, number] = [0, 0];

  constructor(private el: ConsoleElements) {
    this.renderer = new ConsoleRenderer(el.canvas);
    this.bindDom();
    this.setStatus("disconnected", "#ff7b72");
    void this.loadScenarios();
  }

  private setStatus(text: string, color = "#7fd49b") {
    this.el.status.textContent = text;
    this.el.status.style.color = color;
  }

  private async loadScenarios() {
    try {
      const res = await fetch("/scenarios");
      const doc = (await res.json()) as { scenarios: string[] };
      this.el.scenarioSelect.innerHTML = "";
      for (const id of doc.scenarios) {
        const opt = document.createElement("option");
        opt.value = id;
        opt.textContent = id;
        this.el.scenarioSelect.appendChild(opt);
      }
    } catch {
      this.setStatus("scenario list unavailable (open via teletwin serve --static)",
        "#ffb347");
    }
  }

  connect() {
    if (this.ws) this.disconnect();
    const url = `ws://${location.host}/ws`;
    const ws = new WebSocket(url);
    this.ws = ws;
    this.setStatus("connecting...", "#ffb347");
    ws.onopen = () => {
      this.setStatus("connected, starting session");
      ws.send(encodeStart(this.el.scenarioSelect.value));
      this.t0 = performance.now();
      this.timer = window.setInterval(() => this.pumpInput(), INPUT_INTERVAL_MS);
    };
    ws.onmessage = (event: MessageEvent) => this.onMessage(String(event.data));
    ws.onclose = () => {
      this.setStatus("disconnected (input suppressed); reconnect to continue",
        "#ff7b72");
      this.stopPump();
      this.ws = null;
    };
    ws.onerror = () => this.setStatus("connection error", "#ff7b72");
  }

  disconnect() {
    this.stopPump();
    this.ws?.close();
    this.ws = null;
  }

  private stopPump() {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private pumpInput() {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN || !this.sessionId) return;
    const frame = this.input.buildFrame(performance.now() - this.t0);
    this.ws.send(encodeFrame(this.sessionId, frame));
  }

  private onMessage(raw: string) {
    const msg = decodeMessage(raw);
    if (!msg) {
      console.error("malformed server message dropped:", raw.slice(0, 200));
      return;
    }
    this.sessionId = msg.session_id || this.sessionId;
    switch (msg.type) {
      case "snapshot":
        this.input.updateLayout(msg.payload.minimap);
        this.clicks.onSnapshot(msg.payload.minimap.click);
        this.renderer.render(msg.payload);
        this.setStatus(`session ${this.sessionId} live, tick ${msg.payload.tick}`);
        break;
      case "event":
        this.appendEvent(msg.payload);
        break;
      case "report":
        this.showReport(msg.payload);
        this.stopPump();
        break;
      case "error":
        this.appendEvent({ tick: -1, kind: `error:${msg.payload.category}`,
                           subject: msg.payload.message });
        break;
    }
  }

  private appendEvent(event: EventDoc) {
    const li = document.createElement("li");
    li.textContent = event.tick >= 0
      ? `tick ${event.tick}: ${event.kind} ${event.subject}`
      : `${event.kind} ${event.subject}`;
    this.el.events.prepend(li);
    while (this.el.events.children.length > 12) {
      this.el.events.removeChild(this.el.events.lastChild as Node);
    }
  }

  private showReport(report: ReportDoc) {
    // mirror the report fields verbatim; no client-side math
    const lines = [
      `scenario ${report.scenario_id}`,
      `status   ${report.status}`,
      `duration ${report.duration_s} s (${report.end_tick} ticks)`,
      `time     ${report.efficiency.total_time.points} pts`,
      `motion   ${report.efficiency.economy_of_motion.points} pts`,
      ...report.penalties.map((p) => `penalty  ${p.kind} x${p.count} -> -${p.deducted}`),
      `total    ${report.total}`,
    ];
    this.el.report.textContent = lines.join("\n");
    this.el.report.style.display = "block";
    this.setStatus(`session finished: ${report.status}, total ${report.total}`);
  }

  private bindDom() {
    const canvas = this.el.canvas;
    canvas.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      this.lastPointer = [e.clientX, e.clientY];
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      const dx = e.clientX - this.lastPointer[0];
      const dy = e.clientY - this.lastPointer[1];
      this.lastPointer = [e.clientX, e.clientY];
      this.input.drag(dx, dy, e.shiftKey);
    });
    canvas.addEventListener("pointerup", () => (this.dragging = false));
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.input.wheel(e.deltaY);
    }, { passive: false });
    window.addEventListener("keydown", (e) => {
      // repeats are safe: grip toggling is edge-guarded in the mapper
      if (this.input.keyDown(e.code)) e.preventDefault();
    });
    window.addEventListener("keyup", (e) => this.input.keyUp(e.code));
    this.el.connectButton.addEventListener("click", () => this.connect());
  }
}
