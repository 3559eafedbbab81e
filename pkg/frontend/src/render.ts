// Canvas renderer: three orthographic projections of the workspace, the
// pedal minimap, and the live score strip. Every number drawn here comes
// out of the snapshot payload verbatim.

import { SnapshotDoc, Vec3 } from "./protocol.js";

const ARM_COLORS: Record<string, string> = { left: "#4da3ff", right: "#ffb347" };
const VIEW_W = 310;
const VIEW_H = 300;
const SCALE = 360; // pixels per meter

interface Viewport {
  label: string;
  x0: number;
  y0: number;
  // world point -> [u, v] in view space (meters)
  project: (p: Vec3) => [number, number];
}

const VIEWS: Viewport[] = [
  { label: "top (x up, y right)", x0: 10, y0: 10, project: (p) => [p[1], p[0]] },
  { label: "side (z up, x right)", x0: 20 + VIEW_W, y0: 10, project: (p) => [p[0], p[2]] },
  { label: "front (z up, y right)", x0: 30 + 2 * VIEW_W, y0: 10, project: (p) => [p[1], p[2]] },
];

export class ConsoleRenderer {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
  }

  render(snap: SnapshotDoc) {
    const ctx = this.ctx;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    for (const view of VIEWS) {
      this.drawView(view, snap);
    }
    this.drawMinimap(snap);
    this.drawHud(snap);
  }

  private toPixel(view: Viewport, p: Vec3): [number, number] {
    // center every viewport on the work zone
    const [u, v] = view.project(p);
    const [cu, cv] = view.project([0.4, 0, 0.28]);
    const x = view.x0 + VIEW_W / 2 + (u - cu) * SCALE;
    const y = view.y0 + VIEW_H / 2 - (v - cv) * SCALE;
    return [x, y];
  }

  private drawView(view: Viewport, snap: SnapshotDoc) {
    const ctx = this.ctx;
    ctx.save();
    ctx.beginPath();
    ctx.rect(view.x0, view.y0, VIEW_W, VIEW_H);
    ctx.clip();
    ctx.strokeStyle = "#2a3240";
    ctx.strokeRect(view.x0, view.y0, VIEW_W, VIEW_H);
    ctx.fillStyle = "#8a93a5";
    ctx.font = "11px sans-serif";
    ctx.fillText(view.label, view.x0 + 6, view.y0 + 14);

    for (const [oid, pos] of Object.entries(snap.objects)) {
      const [x, y] = this.toPixel(view, pos);
      ctx.fillStyle = "#7fd49b";
      ctx.beginPath();
      ctx.arc(x, y, 5, 0, Math.PI * 2);
      ctx.fill();
      ctx.fillStyle = "#5f6b7d";
      ctx.fillText(oid, x + 7, y + 3);
    }

    for (const side of ["left", "right"] as const) {
      const arm = snap.arms[side];
      ctx.strokeStyle = ARM_COLORS[side];
      ctx.lineWidth = 2.5;
      ctx.beginPath();
      arm.frames.forEach((p, i) => {
        const [x, y] = this.toPixel(view, p);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
      ctx.lineWidth = 1;
      // actual tip: solid dot; target: ring
      const [ax, ay] = this.toPixel(view, arm.ee.pos);
      ctx.fillStyle = ARM_COLORS[side];
      ctx.beginPath();
      ctx.arc(ax, ay, 4, 0, Math.PI * 2);
      ctx.fill();
      const [tx, ty] = this.toPixel(view, arm.target.pos);
      ctx.strokeStyle = "#ffffff";
      ctx.beginPath();
      ctx.arc(tx, ty, 6, 0, Math.PI * 2);
      ctx.stroke();
    }

    // camera marker
    const [cx, cy] = this.toPixel(view, snap.camera.pose.pos);
    ctx.strokeStyle = snap.camera.thirty_degree ? "#e06fff" : "#9a6fff";
    ctx.strokeRect(cx - 4, cy - 4, 8, 8);
    ctx.restore();
  }

  private drawMinimap(snap: SnapshotDoc) {
    const ctx = this.ctx;
    const x0 = 10;
    const y0 = 330;
    const scale = 420; // board meters -> px
    const boardW = 0.64 * scale;
    const boardH = 0.44 * scale;
    const mapX = (x: number) => x0 + boardW / 2 + x * scale;
    const mapY = (y: number) => y0 + boardH / 2 - y * scale;
    ctx.fillStyle = "#171d26";
    ctx.fillRect(x0, y0, boardW, boardH);
    ctx.strokeStyle = "#2a3240";
    ctx.strokeRect(x0, y0, boardW, boardH);
    ctx.font = "10px sans-serif";
    for (const pedal of snap.minimap.pedals) {
      const px = mapX(pedal.min[0]);
      const py = mapY(pedal.max[1]);
      const w = (pedal.max[0] - pedal.min[0]) * scale;
      const h = (pedal.max[1] - pedal.min[1]) * scale;
      if (pedal.black) {
        ctx.fillStyle = "#000000";
        ctx.fillRect(px, py, w, h);
      } else {
        ctx.fillStyle = "#232c3a";
        ctx.fillRect(px, py, w, h);
      }
      ctx.strokeStyle = "#46536a";
      ctx.strokeRect(px, py, w, h);
      ctx.fillStyle = pedal.black ? "#e8edf5" : "#8a93a5";
      ctx.fillText(pedal.id, px + 3, py + h / 2 + 3);
    }
    for (const foot of snap.minimap.feet) {
      if (!foot.visible) continue;
      ctx.strokeStyle = foot.side === "left" ? "#4da3ff" : "#ffb347";
      ctx.lineWidth = 2;
      ctx.beginPath();
      // the server-provided scale grows the icon with foot height
      ctx.arc(mapX(foot.pos[0]), mapY(foot.pos[1]), 9 * foot.scale, 0, Math.PI * 2);
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    ctx.fillStyle = "#8a93a5";
    ctx.fillText("pedal minimap", x0 + 4, y0 + boardH + 14);
  }

  private drawHud(snap: SnapshotDoc) {
    const ctx = this.ctx;
    const x0 = 320;
    let y = 350;
    ctx.font = "13px monospace";
    ctx.fillStyle = "#d7dee8";
    const s = snap.score_preview;
    ctx.fillText(
      `score ${s.total.toFixed(1)}  (time ${s.time_points.toFixed(1)} + ` +
        `motion ${s.motion_points.toFixed(1)} - penalties ${s.deducted.toFixed(1)})`,
      x0, y);
    y += 20;
    const p = snap.progress;
    ctx.fillText(
      `action ${p.action_index + (p.halted ? 0 : 1)}/${p.action_count} ` +
        `${p.kind ?? "-"} -> ${p.target ?? "-"}  rep ${p.reps_done}/${p.repetitions}`,
      x0, y);
    y += 20;
    for (const side of ["left", "right"] as const) {
      const arm = snap.arms[side];
      ctx.fillStyle = ARM_COLORS[side];
      ctx.fillText(
        `${side.padEnd(5)} ${arm.mode.padEnd(14)} grip ${arm.grip.toFixed(2)}`,
        x0, y);
      y += 18;
    }
    ctx.fillStyle = "#d7dee8";
    ctx.fillText(`tick ${snap.tick}  t ${(snap.t_ms / 1000).toFixed(2)}s` +
      (snap.camera.thirty_degree ? "  [30deg view]" : ""), x0, y);
    y += 18;
    if (snap.tracking_warning) {
      ctx.fillStyle = "#ff7b72";
      ctx.fillText("tracking warning: a foot tracker is invalid", x0, y);
    }
  }
}
