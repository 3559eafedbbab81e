// Maps mouse/keyboard state onto the input-frame stream. The mouse steers
// one master at a time; the feet are emulated by holding pedal keys, which
// park a virtual foot on the pedal's rectangle (taken from the last
// snapshot's minimap, so the layout is server-authoritative too).
//
// Key map (also shown in the UI):
//   drag          master x/y        wheel        master z
//   shift+drag    master yaw/pitch  R / F        master roll +/-
//   1 / 2         bind mouse to left / right master
//   G             toggle gripper jaws on the bound master
//   C (left foot) clutch pedal      V (right foot) camera pedal
//   B (left foot) 30-degree pedal   N (right foot) switch pedal

import {
  FramePayload,
  MinimapDoc,
  Quat,
  Vec2,
  axisAngleQuat,
  quatMultiply,
  quatNormalize,
} from "./protocol.js";

const DRAG_SCALE = 0.001; // meters of master travel per pixel
const WHEEL_SCALE = 0.0004; // meters per wheel delta unit
const TURN_SCALE = 0.005; // radians per pixel with shift held
const ROLL_STEP = 0.1; // radians per R/F press
const FOOT_PARK: Record<string, Vec2> = { left: [-0.2, -0.35], right: [0.2, -0.35] };
const FOOT_RAISED = 0.05; // meters above the board when not pressing

// each foot owns a preference-ordered set of pedals
const FOOT_KEYS: Record<string, { key: string; pedal: string }[]> = {
  left: [
    { key: "KeyC", pedal: "clutch" },
    { key: "KeyB", pedal: "thirty_degree" },
  ],
  right: [
    { key: "KeyV", pedal: "camera" },
    { key: "KeyN", pedal: "switch" },
  ],
};

interface MasterState {
  pos: [number, number, number];
  quat: Quat;
  grip: number;
}

export class InputMapper {
  bound: "left" | "right" = "right";
  private masters: Record<string, MasterState> = {
    left: { pos: [0, 0, 0], quat: [1, 0, 0, 0], grip: 0 },
    right: { pos: [0, 0, 0], quat: [1, 0, 0, 0], grip: 0 },
  };
  private keysDown = new Set<string>();
  private pedalCenters = new Map<string, Vec2>();
  private lastT = 0; // t=0 belongs to the server's session-start frame

  /** Refresh pedal rectangle centers from a snapshot's minimap. */
  updateLayout(minimap: MinimapDoc) {
    for (const pedal of minimap.pedals) {
      this.pedalCenters.set(pedal.id, [
        (pedal.min[0] + pedal.max[0]) / 2,
        (pedal.min[1] + pedal.max[1]) / 2,
      ]);
    }
  }

  /** Pointer drag in canvas pixels; shift steers orientation instead. */
  drag(dx: number, dy: number, shift: boolean) {
    const m = this.masters[this.bound];
    if (shift) {
      const yaw = axisAngleQuat([0, 0, 1], dx * TURN_SCALE);
      const pitch = axisAngleQuat([0, 1, 0], dy * TURN_SCALE);
      m.quat = quatNormalize(quatMultiply(quatMultiply(yaw, pitch), m.quat));
    } else {
      // screen right = +y (lateral), screen up = +x (toward the scene)
      m.pos[1] += dx * DRAG_SCALE;
      m.pos[0] += -dy * DRAG_SCALE;
    }
  }

  wheel(delta: number) {
    this.masters[this.bound].pos[2] += -delta * WHEEL_SCALE;
  }

  /** Returns true when the key belongs to the console (callers preventDefault). */
  keyDown(code: string): boolean {
    if (code === "Digit1") {
      this.bound = "left";
      return true;
    }
    if (code === "Digit2") {
      this.bound = "right";
      return true;
    }
    if (code === "KeyG") {
      if (!this.keysDown.has(code)) {
        const m = this.masters[this.bound];
        m.grip = m.grip >= 0.5 ? 0 : 1;
      }
      this.keysDown.add(code);
      return true;
    }
    if (code === "KeyR" || code === "KeyF") {
      const m = this.masters[this.bound];
      const roll = axisAngleQuat([1, 0, 0], code === "KeyR" ? ROLL_STEP : -ROLL_STEP);
      m.quat = quatNormalize(quatMultiply(roll, m.quat));
      this.keysDown.add(code);
      return true;
    }
    for (const side of ["left", "right"]) {
      if (FOOT_KEYS[side].some((fk) => fk.key === code)) {
        this.keysDown.add(code);
        return true;
      }
    }
    return false;
  }

  keyUp(code: string) {
    this.keysDown.delete(code);
  }

  gripOf(side: "left" | "right"): number {
    return this.masters[side].grip;
  }

  /** The pedal a foot currently holds, or null when parked. */
  activePedal(side: string): string | null {
    for (const fk of FOOT_KEYS[side]) {
      if (this.keysDown.has(fk.key)) return fk.pedal;
    }
    return null;
  }

  /** Build the frame for time tMs; timestamps are forced strictly increasing. */
  buildFrame(tMs: number): FramePayload {
    const t = Math.max(Math.round(tMs), this.lastT + 1);
    this.lastT = t;
    const masters: Record<string, { pos: number[]; quat: number[]; grip: number; valid: boolean }> = {};
    for (const side of ["left", "right"]) {
      const m = this.masters[side];
      masters[side] = { pos: [...m.pos], quat: [...m.quat], grip: m.grip, valid: true };
    }
    const feet = ["left", "right"].map((side) => {
      const pedal = this.activePedal(side);
      const center = pedal ? this.pedalCenters.get(pedal) : undefined;
      if (pedal && center) {
        return { side, pos: [...center], height: 0, valid: true };
      }
      return { side, pos: [...FOOT_PARK[side]], height: FOOT_RAISED, valid: true };
    });
    return { t, left: masters.left, right: masters.right, feet };
  }
}
