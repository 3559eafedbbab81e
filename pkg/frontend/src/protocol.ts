// Wire types for the teletwin session service. Everything rendered comes
// straight from these payloads; the console never recomputes kinematics
// or scores.

export type Vec3 = [number, number, number];
export type Vec2 = [number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export interface PoseDoc {
  pos: Vec3;
  quat: Quat;
}

export interface ArmDoc {
  theta: number[];
  frames: Vec3[]; // joint frame positions root to tip, 7 points
  ee: PoseDoc;
  target: PoseDoc;
  grip: number;
  mode: string;
}

export interface MinimapPedalDoc {
  id: string;
  min: Vec2;
  max: Vec2;
  black: boolean;
}

export interface MinimapFootDoc {
  side: string;
  pos: Vec2;
  scale: number;
  visible: boolean;
}

export interface MinimapDoc {
  pedals: MinimapPedalDoc[];
  feet: MinimapFootDoc[];
  click: boolean;
}

export interface ScorePreviewDoc {
  time_points: number;
  motion_points: number;
  deducted: number;
  total: number;
  failed: boolean;
}

export interface ProgressDoc {
  action_index: number;
  action_count: number;
  reps_done: number;
  repetitions: number;
  kind: string | null;
  target: string | null;
  param: number | null;
  halted: boolean;
  completed: boolean;
  failed: boolean;
}

export interface SnapshotDoc {
  tick: number;
  t_ms: number;
  arms: { left: ArmDoc; right: ArmDoc };
  camera: { pose: PoseDoc; thirty_degree: boolean };
  pedals: Record<string, boolean>;
  minimap: MinimapDoc;
  objects: Record<string, Vec3>;
  progress: ProgressDoc;
  score_preview: ScorePreviewDoc;
  tracking_warning: boolean;
}

export interface EventDoc {
  tick: number;
  kind: string;
  subject: string;
}

export interface ReportDoc {
  format: string;
  scenario_id: string;
  status: string;
  duration_s: number;
  end_tick: number;
  efficiency: {
    total_time: { value_s: number; points: number };
    economy_of_motion: { value_m: number; points: number };
  };
  penalties: { kind: string; count: number; deducted: number }[];
  total: number;
}

export interface MasterPayload {
  pos: number[];
  quat: number[];
  grip: number;
  valid: boolean;
}

export interface FootPayload {
  side: string;
  pos: number[];
  height: number;
  valid: boolean;
}

export interface FramePayload {
  t: number;
  left: MasterPayload;
  right: MasterPayload;
  feet: FootPayload[];
}

export type ServerMessage =
  | { type: "snapshot"; session_id: string; payload: SnapshotDoc }
  | { type: "event"; session_id: string; payload: EventDoc }
  | { type: "report"; session_id: string; payload: ReportDoc }
  | { type: "error"; session_id: string; payload: { category: string; message: string } };

export function encodeStart(scenarioId: string): string {
  return JSON.stringify({
    type: "start_session",
    session_id: "",
    payload: { scenario_id: scenarioId },
  });
}

export function encodeFrame(sessionId: string, frame: FramePayload): string {
  return JSON.stringify({ type: "input_frame", session_id: sessionId, payload: frame });
}

export function decodeMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as { type?: string; session_id?: string; payload?: unknown };
  if (typeof msg.type !== "string" || msg.payload === undefined) return null;
  if (!["snapshot", "event", "report", "error"].includes(msg.type)) return null;
  return msg as ServerMessage;
}

// quaternion helpers for building input orientations (w-first)
export function quatMultiply(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function axisAngleQuat(axis: Vec3, angle: number): Quat {
  const h = angle / 2;
  const s = Math.sin(h);
  return [Math.cos(h), axis[0] * s, axis[1] * s, axis[2] * s];
}

export function quatNormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}
