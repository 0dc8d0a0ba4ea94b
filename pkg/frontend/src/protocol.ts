// JSON console feed: message shapes and validation.

export interface ArmPose {
  theta: [number, number, number];
  phi: [number, number, number];
}

export interface Deviation {
  x: number | null;
  y: number | null;
  z: number | null;
}

export interface StateMessage {
  type: "state";
  t_us: number;
  seq: number;
  demo: ArmPose;
  exec: ArmPose;
  deviation: Deviation;
  profile: string;
  scale: number;
  held: boolean;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = StateMessage | ErrorMessage;

export interface LoadMessage {
  type: "load";
  s: number;
  fx: number;
  fy: number;
  fz: number;
}

export interface ProfileMessage {
  type: "profile";
  name: string;
}

export interface ScaleMessage {
  type: "scale";
  x: number;
}

export type ClientMessage = LoadMessage | ProfileMessage | ScaleMessage;

export const PROFILE_NAMES = [
  "LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH",
] as const;

function isTriple(value: unknown): value is [number, number, number] {
  return Array.isArray(value) && value.length === 3 &&
    value.every((v) => typeof v === "number" && Number.isFinite(v));
}

function isPose(value: unknown): value is ArmPose {
  if (typeof value !== "object" || value === null) return false;
  const pose = value as Record<string, unknown>;
  return isTriple(pose.theta) && isTriple(pose.phi);
}

export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  if (msg.type === "error" && typeof msg.message === "string") {
    return { type: "error", message: msg.message };
  }
  if (
    msg.type === "state" &&
    typeof msg.seq === "number" &&
    typeof msg.t_us === "number" &&
    isPose(msg.demo) &&
    isPose(msg.exec) &&
    typeof msg.profile === "string" &&
    typeof msg.scale === "number"
  ) {
    const dev = (msg.deviation ?? {}) as Record<string, unknown>;
    const axis = (v: unknown) => (typeof v === "number" && Number.isFinite(v) ? v : null);
    return {
      type: "state",
      t_us: msg.t_us,
      seq: msg.seq,
      demo: msg.demo as ArmPose,
      exec: msg.exec as ArmPose,
      deviation: { x: axis(dev.x), y: axis(dev.y), z: axis(dev.z) },
      profile: msg.profile,
      scale: msg.scale,
      held: msg.held === true,
    };
  }
  return null;
}

export function loadMessage(s: number, fx: number, fy: number, fz: number): LoadMessage {
  return { type: "load", s, fx, fy, fz };
}

export function profileMessage(name: string): ProfileMessage {
  return { type: "profile", name };
}

export function scaleMessage(x: number): ScaleMessage {
  return { type: "scale", x };
}
