import { describe, expect, it } from "vitest";
import {
  PROFILE_NAMES,
  loadMessage,
  parseServerMessage,
  profileMessage,
  scaleMessage,
} from "../src/protocol.js";

const STATE = {
  type: "state",
  t_us: 1234,
  seq: 7,
  demo: { theta: [0.1, 0.2, 0.3], phi: [0, 1, 2] },
  exec: { theta: [0.1, 0.2, 0.3], phi: [0, 1, 2] },
  deviation: { x: 1.5, y: null, z: 0.2 },
  profile: "HLL",
  scale: 1.633,
  held: true,
};

describe("console feed protocol", () => {
  it("parses state messages", () => {
    const msg = parseServerMessage(JSON.stringify(STATE));
    expect(msg).not.toBeNull();
    if (msg?.type !== "state") throw new Error("expected state");
    expect(msg.seq).toBe(7);
    expect(msg.demo.theta).toEqual([0.1, 0.2, 0.3]);
    expect(msg.deviation.y).toBeNull();
    expect(msg.held).toBe(true);
  });

  it("parses error messages", () => {
    const msg = parseServerMessage('{"type": "error", "message": "nope"}');
    expect(msg).toEqual({ type: "error", message: "nope" });
  });

  it("rejects malformed input", () => {
    expect(parseServerMessage("not json")).toBeNull();
    expect(parseServerMessage('{"type": "state", "seq": 1}')).toBeNull();
    expect(parseServerMessage('{"type": "state", "seq": "x"}')).toBeNull();
    const badPose = { ...STATE, demo: { theta: [1, 2], phi: [0, 0, 0] } };
    expect(parseServerMessage(JSON.stringify(badPose))).toBeNull();
  });

  it("builds operator messages in the documented shapes", () => {
    expect(loadMessage(0.6, 1, 2, 3)).toEqual({ type: "load", s: 0.6, fx: 1, fy: 2, fz: 3 });
    expect(profileMessage("HLL")).toEqual({ type: "profile", name: "HLL" });
    expect(scaleMessage(1.633)).toEqual({ type: "scale", x: 1.633 });
    expect(PROFILE_NAMES).toHaveLength(8);
    expect(PROFILE_NAMES).toContain("LLL");
    expect(PROFILE_NAMES).toContain("HHH");
  });
});
