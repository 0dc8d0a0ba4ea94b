import { describe, expect, it } from "vitest";
import { armCenterline } from "../src/pcc.js";

const L = [0.2, 0.2, 0.2];

describe("constant-curvature centerline", () => {
  it("renders a straight arm as collinear points along +z", () => {
    const shape = armCenterline([0, 0, 0], [0, 0, 0], L, 8);
    for (let i = 0; i < shape.points.length; i += 3) {
      expect(shape.points[i]).toBeCloseTo(0, 12);
      expect(shape.points[i + 1]).toBeCloseTo(0, 12);
    }
    expect(shape.tip[2]).toBeCloseTo(0.6, 12);
    // z strictly increasing base to tip
    for (let i = 5; i < shape.points.length; i += 3) {
      expect(shape.points[i]).toBeGreaterThan(shape.points[i - 3]);
    }
  });

  it("renders a quarter-bent section as a quarter arc", () => {
    const shape = armCenterline([Math.PI / 2], [0], [0.2], 32);
    const r = (2 * 0.2) / Math.PI;
    expect(shape.tip[0]).toBeCloseTo(r, 10);
    expect(shape.tip[1]).toBeCloseTo(0, 10);
    expect(shape.tip[2]).toBeCloseTo(r, 10);
    // every sample sits on the circle of radius r centered at (r, 0, 0);
    // rendered points carry float32 precision
    for (let i = 0; i < shape.points.length; i += 3) {
      const dx = shape.points[i] - r;
      const dz = shape.points[i + 2];
      expect(Math.hypot(dx, dz)).toBeCloseTo(r, 6);
    }
  });

  it("chains sections: quarter arc then straight runs along +x", () => {
    const shape = armCenterline([Math.PI / 2, 0, 0], [0, 0, 0], L, 16);
    const r = (2 * 0.2) / Math.PI;
    expect(shape.tip[0]).toBeCloseTo(r + 0.4, 10);
    expect(shape.tip[1]).toBeCloseTo(0, 10);
    expect(shape.tip[2]).toBeCloseTo(r, 10);
  });

  it("bends toward the azimuth direction", () => {
    const shape = armCenterline([0.8, 0, 0], [Math.PI / 2, 0, 0], L, 8);
    expect(shape.tip[1]).toBeGreaterThan(0.05); // +y for azimuth 90 degrees
    expect(Math.abs(shape.tip[0])).toBeLessThan(1e-10);
  });
});
