// Constant-curvature arm centerlines, pure math (no three.js here).
//
// Each section is a circular arc of fixed length: bend angle theta >= 0,
// bending-plane azimuth phi, curling toward azimuth 0 = local +x; straight
// sections extend along local +z.  Matches the simulator's conventions.

export type Vec3 = [number, number, number];
type Mat3 = [number, number, number, number, number, number, number, number, number];

const IDENTITY: Mat3 = [1, 0, 0, 0, 1, 0, 0, 0, 1];

function matMul(a: Mat3, b: Mat3): Mat3 {
  const out = new Array(9).fill(0) as Mat3;
  for (let r = 0; r < 3; r++) {
    for (let c = 0; c < 3; c++) {
      out[3 * r + c] =
        a[3 * r] * b[c] + a[3 * r + 1] * b[3 + c] + a[3 * r + 2] * b[6 + c];
    }
  }
  return out;
}

function matApply(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

function rotZ(angle: number): Mat3 {
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  return [c, -s, 0, s, c, 0, 0, 0, 1];
}

function rotY(angle: number): Mat3 {
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  return [c, 0, s, 0, 1, 0, -s, 0, c];
}

/** Rotation carried by one bent section: Rz(phi) Ry(theta) Rz(-phi). */
function sectionRotation(theta: number, phi: number): Mat3 {
  return matMul(matMul(rotZ(phi), rotY(theta)), rotZ(-phi));
}

/** Point at arc-length fraction u in the section's local frame. */
function sectionPoint(theta: number, phi: number, length: number, u: number): Vec3 {
  const bend = theta * u;
  const arc = length * u;
  if (theta < 1e-9) {
    return [0, 0, arc];
  }
  const r = length / theta;
  const radial = r * (1 - Math.cos(bend));
  return [Math.cos(phi) * radial, Math.sin(phi) * radial, r * Math.sin(bend)];
}

export interface ArmShape {
  /** Flat xyz triples along the whole arm, base to tip. */
  points: Float32Array;
  tip: Vec3;
}

/**
 * Sampled centerline of a three-section constant-curvature arm.
 * Returns samplesPerSection points per section plus the base point.
 */
export function armCenterline(
  thetas: readonly number[],
  phis: readonly number[],
  lengths: readonly number[],
  samplesPerSection = 16,
): ArmShape {
  const points: number[] = [0, 0, 0];
  let rot: Mat3 = IDENTITY;
  let base: Vec3 = [0, 0, 0];
  for (let i = 0; i < lengths.length; i++) {
    for (let k = 1; k <= samplesPerSection; k++) {
      const local = sectionPoint(thetas[i], phis[i], lengths[i], k / samplesPerSection);
      const world = matApply(rot, local);
      points.push(base[0] + world[0], base[1] + world[1], base[2] + world[2]);
    }
    const end = matApply(rot, sectionPoint(thetas[i], phis[i], lengths[i], 1));
    base = [base[0] + end[0], base[1] + end[1], base[2] + end[2]];
    rot = matMul(rot, sectionRotation(thetas[i], phis[i]));
  }
  const n = points.length;
  return {
    points: Float32Array.from(points),
    tip: [points[n - 3], points[n - 2], points[n - 1]],
  };
}
