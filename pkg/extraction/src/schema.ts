import fs from "node:fs";

export type Point = [number, number];

export interface LandmarkFile {
  image: string;
  width: number;
  height: number;
  /** 68 [x, y] pairs, pixel units, origin top-left. */
  points: Point[];
}

export function writeLandmarkFile(path: string, payload: LandmarkFile): void {
  if (payload.points.length !== 68) {
    throw new Error(`landmark payload must have 68 points, got ${payload.points.length}`);
  }
  for (const [x, y] of payload.points) {
    if (!Number.isFinite(x) || !Number.isFinite(y)) throw new Error("landmark coordinates must be finite");
    if (x < 0 || x > payload.width - 1 || y < 0 || y > payload.height - 1) {
      throw new Error(`landmark (${x}, ${y}) outside ${payload.width}x${payload.height}`);
    }
  }
  fs.writeFileSync(path, JSON.stringify(payload));
}

/**
 * Parametric frontal-face layout used by the geometric prior backend.
 * Returns 68 points for a face whose skin region fills the given box.
 * Index convention: 0-16 jaw, 17-26 brows, 27-35 nose, 36-47 eyes,
 * 48-67 mouth.
 */
export function canonicalLayout(width: number, height: number): Point[] {
  const cx = width / 2;
  const cy = height * 0.54;
  const a = width * 0.3;
  const b = height * 0.36;
  const pts: Point[] = new Array(68);

  for (let i = 0; i < 17; i++) {
    const psi = ((170 - 10 * i) * Math.PI) / 180;
    pts[i] = [cx + a * Math.cos(psi), cy + b * Math.sin(psi)];
  }
  for (let j = 0; j < 5; j++) {
    const archL = 0.06 * Math.sin((Math.PI * j) / 4);
    const archR = 0.06 * Math.sin((Math.PI * (4 - j)) / 4);
    pts[17 + j] = [cx + a * (-0.7 + 0.1125 * j), cy - b * (0.5 + archL)];
    pts[22 + j] = [cx + a * (0.25 + 0.1125 * j), cy - b * (0.5 + archR)];
  }
  for (let j = 0; j < 4; j++) pts[27 + j] = [cx, cy + b * (-0.42 + 0.13 * j)];
  const baseX = [-0.16, -0.08, 0, 0.08, 0.16];
  const baseY = [0.08, 0.1, 0.12, 0.1, 0.08];
  for (let j = 0; j < 5; j++) pts[31 + j] = [cx + a * baseX[j], cy + b * baseY[j]];
  const ring: Point[] = [
    [-1, 0],
    [-0.5, -1],
    [0.5, -1],
    [1, 0],
    [0.5, 1],
    [-0.5, 1],
  ];
  for (const [start, sign] of [
    [36, -1],
    [42, 1],
  ] as const) {
    const ecx = cx + sign * 0.42 * a;
    const ecy = cy - 0.3 * b;
    for (let j = 0; j < 6; j++) {
      pts[start + j] = [ecx + ring[j][0] * 0.16 * a, ecy + ring[j][1] * 0.07 * b];
    }
  }
  const mx = cx;
  const my = cy + 0.42 * b;
  const rx = 0.3 * a;
  const ry = 0.1 * b;
  const outer: Point[] = [
    [-1, 0], [-0.6, -0.7], [-0.25, -1], [0, -1.1], [0.25, -1], [0.6, -0.7],
    [1, 0], [0.6, 0.8], [0.25, 1.1], [0, 1.2], [-0.25, 1.1], [-0.6, 0.8],
  ];
  outer.forEach(([fx, fy], j) => {
    pts[48 + j] = [mx + rx * fx, my + ry * fy];
  });
  const inner: Point[] = [
    [-0.75, 0], [-0.3, -0.45], [0, -0.5], [0.3, -0.45], [0.75, 0], [0.3, 0.5], [0, 0.55], [-0.3, 0.55],
  ];
  inner.forEach(([fx, fy], j) => {
    pts[60 + j] = [mx + rx * fx, my + ry * fy];
  });
  return pts;
}

/** The skin blob of the layout spans these fractions of the layout box. */
export const LAYOUT_SKIN_BOUNDS = {
  left: 0.2,
  right: 0.8,
  top: 0.144, // forehead extension reaches this high
  bottom: 0.9,
};
