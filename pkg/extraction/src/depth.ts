/**
 * Raw-style depth rendered from estimated landmarks: a bright,
 * low-contrast face dome with a nose bump on a black background,
 * matching what 3D-reconstruction exporters emit. Deliberately left
 * untransformed; the consumer applies its own contrast/brightness
 * shaping before displacing.
 */

import { Point } from "./schema.js";

function convexHull(points: Point[]): Point[] {
  const pts = [...points].sort((p, q) => p[0] - q[0] || p[1] - q[1]);
  const cross = (o: Point, a: Point, b: Point) =>
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const lower: Point[] = [];
  for (const p of pts) {
    while (lower.length >= 2 && cross(lower[lower.length - 2], lower[lower.length - 1], p) <= 0) lower.pop();
    lower.push(p);
  }
  const upper: Point[] = [];
  for (const p of [...pts].reverse()) {
    while (upper.length >= 2 && cross(upper[upper.length - 2], upper[upper.length - 1], p) <= 0) upper.pop();
    upper.push(p);
  }
  return lower.slice(0, -1).concat(upper.slice(0, -1));
}

function pointInPolygon(x: number, y: number, poly: Point[]): boolean {
  let inside = false;
  for (let i = 0, j = poly.length - 1; i < poly.length; j = i++) {
    const [xi, yi] = poly[i];
    const [xj, yj] = poly[j];
    if (yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

export function renderDepth(points: Point[], width: number, height: number): Float64Array {
  // forehead extension mirrors the consumer: brows shifted one nose length
  const noseLen = Math.hypot(points[27][0] - points[33][0], points[27][1] - points[33][1]);
  const axisX = points[27][0] - points[8][0];
  const axisY = points[27][1] - points[8][1];
  const norm = Math.hypot(axisX, axisY) || 1;
  const extended: Point[] = points.slice();
  for (let j = 17; j < 27; j++) {
    extended.push([
      points[j][0] + (noseLen * axisX) / norm,
      points[j][1] + (noseLen * axisY) / norm,
    ]);
  }
  const hull = convexHull(extended);

  const xs = extended.map((p) => p[0]);
  const faceWidth = Math.max(...xs) - Math.min(...xs) || 1;
  const centerX = points[33][0];
  const centerY = (points[27][1] + points[33][1]) / 2;
  const noseSigma = 0.12 * faceWidth;

  const values = new Float64Array(width * height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      if (!pointInPolygon(x + 0.5, y + 0.5, hull)) continue; // background stays 0
      // distance to the hull edge drives the dome
      let edge = Infinity;
      for (let i = 0, j = hull.length - 1; i < hull.length; j = i++) {
        edge = Math.min(edge, distanceToSegment(x, y, hull[j], hull[i]));
      }
      const dome = Math.min(1, edge / (0.35 * faceWidth));
      const dNose = Math.hypot(x - centerX, y - centerY);
      const bump = 12 * Math.exp((-dNose * dNose) / (2 * noseSigma * noseSigma));
      values[y * width + x] = Math.min(255, 135 + 40 * Math.pow(dome, 0.7) + bump);
    }
  }
  return values;
}

function distanceToSegment(px: number, py: number, a: Point, b: Point): number {
  const vx = b[0] - a[0];
  const vy = b[1] - a[1];
  const wx = px - a[0];
  const wy = py - a[1];
  const c1 = vx * wx + vy * wy;
  if (c1 <= 0) return Math.hypot(wx, wy);
  const c2 = vx * vx + vy * vy;
  if (c2 <= c1) return Math.hypot(px - b[0], py - b[1]);
  const t = c1 / c2;
  return Math.hypot(px - (a[0] + t * vx), py - (a[1] + t * vy));
}
