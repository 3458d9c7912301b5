/**
 * Geometric prior backend: no pretrained network, just skin-blob
 * detection plus the canonical 68-point layout fitted to the detected
 * box. Good enough to exercise the full interchange pipeline offline;
 * swap in the faceapi backend for real imagery.
 */

import { Raster } from "./png.js";
import { canonicalLayout, LAYOUT_SKIN_BOUNDS, Point } from "./schema.js";

export interface FaceBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

function skinScore(r: number, g: number, b: number): boolean {
  // warm, bright pixels; the sample corpora have cool gradient backgrounds
  return r > 110 && r - b > 18 && r >= g;
}

export function detectFaceBox(img: Raster): FaceBox | null {
  const { width, height, data } = img;
  const mask = new Uint8Array(width * height);
  let candidates = 0;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const o = (y * width + x) * 4;
      if (skinScore(data[o], data[o + 1], data[o + 2])) {
        mask[y * width + x] = 1;
        candidates++;
      }
    }
  }
  if (candidates < 64) return null;

  // largest 4-connected component by BFS
  const labels = new Int32Array(width * height).fill(-1);
  let bestSize = 0;
  let bestBox: FaceBox | null = null;
  const queue = new Int32Array(width * height);
  let next = 0;
  for (let start = 0; start < mask.length; start++) {
    if (!mask[start] || labels[start] >= 0) continue;
    let head = 0;
    let tail = 0;
    queue[tail++] = start;
    labels[start] = next;
    let size = 0;
    let minX = width, maxX = 0, minY = height, maxY = 0;
    while (head < tail) {
      const idx = queue[head++];
      size++;
      const x = idx % width;
      const y = (idx / width) | 0;
      if (x < minX) minX = x;
      if (x > maxX) maxX = x;
      if (y < minY) minY = y;
      if (y > maxY) maxY = y;
      for (const [dx, dy] of [[1, 0], [-1, 0], [0, 1], [0, -1]] as const) {
        const nx = x + dx;
        const ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const nidx = ny * width + nx;
        if (mask[nidx] && labels[nidx] < 0) {
          labels[nidx] = next;
          queue[tail++] = nidx;
        }
      }
    }
    next++;
    if (size > bestSize) {
      bestSize = size;
      bestBox = { x: minX, y: minY, w: maxX - minX + 1, h: maxY - minY + 1 };
    }
  }
  if (!bestBox || bestSize < 64) return null;
  // implausibly thin blobs are not faces
  if (bestBox.w < 16 || bestBox.h < 16) return null;
  return bestBox;
}

export function landmarksFromBox(box: FaceBox, imgWidth: number, imgHeight: number): Point[] | null {
  const { left, right, top, bottom } = LAYOUT_SKIN_BOUNDS;
  const layoutWidth = box.w / (right - left);
  const layoutHeight = box.h / (bottom - top);
  const offsetX = box.x - left * layoutWidth;
  const offsetY = box.y - top * layoutHeight;
  const pts = canonicalLayout(layoutWidth, layoutHeight).map(
    ([x, y]): Point => [x + offsetX, y + offsetY],
  );
  const clamped = pts.map(([x, y]): Point => [
    Math.min(imgWidth - 1, Math.max(0, x)),
    Math.min(imgHeight - 1, Math.max(0, y)),
  ]);
  // clamping may collapse the geometry when the face touches the border
  if (!(clamped[0][0] < clamped[16][0])) return null;
  const noseLength = Math.hypot(clamped[27][0] - clamped[33][0], clamped[27][1] - clamped[33][1]);
  if (noseLength <= 1) return null;
  return clamped;
}

export function estimateLandmarks(img: Raster): Point[] | null {
  const box = detectFaceBox(img);
  if (!box) return null;
  return landmarksFromBox(box, img.width, img.height);
}
