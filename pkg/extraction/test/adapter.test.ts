import assert from "node:assert/strict";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { test } from "node:test";

import { PNG } from "pngjs";

import { renderDepth } from "../src/depth.js";
import { runExtraction } from "../src/extract.js";
import { readPng, writeGrayPng } from "../src/png.js";
import { detectFaceBox, estimateLandmarks } from "../src/prior.js";
import { canonicalLayout, writeLandmarkFile } from "../src/schema.js";
import { writeTestFace } from "./helpers.js";

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "extract-"));
}

test("gray png writer roundtrips through a standard decoder", () => {
  const dir = tmpdir();
  const w = 31;
  const h = 17;
  const values = new Float64Array(w * h);
  for (let i = 0; i < values.length; i++) values[i] = (i * 7) % 256;
  const file = path.join(dir, "gray.png");
  writeGrayPng(file, w, h, values);
  const png = PNG.sync.read(fs.readFileSync(file));
  assert.equal(png.width, w);
  assert.equal(png.height, h);
  for (let i = 0; i < values.length; i++) {
    assert.equal(png.data[i * 4], Math.floor(values[i] + 0.5));
  }
});

test("landmark writer enforces the 68-point in-bounds contract", () => {
  const dir = tmpdir();
  const file = path.join(dir, "lm.json");
  const points = canonicalLayout(200, 240);
  writeLandmarkFile(file, { image: "x.png", width: 200, height: 240, points });
  const payload = JSON.parse(fs.readFileSync(file, "utf-8"));
  assert.equal(payload.points.length, 68);

  assert.throws(() =>
    writeLandmarkFile(file, { image: "x.png", width: 200, height: 240, points: points.slice(0, 67) }),
  );
  const outside = points.map((p) => [...p] as [number, number]);
  outside[0] = [-5, 10];
  assert.throws(() => writeLandmarkFile(file, { image: "x.png", width: 200, height: 240, points: outside }));
});

test("prior backend finds the face blob and emits plausible landmarks", () => {
  const dir = tmpdir();
  const file = path.join(dir, "face.png");
  writeTestFace(file);
  const img = readPng(file);
  const box = detectFaceBox(img);
  assert.ok(box, "face box not detected");
  assert.ok(box!.w > 60 && box!.h > 100);

  const points = estimateLandmarks(img);
  assert.ok(points, "no landmarks estimated");
  assert.equal(points!.length, 68);
  for (const [x, y] of points!) {
    assert.ok(x >= 0 && x <= img.width - 1 && y >= 0 && y <= img.height - 1);
  }
  assert.ok(points![0][0] < points![16][0], "jaw must be ordered left to right");
  // nose sits between the eyes horizontally
  const noseX = points![33][0];
  assert.ok(points![36][0] < noseX && noseX < points![45][0]);
});

test("prior backend reports no face on a plain background", () => {
  const dir = tmpdir();
  const file = path.join(dir, "empty.png");
  writeTestFace(file, 200, 240, false);
  assert.equal(estimateLandmarks(readPng(file)), null);
});

test("depth render matches image dims, black background, raised nose", () => {
  const points = canonicalLayout(200, 240);
  const depth = renderDepth(points, 200, 240);
  assert.equal(depth.length, 200 * 240);
  let max = 0;
  for (const v of depth) {
    assert.ok(v >= 0 && v <= 255);
    if (v > max) max = v;
  }
  assert.ok(max > 135, "face region should be bright");
  assert.equal(depth[0], 0, "corner must stay background");
  const at = (p: [number, number]) => depth[Math.round(p[1]) * 200 + Math.round(p[0])];
  const nose = at(points[33]);
  const cheekPoint: [number, number] = [
    (points[2][0] + points[31][0]) / 2,
    (points[2][1] + points[31][1]) / 2,
  ];
  assert.ok(nose > at(cheekPoint), "nose must sit above the cheek in depth");
});

test("batch extraction writes interchange files and a skip log", async () => {
  const dir = tmpdir();
  const imagesDir = path.join(dir, "images");
  fs.mkdirSync(imagesDir);
  writeTestFace(path.join(imagesDir, "a.png"));
  writeTestFace(path.join(imagesDir, "b.png"), 160, 200);
  writeTestFace(path.join(imagesDir, "noface.png"), 160, 200, false);

  const out = path.join(dir, "out");
  const result = await runExtraction({ imagesDir, outDir: out, withDepth: true, backend: "prior" });
  assert.deepEqual(result.processed, ["a.png", "b.png"]);
  assert.equal(result.skipped.length, 1);
  assert.equal(result.skipped[0].image, "noface.png");
  assert.ok(fs.existsSync(path.join(out, "landmarks", "a.json")));
  assert.ok(fs.existsSync(path.join(out, "landmarks", "b.json")));
  assert.ok(!fs.existsSync(path.join(out, "landmarks", "noface.json")));
  assert.ok(fs.existsSync(path.join(out, "depth", "a.png")));
  assert.ok(fs.existsSync(path.join(out, "skipped.jsonl")));

  const depth = readPng(path.join(out, "depth", "b.png"));
  assert.equal(depth.width, 160);
  assert.equal(depth.height, 200);
});

test("faceapi backend: install hint when missing, clean run when present", async () => {
  const { faceApiAvailable } = await import("../src/faceapi.js");
  const dir = tmpdir();
  const imagesDir = path.join(dir, "images");
  fs.mkdirSync(imagesDir);
  writeTestFace(path.join(imagesDir, "a.png"));
  if (!(await faceApiAvailable())) {
    await assert.rejects(
      runExtraction({ imagesDir, outDir: path.join(dir, "out"), withDepth: false, backend: "faceapi" }),
      /npm install @vladmandic\/face-api/,
    );
    return;
  }
  // real detector on a stylized test image: completes, likely via the skip log
  const result = await runExtraction({ imagesDir, outDir: path.join(dir, "out"), withDepth: false, backend: "faceapi" });
  assert.equal(result.processed.length + result.skipped.length, 1);
});
