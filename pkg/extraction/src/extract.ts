import fs from "node:fs";
import path from "node:path";

import { readPng, writeGrayPng, Raster } from "./png.js";
import { renderDepth } from "./depth.js";
import { estimateLandmarks } from "./prior.js";
import { Point, writeLandmarkFile } from "./schema.js";

export type BackendName = "prior" | "faceapi";

export interface ExtractionJob {
  imagesDir: string;
  outDir: string;
  withDepth: boolean;
  backend: BackendName;
}

export interface ExtractionResult {
  processed: string[];
  skipped: { image: string; reason: string }[];
  landmarksDir: string;
  depthDir: string | null;
}

type Estimator = (img: Raster) => Promise<Point[] | null>;

async function resolveEstimator(backend: BackendName): Promise<Estimator> {
  if (backend === "prior") {
    return async (img) => estimateLandmarks(img);
  }
  const { estimateLandmarksFaceApi } = await import("./faceapi.js");
  return estimateLandmarksFaceApi;
}

export async function runExtraction(job: ExtractionJob): Promise<ExtractionResult> {
  if (!fs.existsSync(job.imagesDir) || !fs.statSync(job.imagesDir).isDirectory()) {
    throw new Error(`images directory not found: ${job.imagesDir}`);
  }
  const estimator = await resolveEstimator(job.backend); // fails fast if the model is missing
  const landmarksDir = path.join(job.outDir, "landmarks");
  fs.mkdirSync(landmarksDir, { recursive: true });
  const depthDir = job.withDepth ? path.join(job.outDir, "depth") : null;
  if (depthDir) fs.mkdirSync(depthDir, { recursive: true });

  const images = fs
    .readdirSync(job.imagesDir)
    .filter((name) => /\.png$/i.test(name))
    .sort();
  const processed: string[] = [];
  const skipped: { image: string; reason: string }[] = [];

  for (const name of images) {
    const imagePath = path.join(job.imagesDir, name);
    let img: Raster;
    try {
      img = readPng(imagePath);
    } catch (err) {
      skipped.push({ image: name, reason: `unreadable: ${(err as Error).message}` });
      continue;
    }
    const points = await estimator(img);
    if (!points) {
      skipped.push({ image: name, reason: "no face found" });
      continue;
    }
    const stem = name.replace(/\.png$/i, "");
    writeLandmarkFile(path.join(landmarksDir, `${stem}.json`), {
      image: name,
      width: img.width,
      height: img.height,
      points,
    });
    if (depthDir) {
      const depth = renderDepth(points, img.width, img.height);
      writeGrayPng(path.join(depthDir, `${stem}.png`), img.width, img.height, depth);
    }
    processed.push(name);
  }

  const skipLog = path.join(job.outDir, "skipped.jsonl");
  if (skipped.length > 0) {
    fs.writeFileSync(skipLog, skipped.map((s) => JSON.stringify(s)).join("\n") + "\n");
  }
  return { processed, skipped, landmarksDir, depthDir };
}
