/**
 * Pretrained-model backend: @vladmandic/face-api (SSD face detector +
 * 68-point landmark net) on the tfjs WASM backend, so no native
 * bindings or model downloads are needed beyond npm packages (model
 * weights ship inside the face-api package). All three packages are
 * optional installs; a clear hint is raised when they are missing.
 *
 * Heads-up for synthetic corpora: the detector is trained on real
 * photographs and will legitimately report "no face" on stylized
 * images; those land in the skip log. Use the prior backend there.
 */

import fs from "node:fs";
import path from "node:path";
import { createRequire } from "node:module";

import { Raster } from "./png.js";
import { Point } from "./schema.js";

const INSTALL_HINT =
  "faceapi backend unavailable: run `npm install @vladmandic/face-api @tensorflow/tfjs " +
  "@tensorflow/tfjs-backend-wasm` inside extraction/ (model weights ship with face-api)";

const FACEAPI_BUNDLE = "@vladmandic/face-api/dist/face-api.node-wasm.js";

let loaded: { faceapi: any; tf: any } | null = null;

async function loadModules(): Promise<{ faceapi: any; tf: any }> {
  if (loaded) return loaded;
  const require = createRequire(import.meta.url);
  let faceapi: any;
  try {
    faceapi = require(FACEAPI_BUNDLE);
  } catch (err) {
    throw new Error(`${INSTALL_HINT} (${(err as Error).message.split("\n")[0]})`);
  }
  const tf = faceapi.tf;
  try {
    await tf.setBackend("wasm");
  } catch {
    await tf.setBackend("cpu"); // wasm binary unavailable: slower but correct
  }
  await tf.ready();

  const modelDir = path.join(path.dirname(require.resolve("@vladmandic/face-api/package.json")), "model");
  if (!fs.existsSync(modelDir)) {
    throw new Error(`${INSTALL_HINT} (model directory missing at ${modelDir})`);
  }
  await faceapi.nets.ssdMobilenetv1.loadFromDisk(modelDir);
  await faceapi.nets.faceLandmark68Net.loadFromDisk(modelDir);
  loaded = { faceapi, tf };
  return loaded;
}

export async function faceApiAvailable(): Promise<boolean> {
  try {
    await loadModules();
    return true;
  } catch {
    return false;
  }
}

export async function estimateLandmarksFaceApi(img: Raster): Promise<Point[] | null> {
  const { faceapi, tf } = await loadModules();
  const rgb = new Int32Array(img.width * img.height * 3);
  for (let i = 0; i < img.width * img.height; i++) {
    rgb[i * 3] = img.data[i * 4];
    rgb[i * 3 + 1] = img.data[i * 4 + 1];
    rgb[i * 3 + 2] = img.data[i * 4 + 2];
  }
  const tensor = tf.tensor3d(rgb, [img.height, img.width, 3], "int32");
  try {
    const detection = await faceapi
      .detectSingleFace(tensor, new faceapi.SsdMobilenetv1Options({ minConfidence: 0.3 }))
      .withFaceLandmarks();
    if (!detection) return null;
    const positions: { x: number; y: number }[] = detection.landmarks.positions;
    if (positions.length !== 68) return null;
    return positions.map((p): Point => [
      Math.min(img.width - 1, Math.max(0, p.x)),
      Math.min(img.height - 1, Math.max(0, p.y)),
    ]);
  } finally {
    tensor.dispose();
  }
}
