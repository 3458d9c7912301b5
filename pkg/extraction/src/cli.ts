#!/usr/bin/env node
/**
 * extract --images DIR --out DIR [--depth] [--backend prior|faceapi]
 *
 * Emits one landmark JSON per processed image (and optionally one raw
 * depth PNG) in the interchange layout the inkblend toolkit consumes.
 */

import process from "node:process";

import { BackendName, runExtraction } from "./extract.js";

function usage(message?: string): never {
  if (message) console.error(`error: ${message}`);
  console.error("usage: extract --images DIR --out DIR [--depth] [--backend prior|faceapi]");
  process.exit(message ? 1 : 0);
}

function parseArgs(argv: string[]) {
  let imagesDir: string | null = null;
  let outDir: string | null = null;
  let withDepth = false;
  let backend: BackendName = "prior";
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    switch (arg) {
      case "--images":
        imagesDir = argv[++i] ?? usage("--images needs a value");
        break;
      case "--out":
        outDir = argv[++i] ?? usage("--out needs a value");
        break;
      case "--depth":
        withDepth = true;
        break;
      case "--backend": {
        const value = argv[++i];
        if (value !== "prior" && value !== "faceapi") usage(`unknown backend ${value}`);
        backend = value;
        break;
      }
      case "--help":
      case "-h":
        usage();
        break;
      default:
        usage(`unknown argument ${arg}`);
    }
  }
  if (!imagesDir || !outDir) usage("--images and --out are required");
  return { imagesDir, outDir, withDepth, backend };
}

async function main() {
  const args = parseArgs(process.argv.slice(2));
  try {
    const result = await runExtraction(args);
    console.log(`processed ${result.processed.length} image(s) -> ${result.landmarksDir}`);
    if (result.depthDir) console.log(`depth maps -> ${result.depthDir}`);
    if (result.skipped.length > 0) {
      console.error(`skipped ${result.skipped.length} image(s); see skipped.jsonl`);
      process.exit(2);
    }
  } catch (err) {
    console.error(`fatal: ${(err as Error).message}`);
    process.exit(1);
  }
}

main();
