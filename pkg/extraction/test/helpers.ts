import fs from "node:fs";
import { PNG } from "pngjs";

/** Draw a face-like warm ellipse on a cool gradient background. */
export function writeTestFace(path: string, width = 200, height = 240, withFace = true): void {
  const png = new PNG({ width, height });
  const cx = width / 2;
  const cy = height * 0.52;
  const rx = width * 0.3;
  const ry = height * 0.38;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const o = (y * width + x) * 4;
      const inside =
        withFace && ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2 <= 1.0;
      if (inside) {
        png.data[o] = 205;
        png.data[o + 1] = 160;
        png.data[o + 2] = 125;
      } else {
        png.data[o] = 90 + Math.floor((30 * y) / height);
        png.data[o + 1] = 105;
        png.data[o + 2] = 135;
      }
      png.data[o + 3] = 255;
    }
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}
