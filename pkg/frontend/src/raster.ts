/**
 * Deterministic software rasterizer: an RGB pixel buffer with the handful of
 * primitives the charts need. No anti-aliasing, no floating-point blending;
 * identical inputs give identical bytes.
 */

import { ADVANCE, GLYPH_H, GLYPH_W, glyph } from "./font.js";

export type Color = readonly [number, number, number];

export const WHITE: Color = [255, 255, 255];
export const BLACK: Color = [0, 0, 0];
export const GRAY: Color = [150, 150, 150];
export const LIGHT_GRAY: Color = [220, 220, 220];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array; // RGB, row-major

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.data[3 * i] = background[0];
      this.data[3 * i + 1] = background[1];
      this.data[3 * i + 2] = background[2];
    }
  }

  set(x: number, y: number, c: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = 3 * (y * this.width + x);
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
  }

  fillRect(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    const [xa, xb] = x0 <= x1 ? [x0, x1] : [x1, x0];
    const [ya, yb] = y0 <= y1 ? [y0, y1] : [y1, y0];
    for (let y = ya; y <= yb; y++) {
      for (let x = xa; x <= xb; x++) this.set(x, y, c);
    }
  }

  rectOutline(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    this.line(x0, y0, x1, y0, c);
    this.line(x0, y1, x1, y1, c);
    this.line(x0, y0, x0, y1, c);
    this.line(x1, y0, x1, y1, c);
  }

  /** Bresenham segment, optionally dashed with the given on/off length. */
  line(x0: number, y0: number, x1: number, y1: number, c: Color, dash = 0): void {
    let x = Math.round(x0);
    let y = Math.round(y0);
    const xe = Math.round(x1);
    const ye = Math.round(y1);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    let step = 0;
    for (;;) {
      if (dash === 0 || step % (2 * dash) < dash) this.set(x, y, c);
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
      step += 1;
    }
  }

  disc(cx: number, cy: number, r: number, c: Color): void {
    for (let y = -r; y <= r; y++) {
      for (let x = -r; x <= r; x++) {
        if (x * x + y * y <= r * r) this.set(cx + x, cy + y, c);
      }
    }
  }

  /** Draw text with its top-left corner at (x, y). */
  text(x: number, y: number, s: string, c: Color, scale = 1): void {
    let cx = x;
    for (const ch of s) {
      const g = glyph(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if (g[gy][gx] === "#") {
            this.fillRect(
              cx + gx * scale,
              y + gy * scale,
              cx + gx * scale + scale - 1,
              y + gy * scale + scale - 1,
              c,
            );
          }
        }
      }
      cx += ADVANCE * scale;
    }
  }

  textWidth(s: string, scale = 1): number {
    return s.length * ADVANCE * scale;
  }
}
