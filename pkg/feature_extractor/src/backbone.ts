/**
 * Deterministic appearance backbones.
 *
 * Each backbone resizes the image to a canonical RGB input, applies a fixed
 * random-projection layer whose weights are derived from the backbone name
 * by a seeded PRNG, and emits the post-ReLU activations. The weights are a
 * pure function of the name, so extraction is reproducible everywhere with
 * no downloaded model files; any backbone producing a fixed-D descriptor
 * slots into the same interface.
 */

import * as fs from "node:fs";
import { PNG } from "pngjs";

export class ImageError extends Error {}
export class BackboneError extends Error {}

export interface Backbone {
  name: string;
  inputSize: number;
  dim: number;
  /** Which side of the nonlinearity the emitted activations come from. */
  activationVariant: "post-relu";
  extract(imagePath: string): Float32Array;
}

/** 32-bit FNV-1a, for deriving a PRNG seed from the backbone name. */
function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

/** mulberry32: tiny deterministic PRNG over [0, 1). */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function decodePng(imagePath: string): PNG {
  let data: Buffer;
  try {
    data = fs.readFileSync(imagePath);
  } catch (err) {
    throw new ImageError(`cannot read image ${imagePath}: ${(err as Error).message}`);
  }
  try {
    return PNG.sync.read(data);
  } catch (err) {
    throw new ImageError(`corrupt or unsupported image ${imagePath}: ${(err as Error).message}`);
  }
}

/** Bilinear resize to size x size, RGB in [0, 1], row-major [r g b] triples. */
export function toCanonicalInput(png: PNG, size: number): Float64Array {
  const out = new Float64Array(size * size * 3);
  const scaleX = png.width / size;
  const scaleY = png.height / size;
  for (let y = 0; y < size; y++) {
    // sample at pixel centers of the source grid
    const sy = Math.min((y + 0.5) * scaleY - 0.5, png.height - 1);
    const y0 = Math.max(0, Math.floor(sy));
    const y1 = Math.min(png.height - 1, y0 + 1);
    const fy = Math.max(0, sy - y0);
    for (let x = 0; x < size; x++) {
      const sx = Math.min((x + 0.5) * scaleX - 0.5, png.width - 1);
      const x0 = Math.max(0, Math.floor(sx));
      const x1 = Math.min(png.width - 1, x0 + 1);
      const fx = Math.max(0, sx - x0);
      for (let c = 0; c < 3; c++) {
        const p00 = png.data[(y0 * png.width + x0) * 4 + c];
        const p01 = png.data[(y0 * png.width + x1) * 4 + c];
        const p10 = png.data[(y1 * png.width + x0) * 4 + c];
        const p11 = png.data[(y1 * png.width + x1) * 4 + c];
        const top = p00 + (p01 - p00) * fx;
        const bottom = p10 + (p11 - p10) * fx;
        out[(y * size + x) * 3 + c] = (top + (bottom - top) * fy) / 255;
      }
    }
  }
  return out;
}

class RandomProjectionBackbone implements Backbone {
  readonly activationVariant = "post-relu" as const;
  private readonly weights: Float64Array;
  private readonly biases: Float64Array;

  constructor(
    readonly name: string,
    readonly inputSize: number,
    readonly dim: number,
  ) {
    const rand = mulberry32(fnv1a(name));
    const nInputs = inputSize * inputSize * 3;
    // scale keeps activations O(1) regardless of input size
    const scale = Math.sqrt(3 / nInputs);
    this.weights = new Float64Array(dim * nInputs);
    for (let i = 0; i < this.weights.length; i++) {
      this.weights[i] = (rand() * 2 - 1) * scale;
    }
    this.biases = new Float64Array(dim);
    for (let i = 0; i < dim; i++) {
      this.biases[i] = (rand() * 2 - 1) * 0.1;
    }
  }

  extract(imagePath: string): Float32Array {
    const input = toCanonicalInput(decodePng(imagePath), this.inputSize);
    const nInputs = input.length;
    const out = new Float32Array(this.dim);
    for (let d = 0; d < this.dim; d++) {
      let acc = this.biases[d];
      const base = d * nInputs;
      for (let i = 0; i < nInputs; i++) {
        acc += this.weights[base + i] * input[i];
      }
      out[d] = acc > 0 ? acc : 0; // post-ReLU activations
    }
    return out;
  }
}

const REGISTRY: Record<string, () => Backbone> = {
  "rp-128": () => new RandomProjectionBackbone("rp-128", 32, 128),
  "rp-256": () => new RandomProjectionBackbone("rp-256", 32, 256),
};

export function availableBackbones(): string[] {
  return Object.keys(REGISTRY).sort();
}

export function createBackbone(name: string): Backbone {
  const factory = REGISTRY[name];
  if (!factory) {
    throw new BackboneError(
      `unknown backbone "${name}"; available: ${availableBackbones().join(", ")}`,
    );
  }
  return factory();
}
