/**
 * Image sources for extraction jobs.
 *
 * Real datasets arrive as downloads with fixed train/val/test splits;
 * wiring one in means implementing `Dataset`. The built-in `stub32`
 * dataset provides the offline path: 32 synthetic 224x224 images (4
 * classes x 8) per split with deterministic pixel patterns, so the whole
 * extract -> write -> verify pipeline runs with no network or weights.
 */

import { ImageSample } from './backbone'

export const RESOLUTION = 224

export type SplitName = 'train' | 'val' | 'test'

export interface Dataset {
  readonly name: string
  readonly classNames: string[]
  samples(split: SplitName): ImageSample[]
}

function patternPixels(seedA: number, seedB: number): Uint8Array {
  // Deterministic sinusoidal texture; distinct (seedA, seedB) pairs give
  // distinct images without any RNG state.
  const pixels = new Uint8Array(RESOLUTION * RESOLUTION)
  for (let y = 0; y < RESOLUTION; y++) {
    for (let x = 0; x < RESOLUTION; x++) {
      const value =
        128 +
        64 * Math.sin((x * (1 + seedA) + y) / 13.7) +
        63 * Math.cos((y * (1 + seedB) - x) / 7.3)
      pixels[y * RESOLUTION + x] = Math.max(0, Math.min(255, Math.round(value)))
    }
  }
  return pixels
}

export class StubDataset implements Dataset {
  readonly name: string
  readonly classNames = ['alpha', 'beta', 'gamma', 'delta']
  private readonly perClass: number

  constructor(name = 'stub32', perClass = 8) {
    this.name = name
    this.perClass = perClass
  }

  samples(split: SplitName): ImageSample[] {
    const splitOffset = { train: 0, val: 1000, test: 2000 }[split]
    const out: ImageSample[] = []
    for (let label = 0; label < this.classNames.length; label++) {
      for (let i = 0; i < this.perClass; i++) {
        const index = splitOffset + label * this.perClass + i
        out.push({
          id: `${this.name}/${split}/${index}`,
          label,
          pixels: patternPixels(index, label),
        })
      }
    }
    return out
  }
}

export function openDataset(name: string): Dataset {
  if (name === 'stub32') return new StubDataset()
  throw new Error(
    `unknown dataset '${name}'; only the offline 'stub32' dataset is ` +
      'bundled -- real datasets need a Dataset implementation plus downloads',
  )
}
