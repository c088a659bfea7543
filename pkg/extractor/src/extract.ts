/**
 * Extraction jobs: pool per-layer patch tokens for every image of the
 * requested splits and write one AROM1 file per (layer, split), plus a
 * .meta.json sidecar carrying class names and the payload checksum the
 * verifier checks against.
 */

import { mkdirSync } from 'node:fs'
import { join } from 'node:path'

import { Backbone, poolPatchTokens } from './backbone'
import { Dataset, RESOLUTION, SplitName } from './dataset'
import { writeFeatureFile, SidecarManifest } from './arom1'

export interface ExtractionJob {
  dataset: Dataset
  backbone: Backbone
  splits: SplitName[]
  layerIndices: number[]
  outputDir: string
  batchSize?: number
}

export interface ExtractedFile {
  path: string
  split: SplitName
  layer: number
  manifest: SidecarManifest
}

export function outputFileName(dataset: string, split: SplitName, layer: number): string {
  return `${dataset}_${split}_L${layer}.arom`
}

export function extract(job: ExtractionJob): ExtractedFile[] {
  const { dataset, backbone } = job
  for (const layer of job.layerIndices) {
    if (layer < 0 || layer >= backbone.depth) {
      throw new Error(
        `layer ${layer} out of range for backbone depth ${backbone.depth}`,
      )
    }
  }
  if (job.splits.length === 0 || job.layerIndices.length === 0) {
    throw new Error('need at least one split and one layer')
  }
  mkdirSync(job.outputDir, { recursive: true })

  const results: ExtractedFile[] = []
  for (const split of job.splits) {
    const samples = dataset.samples(split)
    if (samples.length === 0) {
      throw new Error(`split '${split}' of ${dataset.name} is empty`)
    }
    for (const image of samples) {
      if (image.pixels.length !== RESOLUTION * RESOLUTION) {
        throw new Error(
          `image ${image.id} is not ${RESOLUTION}x${RESOLUTION}`,
        )
      }
    }
    for (const layer of job.layerIndices) {
      const features = new Float32Array(samples.length * backbone.featureDim)
      const labels = new Uint16Array(samples.length)
      samples.forEach((image, row) => {
        const tokens = backbone.patchTokens(image, layer)
        const pooled = poolPatchTokens(
          tokens,
          backbone.patchCount,
          backbone.featureDim,
        )
        features.set(pooled, row * backbone.featureDim)
        labels[row] = image.label
      })
      const path = join(job.outputDir, outputFileName(dataset.name, split, layer))
      const manifest = writeFeatureFile(
        path,
        {
          features,
          numSamples: samples.length,
          featureDim: backbone.featureDim,
          layerIndex: layer,
          patchCount: backbone.patchCount,
          backboneId: backbone.id,
          sourceDataset: dataset.name,
          labels,
        },
        {
          class_names: dataset.classNames,
          provenance: `extractor ${backbone.id} split=${split} layer=${layer}`,
        },
      )
      results.push({ path, split, layer, manifest })
    }
  }
  return results
}
