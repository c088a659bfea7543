/**
 * AROM1 feature container: writer, reader, and the .meta.json sidecar.
 *
 * Layout (little-endian):
 *   0   magic "AROM" (4 bytes)
 *   4   version u16 = 1
 *   6   num_samples u32
 *   10  feature_dim u32
 *   14  layer_index u16
 *   16  patch_count u16
 *   18  backbone_id, 32-byte zero-padded UTF-8
 *   50  source_dataset, 32-byte zero-padded UTF-8
 *   82  label_count u32 (0 = unlabeled)
 *   86  num_samples * feature_dim float32, row-major
 *   ..  label_count u16 labels
 */

import { createHash } from 'node:crypto'
import { readFileSync, writeFileSync } from 'node:fs'

export const MAGIC = 'AROM'
export const VERSION = 1
export const HEADER_SIZE = 86

export interface FeatureFile {
  features: Float32Array // row-major, numSamples * featureDim entries
  numSamples: number
  featureDim: number
  layerIndex: number
  patchCount: number
  backboneId: string
  sourceDataset: string
  labels?: Uint16Array
}

export interface SidecarManifest {
  num_samples: number
  feature_dim: number
  layer_index: number
  patch_count: number
  backbone_id: string
  source_dataset: string
  label_count: number
  payload_sha256: string
  class_names?: string[]
  provenance?: string
}

function packPadded(text: string, width: number, name: string): Buffer {
  const raw = Buffer.from(text, 'utf-8')
  if (raw.length > width) {
    throw new Error(`${name} exceeds ${width} UTF-8 bytes: ${text}`)
  }
  const out = Buffer.alloc(width)
  raw.copy(out)
  return out
}

function assertFinite(features: Float32Array): void {
  for (let i = 0; i < features.length; i++) {
    if (!Number.isFinite(features[i])) {
      throw new Error(`non-finite feature value at flat index ${i}`)
    }
  }
}

export function encodeFeatureFile(file: FeatureFile): Buffer {
  if (file.features.length !== file.numSamples * file.featureDim) {
    throw new Error(
      `features length ${file.features.length} != ` +
        `${file.numSamples} * ${file.featureDim}`,
    )
  }
  if (file.labels && file.labels.length !== file.numSamples) {
    throw new Error(
      `labels length ${file.labels.length} != num_samples ${file.numSamples}`,
    )
  }
  assertFinite(file.features)

  const header = Buffer.alloc(HEADER_SIZE)
  header.write(MAGIC, 0, 'ascii')
  header.writeUInt16LE(VERSION, 4)
  header.writeUInt32LE(file.numSamples, 6)
  header.writeUInt32LE(file.featureDim, 10)
  header.writeUInt16LE(file.layerIndex, 14)
  header.writeUInt16LE(file.patchCount, 16)
  packPadded(file.backboneId, 32, 'backbone_id').copy(header, 18)
  packPadded(file.sourceDataset, 32, 'source_dataset').copy(header, 50)
  header.writeUInt32LE(file.labels ? file.numSamples : 0, 82)

  // Serialize floats explicitly little-endian regardless of host order.
  const payload = Buffer.alloc(file.features.length * 4)
  for (let i = 0; i < file.features.length; i++) {
    payload.writeFloatLE(file.features[i], i * 4)
  }

  const parts = [header, payload]
  if (file.labels) {
    const labelBytes = Buffer.alloc(file.labels.length * 2)
    for (let i = 0; i < file.labels.length; i++) {
      labelBytes.writeUInt16LE(file.labels[i], i * 2)
    }
    parts.push(labelBytes)
  }
  return Buffer.concat(parts)
}

export function decodeFeatureFile(blob: Buffer): FeatureFile {
  if (blob.length < HEADER_SIZE) {
    throw new Error(`file shorter than the ${HEADER_SIZE}-byte header`)
  }
  const magic = blob.toString('ascii', 0, 4)
  if (magic !== MAGIC) {
    throw new Error(`bad magic ${JSON.stringify(magic)}, expected ${MAGIC}`)
  }
  const version = blob.readUInt16LE(4)
  if (version !== VERSION) {
    throw new Error(`unsupported version ${version}, expected ${VERSION}`)
  }
  const numSamples = blob.readUInt32LE(6)
  const featureDim = blob.readUInt32LE(10)
  const layerIndex = blob.readUInt16LE(14)
  const patchCount = blob.readUInt16LE(16)
  const backboneId = stripPadding(blob.subarray(18, 50))
  const sourceDataset = stripPadding(blob.subarray(50, 82))
  const labelCount = blob.readUInt32LE(82)

  if (labelCount !== 0 && labelCount !== numSamples) {
    throw new Error(
      `label_count ${labelCount} does not match num_samples ${numSamples}`,
    )
  }
  const payloadBytes = numSamples * featureDim * 4
  const expected = HEADER_SIZE + payloadBytes + labelCount * 2
  if (blob.length !== expected) {
    throw new Error(
      `declared sizes need ${expected} bytes, file has ${blob.length}`,
    )
  }

  const features = new Float32Array(numSamples * featureDim)
  for (let i = 0; i < features.length; i++) {
    features[i] = blob.readFloatLE(HEADER_SIZE + i * 4)
  }
  assertFinite(features)

  let labels: Uint16Array | undefined
  if (labelCount > 0) {
    labels = new Uint16Array(labelCount)
    for (let i = 0; i < labelCount; i++) {
      labels[i] = blob.readUInt16LE(HEADER_SIZE + payloadBytes + i * 2)
    }
  }
  return {
    features,
    numSamples,
    featureDim,
    layerIndex,
    patchCount,
    backboneId,
    sourceDataset,
    labels,
  }
}

function stripPadding(raw: Buffer): string {
  let end = raw.length
  while (end > 0 && raw[end - 1] === 0) end--
  return raw.toString('utf-8', 0, end)
}

export function payloadSha256(blob: Buffer): string {
  const numSamples = blob.readUInt32LE(6)
  const featureDim = blob.readUInt32LE(10)
  const payload = blob.subarray(HEADER_SIZE, HEADER_SIZE + numSamples * featureDim * 4)
  return createHash('sha256').update(payload).digest('hex')
}

export function sidecarPath(featurePath: string): string {
  return featurePath.replace(/\.[^./\\]+$/, '') + '.meta.json'
}

export function writeFeatureFile(
  path: string,
  file: FeatureFile,
  extras: { class_names?: string[]; provenance?: string } = {},
): SidecarManifest {
  const blob = encodeFeatureFile(file)
  writeFileSync(path, blob)
  const manifest: SidecarManifest = {
    num_samples: file.numSamples,
    feature_dim: file.featureDim,
    layer_index: file.layerIndex,
    patch_count: file.patchCount,
    backbone_id: file.backboneId,
    source_dataset: file.sourceDataset,
    label_count: file.labels ? file.labels.length : 0,
    payload_sha256: payloadSha256(blob),
    ...extras,
  }
  writeFileSync(sidecarPath(path), JSON.stringify(manifest, null, 2))
  return manifest
}

export function readFeatureFile(path: string): FeatureFile {
  return decodeFeatureFile(readFileSync(path))
}
