import assert from 'node:assert/strict'
import { test } from 'node:test'
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'

import {
  HEADER_SIZE,
  decodeFeatureFile,
  encodeFeatureFile,
  readFeatureFile,
  sidecarPath,
  writeFeatureFile,
} from '../src/arom1'

function sampleFile(labeled = true) {
  return {
    features: new Float32Array([1, 2, 3, 4, 5, 6]),
    numSamples: 2,
    featureDim: 3,
    layerIndex: 13,
    patchCount: 256,
    backboneId: 'stub',
    sourceDataset: 'unit',
    labels: labeled ? new Uint16Array([0, 1]) : undefined,
  }
}

test('encode/decode round-trip preserves everything', () => {
  const original = sampleFile()
  const decoded = decodeFeatureFile(encodeFeatureFile(original))
  assert.deepEqual(Array.from(decoded.features), Array.from(original.features))
  assert.equal(decoded.numSamples, 2)
  assert.equal(decoded.featureDim, 3)
  assert.equal(decoded.layerIndex, 13)
  assert.equal(decoded.patchCount, 256)
  assert.equal(decoded.backboneId, 'stub')
  assert.equal(decoded.sourceDataset, 'unit')
  assert.deepEqual(Array.from(decoded.labels!), [0, 1])
})

test('layout: header plus payload plus labels', () => {
  const blob = encodeFeatureFile(sampleFile())
  assert.equal(blob.length, HEADER_SIZE + 6 * 4 + 2 * 2)
  assert.equal(blob.toString('ascii', 0, 4), 'AROM')
  assert.equal(blob.readUInt16LE(4), 1)
  assert.equal(blob.readUInt32LE(6), 2)
  assert.equal(blob.readUInt32LE(10), 3)
  assert.equal(blob.readUInt32LE(82), 2)
})

test('unlabeled file has zero label count', () => {
  const blob = encodeFeatureFile(sampleFile(false))
  assert.equal(blob.readUInt32LE(82), 0)
  assert.equal(decodeFeatureFile(blob).labels, undefined)
})

test('bad magic rejected', () => {
  const blob = encodeFeatureFile(sampleFile())
  blob.write('XXXX', 0, 'ascii')
  assert.throws(() => decodeFeatureFile(blob), /bad magic/)
})

test('truncated payload rejected', () => {
  const blob = encodeFeatureFile(sampleFile())
  assert.throws(
    () => decodeFeatureFile(blob.subarray(0, blob.length - 3)),
    /declared sizes/,
  )
})

test('non-finite features rejected before writing', () => {
  const file = sampleFile()
  file.features[2] = Number.NaN
  assert.throws(() => encodeFeatureFile(file), /non-finite/)
})

test('writeFeatureFile emits sidecar with checksum', () => {
  const dir = mkdtempSync(join(tmpdir(), 'arom1-'))
  const path = join(dir, 'x.arom')
  const manifest = writeFeatureFile(path, sampleFile(), {
    class_names: ['a', 'b'],
  })
  assert.equal(manifest.num_samples, 2)
  assert.equal(manifest.payload_sha256.length, 64)
  const sidecar = JSON.parse(readFileSync(sidecarPath(path), 'utf-8'))
  assert.deepEqual(sidecar.class_names, ['a', 'b'])
  assert.equal(sidecar.payload_sha256, manifest.payload_sha256)
  const back = readFeatureFile(path)
  assert.equal(back.numSamples, 2)
})
