/**
 * Round-trip verification of written feature files.
 *
 * Deliberately does NOT reuse the arom1 reader: the header is re-parsed
 * here with an independent DataView-based implementation, the payload
 * checksum is recomputed, and everything is compared against the
 * .meta.json sidecar the writer produced. A pass means the bytes on disk
 * agree with what the extractor intended to write.
 */

import { createHash } from 'node:crypto'
import { readFileSync } from 'node:fs'

import { sidecarPath, SidecarManifest } from './arom1'

export interface FieldCheck {
  field: string
  expected: string | number
  actual: string | number
  ok: boolean
}

export interface VerifyReport {
  path: string
  ok: boolean
  checks: FieldCheck[]
}

function decodePadded(view: DataView, offset: number, width: number): string {
  const bytes = new Uint8Array(view.buffer, view.byteOffset + offset, width)
  let end = width
  while (end > 0 && bytes[end - 1] === 0) end--
  return Buffer.from(bytes.subarray(0, end)).toString('utf-8')
}

export function verifyRoundtrip(path: string): VerifyReport {
  const blob = readFileSync(path)
  const manifest: SidecarManifest = JSON.parse(
    readFileSync(sidecarPath(path), 'utf-8'),
  )
  const checks: FieldCheck[] = []
  const check = (field: string, expected: string | number, actual: string | number) => {
    checks.push({ field, expected, actual, ok: expected === actual })
  }

  if (blob.length < 86) {
    return {
      path,
      ok: false,
      checks: [
        { field: 'file_size', expected: '>= 86', actual: blob.length, ok: false },
      ],
    }
  }
  const view = new DataView(blob.buffer, blob.byteOffset, blob.byteLength)

  check('magic', 'AROM', Buffer.from(blob.subarray(0, 4)).toString('ascii'))
  check('version', 1, view.getUint16(4, true))
  const numSamples = view.getUint32(6, true)
  const featureDim = view.getUint32(10, true)
  check('num_samples', manifest.num_samples, numSamples)
  check('feature_dim', manifest.feature_dim, featureDim)
  check('layer_index', manifest.layer_index, view.getUint16(14, true))
  check('patch_count', manifest.patch_count, view.getUint16(16, true))
  check('backbone_id', manifest.backbone_id, decodePadded(view, 18, 32))
  check('source_dataset', manifest.source_dataset, decodePadded(view, 50, 32))
  const labelCount = view.getUint32(82, true)
  check('label_count', manifest.label_count, labelCount)

  const expectedSize = 86 + numSamples * featureDim * 4 + labelCount * 2
  check('file_size', expectedSize, blob.length)

  if (blob.length >= 86 + numSamples * featureDim * 4) {
    const payload = blob.subarray(86, 86 + numSamples * featureDim * 4)
    const digest = createHash('sha256').update(payload).digest('hex')
    check('payload_sha256', manifest.payload_sha256, digest)
  } else {
    check('payload_sha256', manifest.payload_sha256, '<payload truncated>')
  }

  return { path, ok: checks.every((c) => c.ok), checks }
}
