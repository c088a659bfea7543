/**
 * Cross-package conformance: files written here must parse under the
 * primary toolkit's reader. Exercised through the primary's public CLI
 * (`python3 -m arom.cli inspect`), which is its supported external
 * surface, and through the extractor's own verifier CLI.
 */

import assert from 'node:assert/strict'
import { test } from 'node:test'
import { spawnSync } from 'node:child_process'
import { mkdtempSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'

import { StubBackbone } from '../src/backbone'
import { StubDataset } from '../src/dataset'
import { extract } from '../src/extract'

function extractOne(): string {
  const dir = mkdtempSync(join(tmpdir(), 'conform-'))
  const [file] = extract({
    dataset: new StubDataset(),
    backbone: new StubBackbone(),
    splits: ['train'],
    layerIndices: [13],
    outputDir: dir,
  })
  return file.path
}

test('primary reader parses extracted files with the expected geometry', () => {
  const path = extractOne()
  const result = spawnSync('python3', ['-m', 'arom.cli', 'inspect', path], {
    encoding: 'utf-8',
  })
  assert.equal(
    result.status,
    0,
    `inspect failed: ${result.stderr || result.stdout}`,
  )
  const body = JSON.parse(result.stdout)
  assert.equal(body.kind, 'features')
  assert.equal(body.summary.feature_dim, 1024)
  assert.equal(body.summary.patch_count, 256)
  assert.equal(body.summary.num_samples, 32)
  assert.equal(body.summary.layer_index, 13)
  assert.equal(body.summary.labeled, true)
  assert.equal(body.summary.num_classes, 4)
})

test('verifier CLI exits zero on a fresh file, nonzero after truncation', () => {
  const path = extractOne()
  const cli = join(__dirname, '..', 'src', 'cli.js')
  const pass = spawnSync('node', [cli, 'verify-roundtrip', path], {
    encoding: 'utf-8',
  })
  assert.equal(pass.status, 0, pass.stderr)
  assert.match(pass.stdout, /OK/)

  const { truncateSync, statSync } = require('node:fs')
  truncateSync(path, statSync(path).size - 1)
  const fail = spawnSync('node', [cli, 'verify-roundtrip', path], {
    encoding: 'utf-8',
  })
  assert.equal(fail.status, 1)
  assert.match(fail.stderr, /MISMATCH/)
})

test('primary pipeline consumes extracted features end to end', () => {
  const dir = mkdtempSync(join(tmpdir(), 'pipeline-'))
  extract({
    dataset: new StubDataset(),
    backbone: new StubBackbone(),
    splits: ['train', 'test'],
    layerIndices: [13],
    outputDir: dir,
  })
  const train = join(dir, 'stub32_train_L13.arom')
  const testFile = join(dir, 'stub32_test_L13.arom')
  const lang = join(dir, 'lang.arlg')
  const dict = join(dir, 'dict.ardc')

  const run = (args: string[]) => {
    const result = spawnSync('python3', ['-m', 'arom.cli', ...args], {
      encoding: 'utf-8',
    })
    assert.equal(result.status, 0, `${args[0]} failed: ${result.stderr}`)
    return JSON.parse(result.stdout)
  }

  run([
    'fit-language',
    '--input', train,
    '--out', lang,
    '--alphabet', '8',
    '--vocab', '4',
    '--seed', '0',
  ])
  run(['fit-dictionary', '--lang', lang, '--input', train, '--out', dict])
  const preds = run([
    'classify',
    '--lang', lang,
    '--dict', dict,
    '--input', testFile,
    '--k', '5',
  ])
  assert.equal(preds.predictions.length, 32)
  for (const p of preds.predictions) {
    assert.ok(p.label >= 0 && p.label < 4)
    assert.equal(p.neighbors.length, 5)
  }
})
