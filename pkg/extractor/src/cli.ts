/**
 * Extractor command line.
 *
 *   extract --dataset stub32 --splits train,val,test --layers 0..24 --out DIR
 *   verify-roundtrip FILE [FILE...]
 *
 * `--layers` accepts comma lists and inclusive ranges ("0..24", "13",
 * "0,13,24"). Exit code 0 on success, 1 with an error message on stderr
 * otherwise.
 */

import { StubBackbone } from './backbone'
import { openDataset, SplitName } from './dataset'
import { extract } from './extract'
import { verifyRoundtrip } from './verify'

export function parseLayers(spec: string): number[] {
  const layers: number[] = []
  for (const part of spec.split(',')) {
    const trimmed = part.trim()
    if (trimmed === '') continue
    const range = trimmed.match(/^(\d+)\.\.(\d+)$/)
    if (range) {
      const lo = parseInt(range[1], 10)
      const hi = parseInt(range[2], 10)
      if (hi < lo) throw new Error(`empty layer range '${trimmed}'`)
      for (let l = lo; l <= hi; l++) layers.push(l)
    } else if (/^\d+$/.test(trimmed)) {
      layers.push(parseInt(trimmed, 10))
    } else {
      throw new Error(`cannot parse layer spec '${trimmed}'`)
    }
  }
  if (layers.length === 0) throw new Error('no layers requested')
  return [...new Set(layers)].sort((a, b) => a - b)
}

function parseFlags(args: string[]): { flags: Map<string, string>; positional: string[] } {
  const flags = new Map<string, string>()
  const positional: string[] = []
  for (let i = 0; i < args.length; i++) {
    const arg = args[i]
    if (arg.startsWith('--')) {
      const value = args[i + 1]
      if (value === undefined || value.startsWith('--')) {
        throw new Error(`flag ${arg} needs a value`)
      }
      flags.set(arg.slice(2), value)
      i++
    } else {
      positional.push(arg)
    }
  }
  return { flags, positional }
}

function requireFlag(flags: Map<string, string>, name: string): string {
  const value = flags.get(name)
  if (value === undefined) throw new Error(`missing required flag --${name}`)
  return value
}

const VALID_SPLITS: SplitName[] = ['train', 'val', 'test']

export function runCli(argv: string[]): number {
  const [command, ...rest] = argv
  if (command === 'extract') {
    const { flags } = parseFlags(rest)
    const dataset = openDataset(requireFlag(flags, 'dataset'))
    const splits = requireFlag(flags, 'splits')
      .split(',')
      .map((s) => s.trim())
      .filter(Boolean) as SplitName[]
    for (const split of splits) {
      if (!VALID_SPLITS.includes(split)) {
        throw new Error(`unknown split '${split}' (train|val|test)`)
      }
    }
    const layers = parseLayers(requireFlag(flags, 'layers'))
    const outputDir = requireFlag(flags, 'out')
    const files = extract({
      dataset,
      backbone: new StubBackbone(),
      splits,
      layerIndices: layers,
      outputDir,
    })
    for (const file of files) {
      console.log(
        `${file.path}  samples=${file.manifest.num_samples} ` +
          `dim=${file.manifest.feature_dim} layer=${file.layer}`,
      )
    }
    return 0
  }

  if (command === 'verify-roundtrip') {
    const { positional } = parseFlags(rest)
    if (positional.length === 0) {
      throw new Error('verify-roundtrip needs at least one file path')
    }
    let failed = 0
    for (const path of positional) {
      const report = verifyRoundtrip(path)
      if (report.ok) {
        console.log(`${path}: OK (${report.checks.length} checks)`)
      } else {
        failed++
        for (const check of report.checks.filter((c) => !c.ok)) {
          console.error(
            `${path}: MISMATCH ${check.field}: expected ` +
              `${check.expected}, got ${check.actual}`,
          )
        }
      }
    }
    return failed === 0 ? 0 : 1
  }

  throw new Error(
    `unknown command '${command ?? ''}' (extract | verify-roundtrip)`,
  )
}

if (require.main === module) {
  try {
    process.exit(runCli(process.argv.slice(2)))
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error))
    process.exit(1)
  }
}
