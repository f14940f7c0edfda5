#!/usr/bin/env node
/**
 * mat2hsc CUBE.mat GT.mat --out PREFIX [--band-order auto|hwb|bhw]
 *
 * Converts a MAT v5 cube + ground-truth pair into the toolkit's .hsc/.hsl
 * formats and prints a JSON conversion manifest on stdout.
 */

import { readFileSync, writeFileSync } from 'node:fs'
import { BandOrder, convert } from './convert.js'

const USAGE = 'usage: mat2hsc CUBE.mat GT.mat --out PREFIX [--band-order auto|hwb|bhw]'

export function main(argv: string[]): number {
  const positional: string[] = []
  let outPrefix: string | undefined
  let order: BandOrder = 'auto'

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]
    if (arg === '--out') {
      outPrefix = argv[++i]
    } else if (arg === '--band-order') {
      const v = argv[++i]
      if (v !== 'auto' && v !== 'hwb' && v !== 'bhw') {
        console.error(`mat2hsc: bad --band-order ${v}\n${USAGE}`)
        return 1
      }
      order = v
    } else if (arg === '--help' || arg === '-h') {
      console.log(USAGE)
      return 0
    } else if (arg.startsWith('-')) {
      console.error(`mat2hsc: unknown flag ${arg}\n${USAGE}`)
      return 1
    } else {
      positional.push(arg)
    }
  }
  if (positional.length !== 2 || !outPrefix) {
    console.error(USAGE)
    return 1
  }
  const [cubePath, gtPath] = positional

  try {
    const result = convert(readFileSync(cubePath), readFileSync(gtPath),
                           cubePath, gtPath, outPrefix, order)
    writeFileSync(`${outPrefix}.hsc`, result.cubeFile)
    writeFileSync(`${outPrefix}.hsl`, result.labelFile)
    console.log(JSON.stringify(result.manifest, null, 2))
    return 0
  } catch (err) {
    const name = err instanceof Error ? err.constructor.name : 'Error'
    const message = err instanceof Error ? err.message : String(err)
    console.error(`mat2hsc: ${name}: ${message}`)
    return 2
  }
}

process.exit(main(process.argv.slice(2)))
