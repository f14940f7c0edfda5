/**
 * Conversion core: pick the cube and ground-truth arrays out of two MAT
 * files, reorder to band-sequential row-major, cast, and emit .hsc/.hsl
 * buffers plus an integrity manifest.
 */

import { createHash } from 'node:crypto'
import { MatArray, parseMat } from './mat5.js'
import { encodeCube, encodeLabels } from './hsformat.js'

export class ArrayNotFound extends Error {}
export class RankMismatch extends Error {}
export class DimsDisagree extends Error {}
export class TooManyClasses extends Error {}

export type BandOrder = 'auto' | 'hwb' | 'bhw'

export interface ConversionManifest {
  sources: { path: string; sha256: string; bytes: number }[]
  cube_array: string
  gt_array: string
  band_order: 'hwb' | 'bhw'
  height: number
  width: number
  bands: number
  num_classes: number
  class_counts: Record<string, number>
  unlabeled: number
  outputs: { cube: string; labels: string }
}

export function sha256(buf: Buffer): string {
  return createHash('sha256').update(buf).digest('hex')
}

/** Largest numeric array of the wanted rank (ties: first in file order). */
export function pickArray(arrays: MatArray[], rank: number, role: string): MatArray {
  let best: MatArray | null = null
  for (const a of arrays) {
    if (a.dims.length !== rank) continue
    if (best === null || a.data.length > best.data.length) best = a
  }
  if (best === null) {
    const shapes = arrays.map((a) => `${a.name}[${a.dims.join('x')}]`).join(', ') || 'none'
    throw new ArrayNotFound(`no rank-${rank} numeric array for the ${role} (found: ${shapes})`)
  }
  return best
}

function resolveOrder(cubeDims: number[], h: number, w: number, order: BandOrder): 'hwb' | 'bhw' {
  const hwb = cubeDims[0] === h && cubeDims[1] === w
  const bhw = cubeDims[1] === h && cubeDims[2] === w
  if (order === 'hwb' || order === 'bhw') {
    const ok = order === 'hwb' ? hwb : bhw
    if (!ok) {
      throw new DimsDisagree(
        `cube dims [${cubeDims.join('x')}] do not match ground truth ${h}x${w} as ${order}`)
    }
    return order
  }
  if (hwb) return 'hwb'
  if (bhw) return 'bhw'
  throw new DimsDisagree(
    `cube dims [${cubeDims.join('x')}] do not contain the ground-truth extent ${h}x${w}`)
}

/** Column-major MAT cube -> band-sequential float32 (band, row, col). */
export function cubeToBandSequential(cube: MatArray, order: 'hwb' | 'bhw'): {
  height: number; width: number; bands: number; values: Float32Array
} {
  const [d0, d1, d2] = cube.dims
  const src = cube.data
  let height: number
  let width: number
  let bands: number
  let get: (b: number, y: number, x: number) => number
  if (order === 'hwb') {
    height = d0
    width = d1
    bands = d2
    get = (b, y, x) => src[y + d0 * x + d0 * d1 * b]
  } else {
    bands = d0
    height = d1
    width = d2
    get = (b, y, x) => src[b + d0 * y + d0 * d1 * x]
  }
  const out = new Float32Array(height * width * bands)
  let i = 0
  for (let b = 0; b < bands; b++) {
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        out[i++] = Math.fround(get(b, y, x))
      }
    }
  }
  return { height, width, bands, values: out }
}

/** Column-major MAT ground truth -> row-major uint16 labels. */
export function labelsToRowMajor(gt: MatArray): { height: number; width: number; values: Uint16Array } {
  const [h, w] = gt.dims
  const out = new Uint16Array(h * w)
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const v = gt.data[y + h * x]
      if (!Number.isInteger(v) || v < 0 || v > 0xffff) {
        throw new RankMismatch(`ground-truth value ${v} at (${y},${x}) is not a uint16 class id`)
      }
      out[y * w + x] = v
    }
  }
  return { height: h, width: w, values: out }
}

export interface ConversionResult {
  cubeFile: Buffer
  labelFile: Buffer
  manifest: ConversionManifest
}

export function convert(cubeBuf: Buffer, gtBuf: Buffer, cubePath: string, gtPath: string,
                        outPrefix: string, order: BandOrder = 'auto',
                        maxClasses = 16): ConversionResult {
  const cubeArrays = parseMat(cubeBuf)
  const gtArrays = parseMat(gtBuf)
  const gtArr = pickArray(gtArrays, 2, 'ground truth')
  const cubeArr = pickArray(cubeArrays, 3, 'cube')

  const labels = labelsToRowMajor(gtArr)
  const resolved = resolveOrder(cubeArr.dims, labels.height, labels.width, order)
  const cube = cubeToBandSequential(cubeArr, resolved)
  if (cube.height !== labels.height || cube.width !== labels.width) {
    throw new DimsDisagree(
      `cube is ${cube.height}x${cube.width} but ground truth is ${labels.height}x${labels.width}`)
  }

  let numClasses = 0
  for (const v of labels.values) if (v > numClasses) numClasses = v
  if (numClasses > maxClasses) {
    throw new TooManyClasses(`${numClasses} classes exceed the expected maximum ${maxClasses}`)
  }
  const counts: Record<string, number> = {}
  let unlabeled = 0
  for (const v of labels.values) {
    if (v === 0) unlabeled++
    else counts[String(v)] = (counts[String(v)] ?? 0) + 1
  }

  const cubeFile = encodeCube(cube.height, cube.width, cube.bands, cube.values)
  const labelFile = encodeLabels(labels.height, labels.width, numClasses, labels.values)
  const manifest: ConversionManifest = {
    sources: [
      { path: cubePath, sha256: sha256(cubeBuf), bytes: cubeBuf.length },
      { path: gtPath, sha256: sha256(gtBuf), bytes: gtBuf.length },
    ],
    cube_array: cubeArr.name,
    gt_array: gtArr.name,
    band_order: resolved,
    height: cube.height,
    width: cube.width,
    bands: cube.bands,
    num_classes: numClasses,
    class_counts: counts,
    unlabeled,
    outputs: { cube: `${outPrefix}.hsc`, labels: `${outPrefix}.hsl` },
  }
  return { cubeFile, labelFile, manifest }
}
