/**
 * Synthetic MAT v5 file builder for the test suite. Written directly from
 * the container format rules (128-byte header, tagged data elements padded
 * to 8 bytes, miMATRIX subelements), independent of the parser under test.
 */

import { deflateSync } from 'node:zlib'

export const miINT8 = 1
export const miUINT8 = 2
export const miINT32 = 5
export const miUINT32 = 6
export const miSINGLE = 7
export const miDOUBLE = 9
export const miMATRIX = 14
export const miCOMPRESSED = 15

export const mxDOUBLE = 6
export const mxSINGLE = 7
export const mxUINT8 = 9
export const mxUINT16 = 11

function pad8(buf: Buffer): Buffer {
  const rem = buf.length % 8
  return rem === 0 ? buf : Buffer.concat([buf, Buffer.alloc(8 - rem)])
}

export function matHeader(le = true, text = 'MATLAB 5.0 MAT-file, synthetic fixture'): Buffer {
  const head = Buffer.alloc(128, 0x20)
  head.write(text, 0, Math.min(text.length, 116), 'latin1')
  head.fill(0, 116, 124) // subsystem data offset
  if (le) {
    head.writeUInt16LE(0x0100, 124)
    head.write('IM', 126, 'latin1')
  } else {
    head.writeUInt16BE(0x0100, 124)
    head.write('MI', 126, 'latin1')
  }
  return head
}

export function element(type: number, data: Buffer, le = true): Buffer {
  const tag = Buffer.alloc(8)
  if (le) {
    tag.writeUInt32LE(type, 0)
    tag.writeUInt32LE(data.length, 4)
  } else {
    tag.writeUInt32BE(type, 0)
    tag.writeUInt32BE(data.length, 4)
  }
  return Buffer.concat([tag, pad8(data)])
}

/** Small data element: type and length packed into one 32-bit word. */
export function smallElement(type: number, data: Buffer, le = true): Buffer {
  if (data.length > 4) throw new Error('small element payload must be <= 4 bytes')
  const out = Buffer.alloc(8)
  const word = (data.length << 16) | type
  if (le) out.writeUInt32LE(word, 0)
  else out.writeUInt32BE(word, 0)
  data.copy(out, 4)
  return out
}

export interface FixtureArray {
  name: string
  dims: number[]
  /** column-major values */
  values: number[]
  classCode?: number
  dataType?: number
  smallName?: boolean
}

function numericBuffer(values: number[], dataType: number, le: boolean): Buffer {
  switch (dataType) {
    case miDOUBLE: {
      const buf = Buffer.alloc(values.length * 8)
      values.forEach((v, i) => (le ? buf.writeDoubleLE(v, i * 8) : buf.writeDoubleBE(v, i * 8)))
      return buf
    }
    case miSINGLE: {
      const buf = Buffer.alloc(values.length * 4)
      values.forEach((v, i) => (le ? buf.writeFloatLE(v, i * 4) : buf.writeFloatBE(v, i * 4)))
      return buf
    }
    case miUINT8: {
      const buf = Buffer.alloc(values.length)
      values.forEach((v, i) => buf.writeUInt8(v, i))
      return buf
    }
    case miINT32: {
      const buf = Buffer.alloc(values.length * 4)
      values.forEach((v, i) => (le ? buf.writeInt32LE(v, i * 4) : buf.writeInt32BE(v, i * 4)))
      return buf
    }
    default:
      throw new Error(`fixture builder does not support data type ${dataType}`)
  }
}

export function matrixElement(arr: FixtureArray, le = true): Buffer {
  const classCode = arr.classCode ?? mxDOUBLE
  const dataType = arr.dataType ?? miDOUBLE

  const flags = Buffer.alloc(8)
  if (le) flags.writeUInt32LE(classCode, 0)
  else flags.writeUInt32BE(classCode, 0)

  const dims = Buffer.alloc(arr.dims.length * 4)
  arr.dims.forEach((d, i) => (le ? dims.writeInt32LE(d, i * 4) : dims.writeInt32BE(d, i * 4)))

  const nameBuf = Buffer.from(arr.name, 'latin1')
  const nameEl = arr.smallName && nameBuf.length <= 4
    ? smallElement(miINT8, nameBuf, le)
    : element(miINT8, nameBuf, le)

  const content = Buffer.concat([
    element(miUINT32, flags, le),
    element(miINT32, dims, le),
    nameEl,
    element(dataType, numericBuffer(arr.values, dataType, le), le),
  ])
  return element(miMATRIX, content, le)
}

export function matFile(arrays: FixtureArray[], opts: { le?: boolean; compress?: boolean } = {}): Buffer {
  const le = opts.le ?? true
  const parts = [matHeader(le)]
  for (const arr of arrays) {
    const el = matrixElement(arr, le)
    if (opts.compress) {
      parts.push(element(miCOMPRESSED, deflateSync(el), le))
    } else {
      parts.push(el)
    }
  }
  return Buffer.concat(parts)
}
