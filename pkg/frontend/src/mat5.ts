/**
 * Minimal MAT v5 reader: numeric N-D arrays only (the shape benchmark
 * cube/ground-truth files use). Handles both endiannesses, small data
 * elements, zlib-compressed elements, and integer-compressed numeric data.
 * Cell/struct/char/sparse/complex arrays are skipped or rejected.
 */

import { inflateSync } from 'node:zlib'

export class FormatError extends Error {}

// MAT data type tags
const miINT8 = 1
const miUINT8 = 2
const miINT16 = 3
const miUINT16 = 4
const miINT32 = 5
const miUINT32 = 6
const miSINGLE = 7
const miDOUBLE = 9
const miINT64 = 12
const miUINT64 = 13
const miMATRIX = 14
const miCOMPRESSED = 15

// mxCLASS codes for numeric arrays
const NUMERIC_CLASSES = new Set([6, 7, 8, 9, 10, 11, 12, 13])

export interface MatArray {
  name: string
  dims: number[]
  /** column-major values, widened to float64 */
  data: Float64Array
  classCode: number
}

interface Element {
  type: number
  bytes: Buffer
}

function readTag(buf: Buffer, offset: number, le: boolean): { type: number; nbytes: number; dataOffset: number; next: number } {
  const first = le ? buf.readUInt32LE(offset) : buf.readUInt32BE(offset)
  if ((first >>> 16) !== 0) {
    // small data element: 2-byte type, 2-byte length, data in the tag word
    const type = first & 0xffff
    const nbytes = first >>> 16
    return { type, nbytes, dataOffset: offset + 4, next: offset + 8 }
  }
  const nbytes = le ? buf.readUInt32LE(offset + 4) : buf.readUInt32BE(offset + 4)
  const padded = nbytes % 8 === 0 ? nbytes : nbytes + (8 - (nbytes % 8))
  return { type: first, nbytes, dataOffset: offset + 8, next: offset + 8 + padded }
}

function* elements(buf: Buffer, le: boolean, start: number): Generator<Element> {
  let offset = start
  while (offset + 8 <= buf.length) {
    const tag = readTag(buf, offset, le)
    if (tag.dataOffset + tag.nbytes > buf.length) {
      throw new FormatError(`element at byte ${offset} overruns the file`)
    }
    yield { type: tag.type, bytes: buf.subarray(tag.dataOffset, tag.dataOffset + tag.nbytes) }
    offset = tag.next
  }
}

function numericValues(type: number, bytes: Buffer, le: boolean): Float64Array {
  const widen = (read: (off: number) => number, size: number): Float64Array => {
    const n = Math.floor(bytes.length / size)
    const out = new Float64Array(n)
    for (let i = 0; i < n; i++) out[i] = read(i * size)
    return out
  }
  switch (type) {
    case miINT8: return widen((o) => bytes.readInt8(o), 1)
    case miUINT8: return widen((o) => bytes.readUInt8(o), 1)
    case miINT16: return widen((o) => (le ? bytes.readInt16LE(o) : bytes.readInt16BE(o)), 2)
    case miUINT16: return widen((o) => (le ? bytes.readUInt16LE(o) : bytes.readUInt16BE(o)), 2)
    case miINT32: return widen((o) => (le ? bytes.readInt32LE(o) : bytes.readInt32BE(o)), 4)
    case miUINT32: return widen((o) => (le ? bytes.readUInt32LE(o) : bytes.readUInt32BE(o)), 4)
    case miSINGLE: return widen((o) => (le ? bytes.readFloatLE(o) : bytes.readFloatBE(o)), 4)
    case miDOUBLE: return widen((o) => (le ? bytes.readDoubleLE(o) : bytes.readDoubleBE(o)), 8)
    case miINT64: return widen((o) => Number(le ? bytes.readBigInt64LE(o) : bytes.readBigInt64BE(o)), 8)
    case miUINT64: return widen((o) => Number(le ? bytes.readBigUInt64LE(o) : bytes.readBigUInt64BE(o)), 8)
    default:
      throw new FormatError(`unsupported numeric storage type ${type}`)
  }
}

function parseMatrix(bytes: Buffer, le: boolean): MatArray | null {
  const it = elements(bytes, le, 0)
  const flagsEl = it.next()
  const dimsEl = it.next()
  const nameEl = it.next()
  if (flagsEl.done || dimsEl.done || nameEl.done) {
    throw new FormatError('truncated miMATRIX element')
  }
  const flagsWord = le ? flagsEl.value.bytes.readUInt32LE(0) : flagsEl.value.bytes.readUInt32BE(0)
  const classCode = flagsWord & 0xff
  const complex = (flagsWord & 0x0800) !== 0
  const name = nameEl.value.bytes.toString('latin1')
  if (!NUMERIC_CLASSES.has(classCode)) {
    return null // cell/struct/char/sparse: not our concern
  }
  if (complex) {
    throw new FormatError(`array "${name}" is complex; expected real data`)
  }
  const dims: number[] = []
  for (let i = 0; i + 4 <= dimsEl.value.bytes.length; i += 4) {
    dims.push(le ? dimsEl.value.bytes.readInt32LE(i) : dimsEl.value.bytes.readInt32BE(i))
  }
  const dataEl = it.next()
  if (dataEl.done) {
    throw new FormatError(`array "${name}" has no data element`)
  }
  const data = numericValues(dataEl.value.type, dataEl.value.bytes, le)
  const count = dims.reduce((a, b) => a * b, 1)
  if (data.length !== count) {
    throw new FormatError(
      `array "${name}": ${data.length} values for dims [${dims.join('x')}]`)
  }
  return { name, dims, data, classCode }
}

/** Parse every numeric array in a MAT v5 buffer. */
export function parseMat(buf: Buffer): MatArray[] {
  if (buf.length < 128) {
    throw new FormatError('file shorter than the 128-byte MAT header')
  }
  const version = buf.readUInt16LE(124)
  const endian = buf.toString('latin1', 126, 128)
  let le: boolean
  if (endian === 'IM') le = true
  else if (endian === 'MI') le = false
  else throw new FormatError(`bad endian indicator ${JSON.stringify(endian)}`)
  if ((le ? version : buf.readUInt16BE(124)) !== 0x0100) {
    throw new FormatError('not a MAT v5 file (this tool does not read v7.3/HDF5)')
  }

  const out: MatArray[] = []
  for (const el of elements(buf, le, 128)) {
    let payload = el
    if (el.type === miCOMPRESSED) {
      const inflated = inflateSync(el.bytes)
      const tag = readTag(inflated, 0, le)
      payload = { type: tag.type, bytes: inflated.subarray(tag.dataOffset, tag.dataOffset + tag.nbytes) }
    }
    if (payload.type !== miMATRIX) continue
    const arr = parseMatrix(payload.bytes, le)
    if (arr) out.push(arr)
  }
  return out
}
