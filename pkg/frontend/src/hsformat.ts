/**
 * Writers (and re-readers, for verification) of the toolkit raster formats:
 * one compact JSON header line + a raw little-endian payload. Byte layout
 * must match the primary toolkit exactly; key order is fixed.
 */

export class HsFormatError extends Error {}

export function encodeCube(height: number, width: number, bands: number,
                           values: Float32Array, name?: string): Buffer {
  if (values.length !== height * width * bands) {
    throw new HsFormatError(
      `cube payload has ${values.length} values, expected ${height * width * bands}`)
  }
  const header: Record<string, unknown> = {
    magic: 'HSC1', height, width, bands, dtype: 'f32le',
  }
  if (name !== undefined) header.name = name
  const head = Buffer.from(JSON.stringify(header) + '\n', 'utf-8')
  const payload = Buffer.alloc(values.length * 4)
  for (let i = 0; i < values.length; i++) payload.writeFloatLE(values[i], i * 4)
  return Buffer.concat([head, payload])
}

export function encodeLabels(height: number, width: number, numClasses: number,
                             values: Uint16Array): Buffer {
  if (values.length !== height * width) {
    throw new HsFormatError(
      `label payload has ${values.length} values, expected ${height * width}`)
  }
  const head = Buffer.from(
    JSON.stringify({ magic: 'HSL1', height, width, num_classes: numClasses, dtype: 'u16le' }) + '\n',
    'utf-8')
  const payload = Buffer.alloc(values.length * 2)
  for (let i = 0; i < values.length; i++) payload.writeUInt16LE(values[i], i * 2)
  return Buffer.concat([head, payload])
}

export interface DecodedRaster {
  header: Record<string, unknown>
  payload: Buffer
}

export function decode(buf: Buffer, magic: string): DecodedRaster {
  const nl = buf.indexOf(0x0a)
  if (nl < 0) throw new HsFormatError('missing header line')
  const header = JSON.parse(buf.toString('utf-8', 0, nl)) as Record<string, unknown>
  if (header.magic !== magic) {
    throw new HsFormatError(`expected magic ${magic}, got ${String(header.magic)}`)
  }
  return { header, payload: buf.subarray(nl + 1) }
}

export function readCubeValues(buf: Buffer): { height: number; width: number; bands: number; values: Float32Array } {
  const { header, payload } = decode(buf, 'HSC1')
  const height = header.height as number
  const width = header.width as number
  const bands = header.bands as number
  const n = height * width * bands
  if (payload.length !== n * 4) {
    throw new HsFormatError(`cube payload is ${payload.length} bytes, expected ${n * 4}`)
  }
  const values = new Float32Array(n)
  for (let i = 0; i < n; i++) values[i] = payload.readFloatLE(i * 4)
  return { height, width, bands, values }
}

export function readLabelValues(buf: Buffer): { height: number; width: number; numClasses: number; values: Uint16Array } {
  const { header, payload } = decode(buf, 'HSL1')
  const height = header.height as number
  const width = header.width as number
  const n = height * width
  if (payload.length !== n * 2) {
    throw new HsFormatError(`label payload is ${payload.length} bytes, expected ${n * 2}`)
  }
  const values = new Uint16Array(n)
  for (let i = 0; i < n; i++) values[i] = payload.readUInt16LE(i * 2)
  return { height, width, numClasses: header.num_classes as number, values }
}
