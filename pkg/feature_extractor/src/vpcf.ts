/**
 * VPCF binary feature file: magic "VPCF", then three little-endian u32s
 * (format version = 1, row count, dimension), then row-major float32 data.
 * Must stay byte-compatible with the partitioning pipeline's loader.
 */

const MAGIC = "VPCF";
const VERSION = 1;
const HEADER_BYTES = 16;

export class VpcfError extends Error {}

export function encodeVpcf(rows: Float32Array[], dim: number): Buffer {
  if (dim < 1) throw new VpcfError(`dimension must be >= 1, got ${dim}`);
  const header = Buffer.alloc(HEADER_BYTES);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt32LE(VERSION, 4);
  header.writeUInt32LE(rows.length, 8);
  header.writeUInt32LE(dim, 12);

  const payload = Buffer.alloc(rows.length * dim * 4);
  rows.forEach((row, i) => {
    if (row.length !== dim) {
      throw new VpcfError(`row ${i} has ${row.length} values, expected ${dim}`);
    }
    for (let j = 0; j < dim; j++) {
      const v = row[j];
      if (!Number.isFinite(v)) {
        throw new VpcfError(`non-finite value at row ${i}, column ${j}`);
      }
      payload.writeFloatLE(v, (i * dim + j) * 4);
    }
  });
  return Buffer.concat([header, payload]);
}

export function decodeVpcf(data: Buffer): { nRows: number; dim: number; rows: Float32Array[] } {
  if (data.length < HEADER_BYTES) {
    throw new VpcfError(`truncated header: ${data.length} bytes`);
  }
  if (data.toString("ascii", 0, 4) !== MAGIC) {
    throw new VpcfError(`bad magic: ${JSON.stringify(data.toString("ascii", 0, 4))}`);
  }
  const version = data.readUInt32LE(4);
  if (version !== VERSION) throw new VpcfError(`unsupported format version ${version}`);
  const nRows = data.readUInt32LE(8);
  const dim = data.readUInt32LE(12);
  const expected = HEADER_BYTES + nRows * dim * 4;
  if (data.length !== expected) {
    throw new VpcfError(`payload size mismatch: have ${data.length} bytes, expected ${expected}`);
  }
  const rows: Float32Array[] = [];
  for (let i = 0; i < nRows; i++) {
    const row = new Float32Array(dim);
    for (let j = 0; j < dim; j++) {
      row[j] = data.readFloatLE(HEADER_BYTES + (i * dim + j) * 4);
    }
    rows.push(row);
  }
  return { nRows, dim, rows };
}
