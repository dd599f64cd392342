// Binary tensor format shared with the Python core.
//
// Layout (little-endian): 4-byte magic "PACT", 1-byte version (1), uint32
// header length, UTF-8 JSON header {"name","dtype":"f32","shape":[...]},
// then the raw float32 payload in row-major order. Encoding here is
// byte-for-byte identical to the core's writer (compact JSON, same key
// order), so round trips across the language boundary are bit-exact.

const MAGIC = Buffer.from("PACT", "ascii");
const FORMAT_VERSION = 1;

export interface TensorView {
  name: string;
  shape: number[];
  /** Row-major float32 values; length must equal the shape product. */
  data: Float32Array;
}

export class FormatError extends Error {}

function shapeSize(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function encodeTensor(tensor: TensorView): Buffer {
  const { name, shape, data } = tensor;
  if (shape.some((s) => !Number.isInteger(s) || s < 0)) {
    throw new FormatError(`invalid shape: ${JSON.stringify(shape)}`);
  }
  if (shapeSize(shape) !== data.length) {
    throw new FormatError(
      `shape ${JSON.stringify(shape)} does not match ${data.length} values`
    );
  }
  const header = Buffer.from(
    JSON.stringify({ name, dtype: "f32", shape }),
    "utf-8"
  );
  const prelude = Buffer.alloc(5 + 4);
  MAGIC.copy(prelude, 0);
  prelude.writeUInt8(FORMAT_VERSION, 4);
  prelude.writeUInt32LE(header.length, 5);
  const payload = Buffer.alloc(data.length * 4);
  for (let i = 0; i < data.length; i++) {
    payload.writeFloatLE(data[i], i * 4);
  }
  return Buffer.concat([prelude, header, payload]);
}

export function decodeTensor(blob: Buffer): TensorView {
  if (blob.length < 5 || !blob.subarray(0, 4).equals(MAGIC) || blob[4] !== FORMAT_VERSION) {
    throw new FormatError("unrecognized format");
  }
  if (blob.length < 9) {
    throw new FormatError("corrupt header");
  }
  const headerLen = blob.readUInt32LE(5);
  if (9 + headerLen > blob.length) {
    throw new FormatError("corrupt header");
  }
  let header: { name: string; dtype: string; shape: number[] };
  try {
    header = JSON.parse(blob.subarray(9, 9 + headerLen).toString("utf-8"));
  } catch {
    throw new FormatError("corrupt header");
  }
  if (header.dtype !== "f32" || !Array.isArray(header.shape)) {
    throw new FormatError("corrupt header");
  }
  const payload = blob.subarray(9 + headerLen);
  if (payload.length !== shapeSize(header.shape) * 4) {
    throw new FormatError("corrupt header");
  }
  const data = new Float32Array(payload.length / 4);
  for (let i = 0; i < data.length; i++) {
    data[i] = payload.readFloatLE(i * 4);
  }
  for (const v of data) {
    if (!Number.isFinite(v)) {
      throw new FormatError("non-finite payload");
    }
  }
  return { name: header.name, shape: header.shape, data };
}
