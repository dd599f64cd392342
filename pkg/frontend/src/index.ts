// In-memory bindings for the token-reduction core.
//
// Arrays cross the boundary as { data: Float32Array, shape } views: inputs
// are serialized to the shared binary tensor format in a temporary
// directory, the core CLI runs on them, and its artifacts are decoded
// back. Outputs are therefore bit-identical to invoking the CLI directly
// on the same data. No state is kept between calls.

import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { decodeTensor, encodeTensor, TensorView } from "./format.js";
import { CoreError, RunOptions, runCli } from "./runner.js";

export type { TensorView } from "./format.js";
export { FormatError, decodeTensor, encodeTensor } from "./format.js";
export type { RunOptions } from "./runner.js";
export { CoreError } from "./runner.js";

export interface ReduceConfig {
  d_c?: number;
  lambda?: number;
  alpha?: number;
  d_n?: number;
  metric?: "cosine" | "euclidean";
  rope?: { enabled?: boolean; base?: number };
  position_mode?: "center" | "mean";
  seed?: number;
  threads?: number;
}

export interface ReduceResult {
  mergedHidden: TensorView;
  positionIds: number[];
  weights: number[];
  report: Record<string, unknown>;
  /** Raw artifact bytes, byte-identical to the CLI's output files. */
  raw: { mergedHidden: Buffer; positionIds: Buffer; weights: Buffer };
}

export interface ClusterParams {
  algo?: "dbdpc" | "dpc" | "kmeans";
  d_c?: number;
  d_n?: number;
  metric?: "cosine" | "euclidean";
  dpc_threshold?: number;
  density?: "gaussian" | "cutoff-count";
  k?: number;
  max_iters?: number;
  seed?: number;
  threads?: number;
}

export interface ClusterResult {
  centers: number[];
  members: Record<string, number[]>;
  labels: number[];
  nClusters: number;
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "pact-node-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function configFlags(config: ReduceConfig): string[] {
  const flags: string[] = [];
  if (config.d_c !== undefined) flags.push("--dc", String(config.d_c));
  if (config.lambda !== undefined) flags.push("--lambda", String(config.lambda));
  if (config.alpha !== undefined) flags.push("--alpha", String(config.alpha));
  if (config.d_n !== undefined) flags.push("--dn", String(config.d_n));
  if (config.metric !== undefined) flags.push("--metric", config.metric);
  if (config.rope?.enabled === false) flags.push("--no-rope");
  if (config.rope?.base !== undefined) flags.push("--rope-base", String(config.rope.base));
  if (config.position_mode !== undefined) flags.push("--position-mode", config.position_mode);
  if (config.seed !== undefined) flags.push("--seed", String(config.seed));
  if (config.threads !== undefined) flags.push("--threads", String(config.threads));
  return flags;
}

/** Run the full reduction on in-memory tensors. */
export function reduce(
  hidden: TensorView,
  keys: TensorView,
  queries: TensorView,
  positionIds: number[] | Int32Array,
  config: ReduceConfig = {},
  opts?: RunOptions
): ReduceResult {
  return withTempDir((dir) => {
    const pos = Float32Array.from(positionIds);
    writeFileSync(join(dir, "hidden.pact"), encodeTensor(hidden));
    writeFileSync(join(dir, "keys.pact"), encodeTensor(keys));
    writeFileSync(join(dir, "queries.pact"), encodeTensor(queries));
    writeFileSync(
      join(dir, "pos.pact"),
      encodeTensor({ name: "position_ids", shape: [pos.length], data: pos })
    );
    const outDir = join(dir, "out");
    runCli(
      [
        "reduce",
        "--hidden", join(dir, "hidden.pact"),
        "--keys", join(dir, "keys.pact"),
        "--queries", join(dir, "queries.pact"),
        "--pos", join(dir, "pos.pact"),
        ...configFlags(config),
        "--out", outDir,
      ],
      opts
    );
    const rawMerged = readFileSync(join(outDir, "merged_hidden.pact"));
    const rawPos = readFileSync(join(outDir, "position_ids.pact"));
    const rawWeights = readFileSync(join(outDir, "weights.pact"));
    const report = JSON.parse(readFileSync(join(outDir, "report.json"), "utf-8"));
    return {
      mergedHidden: decodeTensor(rawMerged),
      positionIds: Array.from(decodeTensor(rawPos).data),
      weights: Array.from(decodeTensor(rawWeights).data),
      report,
      raw: { mergedHidden: rawMerged, positionIds: rawPos, weights: rawWeights },
    };
  });
}

/** Cluster in-memory vectors with one of the core's clusterers. */
export function cluster(
  vectors: TensorView,
  params: ClusterParams = {},
  opts?: RunOptions
): ClusterResult {
  return withTempDir((dir) => {
    writeFileSync(join(dir, "vectors.pact"), encodeTensor(vectors));
    const flags: string[] = ["--algo", params.algo ?? "dbdpc"];
    if (params.d_c !== undefined) flags.push("--dc", String(params.d_c));
    if (params.d_n !== undefined) flags.push("--dn", String(params.d_n));
    if (params.metric !== undefined) flags.push("--metric", params.metric);
    if (params.dpc_threshold !== undefined)
      flags.push("--dpc-threshold", String(params.dpc_threshold));
    if (params.density !== undefined) flags.push("--density", params.density);
    if (params.k !== undefined) flags.push("--k", String(params.k));
    if (params.max_iters !== undefined) flags.push("--max-iters", String(params.max_iters));
    if (params.seed !== undefined) flags.push("--seed", String(params.seed));
    if (params.threads !== undefined) flags.push("--threads", String(params.threads));
    const outDir = join(dir, "out");
    runCli(["cluster", "--vectors", join(dir, "vectors.pact"), ...flags, "--out", outDir], opts);
    const assignments = JSON.parse(
      readFileSync(join(outDir, "assignments.json"), "utf-8")
    );
    return {
      centers: assignments.centers,
      members: assignments.members,
      labels: assignments.labels,
      nClusters: assignments.n_clusters,
    };
  });
}
