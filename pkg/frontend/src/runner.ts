// Subprocess bridge to the core CLI. Errors come back on stderr as a
// single "error: <message>" line; the message is surfaced verbatim.

import { spawnSync } from "node:child_process";

export interface RunOptions {
  /** Python interpreter with the core package installed. */
  python?: string;
  cwd?: string;
}

export class CoreError extends Error {
  constructor(message: string, public readonly exitCode: number) {
    super(message);
  }
}

export function resolvePython(opts?: RunOptions): string {
  return opts?.python ?? process.env.PACT_PYTHON ?? "python3";
}

export function runCli(args: string[], opts?: RunOptions): string {
  const proc = spawnSync(resolvePython(opts), ["-m", "pact", ...args], {
    encoding: "utf-8",
    cwd: opts?.cwd,
    maxBuffer: 1 << 26,
  });
  if (proc.error) {
    throw proc.error;
  }
  if (proc.status !== 0) {
    const line = (proc.stderr ?? "").split("\n").find((l) => l.startsWith("error: "));
    const message = line ? line.slice("error: ".length) : (proc.stderr || "cli failed").trim();
    throw new CoreError(message, proc.status ?? -1);
  }
  return proc.stdout;
}
